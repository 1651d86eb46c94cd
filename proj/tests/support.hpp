#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ajb/random.hpp"
#include "ajb/waveform.hpp"

namespace ajb::test {

inline std::vector<double> random_values(Rng& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline Waveform random_wave(Rng& rng, std::size_t n, double peak = 0.9) {
  return Waveform(random_values(rng, n, -peak, peak), kDefaultSampleRate);
}

// Central difference of f along direction d at x.
inline double directional_fd(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x, std::span<const double> d,
                             double h = 1e-5) {
  std::vector<double> plus(x.begin(), x.end()), minus(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    plus[i] += h * d[i];
    minus[i] -= h * d[i];
  }
  return (f(plus) - f(minus)) / (2.0 * h);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("ajb_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace ajb::test
