#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "ajb/error.hpp"
#include "ajb/model.hpp"
#include "ajb/random.hpp"

namespace ajb {

inline double log_sum_exp(std::span<const double> row) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : row) peak = std::max(peak, v);
  double sum = 0.0;
  for (double v : row) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

inline std::vector<double> softmax(std::span<const double> row) {
  const double lse = log_sum_exp(row);
  std::vector<double> p(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) p[i] = std::exp(row[i] - lse);
  return p;
}

// Ties go to the lowest index.
inline TokenId argmax(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return static_cast<TokenId>(best);
}

inline void check_sampling_params(double temperature, std::size_t top_k, std::size_t vocab) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ParameterError("sampling temperature must be positive");
  }
  if (top_k < 1 || top_k > vocab) {
    throw ParameterError("top_k must lie in [1, " + std::to_string(vocab) + "], got " +
                         std::to_string(top_k));
  }
}

// Keep the top_k scores (ties by lower index), apply temperature, draw one.
inline TokenId sample_top_k(std::span<const double> row, double temperature,
                            std::size_t top_k, Rng& rng) {
  check_sampling_params(temperature, top_k, row.size());
  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top_k),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      return row[a] > row[b] || (row[a] == row[b] && a < b);
                    });
  order.resize(top_k);

  std::vector<double> scaled(top_k);
  for (std::size_t i = 0; i < top_k; ++i) scaled[i] = row[order[i]] / temperature;
  const std::vector<double> probs = softmax(scaled);

  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < top_k; ++i) {
    cumulative += probs[i];
    if (u < cumulative) return static_cast<TokenId>(order[i]);
  }
  return static_cast<TokenId>(order[top_k - 1]);
}

inline TokenSequence decode_logits(const Logits& logits, const DecodeMode& mode) {
  TokenSequence out;
  out.reserve(logits.steps);
  if (mode.is_greedy()) {
    for (std::size_t s = 0; s < logits.steps; ++s) out.push_back(argmax(logits.row(s)));
    return out;
  }
  check_sampling_params(mode.temperature, mode.top_k, logits.vocab);
  Rng rng(mode.seed);
  for (std::size_t s = 0; s < logits.steps; ++s) {
    out.push_back(sample_top_k(logits.row(s), mode.temperature, mode.top_k, rng));
  }
  return out;
}

}  // namespace ajb
