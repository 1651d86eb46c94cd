#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ajb/error.hpp"

namespace ajb {

inline constexpr int kDefaultSampleRate = 16000;

// Mono audio with every sample in [-1, 1]. Immutable after construction.
class Waveform {
 public:
  Waveform() = default;

  Waveform(std::vector<double> samples, int sample_rate)
      : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (sample_rate_ <= 0) {
      throw ParameterError("sample rate must be positive, got " +
                           std::to_string(sample_rate_));
    }
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const double s = samples_[i];
      if (!std::isfinite(s)) {
        throw NumericError("non-finite sample at index " + std::to_string(i));
      }
      if (s < -1.0 || s > 1.0) {
        throw NumericError("sample " + std::to_string(i) + " = " +
                           std::to_string(s) + " outside [-1, 1]");
      }
    }
  }

  static Waveform zeros(std::size_t n, int sample_rate = kDefaultSampleRate) {
    return Waveform(std::vector<double>(n, 0.0), sample_rate);
  }

  std::span<const double> samples() const { return samples_; }
  const std::vector<double>& data() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  int sample_rate() const { return sample_rate_; }
  double operator[](std::size_t i) const { return samples_[i]; }

  double seconds() const {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  friend bool operator==(const Waveform&, const Waveform&) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = kDefaultSampleRate;
};

// Additive perturbation. For the strong adversary the values are tanh(z) and
// lie in (-1, 1); for the weak adversary x + values is valid audio.
struct Perturbation {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

inline Waveform pad_to(const Waveform& w, std::size_t length) {
  if (length < w.size()) {
    throw LengthError("pad_to: target length " + std::to_string(length) +
                      " is shorter than the waveform (" +
                      std::to_string(w.size()) + ")");
  }
  std::vector<double> out(length, 0.0);
  std::copy(w.samples().begin(), w.samples().end(), out.begin());
  return Waveform(std::move(out), w.sample_rate());
}

inline std::vector<double> clamp_samples(std::span<const double> values) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError("clamp_valid: non-finite value at index " +
                         std::to_string(i));
    }
    out[i] = std::clamp(values[i], -1.0, 1.0);
  }
  return out;
}

inline Waveform clamp_valid(std::span<const double> values,
                            int sample_rate = kDefaultSampleRate) {
  return Waveform(clamp_samples(values), sample_rate);
}

// Straight-clamp subgradient: passes where the pre-clamp value is inside the
// box (boundary included), zero outside.
inline void mask_clamped(std::span<double> grad, std::span<const double> pre) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (pre[i] > 1.0 || pre[i] < -1.0) grad[i] = 0.0;
  }
}

inline std::size_t delay_samples(double delay_ms, int sample_rate) {
  if (!(delay_ms >= 0.0)) {
    throw ParameterError("delay must be non-negative, got " +
                         std::to_string(delay_ms));
  }
  return static_cast<std::size_t>(std::llround(delay_ms * sample_rate / 1000.0));
}

// xu || silence(gap) || b
inline Waveform concat_with_gap(const Waveform& xu, const Waveform& b,
                                std::size_t gap) {
  if (xu.sample_rate() != b.sample_rate()) {
    throw FormatError("concat: sample rates differ (" +
                      std::to_string(xu.sample_rate()) + " vs " +
                      std::to_string(b.sample_rate()) + ")");
  }
  std::vector<double> out;
  out.reserve(xu.size() + gap + b.size());
  out.insert(out.end(), xu.samples().begin(), xu.samples().end());
  out.insert(out.end(), gap, 0.0);
  out.insert(out.end(), b.samples().begin(), b.samples().end());
  return Waveform(std::move(out), b.sample_rate());
}

inline Waveform concat_with_delay(const Waveform& xu, const Waveform& b,
                                  double delay_ms) {
  if (xu.sample_rate() != b.sample_rate()) {
    throw FormatError("concat: sample rates differ (" +
                      std::to_string(xu.sample_rate()) + " vs " +
                      std::to_string(b.sample_rate()) + ")");
  }
  return concat_with_gap(xu, b, delay_samples(delay_ms, b.sample_rate()));
}

// Linear-interpolation resampler: output[i] reads the input at position
// i * alpha. Output length is floor(n / alpha).
class SpeedTransform {
 public:
  SpeedTransform(std::size_t input_length, double alpha)
      : input_length_(input_length), alpha_(alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw ParameterError("speed ratio must be positive, got " +
                           std::to_string(alpha));
    }
    output_length_ = static_cast<std::size_t>(
        std::floor(static_cast<double>(input_length) / alpha));
    // floor(n / alpha) * alpha may round up to n; keep every read in range.
    while (output_length_ > 0 &&
           static_cast<double>(output_length_ - 1) * alpha >=
               static_cast<double>(input_length)) {
      --output_length_;
    }
  }

  std::size_t input_length() const { return input_length_; }
  std::size_t output_length() const { return output_length_; }

  std::vector<double> apply(std::span<const double> in) const {
    check_input(in.size());
    std::vector<double> out(output_length_);
    for (std::size_t i = 0; i < output_length_; ++i) {
      const auto [j, frac] = position(i);
      if (frac == 0.0) {
        out[i] = in[j];
      } else {
        const std::size_t k = std::min(j + 1, input_length_ - 1);
        out[i] = (1.0 - frac) * in[j] + frac * in[k];
      }
    }
    return out;
  }

  // Vector-Jacobian product: gradient w.r.t. the input given the gradient
  // w.r.t. the output.
  std::vector<double> backward(std::span<const double> grad_out) const {
    if (grad_out.size() != output_length_) {
      throw LengthError("speed backward: gradient length mismatch");
    }
    std::vector<double> grad_in(input_length_, 0.0);
    for (std::size_t i = 0; i < output_length_; ++i) {
      const auto [j, frac] = position(i);
      if (frac == 0.0) {
        grad_in[j] += grad_out[i];
      } else {
        const std::size_t k = std::min(j + 1, input_length_ - 1);
        grad_in[j] += (1.0 - frac) * grad_out[i];
        grad_in[k] += frac * grad_out[i];
      }
    }
    return grad_in;
  }

 private:
  std::pair<std::size_t, double> position(std::size_t i) const {
    const double p = static_cast<double>(i) * alpha_;
    const double whole = std::floor(p);
    return {static_cast<std::size_t>(whole), p - whole};
  }

  void check_input(std::size_t n) const {
    if (n != input_length_) throw LengthError("speed: input length mismatch");
  }

  std::size_t input_length_;
  double alpha_;
  std::size_t output_length_ = 0;
};

inline Waveform speed(const Waveform& w, double alpha) {
  const SpeedTransform transform(w.size(), alpha);
  return Waveform(transform.apply(w.samples()), w.sample_rate());
}

// Full linear convolution without clamping. Zero taps are skipped, which is
// exact and makes sparse image-source responses cheap.
inline std::vector<double> convolve_full(std::span<const double> signal,
                                         std::span<const double> taps) {
  if (taps.empty()) throw ParameterError("convolve: empty impulse response");
  if (signal.empty()) return {};
  std::vector<double> out(signal.size() + taps.size() - 1, 0.0);
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const double t = taps[k];
    if (t == 0.0) continue;
    double* dst = out.data() + k;
    for (std::size_t n = 0; n < signal.size(); ++n) dst[n] += t * signal[n];
  }
  return out;
}

// Adjoint of convolve_full: correlates the output gradient with the taps.
inline std::vector<double> convolve_full_backward(
    std::span<const double> grad_out, std::span<const double> taps,
    std::size_t signal_length) {
  if (grad_out.size() != signal_length + taps.size() - 1) {
    throw LengthError("convolve backward: gradient length mismatch");
  }
  std::vector<double> grad_in(signal_length, 0.0);
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const double t = taps[k];
    if (t == 0.0) continue;
    const double* src = grad_out.data() + k;
    for (std::size_t n = 0; n < signal_length; ++n) grad_in[n] += t * src[n];
  }
  return grad_in;
}

// b = clamp(x + epsilon * tanh(z)). Keeps the pre-clamp values so the
// gradient can be masked.
struct BoxReparam {
  std::vector<double> tanh_z;
  std::vector<double> pre_clamp;
  Waveform output;

  // d b / d z applied to an upstream gradient.
  std::vector<double> backward(std::span<const double> grad_out,
                               double epsilon) const {
    std::vector<double> grad(grad_out.size());
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double inside =
          (pre_clamp[i] > 1.0 || pre_clamp[i] < -1.0) ? 0.0 : 1.0;
      grad[i] = inside * grad_out[i] * epsilon * (1.0 - tanh_z[i] * tanh_z[i]);
    }
    return grad;
  }
};

inline BoxReparam box_reparam_forward(std::span<const double> z,
                                      const Waveform& x, double epsilon) {
  if (z.size() != x.size()) {
    throw LengthError("box_reparam: z has length " + std::to_string(z.size()) +
                      ", carrier has " + std::to_string(x.size()));
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ParameterError("epsilon must lie in [0, 1], got " +
                         std::to_string(epsilon));
  }
  BoxReparam r;
  r.tanh_z.resize(z.size());
  r.pre_clamp.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    r.tanh_z[i] = std::tanh(z[i]);
    r.pre_clamp[i] = x[i] + epsilon * r.tanh_z[i];
  }
  r.output = clamp_valid(r.pre_clamp, x.sample_rate());
  return r;
}

inline Waveform box_reparam(std::span<const double> z, const Waveform& x,
                            double epsilon) {
  return box_reparam_forward(z, x, epsilon).output;
}

}  // namespace ajb
