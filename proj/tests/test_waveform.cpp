#include <gtest/gtest.h>

#include "ajb/error.hpp"
#include "ajb/rir.hpp"
#include "ajb/waveform.hpp"
#include "support.hpp"

using namespace ajb;
using namespace ajb::test;

TEST(Waveform, RejectsOutOfRangeAndNonFinite) {
  EXPECT_THROW(Waveform({0.5, 1.5}, 16000), NumericError);
  EXPECT_THROW(Waveform({std::nan("")}, 16000), NumericError);
  EXPECT_THROW(Waveform({0.0}, 0), ParameterError);
  EXPECT_NO_THROW(Waveform({-1.0, 1.0}, 16000));
}

TEST(PadTo, ZeroFillsTail) {
  const Waveform w({0.1, -0.2, 0.3}, 16000);
  const Waveform p = pad_to(w, 6);
  ASSERT_EQ(p.size(), 6u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(p[i], w[i]);
  for (std::size_t i = 3; i < 6; ++i) EXPECT_EQ(p[i], 0.0);
  EXPECT_EQ(pad_to(w, 3), w);
  EXPECT_THROW(pad_to(w, 2), LengthError);
}

TEST(ClampValid, ClampsAndRejectsNaN) {
  const std::vector<double> v{-2.0, -0.5, 0.0, 0.5, 3.0};
  const Waveform w = clamp_valid(v);
  EXPECT_EQ(w.data(), (std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0}));
  const std::vector<double> inside{0.25, -0.75};
  EXPECT_EQ(clamp_valid(inside).data(), inside);
  const std::vector<double> bad{0.0, std::nan("")};
  EXPECT_THROW(clamp_valid(bad), NumericError);
}

TEST(ConcatWithDelay, InsertsSilence) {
  const Waveform a({0.1, 0.2}, 16000), b({0.3}, 16000);
  const Waveform c = concat_with_delay(a, b, 1.0);  // 16 samples
  ASSERT_EQ(c.size(), 2u + 16u + 1u);
  EXPECT_EQ(c[0], 0.1);
  EXPECT_EQ(c[17], 0.0);
  EXPECT_EQ(c[18], 0.3);
  EXPECT_EQ(concat_with_delay(a, b, 0.0).size(), 3u);
  EXPECT_THROW(concat_with_delay(a, Waveform({0.0}, 8000), 0.0), FormatError);
  EXPECT_THROW(concat_with_delay(a, b, -1.0), ParameterError);
}

TEST(Speed, UnitRatioIsBitIdentical) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Waveform w = random_wave(rng, 50 + rng.below(500));
    EXPECT_EQ(speed(w, 1.0), w);
  }
}

TEST(Speed, OutputLengthAndSamples) {
  const Waveform w({0.0, 0.2, 0.4, 0.6, 0.8}, 16000);
  const Waveform fast = speed(w, 2.0);
  EXPECT_EQ(fast.data(), (std::vector<double>{0.0, 0.4}));
  const Waveform half = speed(w, 0.5);
  ASSERT_EQ(half.size(), 10u);
  EXPECT_DOUBLE_EQ(half[1], 0.1);
  EXPECT_DOUBLE_EQ(half[9], 0.8);  // reads past the end clamp to the last sample
  EXPECT_THROW(speed(w, 0.0), ParameterError);
  EXPECT_THROW(speed(w, -1.0), ParameterError);
}

TEST(Speed, BackwardIsAdjointOfApply) {
  Rng rng(5);
  for (double alpha : {0.7, 1.0, 1.3, 2.0, 2.5}) {
    const std::size_t n = 200;
    const SpeedTransform t(n, alpha);
    const auto x = random_values(rng, n);
    const auto g = random_values(rng, t.output_length());
    // <S x, g> == <x, S^T g>
    EXPECT_NEAR(dot(t.apply(x), g), dot(x, t.backward(g)), 1e-12);
  }
}

TEST(Speed, JacobianMatchesFiniteDifferences) {
  Rng rng(8);
  for (double alpha : {0.8, 1.5, 2.0}) {
    const std::size_t n = 120;
    const SpeedTransform t(n, alpha);
    const auto x = random_values(rng, n);
    const auto d = random_values(rng, n);
    const auto w = random_values(rng, t.output_length());
    auto f = [&](std::span<const double> v) { return dot(t.apply(v), w); };
    const double analytic = dot(t.backward(w), d);
    EXPECT_LE(rel_error(analytic, directional_fd(f, x, d)), 1e-5);
  }
}

namespace {

std::vector<double> brute_convolve(const std::vector<double>& x, const std::vector<double>& r) {
  std::vector<double> y(x.size() + r.size() - 1, 0.0);
  for (std::size_t n = 0; n < y.size(); ++n) {
    long double acc = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k <= n && n - k < x.size()) acc += static_cast<long double>(r[k]) * x[n - k];
    }
    y[n] = static_cast<double>(acc);
  }
  return y;
}

}  // namespace

TEST(Convolve, MatchesDirectSummation) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_values(rng, 1 + rng.below(300));
    auto r = random_values(rng, 1 + rng.below(64));
    for (double& t : r)
      if (rng.uniform() < 0.3) t = 0.0;
    const auto got = convolve_full(x, r);
    const auto want = brute_convolve(x, r);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], want[i], 1e-9);
  }
}

TEST(Convolve, ImpulseIsIdentity) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Waveform w = random_wave(rng, 1 + rng.below(400), 1.0);
    EXPECT_EQ(convolve(w, Rir::impulse()), w);
  }
}

TEST(Convolve, OutputIsClampedAndFullLength) {
  const Waveform w({0.9, 0.9, 0.9}, 16000);
  const Rir r({1.0, 1.0});
  const Waveform y = convolve(w, r);
  EXPECT_EQ(y.data(), (std::vector<double>{0.9, 1.0, 1.0, 0.9}));
  EXPECT_THROW(Rir(std::vector<double>{}), ParameterError);
}

TEST(Convolve, BackwardIsAdjoint) {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_values(rng, 50 + rng.below(100));
    const auto r = random_values(rng, 1 + rng.below(30));
    const auto g = random_values(rng, x.size() + r.size() - 1);
    EXPECT_NEAR(dot(convolve_full(x, r), g), dot(x, convolve_full_backward(g, r, x.size())),
                1e-10);
  }
}

TEST(BoxReparam, StaysInsideBudgetAndValid) {
  Rng rng(21);
  const Waveform x = random_wave(rng, 500, 0.95);
  std::vector<double> z(500);
  for (double& v : z) v = 5.0 * rng.normal();
  for (double eps : {0.0, 0.02, 0.5, 1.0}) {
    const BoxReparam b = box_reparam_forward(z, x, eps);
    for (std::size_t i = 0; i < z.size(); ++i) {
      EXPECT_LT(std::abs(b.tanh_z[i]), 1.0 + 1e-15);
      EXPECT_LE(std::abs(b.output[i]), 1.0);
      if (std::abs(b.pre_clamp[i]) <= 1.0) {
        EXPECT_LE(std::abs(b.output[i] - x[i]), eps + 1e-12);
      }
    }
  }
  EXPECT_EQ(box_reparam(z, x, 0.0), x);
  EXPECT_THROW(box_reparam(z, x, 1.5), ParameterError);
  EXPECT_THROW(box_reparam(std::vector<double>(3, 0.0), x, 0.5), LengthError);
}

TEST(BoxReparam, JacobianMatchesFiniteDifferences) {
  Rng rng(22);
  const Waveform x = random_wave(rng, 300, 0.3);
  const auto z = random_values(rng, 300, -1.0, 1.0);
  const auto d = random_values(rng, 300);
  const auto w = random_values(rng, 300);
  const double eps = 0.5;  // |x| + eps < 1: no clamping
  auto f = [&](std::span<const double> v) {
    return dot(box_reparam(v, x, eps).samples(), w);
  };
  const auto g = box_reparam_forward(z, x, eps).backward(w, eps);
  EXPECT_LE(rel_error(dot(g, d), directional_fd(f, z, d)), 1e-5);
}

TEST(BoxReparam, ClampedSamplesGetZeroGradient) {
  const Waveform x({0.9, -0.9, 0.0}, 16000);
  const std::vector<double> z{3.0, -3.0, 0.1};
  const auto b = box_reparam_forward(z, x, 1.0);
  const auto g = b.backward(std::vector<double>{1.0, 1.0, 1.0}, 1.0);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[1], 0.0);
  EXPECT_GT(g[2], 0.0);
}
