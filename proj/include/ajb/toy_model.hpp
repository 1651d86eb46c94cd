#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ajb/error.hpp"
#include "ajb/model.hpp"
#include "ajb/random.hpp"
#include "ajb/sampling.hpp"
#include "ajb/wav_io.hpp"
#include "ajb/waveform.hpp"

namespace ajb {

struct ToyDims {
  std::size_t window = 256;
  std::size_t hop = 128;
  std::size_t features = 32;
  std::size_t hidden = 64;
  std::size_t positions = 16;
};

// Framed filterbank -> tanh features -> single tanh recurrent layer -> linear
// head. All matrices are row-major.
//
//   feat_t   = tanh(filterbank * frame_t)
//   hidden_t = tanh(input * feat_t + transition * hidden_{t-1} + hidden_bias)
//
// Frames are taken backwards from the end of the input. After the last frame
// the recurrence keeps running over the frames in reverse order to produce
// the response:
//
//   state_0  = hidden_{T-1}
//   state_j  = tanh(input * feat_{T-1-j} + transition * state_{j-1} + hidden_bias
//                   + position_{j-1})
//   logits_j = output * state_j + output_bias,   j < T
//
// position_{j-1} is zero past the `positions` learned rows.
struct ToyModelParams {
  ToyDims dims;
  int sample_rate = kDefaultSampleRate;
  Vocabulary vocab;
  std::vector<double> filterbank;   // features x window
  std::vector<double> input;        // hidden x features
  std::vector<double> transition;   // hidden x hidden
  std::vector<double> hidden_bias;  // hidden
  std::vector<double> position;     // positions x hidden
  std::vector<double> output;       // vocab x hidden
  std::vector<double> output_bias;  // vocab

  std::size_t vocab_size() const { return vocab.size(); }

  // Parameter blocks in checkpoint order.
  std::array<std::vector<double>*, 7> blocks() {
    return {&filterbank, &input, &transition, &hidden_bias, &position, &output, &output_bias};
  }
  std::array<const std::vector<double>*, 7> blocks() const {
    return {&filterbank, &input, &transition, &hidden_bias, &position, &output, &output_bias};
  }

  std::array<std::size_t, 7> block_sizes() const {
    const auto& d = dims;
    const std::size_t v = vocab.size();
    return {d.features * d.window, d.hidden * d.features, d.hidden * d.hidden,
            d.hidden, d.positions * d.hidden, v * d.hidden, v};
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t s : block_sizes()) n += s;
    return n;
  }

  void validate() const {
    if (dims.window == 0 || dims.hop == 0 || dims.features == 0 || dims.hidden == 0) {
      throw InputError("model dimensions must be positive");
    }
    if (vocab.size() == 0) throw InputError("model vocabulary is empty");
    if (sample_rate <= 0) throw InputError("model sample rate must be positive");
    const auto sizes = block_sizes();
    const auto bs = blocks();
    for (std::size_t i = 0; i < bs.size(); ++i) {
      if (bs[i]->size() != sizes[i]) {
        throw InputError("parameter block " + std::to_string(i) + " has " +
                         std::to_string(bs[i]->size()) + " values, expected " +
                         std::to_string(sizes[i]));
      }
      for (double v : *bs[i]) {
        if (!std::isfinite(v)) throw InputError("non-finite model parameter");
      }
    }
  }

  // Same shape, all zeros. Used as a gradient accumulator.
  ToyModelParams zeros_like() const {
    ToyModelParams z;
    z.dims = dims;
    z.sample_rate = sample_rate;
    z.vocab = vocab;
    auto dst = z.blocks();
    const auto sizes = block_sizes();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i]->assign(sizes[i], 0.0);
    return z;
  }

  // Gaussian(0, scale) weights, zero biases and position rows.
  static ToyModelParams initialize(std::uint64_t seed, Vocabulary vocab, ToyDims dims = {},
                                   double scale = 0.1,
                                   int sample_rate = kDefaultSampleRate) {
    ToyModelParams p;
    p.dims = dims;
    p.sample_rate = sample_rate;
    p.vocab = std::move(vocab);
    p = p.zeros_like();
    Rng rng(seed);
    for (auto* block : {&p.filterbank, &p.input, &p.transition, &p.output}) {
      for (double& v : *block) v = scale * rng.normal();
    }
    p.validate();
    return p;
  }

  friend bool operator==(const ToyModelParams& a, const ToyModelParams& b) {
    return a.dims.window == b.dims.window && a.dims.hop == b.dims.hop &&
           a.dims.features == b.dims.features && a.dims.hidden == b.dims.hidden &&
           a.dims.positions == b.dims.positions &&
           a.sample_rate == b.sample_rate && a.vocab == b.vocab &&
           a.filterbank == b.filterbank && a.input == b.input &&
           a.transition == b.transition && a.hidden_bias == b.hidden_bias && a.position == b.position &&
           a.output == b.output && a.output_bias == b.output_bias;
  }
};

class ToyModel : public AudioModel {
 public:
  explicit ToyModel(ToyModelParams params) : p_(std::move(params)) { p_.validate(); }

  const ToyModelParams& params() const { return p_; }

  int sample_rate() const override { return p_.sample_rate; }
  std::size_t vocab_size() const override { return p_.vocab.size(); }
  std::size_t min_input_length() const override { return p_.dims.window; }

  std::size_t steps_for(std::size_t n) const override {
    if (n < p_.dims.window) return 0;
    return 1 + (n - p_.dims.window) / p_.dims.hop;
  }

  // Frames are anchored to the end of the input: the last frame always
  // covers the final `window` samples and leading leftovers are dropped.
  std::size_t first_frame_offset(std::size_t n) const {
    return (n - p_.dims.window) % p_.dims.hop;
  }

  Logits forward(const Waveform& w) const override {
    check_input(w);
    const Cache c = run(w.samples());
    const std::size_t steps = c.frames;
    const std::vector<double> states = respond(c, steps);
    Logits logits;
    logits.steps = steps;
    logits.vocab = p_.vocab.size();
    logits.values.resize(steps * logits.vocab);
    for (std::size_t j = 0; j < steps; ++j) {
      output_row(std::span<const double>(states).subspan(j * p_.dims.hidden, p_.dims.hidden),
                 std::span<double>(logits.values).subspan(j * logits.vocab, logits.vocab));
    }
    return logits;
  }

  LossAndGrad loss_and_grad(const Waveform& w, const TokenSequence& target) const override {
    check_input(w);
    LossAndGrad out;
    out.grad.assign(w.size(), 0.0);
    out.loss = backprop(w.samples(), target, out.grad, nullptr);
    return out;
  }

  double loss(const Waveform& w, const TokenSequence& target) const {
    check_input(w);
    return backprop(w.samples(), target, {}, nullptr);
  }

  // Loss and accumulated parameter gradient (added into `param_grad`).
  double loss_and_param_grad(const Waveform& w, const TokenSequence& target,
                             ToyModelParams& param_grad) const {
    check_input(w);
    return backprop(w.samples(), target, {}, &param_grad);
  }

  TokenSequence decode(const Waveform& w, const DecodeMode& mode) const override {
    if (!mode.is_greedy()) {
      check_sampling_params(mode.temperature, mode.top_k, p_.vocab.size());
    }
    return decode_logits(forward(w), mode);
  }

 private:
  struct Cache {
    std::size_t frames = 0;
    std::size_t offset = 0;
    std::size_t features = 0;
    std::size_t hidden = 0;
    std::vector<double> feat;  // frames x features
    std::vector<double> hid;   // frames x hidden

    std::span<const double> feat_at(std::size_t t) const {
      return std::span<const double>(feat).subspan(t * features, features);
    }
    std::span<const double> hidden_at(std::size_t t) const {
      return std::span<const double>(hid).subspan(t * hidden, hidden);
    }
  };

  void check_input(const Waveform& w) const {
    if (w.sample_rate() != p_.sample_rate) {
      throw FormatError("model expects " + std::to_string(p_.sample_rate) +
                        " Hz audio, got " + std::to_string(w.sample_rate()));
    }
    if (w.size() < p_.dims.window) {
      throw InputError("waveform of " + std::to_string(w.size()) +
                       " samples is shorter than one analysis window (" +
                       std::to_string(p_.dims.window) + ")");
    }
  }

  // hidden = tanh(transition * prev + hidden_bias + drive)
  void recur(const double* prev, const double* drive, double* out) const {
    const std::size_t hidden = p_.dims.hidden;
    for (std::size_t u = 0; u < hidden; ++u) {
      double acc = p_.hidden_bias[u] + (drive ? drive[u] : 0.0);
      if (prev) {
        const double* tr_row = p_.transition.data() + u * hidden;
        for (std::size_t v = 0; v < hidden; ++v) acc += tr_row[v] * prev[v];
      }
      out[u] = std::tanh(acc);
    }
  }

  Cache run(std::span<const double> x) const {
    const auto& d = p_.dims;
    Cache c;
    c.frames = steps_for(x.size());
    c.offset = first_frame_offset(x.size());
    c.features = d.features;
    c.hidden = d.hidden;
    c.feat.assign(c.frames * d.features, 0.0);
    c.hid.assign(c.frames * d.hidden, 0.0);
    std::vector<double> drive(d.hidden);
    for (std::size_t t = 0; t < c.frames; ++t) {
      const double* frame = x.data() + c.offset + t * d.hop;
      double* f = c.feat.data() + t * d.features;
      for (std::size_t k = 0; k < d.features; ++k) {
        const double* row = p_.filterbank.data() + k * d.window;
        double acc = 0.0;
        for (std::size_t i = 0; i < d.window; ++i) acc += row[i] * frame[i];
        f[k] = std::tanh(acc);
      }
      drive_from(std::span<const double>(f, d.features), drive.data());
      recur(t > 0 ? c.hid.data() + (t - 1) * d.hidden : nullptr, drive.data(),
            c.hid.data() + t * d.hidden);
    }
    return c;
  }

  void drive_from(std::span<const double> f, double* drive) const {
    const auto& d = p_.dims;
    for (std::size_t u = 0; u < d.hidden; ++u) {
      const double* in_row = p_.input.data() + u * d.features;
      double acc = 0.0;
      for (std::size_t k = 0; k < d.features; ++k) acc += in_row[k] * f[k];
      drive[u] = acc;
    }
  }

  std::vector<double> respond(const Cache& c, std::size_t steps) const {
    const std::size_t hidden = p_.dims.hidden;
    std::vector<double> states(steps * hidden);
    const auto last = c.hidden_at(c.frames - 1);
    std::copy(last.begin(), last.end(), states.begin());
    std::vector<double> drive(hidden);
    for (std::size_t j = 1; j < steps; ++j) {
      drive_from(c.feat_at(c.frames - 1 - j), drive.data());
      if (j <= p_.dims.positions) {
        const double* pos = p_.position.data() + (j - 1) * hidden;
        for (std::size_t u = 0; u < hidden; ++u) drive[u] += pos[u];
      }
      recur(states.data() + (j - 1) * hidden, drive.data(), states.data() + j * hidden);
    }
    return states;
  }

  void output_row(std::span<const double> h, std::span<double> out) const {
    const std::size_t hidden = p_.dims.hidden;
    for (std::size_t v = 0; v < out.size(); ++v) {
      const double* row = p_.output.data() + v * hidden;
      double acc = p_.output_bias[v];
      for (std::size_t u = 0; u < hidden; ++u) acc += row[u] * h[u];
      out[v] = acc;
    }
  }

  // Backward through one recurrence step given d loss / d out-state in
  // `dstate`. Leaves d loss / d pre-activation in `du` and adds the
  // contribution to the previous state into `dprev` (if any).
  void recur_backward(std::span<const double> state, std::span<const double> prev,
                      std::span<const double> dstate, std::span<double> du,
                      std::span<double> dprev, ToyModelParams* param_grad) const {
    const std::size_t hidden = p_.dims.hidden;
    for (std::size_t u = 0; u < hidden; ++u) du[u] = dstate[u] * (1.0 - state[u] * state[u]);
    for (std::size_t u = 0; u < hidden; ++u) {
      const double g = du[u];
      if (g == 0.0) continue;
      if (param_grad) param_grad->hidden_bias[u] += g;
      if (prev.empty()) continue;
      const double* tr_row = p_.transition.data() + u * hidden;
      for (std::size_t v = 0; v < hidden; ++v) dprev[v] += g * tr_row[v];
      if (param_grad) {
        double* gtr = param_grad->transition.data() + u * hidden;
        for (std::size_t v = 0; v < hidden; ++v) gtr[v] += g * prev[v];
      }
    }
  }

  // Reverse-mode pass. Writes d loss / d input into `input_grad` when it is
  // non-empty and accumulates parameter gradients when `param_grad` is set.
  double backprop(std::span<const double> x, const TokenSequence& target,
                  std::span<double> input_grad, ToyModelParams* param_grad) const {
    const auto& d = p_.dims;
    const std::size_t vocab = p_.vocab.size();
    const std::size_t frames = steps_for(x.size());
    if (target.empty()) throw InputError("target sequence is empty");
    if (target.size() > frames) {
      throw InputError("target of " + std::to_string(target.size()) +
                       " tokens exceeds the " + std::to_string(frames) +
                       " output steps of the input");
    }
    for (TokenId t : target) {
      if (t >= vocab) throw InputError("target token id out of vocabulary range");
    }

    const Cache c = run(x);
    const std::size_t steps = target.size();
    const std::vector<double> states = respond(c, steps);
    auto state_at = [&](std::size_t j) {
      return std::span<const double>(states).subspan(j * d.hidden, d.hidden);
    };
    const double inv_steps = 1.0 / static_cast<double>(steps);

    std::vector<double> dstates(steps * d.hidden, 0.0);
    std::vector<double> row(vocab);
    double loss = 0.0;
    for (std::size_t j = 0; j < steps; ++j) {
      const auto h = state_at(j);
      output_row(h, row);
      const double lse = log_sum_exp(row);
      loss += lse - row[target[j]];
      double* dh = dstates.data() + j * d.hidden;
      for (std::size_t v = 0; v < vocab; ++v) {
        double g = std::exp(row[v] - lse);
        if (v == target[j]) g -= 1.0;
        g *= inv_steps;
        if (g == 0.0) continue;
        const double* orow = p_.output.data() + v * d.hidden;
        for (std::size_t u = 0; u < d.hidden; ++u) dh[u] += g * orow[u];
        if (param_grad) {
          double* gorow = param_grad->output.data() + v * d.hidden;
          for (std::size_t u = 0; u < d.hidden; ++u) gorow[u] += g * h[u];
          param_grad->output_bias[v] += g;
        }
      }
    }
    loss *= inv_steps;

    if (input_grad.empty() && !param_grad) return loss;

    std::vector<double> du(d.hidden);
    std::vector<double> dfeat(frames * d.features, 0.0);
    // d loss / d drive at frame t, pushed into the feature gradient.
    auto drive_backward = [&](std::size_t t) {
      const auto f = c.feat_at(t);
      double* df = dfeat.data() + t * d.features;
      for (std::size_t u = 0; u < d.hidden; ++u) {
        const double g = du[u];
        if (g == 0.0) continue;
        const double* in_row = p_.input.data() + u * d.features;
        for (std::size_t k = 0; k < d.features; ++k) df[k] += g * in_row[k];
        if (param_grad) {
          double* gin = param_grad->input.data() + u * d.features;
          for (std::size_t k = 0; k < d.features; ++k) gin[k] += g * f[k];
        }
      }
    };

    // Response phase, last step first. Step 0 is the final listening state.
    for (std::size_t j = steps; j-- > 1;) {
      recur_backward(state_at(j), state_at(j - 1),
                     std::span<const double>(dstates).subspan(j * d.hidden, d.hidden), du,
                     std::span<double>(dstates).subspan((j - 1) * d.hidden, d.hidden),
                     param_grad);
      drive_backward(frames - 1 - j);
      if (param_grad && j <= d.positions) {
        double* gpos = param_grad->position.data() + (j - 1) * d.hidden;
        for (std::size_t u = 0; u < d.hidden; ++u) gpos[u] += du[u];
      }
    }

    std::vector<double> carry(dstates.begin(), dstates.begin() + d.hidden);
    std::vector<double> next_carry(d.hidden);
    for (std::size_t t = frames; t-- > 0;) {
      std::fill(next_carry.begin(), next_carry.end(), 0.0);
      const std::span<const double> prev =
          t > 0 ? c.hidden_at(t - 1) : std::span<const double>{};
      recur_backward(c.hidden_at(t), prev, carry, du, next_carry, param_grad);
      drive_backward(t);
      std::swap(carry, next_carry);
    }

    for (std::size_t t = 0; t < frames; ++t) {
      const auto f = c.feat_at(t);
      const std::size_t start = c.offset + t * d.hop;
      const double* frame = x.data() + start;
      for (std::size_t k = 0; k < d.features; ++k) {
        const double g = dfeat[t * d.features + k] * (1.0 - f[k] * f[k]);
        if (g == 0.0) continue;
        if (!input_grad.empty()) {
          double* gx = input_grad.data() + start;
          const double* row_k = p_.filterbank.data() + k * d.window;
          for (std::size_t i = 0; i < d.window; ++i) gx[i] += g * row_k[i];
        }
        if (param_grad) {
          double* gfb = param_grad->filterbank.data() + k * d.window;
          for (std::size_t i = 0; i < d.window; ++i) gfb[i] += g * frame[i];
        }
      }
    }
    return loss;
  }

  ToyModelParams p_;
};

// ---------------------------------------------------------------------------
// Training

struct TrainingExample {
  Waveform audio;
  TokenSequence transcript;
};

struct TrainOptions {
  std::size_t epochs = 60;
  double learning_rate = 0.003;
  std::uint64_t seed = 0;
  // 0 trains on the full corpus as one batch.
  std::size_t batch_size = 8;
};

struct TrainResult {
  ToyModelParams params;
  std::vector<double> loss_log;  // mean corpus (or batch) loss after each epoch
};

namespace detail {

inline double corpus_loss_and_grad(const ToyModel& model,
                                   std::span<const TrainingExample* const> batch,
                                   ToyModelParams* grad) {
  double total = 0.0;
  for (const TrainingExample* ex : batch) {
    if (grad) {
      total += model.loss_and_param_grad(ex->audio, ex->transcript, *grad);
    } else {
      total += model.loss(ex->audio, ex->transcript);
    }
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  if (grad) {
    for (auto* block : grad->blocks())
      for (double& g : *block) g *= scale;
  }
  return total * scale;
}

}  // namespace detail

// Minibatch Adam on the mean cross-entropy w.r.t. the parameters. The seed
// drives the minibatch shuffle; loss_log holds the mean pre-step batch loss
// of each epoch.
inline TrainResult train_toy(const ToyModelParams& initial,
                             std::span<const TrainingExample> corpus,
                             const TrainOptions& options) {
  initial.validate();
  if (corpus.empty()) throw InputError("training corpus is empty");
  const ToyModel probe(initial);
  for (const auto& ex : corpus) {
    if (ex.audio.sample_rate() != initial.sample_rate) {
      throw InputError("training audio sample rate does not match the model");
    }
    if (ex.transcript.empty() ||
        ex.transcript.size() > probe.steps_for(ex.audio.size())) {
      throw InputError("transcript does not fit the frame count of its audio");
    }
    for (TokenId t : ex.transcript) {
      if (t >= initial.vocab_size()) throw InputError("transcript token out of range");
    }
  }
  if (!(options.learning_rate > 0.0)) throw ParameterError("learning rate must be positive");

  TrainResult result{initial, {}};
  if (options.epochs == 0) return result;

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ToyModelParams m = initial.zeros_like();
  ToyModelParams v = initial.zeros_like();
  std::size_t step = 0;
  Rng rng(options.seed);

  std::vector<const TrainingExample*> all;
  for (const auto& ex : corpus) all.push_back(&ex);
  const std::size_t batch_size =
      options.batch_size == 0 ? all.size() : std::min(options.batch_size, all.size());

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::vector<const TrainingExample*> order = all;
    if (batch_size < all.size()) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    }
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::span<const TrainingExample* const> batch(
          order.data() + start, std::min(batch_size, order.size() - start));
      ToyModelParams grad = initial.zeros_like();
      const double base = detail::corpus_loss_and_grad(ToyModel(result.params), batch, &grad);

      ++step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      auto gb = grad.blocks();
      auto mb = m.blocks();
      auto vb = v.blocks();
      for (std::size_t b = 0; b < gb.size(); ++b) {
        for (std::size_t i = 0; i < gb[b]->size(); ++i) {
          const double g = (*gb[b])[i];
          (*mb[b])[i] = kBeta1 * (*mb[b])[i] + (1.0 - kBeta1) * g;
          (*vb[b])[i] = kBeta2 * (*vb[b])[i] + (1.0 - kBeta2) * g * g;
        }
      }

      auto pb = result.params.blocks();
      for (std::size_t b = 0; b < pb.size(); ++b) {
        for (std::size_t i = 0; i < pb[b]->size(); ++i) {
          const double mhat = (*mb[b])[i] / c1;
          const double vhat = (*vb[b])[i] / c2;
          (*pb[b])[i] -= options.learning_rate * mhat / (std::sqrt(vhat) + kEps);
        }
      }
      epoch_loss += base;
      ++batches;
    }
    result.loss_log.push_back(epoch_loss / static_cast<double>(batches));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoint format (all integers uint32 little-endian, floats float64 LE):
//
//   magic "AJBTOYM1" | version | sample_rate | window | hop | features |
//   hidden | positions | vocab_size | vocab_size x (byte_length, utf8 bytes) |
//   filterbank | input | transition | hidden_bias | position | output |
//   output_bias
//
// Blocks are row-major with the sizes given by ToyModelParams::block_sizes().

inline constexpr std::string_view kCheckpointMagic = "AJBTOYM1";
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline std::vector<std::uint8_t> encode_checkpoint(const ToyModelParams& p) {
  p.validate();
  std::vector<std::uint8_t> out;
  detail::put_tag(out, kCheckpointMagic);
  detail::put_u32(out, kCheckpointVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(p.sample_rate));
  detail::put_u32(out, static_cast<std::uint32_t>(p.dims.window));
  detail::put_u32(out, static_cast<std::uint32_t>(p.dims.hop));
  detail::put_u32(out, static_cast<std::uint32_t>(p.dims.features));
  detail::put_u32(out, static_cast<std::uint32_t>(p.dims.hidden));
  detail::put_u32(out, static_cast<std::uint32_t>(p.dims.positions));
  detail::put_u32(out, static_cast<std::uint32_t>(p.vocab.size()));
  for (const auto& w : p.vocab.words()) {
    detail::put_u32(out, static_cast<std::uint32_t>(w.size()));
    detail::put_tag(out, w);
  }
  for (const auto* block : p.blocks())
    for (double v : *block) detail::put_f64(out, v);
  return out;
}

inline ToyModelParams decode_checkpoint(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "checkpoint");
  if (r.tag(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw FormatError("checkpoint: bad magic");
  }
  if (r.u32() != kCheckpointVersion) throw FormatError("checkpoint: unsupported version");
  ToyModelParams p;
  p.sample_rate = static_cast<int>(r.u32());
  p.dims.window = r.u32();
  p.dims.hop = r.u32();
  p.dims.features = r.u32();
  p.dims.hidden = r.u32();
  p.dims.positions = r.u32();
  const std::uint32_t vocab_size = r.u32();
  std::vector<std::string> words;
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    const std::uint32_t len = r.u32();
    words.push_back(r.tag(len));
  }
  try {
    p.vocab = Vocabulary(std::move(words));
  } catch (const Error& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  const auto sizes = p.block_sizes();
  std::size_t total = 0;
  for (std::size_t s : sizes) total += s;
  if (r.remaining() != total * 8) throw FormatError("checkpoint: parameter payload size mismatch");
  auto blocks = p.blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    blocks[b]->resize(sizes[b]);
    for (double& v : *blocks[b]) v = r.f64();
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  return p;
}

inline void save_checkpoint(const ToyModelParams& p, const std::filesystem::path& path) {
  write_file_bytes(path, encode_checkpoint(p));
}

inline ToyModelParams load_checkpoint(const std::filesystem::path& path) {
  try {
    return decode_checkpoint(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace ajb
