#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ajb/adam.hpp"
#include "ajb/error.hpp"
#include "ajb/model.hpp"
#include "ajb/random.hpp"
#include "ajb/rir.hpp"
#include "ajb/waveform.hpp"

namespace ajb {

enum class Strategy { Base, Speed, Benign, SoundEffect, Music };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Base: return "base";
    case Strategy::Speed: return "speed";
    case Strategy::Benign: return "benign";
    case Strategy::SoundEffect: return "sound-effect";
    case Strategy::Music: return "music";
  }
  return "base";
}

inline Strategy parse_strategy(std::string_view text) {
  for (Strategy s : {Strategy::Base, Strategy::Speed, Strategy::Benign, Strategy::SoundEffect,
                     Strategy::Music}) {
    if (text == to_string(s)) return s;
  }
  throw ConfigError("unknown strategy '" + std::string(text) + "'");
}

// Strategies whose carrying audio is drawn from a stealth pool.
inline bool uses_stealth_pool(Strategy s) {
  return s == Strategy::Benign || s == Strategy::SoundEffect || s == Strategy::Music;
}

struct AttackConfig {
  Strategy strategy = Strategy::Base;
  double alpha = 2.0;          // speed-up ratio (Speed strategy only)
  std::size_t K = 1;           // carriers / prompts per iteration
  std::size_t M = 1;           // RIRs per carrier / prompt
  std::size_t N = 500;         // iterations
  double beta = 1e-3;          // Adam learning rate
  double epsilon = 1.0;        // strong adversary budget
  double tau_u_ms = 100.0;     // weak adversary delay upper bound
  std::uint64_t seed = 0;
  // Cut b (x) r back to |b| samples instead of keeping the reverberant tail.
  bool truncate_reverb_tail = false;

  friend bool operator==(const AttackConfig&, const AttackConfig&) = default;
};

struct CorpusSet {
  std::vector<Waveform> carriers;       // Q0 (strong)
  std::vector<TokenSequence> targets;   // Y, paired with carriers
  std::vector<Waveform> user_prompts;   // Xu (weak)
  std::vector<Waveform> benign;
  std::vector<Waveform> sound_effects;
  std::vector<Waveform> music;
};

struct AttackTrace {
  std::vector<double> losses;  // f / (K * M) per iteration
  double wall_seconds = 0.0;
};

// What one iteration drew and produced, for instrumentation and replay.
struct IterationRecord {
  std::size_t iteration = 0;
  std::vector<std::size_t> items;              // carrier or prompt indices
  std::vector<std::vector<std::size_t>> rirs;  // per item
  std::size_t delay_samples = 0;               // weak adversary only
  double loss = 0.0;                           // f / (K * M) before the step
  std::span<const double> variable;            // z or delta after the step
};

using AttackObserver = std::function<void(const IterationRecord&)>;

struct ObjectiveValue {
  double value = 0.0;         // f / (K * M)
  std::vector<double> grad;   // w.r.t. z (strong) or delta (weak)
};

// One drawn carrier/prompt with the RIRs drawn for it.
struct BatchTerm {
  std::size_t item = 0;
  std::vector<std::size_t> rirs;
};

inline const std::vector<Waveform>& stealth_pool(Strategy s, const CorpusSet& corpus) {
  switch (s) {
    case Strategy::Benign: return corpus.benign;
    case Strategy::SoundEffect: return corpus.sound_effects;
    case Strategy::Music: return corpus.music;
    default: break;
  }
  throw ConfigError("strategy " + std::string(to_string(s)) + " has no stealth pool");
}

// Carrying audios for the strong adversary: Q0 itself for Base/Speed,
// otherwise a single uniformly drawn element of the strategy's pool.
inline std::vector<Waveform> select_carriers(Strategy s, const CorpusSet& corpus, Rng& rng) {
  if (!uses_stealth_pool(s)) {
    if (corpus.carriers.empty()) throw ConfigError("no carrying audios supplied");
    return corpus.carriers;
  }
  const auto& pool = stealth_pool(s, corpus);
  if (pool.empty()) {
    throw ConfigError("the " + std::string(to_string(s)) + " pool is empty");
  }
  return {pool[rng.below(pool.size())]};
}

// Carrying audio for the weak adversary.
inline Waveform select_carrier(Strategy s, const Waveform& x0, const CorpusSet& corpus,
                               Rng& rng) {
  if (!uses_stealth_pool(s)) return x0;
  const auto& pool = stealth_pool(s, corpus);
  if (pool.empty()) {
    throw ConfigError("the " + std::string(to_string(s)) + " pool is empty");
  }
  return pool[rng.below(pool.size())];
}

namespace detail {

// loss of model(prefix || silence(gap) || clamp(b (x) r)) and its gradient
// w.r.t. b, accumulated into grad_b.
inline double channel_loss(const AudioModel& model, std::span<const double> b, const Rir& r,
                           const TokenSequence& target, const Waveform* prefix,
                           std::size_t gap, bool truncate_tail, std::span<double> grad_b) {
  std::vector<double> reverb = convolve_full(b, r.taps());
  if (truncate_tail) reverb.resize(b.size());
  const std::vector<double> clamped = clamp_samples(reverb);

  const std::size_t offset = (prefix ? prefix->size() : 0) + gap;
  std::vector<double> input;
  input.reserve(offset + clamped.size());
  if (prefix) input.insert(input.end(), prefix->samples().begin(), prefix->samples().end());
  input.insert(input.end(), gap, 0.0);
  input.insert(input.end(), clamped.begin(), clamped.end());

  const LossAndGrad lg = model.loss_and_grad(Waveform(std::move(input), model.sample_rate()),
                                             target);

  std::vector<double> g_reverb(b.size() + r.size() - 1, 0.0);
  for (std::size_t i = 0; i < clamped.size(); ++i) g_reverb[i] = lg.grad[offset + i];
  mask_clamped(std::span<double>(g_reverb).first(reverb.size()), reverb);
  const std::vector<double> g = convolve_full_backward(g_reverb, r.taps(), b.size());
  for (std::size_t i = 0; i < g.size(); ++i) grad_b[i] += g[i];
  return lg.loss;
}

inline void check_rate(const Waveform& w, const AudioModel& model, std::string_view what) {
  if (w.sample_rate() != model.sample_rate()) {
    throw FormatError(std::string(what) + " sample rate " + std::to_string(w.sample_rate()) +
                      " does not match the model (" + std::to_string(model.sample_rate()) +
                      ")");
  }
}

inline void check_common(const AttackConfig& cfg, std::span<const Rir> rirs,
                         const AudioModel& model) {
  if (cfg.K < 1) throw ConfigError("K must be at least 1");
  if (cfg.M < 1) throw ConfigError("M must be at least 1");
  if (!(cfg.beta > 0.0)) throw ConfigError("learning rate beta must be positive");
  if (cfg.strategy == Strategy::Speed && !(cfg.alpha > 0.0)) {
    throw ConfigError("speed ratio alpha must be positive");
  }
  if (rirs.size() < cfg.M) {
    throw ConfigError("RIR bank has " + std::to_string(rirs.size()) +
                      " entries but M = " + std::to_string(cfg.M));
  }
  for (const Rir& r : rirs) {
    if (r.sample_rate() != model.sample_rate()) {
      throw FormatError("RIR sample rate does not match the model");
    }
  }
}

inline std::size_t played_length(std::size_t n, const AttackConfig& cfg) {
  if (cfg.strategy != Strategy::Speed) return n;
  return SpeedTransform(n, cfg.alpha).output_length();
}

inline void check_playable(std::size_t n, const AttackConfig& cfg, const AudioModel& model) {
  const std::size_t played = played_length(n, cfg);
  if (played < model.min_input_length()) {
    throw ConfigError("jailbreak audio of " + std::to_string(played) +
                      " samples (after speed-up) is shorter than one model frame (" +
                      std::to_string(model.min_input_length()) + ")");
  }
}

// Clip delta so that x + delta stays inside [-1, 1] after rounding.
inline void clip_to_valid(std::span<double> delta, const Waveform& x) {
  for (std::size_t i = 0; i < delta.size(); ++i) {
    double d = std::clamp(delta[i], -1.0 - x[i], 1.0 - x[i]);
    while (x[i] + d > 1.0) d = std::nextafter(d, -2.0);
    while (x[i] + d < -1.0) d = std::nextafter(d, 2.0);
    delta[i] = d;
  }
}

inline Waveform add_valid(const Waveform& x, std::span<const double> delta) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + delta[i];
  return Waveform(std::move(out), x.sample_rate());
}

inline double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Strong adversary

// Averaged strong objective f / (K * M) over a drawn batch and its gradient
// w.r.t. z. `carriers` must already be padded to |z|.
inline ObjectiveValue strong_objective(const AudioModel& model,
                                       std::span<const Waveform> carriers,
                                       std::span<const TokenSequence> targets,
                                       std::span<const Rir> rirs,
                                       std::span<const BatchTerm> batch,
                                       std::span<const double> z, const AttackConfig& cfg) {
  ObjectiveValue out;
  out.grad.assign(z.size(), 0.0);
  std::size_t evaluations = 0;
  for (const BatchTerm& term : batch) {
    const BoxReparam br = box_reparam_forward(z, carriers[term.item], cfg.epsilon);
    std::vector<double> b = br.output.data();
    std::optional<SpeedTransform> speed_op;
    if (cfg.strategy == Strategy::Speed) {
      speed_op.emplace(b.size(), cfg.alpha);
      b = speed_op->apply(b);
    }
    std::vector<double> grad_b(b.size(), 0.0);
    for (std::size_t r : term.rirs) {
      out.value += detail::channel_loss(model, b, rirs[r], targets[term.item], nullptr, 0,
                                        cfg.truncate_reverb_tail, grad_b);
      ++evaluations;
    }
    if (speed_op) grad_b = speed_op->backward(grad_b);
    const std::vector<double> gz = br.backward(grad_b, cfg.epsilon);
    for (std::size_t i = 0; i < gz.size(); ++i) out.grad[i] += gz[i];
  }
  if (evaluations > 0) {
    const double scale = 1.0 / static_cast<double>(evaluations);
    out.value *= scale;
    for (double& g : out.grad) g *= scale;
  }
  return out;
}

struct StrongResult {
  Perturbation delta;                   // tanh(z)
  AttackTrace trace;
  std::vector<Waveform> carriers;       // Q, padded to |delta|
  std::vector<TokenSequence> targets;   // Y, paired with carriers
};

// |z| bound that keeps tanh(z) strictly inside (-1, 1) in double precision.
// Adam steps do not shrink with the vanishing tanh gradient, so z could
// otherwise drift into the range where tanh rounds to exactly +-1.
inline constexpr double kMaxLatent = 18.0;

// The audio a strong adversary plays: clamp(x + epsilon * delta), sped up
// under the Speed strategy. The carrier is zero-padded to |delta| if shorter.
inline Waveform strong_patched(const Waveform& carrier, const Perturbation& delta,
                               const AttackConfig& cfg) {
  const std::size_t n = std::max(carrier.size(), delta.size());
  const Waveform x = pad_to(carrier, n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = i < delta.size() ? delta.values[i] : 0.0;
    b[i] = x[i] + cfg.epsilon * d;
  }
  Waveform out = clamp_valid(b, carrier.sample_rate());
  if (cfg.strategy == Strategy::Speed) out = speed(out, cfg.alpha);
  return out;
}

// Strong-adversary optimization over z with delta = tanh(z).
//
// Draw order from Rng(cfg.seed): stealth-pool carrier (pool strategies
// only); L standard normals for z; then per iteration K distinct carrier
// indices followed, per carrier, by M distinct RIR indices.
inline StrongResult attack_strong(const AudioModel& model, const CorpusSet& corpus,
                                  std::span<const Rir> rirs, const AttackConfig& cfg,
                                  const AttackObserver& observer = {}) {
  const auto start = std::chrono::steady_clock::now();
  detail::check_common(cfg, rirs, model);
  if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0)) {
    throw ConfigError("epsilon must lie in (0, 1]");
  }
  if (uses_stealth_pool(cfg.strategy) && cfg.K != 1) {
    throw ConfigError("strategy " + std::string(to_string(cfg.strategy)) +
                      " requires K = 1 for the strong adversary");
  }

  Rng rng(cfg.seed);
  StrongResult result;
  result.carriers = select_carriers(cfg.strategy, corpus, rng);
  if (uses_stealth_pool(cfg.strategy)) {
    if (corpus.targets.empty()) throw ConfigError("no target response supplied");
    result.targets = {corpus.targets.front()};
  } else {
    if (corpus.targets.size() != corpus.carriers.size()) {
      throw ConfigError("carriers and targets differ in count");
    }
    result.targets = corpus.targets;
  }
  if (result.carriers.size() < cfg.K) {
    throw ConfigError("K = " + std::to_string(cfg.K) + " exceeds the " +
                      std::to_string(result.carriers.size()) + " available carriers");
  }

  std::size_t length = 0;
  for (const auto& c : result.carriers) {
    detail::check_rate(c, model, "carrier");
    length = std::max(length, c.size());
  }
  for (auto& c : result.carriers) c = pad_to(c, length);
  detail::check_playable(length, cfg, model);

  std::vector<double> z(length);
  for (double& v : z) v = rng.normal();
  AdamState adam(length);

  result.trace.losses.reserve(cfg.N);
  for (std::size_t it = 0; it < cfg.N; ++it) {
    std::vector<BatchTerm> batch;
    for (std::size_t item : sample_without_replacement(result.carriers.size(), cfg.K, rng)) {
      batch.push_back({item, sample_rir_indices(rirs.size(), cfg.M, rng)});
    }
    const ObjectiveValue obj =
        strong_objective(model, result.carriers, result.targets, rirs, batch, z, cfg);
    adam_step(adam, z, obj.grad, cfg.beta);
    for (double& v : z) v = std::clamp(v, -kMaxLatent, kMaxLatent);
    result.trace.losses.push_back(obj.value);
    if (observer) {
      IterationRecord rec;
      rec.iteration = it;
      for (const auto& t : batch) {
        rec.items.push_back(t.item);
        rec.rirs.push_back(t.rirs);
      }
      rec.loss = obj.value;
      rec.variable = z;
      observer(rec);
    }
  }

  result.delta.values.resize(length);
  for (std::size_t i = 0; i < length; ++i) result.delta.values[i] = std::tanh(z[i]);
  result.trace.wall_seconds = detail::elapsed(start);
  return result;
}

// ---------------------------------------------------------------------------
// Weak adversary

// Averaged weak objective f / (K * M) and its gradient w.r.t. delta. The
// jailbreak audio b = x + delta (sped up under Speed) is appended to each
// drawn prompt after `gap` samples of silence.
inline ObjectiveValue weak_objective(const AudioModel& model, const Waveform& x,
                                     std::span<const double> delta,
                                     std::span<const Waveform> prompts,
                                     const TokenSequence& target, std::span<const Rir> rirs,
                                     std::span<const BatchTerm> batch, std::size_t gap,
                                     const AttackConfig& cfg) {
  if (delta.size() != x.size()) throw LengthError("delta and carrier lengths differ");
  ObjectiveValue out;
  std::vector<double> b = detail::add_valid(x, delta).data();
  std::optional<SpeedTransform> speed_op;
  if (cfg.strategy == Strategy::Speed) {
    speed_op.emplace(b.size(), cfg.alpha);
    b = speed_op->apply(b);
  }
  std::vector<double> grad_b(b.size(), 0.0);
  std::size_t evaluations = 0;
  for (const BatchTerm& term : batch) {
    for (std::size_t r : term.rirs) {
      out.value += detail::channel_loss(model, b, rirs[r], target, &prompts[term.item], gap,
                                        cfg.truncate_reverb_tail, grad_b);
      ++evaluations;
    }
  }
  out.grad = speed_op ? speed_op->backward(grad_b) : std::move(grad_b);
  if (evaluations > 0) {
    const double scale = 1.0 / static_cast<double>(evaluations);
    out.value *= scale;
    for (double& g : out.grad) g *= scale;
  }
  return out;
}

struct WeakResult {
  Waveform audio;      // x + delta
  Perturbation delta;
  Waveform carrier;    // x
  AttackTrace trace;
};

// What the weak adversary plays after the user's prompt.
inline Waveform weak_played(const Waveform& audio, const AttackConfig& cfg) {
  return cfg.strategy == Strategy::Speed ? speed(audio, cfg.alpha) : audio;
}

// Weak-adversary optimization of a suffix delta.
//
// Draw order from Rng(cfg.seed): stealth-pool carrier (pool strategies
// only); then per iteration K distinct prompt indices, one delay
// tau ~ U[0, tau_u], and per prompt M distinct RIR indices.
inline WeakResult attack_weak(const AudioModel& model, const Waveform& x0,
                              const TokenSequence& target, const CorpusSet& corpus,
                              std::span<const Rir> rirs, const AttackConfig& cfg,
                              const AttackObserver& observer = {}) {
  const auto start = std::chrono::steady_clock::now();
  detail::check_common(cfg, rirs, model);
  if (!(cfg.tau_u_ms >= 0.0)) throw ConfigError("tau_u must be non-negative");
  if (corpus.user_prompts.size() < cfg.K) {
    throw ConfigError("K = " + std::to_string(cfg.K) + " exceeds the " +
                      std::to_string(corpus.user_prompts.size()) + " available user prompts");
  }
  if (target.empty()) throw ConfigError("target response is empty");
  for (const auto& p : corpus.user_prompts) detail::check_rate(p, model, "user prompt");

  Rng rng(cfg.seed);
  WeakResult result;
  result.carrier = select_carrier(cfg.strategy, x0, corpus, rng);
  const Waveform& x = result.carrier;
  detail::check_rate(x, model, "carrier");
  detail::check_playable(x.size(), cfg, model);

  std::vector<double> delta(x.size(), 0.0);
  AdamState adam(x.size());
  result.trace.losses.reserve(cfg.N);
  for (std::size_t it = 0; it < cfg.N; ++it) {
    const auto items = sample_without_replacement(corpus.user_prompts.size(), cfg.K, rng);
    const double tau_ms = rng.uniform(0.0, cfg.tau_u_ms);
    const std::size_t gap = delay_samples(tau_ms, model.sample_rate());
    std::vector<BatchTerm> batch;
    for (std::size_t item : items) {
      batch.push_back({item, sample_rir_indices(rirs.size(), cfg.M, rng)});
    }
    const ObjectiveValue obj =
        weak_objective(model, x, delta, corpus.user_prompts, target, rirs, batch, gap, cfg);
    adam_step(adam, delta, obj.grad, cfg.beta);
    detail::clip_to_valid(delta, x);
    result.trace.losses.push_back(obj.value);
    if (observer) {
      IterationRecord rec;
      rec.iteration = it;
      for (const auto& t : batch) {
        rec.items.push_back(t.item);
        rec.rirs.push_back(t.rirs);
      }
      rec.delay_samples = gap;
      rec.loss = obj.value;
      rec.variable = delta;
      observer(rec);
    }
  }

  result.audio = detail::add_valid(x, delta);
  result.delta.values = std::move(delta);
  result.trace.wall_seconds = detail::elapsed(start);
  return result;
}

// ---------------------------------------------------------------------------
// Universal variants (K > 1) with a held-out evaluation split.

namespace detail {

inline void check_disjoint(std::span<const Waveform> train, std::span<const Waveform> held_out,
                           std::string_view what) {
  for (const auto& h : held_out) {
    if (std::find(train.begin(), train.end(), h) != train.end()) {
      throw ConfigError(std::string(what) +
                        " used for optimization also appears in the held-out set");
    }
  }
}

}  // namespace detail

inline StrongResult attack_universal_strong(const AudioModel& model, const CorpusSet& corpus,
                                            std::span<const Rir> rirs, const AttackConfig& cfg,
                                            std::span<const Waveform> held_out,
                                            const AttackObserver& observer = {}) {
  if (cfg.K < 2) throw ConfigError("a universal attack needs K > 1");
  if (uses_stealth_pool(cfg.strategy)) {
    throw ConfigError("stealth-pool strategies cannot be combined with universality");
  }
  detail::check_disjoint(corpus.carriers, held_out, "a carrier");
  return attack_strong(model, corpus, rirs, cfg, observer);
}

inline WeakResult attack_universal_weak(const AudioModel& model, const Waveform& x0,
                                        const TokenSequence& target, const CorpusSet& corpus,
                                        std::span<const Rir> rirs, const AttackConfig& cfg,
                                        std::span<const Waveform> held_out,
                                        const AttackObserver& observer = {}) {
  if (cfg.K < 2) throw ConfigError("a universal attack needs K > 1");
  detail::check_disjoint(corpus.user_prompts, held_out, "a user prompt");
  return attack_weak(model, x0, target, corpus, rirs, cfg, observer);
}

}  // namespace ajb
