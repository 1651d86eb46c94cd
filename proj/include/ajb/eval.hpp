#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ajb/attack.hpp"
#include "ajb/error.hpp"
#include "ajb/metrics.hpp"
#include "ajb/model.hpp"
#include "ajb/random.hpp"
#include "ajb/rir.hpp"
#include "ajb/waveform.hpp"

namespace ajb {

using Json = nlohmann::ordered_json;

// A prompt under evaluation: the user's audio (weak adversary) or a carrying
// audio (strong adversary) with its target response.
struct PromptCase {
  std::string id;
  Waveform audio;
  TokenSequence target;
};

struct TranscriptPair {
  std::string id;
  std::string hypothesis;
  std::string reference;
};

struct EvalOptions {
  std::size_t trials = 10;
  DecodeMode mode;
  bool allow_substring = true;
  double tau_ms = 0.0;                  // weak adversary gap at evaluation
  std::vector<double> delay_grid;       // optional sweep (weak adversary)
  // Simulated playback rooms. Empty means direct input; with several rooms
  // every (prompt, room) pair is judged as a separate case.
  std::vector<Rir> channels;
  std::vector<TranscriptPair> transcripts;
  Json config = Json::object();         // echoed into the report
};

struct DelayRow {
  double tau_ms = 0.0;
  double asr1 = 0.0;
  double asr2 = 0.0;
};

struct EvalReport {
  Json config = Json::object();
  std::vector<std::string> excluded;
  std::size_t n_included = 0;
  std::size_t trials = 0;
  double asr1 = 0.0;
  double asr2 = 0.0;
  std::vector<PromptTally> per_prompt;
  std::vector<std::pair<std::string, double>> wer;
  std::optional<std::vector<DelayRow>> delay_sweep;
  std::vector<TrialRecord> records;

  Json to_json() const {
    Json j;
    j["config"] = config;
    j["excluded"] = excluded;
    j["n_included"] = n_included;
    j["trials"] = trials;
    j["asr1"] = asr1;
    j["asr2"] = asr2;
    Json pp = Json::array();
    for (const auto& p : per_prompt) {
      pp.push_back({{"id", p.id}, {"successes", p.successes}, {"needs_review", p.needs_review}});
    }
    j["per_prompt"] = pp;
    Json w = Json::array();
    for (const auto& [id, value] : wer) w.push_back({{"id", id}, {"wer", value}});
    j["wer"] = w;
    if (delay_sweep) {
      Json rows = Json::array();
      for (const auto& r : *delay_sweep) {
        rows.push_back({{"tau_ms", r.tau_ms}, {"asr1", r.asr1}, {"asr2", r.asr2}});
      }
      j["delay_sweep"] = rows;
    }
    return j;
  }
};

// Builds the model input for a prompt played through a room (nullptr: direct).
using InputBuilder = std::function<Waveform(std::size_t prompt, const Rir* channel)>;

// One judged unit: a prompt, optionally under one playback room.
struct EvalCase {
  std::string id;
  std::size_t prompt = 0;
  const Rir* channel = nullptr;
  const TokenSequence* target = nullptr;
};

namespace detail {

// Seed of trial j of case i in evaluation phase `phase`
// (0 = baseline, 1 = main run, 2 + k = k-th delay of a sweep).
inline std::uint64_t trial_seed(std::uint64_t base, std::uint64_t phase, std::size_t index,
                                std::size_t trials, std::size_t trial) {
  return derive_seed(derive_seed(base, phase), index * trials + trial);
}

inline std::vector<EvalCase> make_cases(std::span<const PromptCase> prompts,
                                        const EvalOptions& opts) {
  std::vector<EvalCase> cases;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    if (opts.channels.empty()) {
      cases.push_back({prompts[i].id, i, nullptr, &prompts[i].target});
    } else if (opts.channels.size() == 1) {
      cases.push_back({prompts[i].id, i, &opts.channels[0], &prompts[i].target});
    } else {
      for (std::size_t r = 0; r < opts.channels.size(); ++r) {
        cases.push_back({prompts[i].id + "@rir" + std::to_string(r), i, &opts.channels[r],
                         &prompts[i].target});
      }
    }
  }
  return cases;
}

inline std::vector<TrialRecord> run_trials(const AudioModel& model,
                                           std::span<const EvalCase> cases,
                                           std::span<const std::size_t> which,
                                           const InputBuilder& build, const EvalOptions& opts,
                                           std::uint64_t phase) {
  std::vector<TrialRecord> records;
  for (std::size_t i : which) {
    const EvalCase& c = cases[i];
    const Waveform input = build(c.prompt, c.channel);
    std::optional<TokenSequence> greedy;
    for (std::size_t j = 0; j < opts.trials; ++j) {
      TokenSequence response;
      if (opts.mode.is_greedy()) {
        if (!greedy) greedy = model.decode(input, opts.mode);
        response = *greedy;
      } else {
        DecodeMode m = opts.mode;
        m.seed = trial_seed(opts.mode.seed, phase, i, opts.trials, j);
        response = model.decode(input, m);
      }
      const Judgement judged = succ_prefix(response, *c.target, opts.allow_substring);
      records.push_back({c.id, j + 1, std::move(response), *c.target, judged.success,
                         judged.needs_review});
    }
  }
  return records;
}

inline Waveform through_channel(const Waveform& w, const Rir* channel) {
  return channel ? convolve(w, *channel) : w;
}

inline void check_prompts(const AudioModel& model, std::span<const PromptCase> prompts) {
  std::vector<std::string> seen;
  for (const auto& p : prompts) {
    if (std::find(seen.begin(), seen.end(), p.id) != seen.end()) {
      throw InputError("duplicate prompt id '" + p.id + "'");
    }
    seen.push_back(p.id);
    if (p.audio.sample_rate() != model.sample_rate()) {
      throw FormatError("prompt '" + p.id + "' sample rate does not match the model");
    }
  }
}

}  // namespace detail

// Indices (into make_cases order) of cases with no successful trial when the
// prompt is played without attack. `clean` builds the unattacked input; by
// default the prompt goes through the case's room.
inline std::vector<std::size_t> filter_baseline(const AudioModel& model,
                                                std::span<const PromptCase> prompts,
                                                const EvalOptions& opts,
                                                const InputBuilder& clean = {}) {
  if (opts.trials == 0) throw ParameterError("trial count must be positive");
  const auto cases = detail::make_cases(prompts, opts);
  std::vector<std::size_t> all(cases.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const InputBuilder through = [&](std::size_t i, const Rir* ch) {
    return detail::through_channel(prompts[i].audio, ch);
  };
  const auto records = detail::run_trials(model, cases, all, clean ? clean : through, opts, 0);
  std::vector<std::size_t> included;
  const auto tallies = tally(records);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (tallies[i].successes == 0) included.push_back(i);
  }
  return included;
}

// Baseline exclusion, then `trials` judged decodes of every included case
// under the attack built by `attacked`. `sweep(tau)` (optional) builds the
// attacked input for a given delay; `clean` is passed to filter_baseline.
inline EvalReport evaluate(const AudioModel& model, std::span<const PromptCase> prompts,
                           const InputBuilder& attacked, const EvalOptions& opts,
                           const std::function<InputBuilder(double)>& sweep = {},
                           const InputBuilder& clean = {}) {
  if (opts.trials == 0) throw ParameterError("trial count must be positive");
  detail::check_prompts(model, prompts);
  const auto cases = detail::make_cases(prompts, opts);

  EvalReport report;
  report.config = opts.config;
  report.trials = opts.trials;
  const auto included = filter_baseline(model, prompts, opts, clean);
  for (std::size_t i = 0, k = 0; i < cases.size(); ++i) {
    if (k < included.size() && included[k] == i) {
      ++k;
    } else {
      report.excluded.push_back(cases[i].id);
    }
  }
  report.n_included = included.size();

  if (!included.empty()) {
    report.records = detail::run_trials(model, cases, included, attacked, opts, 1);
    report.asr1 = asr1(report.records);
    report.asr2 = asr2(report.records);
    report.per_prompt = tally(report.records);
  }

  for (const auto& t : opts.transcripts) {
    report.wer.emplace_back(t.id, wer(t.hypothesis, t.reference));
  }

  if (!opts.delay_grid.empty()) {
    if (!sweep) throw ConfigError("a delay sweep needs a weak-adversary artifact");
    std::vector<DelayRow> rows;
    for (std::size_t k = 0; k < opts.delay_grid.size(); ++k) {
      const double tau = opts.delay_grid[k];
      DelayRow row{tau, 0.0, 0.0};
      if (!included.empty()) {
        const auto records =
            detail::run_trials(model, cases, included, sweep(tau), opts, 2 + k);
        row.asr1 = asr1(records);
        row.asr2 = asr2(records);
      }
      rows.push_back(row);
    }
    report.delay_sweep = std::move(rows);
  }
  return report;
}

// Weak adversary: each prompt is followed by the jailbreak audio, played
// through the channel, after opts.tau_ms of silence. Only the jailbreak
// passes through the room, so the baseline is the bare prompt.
inline EvalReport evaluate_weak(const AudioModel& model, const Waveform& jailbreak,
                                std::span<const PromptCase> prompts, const EvalOptions& opts) {
  if (jailbreak.sample_rate() != model.sample_rate()) {
    throw FormatError("jailbreak audio sample rate does not match the model");
  }
  std::vector<Waveform> played;
  for (const Rir& r : opts.channels) played.push_back(convolve(jailbreak, r));
  auto suffix = [&](const Rir* ch) -> const Waveform& {
    return ch ? played[static_cast<std::size_t>(ch - opts.channels.data())] : jailbreak;
  };
  auto builder = [&](double tau) -> InputBuilder {
    return [&, tau](std::size_t i, const Rir* ch) {
      return concat_with_delay(prompts[i].audio, suffix(ch), tau);
    };
  };
  return evaluate(model, prompts, builder(opts.tau_ms), opts, builder,
                  [&](std::size_t i, const Rir*) { return prompts[i].audio; });
}

// Strong adversary: each carrying audio is patched with the perturbation and
// the whole prompt is played through the channel.
inline EvalReport evaluate_strong(const AudioModel& model, const Perturbation& delta,
                                  std::span<const PromptCase> carriers,
                                  const AttackConfig& cfg, const EvalOptions& opts) {
  if (!opts.delay_grid.empty()) {
    throw ConfigError("the delay sweep applies to the weak adversary only");
  }
  return evaluate(model, carriers,
                  [&](std::size_t i, const Rir* ch) {
                    return detail::through_channel(
                        strong_patched(carriers[i].audio, delta, cfg), ch);
                  },
                  opts);
}

}  // namespace ajb
