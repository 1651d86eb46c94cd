// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ajb/ajb.hpp"

namespace fs = std::filesystem;
using namespace ajb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

std::vector<double> random_values(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double central_difference(const std::function<double(std::span<const double>)>& f,
                          std::span<const double> x, std::span<const double> d) {
  constexpr double h = 1e-5;
  std::vector<double> plus(x.begin(), x.end()), minus(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    plus[i] += h * d[i];
    minus[i] -= h * d[i];
  }
  return (f(plus) - f(minus)) / (2.0 * h);
}

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(AJB_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

struct Setup {
  fs::path dir;
  ToyModel model;
  Vocabulary vocab;
};

// ---------------------------------------------------------------------------

Outcome gradient_correctness(const Setup& s) {
  const auto start = Clock::now();
  Rng rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    auto p = ToyModelParams::initialize(rng.next(), s.vocab);
    for (auto* block : {&p.hidden_bias, &p.position, &p.output_bias})
      for (double& v : *block) v = 0.1 * rng.normal();
    const ToyModel model(p);
    const std::size_t n = 1000 + rng.below(5000);
    const Waveform x(random_values(rng, n, -0.5, 0.5), kDefaultSampleRate);
    TokenSequence target(1 + rng.below(std::min<std::size_t>(model.steps_for(n), 8)));
    for (auto& t : target) t = static_cast<TokenId>(rng.below(s.vocab.size()));
    const auto d = random_values(rng, n, -1.0, 1.0);
    const auto lg = model.loss_and_grad(x, target);
    const double fd = central_difference(
        [&](std::span<const double> v) {
          return model.loss(Waveform(std::vector<double>(v.begin(), v.end()), kDefaultSampleRate),
                            target);
        },
        x.samples(), d);
    worst = std::max(worst, rel_error(dot(lg.grad, d), fd));
  }

  // Composed objective at iteration 0: box reparametrization, speed-up and
  // room convolution ahead of the trained model.
  double worst_composed = 0.0;
  const auto fixtures = fixtures::strong_fixtures(4);
  const auto rooms = random_rooms(4, 31);
  for (std::size_t i = 0; i < 4; ++i) {
    AttackConfig cfg;
    cfg.strategy = i % 2 ? Strategy::Speed : Strategy::Base;
    cfg.alpha = 1.5;
    cfg.epsilon = 0.5;
    cfg.seed = i;
    const std::vector<Waveform> carriers{fixtures[i].carrier};
    const std::vector<TokenSequence> targets{fixtures[i].target};
    const std::vector<Rir> rirs{simulate_rir(rooms[i])};
    const std::vector<BatchTerm> batch{{0, {0}}};
    Rng init(cfg.seed);  // attack_strong draws z from Rng(seed) first
    std::vector<double> z(carriers[0].size());
    for (double& v : z) v = init.normal();
    const auto d = random_values(rng, z.size(), -1.0, 1.0);
    const auto obj = strong_objective(s.model, carriers, targets, rirs, batch, z, cfg);
    const double fd = central_difference(
        [&](std::span<const double> v) {
          return strong_objective(s.model, carriers, targets, rirs, batch, v, cfg).value;
        },
        z, d);
    worst_composed = std::max(worst_composed, rel_error(dot(obj.grad, d), fd));
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-4 && worst_composed <= 1e-4 && elapsed < 60.0,
          fmt("max rel err %.2e over 50 triples, %.2e on the composed objective, %.1f s", worst,
              worst_composed, elapsed)};
}

Outcome transform_oracles(const Setup&) {
  Rng rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_values(rng, 1 + rng.below(400), -1.0, 1.0);
    const auto r = random_values(rng, 1 + rng.below(80), -1.0, 1.0);
    const auto got = convolve_full(x, r);
    for (std::size_t n = 0; n < got.size(); ++n) {
      long double acc = 0.0;
      for (std::size_t k = 0; k < r.size(); ++k) {
        if (k <= n && n - k < x.size()) acc += static_cast<long double>(r[k]) * x[n - k];
      }
      worst = std::max(worst, std::abs(got[n] - static_cast<double>(acc)));
    }
  }
  bool speed_identity = true;
  for (int trial = 0; trial < 20; ++trial) {
    const Waveform w(random_values(rng, 1 + rng.below(2000), -1.0, 1.0), kDefaultSampleRate);
    speed_identity &= speed(w, 1.0) == w;
  }
  std::ifstream in(std::string(AJB_TEST_DATA) + "/wer_cases.tsv");
  std::string line;
  std::size_t cases = 0, exact = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t'), t2 = line.rfind('\t');
    const std::string hyp = line.substr(0, t1), ref = line.substr(t1 + 1, t2 - t1 - 1);
    const double expected = static_cast<double>(std::stoul(line.substr(t2 + 1))) /
                            static_cast<double>(normalize_words(ref).size());
    exact += wer(hyp, ref) == expected;
    ++cases;
  }
  return {worst <= 1e-9 && speed_identity && cases == 200 && exact == 200,
          fmt("convolve max err %.1e, speed(.,1) %s, WER exact on %zu/%zu oracle pairs", worst,
              speed_identity ? "bit-identical" : "differs", exact, cases)};
}

Outcome rir_correctness(const Setup&) {
  RoomSpec anechoic;
  anechoic.absorption.fill(1.0);
  const Rir a = simulate_rir(anechoic);
  const auto expected = static_cast<std::size_t>(
      std::llround(anechoic.direct_distance() / anechoic.sound_speed * anechoic.sample_rate));
  std::size_t nonzero = 0;
  for (double t : a.taps()) nonzero += t != 0.0;
  const bool one_tap = nonzero == 1 && a.taps()[expected] == 1.0;

  std::size_t direct_ok = 0;
  for (const auto& room : random_rooms(20, 99)) {
    const Rir r = simulate_rir(room);
    std::size_t first = 0;
    while (r.taps()[first] == 0.0) ++first;
    direct_ok += first == static_cast<std::size_t>(std::llround(
                              distance(room.source, room.mic) / room.sound_speed *
                              room.sample_rate));
  }

  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10; ++i) {
    RoomSpec room;
    room.absorption.fill(0.1 * i);
    double e = 0.0;
    for (double t : accumulate_taps(room)) e += t * t;
    monotone &= e <= prev;
    prev = e;
  }
  return {one_tap && direct_ok == 20 && monotone,
          fmt("anechoic single tap at %zu: %s, direct path %zu/20, energy sweep %s", expected,
              one_tap ? "yes" : "no", direct_ok, monotone ? "non-increasing" : "increases")};
}

// Answers {1, 2} when the loudest sample exceeds 0.5.
class LevelModel : public AudioModel {
 public:
  int sample_rate() const override { return kDefaultSampleRate; }
  std::size_t vocab_size() const override { return 3; }
  std::size_t min_input_length() const override { return 1; }
  std::size_t steps_for(std::size_t) const override { return 2; }
  Logits forward(const Waveform&) const override { return {2, 3, std::vector<double>(6, 0.0)}; }
  LossAndGrad loss_and_grad(const Waveform&, const TokenSequence&) const override { return {}; }
  TokenSequence decode(const Waveform& w, const DecodeMode&) const override {
    double peak = 0.0;
    for (double v : w.samples()) peak = std::max(peak, std::abs(v));
    return peak > 0.5 ? TokenSequence{1, 2} : TokenSequence{0, 0};
  }
};

std::vector<TrialRecord> pattern_log(const std::vector<std::size_t>& hits, std::size_t trials) {
  std::vector<TrialRecord> out;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    for (std::size_t j = 0; j < trials; ++j) {
      TrialRecord r;
      r.prompt_id = "p" + std::to_string(i);
      r.trial_index = j + 1;
      r.success = j < hits[i];
      out.push_back(r);
    }
  }
  return out;
}

Outcome metric_formulas(const Setup&) {
  const auto a = pattern_log({10, 0}, 10), b = pattern_log({10, 1}, 10);
  const bool patterns =
      asr1(a) == 0.5 && asr2(a) == 0.5 && asr1(b) == 0.55 && asr2(b) == 1.0;
  Rng rng(4);
  std::size_t ordered = 0;
  for (int log = 0; log < 1000; ++log) {
    const std::size_t trials = 1 + rng.below(10);
    std::vector<std::size_t> hits(1 + rng.below(20));
    for (auto& h : hits) h = rng.below(trials + 1);
    const auto records = pattern_log(hits, trials);
    ordered += asr1(records) <= asr2(records);
  }
  // p0 already succeeds without attack; it must vanish from the denominators.
  const LevelModel model;
  auto level = [](double v) { return Waveform(std::vector<double>(4, v), kDefaultSampleRate); };
  const std::vector<PromptCase> prompts{
      {"p0", level(0.9), {1, 2}}, {"p1", level(0.1), {1, 2}}, {"p2", level(0.2), {1, 2}}};
  EvalOptions opts;
  opts.trials = 10;
  const EvalReport r = evaluate(model, prompts,
                                [&](std::size_t i, const Rir*) {
                                  return i == 2 ? prompts[2].audio : level(0.8);
                                },
                                opts);
  bool p0_absent = true;
  for (const auto& rec : r.records) p0_absent &= rec.prompt_id != "p0";
  const bool exclusion = r.excluded == std::vector<std::string>{"p0"} && r.n_included == 2 &&
                         p0_absent && r.asr1 == 0.5 && r.asr2 == 0.5;
  return {patterns && ordered == 1000 && exclusion,
          fmt("fixture patterns %s, asr1<=asr2 on %zu/1000 logs, baseline exclusion %s",
              patterns ? "exact" : "wrong", ordered, exclusion ? "correct" : "wrong")};
}

Outcome strong_end_to_end(const Setup& s) {
  const auto start = Clock::now();
  const auto fx = fixtures::strong_fixtures(20);
  const std::vector<Rir> impulse{Rir::impulse()};
  std::size_t hits = 0, included = 0;
  for (const auto& f : fx) {
    CorpusSet corpus;
    corpus.carriers = {f.carrier};
    corpus.targets = {f.target};
    AttackConfig cfg;  // Base, K = 1, M = 1, N = 500, beta = 1e-3
    const StrongResult r = attack_strong(s.model, corpus, impulse, cfg);
    EvalOptions opts;
    opts.trials = 1;
    const std::vector<PromptCase> prompt{{"c", f.carrier, f.target}};
    const EvalReport rep = evaluate_strong(s.model, r.delta, prompt, cfg, opts);
    included += rep.n_included;
    hits += rep.n_included ? static_cast<std::size_t>(rep.asr2) : 0;
  }
  const double elapsed = seconds_since(start);
  const double asr = included ? static_cast<double>(hits) / included : 0.0;
  return {included > 0 && asr >= 0.9 && elapsed < 300.0,
          fmt("ASR2 %zu/%zu = %.2f (%zu excluded at baseline), %.1f s", hits, included, asr,
              20 - included, elapsed)};
}

Outcome weak_delay_robustness(const Setup& s) {
  const auto start = Clock::now();
  CorpusSet corpus;
  corpus.user_prompts = fixtures::user_prompts(1);
  const TokenSequence target = s.vocab.encode(fixtures::kDenial);
  AttackConfig cfg;
  cfg.N = 1500;
  cfg.tau_u_ms = 100.0;
  const std::vector<Rir> impulse{Rir::impulse()};
  const WeakResult r = attack_weak(s.model, fixtures::command_carrier(), target, corpus, impulse,
                                   cfg);
  EvalOptions opts;
  opts.trials = 1;
  opts.delay_grid = parse_delay_grid("0..100:10");
  const std::vector<PromptCase> prompt{{"prompt", corpus.user_prompts[0], target}};
  const EvalReport rep = evaluate_weak(s.model, r.audio, prompt, opts);
  std::size_t ok = 0;
  std::string missed;
  for (const auto& row : *rep.delay_sweep) {
    if (row.asr2 == 1.0) ++ok;
    else missed += fmt(" %g", row.tau_ms);
  }
  return {rep.n_included == 1 && ok >= 9,
          fmt("succeeds at %zu/11 delays%s%s, N = 1500, %.1f s", ok,
              missed.empty() ? "" : ", missed ms:", missed.c_str(), seconds_since(start))};
}

Outcome universality(const Setup& s) {
  const auto start = Clock::now();
  CorpusSet corpus;
  corpus.user_prompts = fixtures::user_prompts(20);
  const auto held = fixtures::held_out_prompts(10);
  const TokenSequence target = s.vocab.encode(fixtures::kDenial);
  AttackConfig cfg;
  cfg.K = 5;
  cfg.N = 2000;
  const std::vector<Rir> impulse{Rir::impulse()};
  const WeakResult r = attack_universal_weak(s.model, fixtures::command_carrier(), target,
                                             corpus, impulse, cfg, held);
  std::vector<PromptCase> prompts;
  for (std::size_t i = 0; i < held.size(); ++i) {
    prompts.push_back({"heldout" + std::to_string(i), held[i], target});
  }
  const EvalReport rep = evaluate_weak(s.model, r.audio, prompts, EvalOptions{});
  const double elapsed = seconds_since(start);
  return {rep.n_included > 0 && rep.asr2 >= 0.7 && elapsed < 900.0,
          fmt("held-out ASR2 %.2f over %zu prompts (%zu excluded), %.1f s", rep.asr2,
              rep.n_included, rep.excluded.size(), elapsed)};
}

Outcome rir_ablation(const Setup& s) {
  const auto start = Clock::now();
  const auto fx = fixtures::strong_fixtures(10);
  std::vector<Rir> bank, unseen;
  for (const auto& r : random_rooms(20, 11)) bank.push_back(simulate_rir(r));
  for (const auto& r : random_rooms(5, 12)) unseen.push_back(simulate_rir(r));
  const std::vector<Rir> impulse{Rir::impulse()};
  double asr[2] = {0.0, 0.0};
  std::size_t hits[2] = {0, 0}, included[2] = {0, 0};
  for (int arm = 0; arm < 2; ++arm) {
    AttackConfig cfg;
    cfg.N = 1000;
    cfg.M = arm ? 5 : 1;
    for (const auto& f : fx) {
      CorpusSet corpus;
      corpus.carriers = {f.carrier};
      corpus.targets = {f.target};
      const StrongResult r = attack_strong(s.model, corpus, arm ? bank : impulse, cfg);
      EvalOptions opts;
      opts.trials = 1;
      opts.channels = unseen;
      const std::vector<PromptCase> prompt{{"c", f.carrier, f.target}};
      const EvalReport rep = evaluate_strong(s.model, r.delta, prompt, cfg, opts);
      included[arm] += rep.n_included;
      for (const auto& p : rep.per_prompt) hits[arm] += p.successes > 0;
    }
    asr[arm] = included[arm] ? static_cast<double>(hits[arm]) / included[arm] : 0.0;
  }
  return {included[1] > 0 && asr[1] > asr[0],
          fmt("unseen-room ASR2 with 5 training rooms %zu/%zu = %.2f, impulse only %zu/%zu = "
              "%.2f, %.1f s",
              hits[1], included[1], asr[1], hits[0], included[0], asr[0],
              seconds_since(start))};
}

Outcome determinism(const Setup& s) {
  const fs::path root = s.dir / "replay";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string d = s.dir.string();
  struct Job {
    std::string name;
    std::string config;
    std::string overrides;
  };
  const std::vector<Job> jobs = {
      {"strong_base", "strong.cfg",
       "--N 30 --M 2 --rir-bank " + d + "/rirs --eval-rir-bank " + d +
           "/rirs_eval --trials 3 --decode sampled --temperature 0.8 --top-k 5"},
      {"strong_speed", "strong.cfg", "--N 20 --strategy speed --alpha 1.5 --trials 2"},
      {"strong_music", "strong.cfg", "--N 20 --strategy music --trials 2"},
      {"strong_universal", "strong.cfg", "--N 10 --K 3 --trials 1"},
      {"weak_universal", "weak.cfg", "--N 30 --trials 2 --decode sampled --top-k 3"},
      {"weak_rooms", "weak.cfg",
       "--N 10 --K 2 --M 3 --rir-bank " + d + "/rirs --eval-rir-bank " + d +
           "/rirs_eval --trials 1 --delay-grid 0,50,100"},
      {"weak_sound_effect", "weak.cfg", "--N 10 --K 1 --strategy sound-effect --trials 1"},
  };
  std::size_t identical = 0;
  std::string failures;
  for (const auto& job : jobs) {
    const fs::path out = root / job.name;
    const std::string args = "--config " + d + "/" + job.config + " " + job.overrides +
                             " --output-dir " + out.string();
    std::map<std::string, std::string> first;
    bool ok = true;
    for (int pass = 0; pass < 2 && ok; ++pass) {
      fs::remove_all(out);
      ok &= run_cli("attack " + args, root / (job.name + ".attack.log")) == 0;
      ok &= run_cli("eval " + args, root / (job.name + ".eval.log")) == 0;
      if (pass == 0) first = tree(out);
    }
    ok &= !first.empty() && first == tree(out);
    if (ok) ++identical;
    else failures += " " + job.name;
  }
  // Model training and room simulation replay as well.
  const std::string ckpt = (s.dir / "model.ckpt").string();
  std::string bytes[2];
  std::string banks[2];
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path m = root / ("trained" + std::to_string(pass) + ".ckpt");
    run_cli("model train --model " + ckpt + " --manifest " + d + "/train.tsv --epochs 1 --out " +
                m.string(),
            root / "train.log");
    bytes[pass] = slurp(m);
    const fs::path b = root / ("bank" + std::to_string(pass));
    run_cli("gen-rir --bank 4 --seed 9 --out " + b.string(), root / "gen.log");
    for (const auto& [name, content] : tree(b)) banks[pass] += name + content;
  }
  const bool extra = !bytes[0].empty() && bytes[0] == bytes[1] && !banks[0].empty() &&
                     banks[0] == banks[1];
  return {identical == jobs.size() && extra,
          fmt("%zu/%zu attack+eval replays byte-identical%s%s, train and gen-rir replay %s",
              identical, jobs.size(), failures.empty() ? "" : ", differing:", failures.c_str(),
              extra ? "identical" : "differ")};
}

Outcome constraint_suite(const Setup& s) {
  const auto fx = fixtures::strong_fixtures(1);
  CorpusSet strong;
  strong.carriers = {fx[0].carrier};
  strong.targets = {fx[0].target};
  const std::vector<Rir> impulse{Rir::impulse()};
  std::size_t strong_violations = 0, strong_iters = 0;
  for (double beta : {1e-3, 1.0}) {
    AttackConfig cfg;
    cfg.N = 1000;
    cfg.beta = beta;
    const StrongResult r =
        attack_strong(s.model, strong, impulse, cfg, [&](const IterationRecord& rec) {
          ++strong_iters;
          for (double z : rec.variable) strong_violations += !(std::abs(std::tanh(z)) < 1.0);
        });
    for (double d : r.delta.values) strong_violations += !(std::abs(d) < 1.0);
  }

  CorpusSet weak;
  weak.user_prompts = fixtures::user_prompts(3);
  const Waveform x = fixtures::command_carrier();
  const TokenSequence target = s.vocab.encode(fixtures::kDenial);
  std::size_t weak_violations = 0, weak_iters = 0;
  for (double beta : {1e-3, 0.05}) {
    AttackConfig cfg;
    cfg.N = 1000;
    cfg.beta = beta;
    const WeakResult r =
        attack_weak(s.model, x, target, weak, impulse, cfg, [&](const IterationRecord& rec) {
          ++weak_iters;
          for (std::size_t i = 0; i < x.size(); ++i) {
            const double v = x[i] + rec.variable[i];
            weak_violations += !(v >= -1.0 && v <= 1.0);
          }
        });
    for (double v : r.audio.samples()) weak_violations += !(v >= -1.0 && v <= 1.0);
  }
  return {strong_violations == 0 && weak_violations == 0 && strong_iters == 2000 &&
              weak_iters == 2000,
          fmt("strong delta outside (-1,1): %zu over %zu iterations; weak x+delta invalid: %zu "
              "over %zu iterations",
              strong_violations, strong_iters, weak_violations, weak_iters)};
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "ajb_acceptance";
  fs::remove_all(dir);
  std::printf("preparing fixtures and training the toy model in %s\n", dir.c_str());
  std::fflush(stdout);
  const auto prep = Clock::now();
  if (run_cli("fixtures --train --out " + dir.string(), fs::temp_directory_path() /
                                                           "ajb_acceptance_fixtures.log") != 0) {
    std::printf("FAIL setup: fixture generation failed\n");
    return 1;
  }
  Setup setup{dir, ToyModel(load_checkpoint(dir / "model.ckpt")), fixtures::vocabulary()};
  std::printf("setup done in %.1f s\n", seconds_since(prep));

  const std::vector<std::pair<std::string, std::function<Outcome(const Setup&)>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"transform oracles", transform_oracles},
      {"RIR correctness", rir_correctness},
      {"metric formulas", metric_formulas},
      {"strong adversary end to end", strong_end_to_end},
      {"weak adversary delay robustness", weak_delay_robustness},
      {"universality on held-out prompts", universality},
      {"RIR robustness ablation", rir_ablation},
      {"determinism", determinism},
      {"constraint suite", constraint_suite},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second(setup);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
