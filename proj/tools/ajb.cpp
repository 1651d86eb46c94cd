#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ajb/ajb.hpp"

namespace fs = std::filesystem;
using namespace ajb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitFormat = 3;
constexpr int kExitRuntime = 4;

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config:
    case ErrorKind::Parameter: return kExitConfig;
    case ErrorKind::Format: return kExitFormat;
    default: return kExitRuntime;
  }
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

std::vector<double> parse_list(const std::string& text, std::size_t expect, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (out.size() != expect) {
    throw ConfigError(std::string(what) + " needs " + std::to_string(expect) + " values");
  }
  return out;
}

Vec3 parse_vec3(const std::string& text, const char* what) {
  const auto v = parse_list(text, 3, what);
  return {v[0], v[1], v[2]};
}

// --------------------------------------------------------------------------
// Run configuration with command-line overrides.

struct ConfigArgs {
  std::string path;
  std::map<std::string, std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.path, "run config file (key = value lines)")->required();
  for (const auto& key : RunConfig::keys()) {
    std::string flag = key;
    for (char& c : flag)
      if (c == '_') c = '-';
    cmd->add_option_function<std::string>(
        "--" + flag, [&args, key](const std::string& v) { args.overrides[key] = v; },
        "override config key " + key);
  }
}

struct LoadedConfig {
  RunConfig raw;       // as written plus overrides, echoed into reports
  RunConfig resolved;  // paths made relative to the config file
};

LoadedConfig load_config(const ConfigArgs& args) {
  LoadedConfig out;
  out.raw = parse_run_config(read_text(args.path));
  for (const auto& [k, v] : args.overrides) out.raw.set(k, v);
  out.raw.validate();
  out.resolved = out.raw;
  out.resolved.resolve(fs::path(args.path).parent_path());
  out.resolved.check_paths();
  return out;
}

std::vector<Rir> load_rirs(const std::string& path) {
  if (path.empty()) return {Rir::impulse()};
  return load_rir_bank(path);
}

struct Inputs {
  ToyModel model;
  Manifest manifest;
  LoadedCorpus corpus;
};

Inputs load_inputs(const RunConfig& cfg) {
  ToyModel model(load_checkpoint(cfg.model));
  Manifest manifest = load_manifest(cfg.manifest);
  LoadedCorpus corpus = load_corpus(manifest, model.params().vocab);
  return {std::move(model), std::move(manifest), std::move(corpus)};
}

// The weak adversary's x0 is the single carrier of its manifest; its
// transcript is the target response.
std::size_t weak_carrier_index(const LoadedCorpus& c) {
  if (c.set.carriers.size() != 1) {
    throw ConfigError("a weak-adversary manifest needs exactly one carrier, found " +
                      std::to_string(c.set.carriers.size()));
  }
  return 0;
}

fs::path artifacts_dir(const RunConfig& cfg) { return fs::path(cfg.output_dir) / "artifacts"; }

// --------------------------------------------------------------------------
// attack

int cmd_attack(const ConfigArgs& args) {
  const LoadedConfig lc = load_config(args);
  const RunConfig& cfg = lc.resolved;
  const Inputs in = load_inputs(cfg);
  const std::vector<Rir> rirs = load_rirs(cfg.rir_bank);
  if (cfg.attack.N == 0) {
    std::cerr << "warning: N = 0, no optimization is run and the artifact equals the carrier\n";
  }

  std::optional<LoadedCorpus> held_out;
  if (!cfg.eval_manifest.empty() && cfg.eval_manifest != cfg.manifest) {
    held_out = load_corpus(load_manifest(cfg.eval_manifest), in.model.params().vocab);
  }

  const fs::path art = artifacts_dir(cfg);
  const fs::path traces = fs::path(cfg.output_dir) / "traces";
  const fs::path reports = fs::path(cfg.output_dir) / "reports";
  fs::create_directories(art);
  fs::create_directories(traces);
  fs::create_directories(reports);

  AttackTrace trace;
  Json summary;
  summary["config"] = lc.raw.to_json();
  if (cfg.adversary == Adversary::Strong) {
    StrongResult r;
    if (cfg.attack.K > 1) {
      const std::vector<Waveform> none;
      r = attack_universal_strong(in.model, in.corpus.set, rirs, cfg.attack,
                                  held_out ? held_out->set.carriers : none);
    } else {
      r = attack_strong(in.model, in.corpus.set, rirs, cfg.attack);
    }
    save_perturbation(art / "perturbation.bin", r.delta);
    for (std::size_t i = 0; i < r.carriers.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "patched_%03zu.wav", i);
      write_wav(art / name, strong_patched(r.carriers[i], r.delta, cfg.attack));
    }
    trace = std::move(r.trace);
    summary["artifact"] = "perturbation.bin";
    summary["samples"] = r.delta.size();
  } else {
    const std::size_t c = weak_carrier_index(in.corpus);
    WeakResult r;
    if (cfg.attack.K > 1) {
      const std::vector<Waveform> none;
      r = attack_universal_weak(in.model, in.corpus.set.carriers[c], in.corpus.set.targets[c],
                                in.corpus.set, rirs, cfg.attack,
                                held_out ? held_out->set.user_prompts : none);
    } else {
      r = attack_weak(in.model, in.corpus.set.carriers[c], in.corpus.set.targets[c],
                      in.corpus.set, rirs, cfg.attack);
    }
    write_wav(art / "jailbreak.wav", r.audio);
    write_wav(art / "carrier.wav", r.carrier);
    save_perturbation(art / "perturbation.bin", r.delta);
    trace = std::move(r.trace);
    summary["artifact"] = "jailbreak.wav";
    summary["samples"] = r.audio.size();
  }

  std::string tsv = "iteration\tloss\n";
  char line[64];
  for (std::size_t i = 0; i < trace.losses.size(); ++i) {
    std::snprintf(line, sizeof(line), "%zu\t%.17g\n", i, trace.losses[i]);
    tsv += line;
  }
  write_text(traces / "trace.tsv", tsv);
  summary["iterations"] = trace.losses.size();
  summary["final_loss"] = trace.losses.empty() ? Json(nullptr) : Json(trace.losses.back());
  write_text(reports / "attack.json", summary.dump(2) + "\n");

  std::cerr << "attack finished: " << trace.losses.size() << " iterations";
  if (!trace.losses.empty()) std::cerr << ", final loss " << trace.losses.back();
  std::cerr << ", " << trace.wall_seconds << " s\n";
  return kExitOk;
}

// --------------------------------------------------------------------------
// eval

std::vector<TranscriptPair> load_transcripts(const std::string& path) {
  std::vector<TranscriptPair> out;
  if (path.empty()) return out;
  std::stringstream ss(read_text(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(ss, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto a = line.find('\t');
    const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (b == std::string::npos) {
      throw FormatError(path + " line " + std::to_string(n) +
                        ": expected <id>\\t<hypothesis>\\t<reference>");
    }
    out.push_back({line.substr(0, a), line.substr(a + 1, b - a - 1), line.substr(b + 1)});
  }
  return out;
}

int cmd_eval(const ConfigArgs& args, const std::string& artifact) {
  const LoadedConfig lc = load_config(args);
  const RunConfig& cfg = lc.resolved;
  const Inputs in = load_inputs(cfg);
  const LoadedCorpus eval_corpus =
      cfg.eval_manifest.empty()
          ? in.corpus
          : load_corpus(load_manifest(cfg.eval_manifest), in.model.params().vocab);

  EvalOptions opts;
  opts.trials = cfg.trials;
  opts.mode = cfg.decode;
  opts.mode.seed = derive_seed(cfg.attack.seed, 1);
  opts.allow_substring = cfg.review_substring;
  opts.tau_ms = cfg.eval_tau_ms;
  opts.delay_grid = cfg.delay_grid;
  if (!cfg.eval_rir_bank.empty()) opts.channels = load_rir_bank(cfg.eval_rir_bank);
  opts.transcripts = load_transcripts(cfg.transcripts);
  opts.config = lc.raw.to_json();

  EvalReport report;
  if (cfg.adversary == Adversary::Strong) {
    const fs::path path = artifact.empty() ? artifacts_dir(cfg) / "perturbation.bin" : fs::path(artifact);
    if (!fs::exists(path)) throw ConfigError("artifact '" + path.string() + "' does not exist");
    const Perturbation delta = load_perturbation(path);
    std::vector<PromptCase> prompts;
    for (std::size_t i = 0; i < eval_corpus.set.carriers.size(); ++i) {
      prompts.push_back({eval_corpus.carrier_ids[i], eval_corpus.set.carriers[i],
                         eval_corpus.set.targets[i]});
    }
    if (prompts.empty()) throw ConfigError("evaluation manifest lists no carriers");
    report = evaluate_strong(in.model, delta, prompts, cfg.attack, opts);
  } else {
    const fs::path path = artifact.empty() ? artifacts_dir(cfg) / "jailbreak.wav" : fs::path(artifact);
    if (!fs::exists(path)) throw ConfigError("artifact '" + path.string() + "' does not exist");
    const Waveform jailbreak = weak_played(read_wav(path), cfg.attack);
    const TokenSequence& target = in.corpus.set.targets[weak_carrier_index(in.corpus)];
    std::vector<PromptCase> prompts;
    for (std::size_t i = 0; i < eval_corpus.set.user_prompts.size(); ++i) {
      prompts.push_back({eval_corpus.prompt_ids[i], eval_corpus.set.user_prompts[i], target});
    }
    if (prompts.empty()) throw ConfigError("evaluation manifest lists no user prompts");
    report = evaluate_weak(in.model, jailbreak, prompts, opts);
  }

  const std::string json = report.to_json().dump(2) + "\n";
  write_text(fs::path(cfg.output_dir) / "reports" / "report.json", json);
  std::cout << json;
  return kExitOk;
}

// --------------------------------------------------------------------------
// gen-rir

struct RirArgs {
  std::string out;
  std::size_t bank = 0;
  std::uint64_t seed = 0;
  std::string dims, absorption, source, mic;
  int order = -1;
  double sound_speed = 0.0;
  std::size_t length = 0;
  std::string format = "wav";
};

int cmd_gen_rir(const RirArgs& a) {
  RirFormat format;
  if (a.format == "wav") format = RirFormat::Wav;
  else if (a.format == "raw") format = RirFormat::Raw;
  else throw ConfigError("--format must be wav or raw");

  std::vector<RoomSpec> rooms;
  if (a.bank > 0) {
    RoomDistribution dist;
    if (a.order >= 0) dist.max_order = a.order;
    if (a.length > 0) dist.rir_length = a.length;
    rooms = random_rooms(a.bank, a.seed, dist);
  } else {
    RoomSpec room;
    if (!a.dims.empty()) room.dims = parse_vec3(a.dims, "--dims");
    if (!a.absorption.empty()) {
      const auto v = parse_list(a.absorption, a.absorption.find(',') == std::string::npos ? 1 : 6,
                                "--absorption");
      for (std::size_t i = 0; i < 6; ++i) room.absorption[i] = v.size() == 1 ? v[0] : v[i];
    }
    if (!a.source.empty()) room.source = parse_vec3(a.source, "--source");
    if (!a.mic.empty()) room.mic = parse_vec3(a.mic, "--mic");
    if (a.order >= 0) room.max_order = a.order;
    if (a.sound_speed > 0.0) room.sound_speed = a.sound_speed;
    if (a.length > 0) room.rir_length = a.length;
    rooms.push_back(room);
  }
  std::vector<Rir> rirs;
  for (const auto& r : rooms) {
    r.validate();
    rirs.push_back(simulate_rir(r));
  }
  if (a.bank > 0) {
    const auto files = save_rir_bank(rirs, rooms, a.out, format);
    for (std::size_t i = 0; i < files.size(); ++i) {
      std::cout << files[i].filename().string() << "\tdirect_delay=" << rooms[i].direct_delay()
                << "\n";
    }
  } else {
    const fs::path out(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    save_rir(rirs[0], out, format);
    std::cout << out.filename().string() << "\tdirect_delay=" << rooms[0].direct_delay() << "\n";
  }
  return kExitOk;
}

// --------------------------------------------------------------------------
// wer

int cmd_wer(const std::string& hyp, const std::string& ref) {
  const double w = wer(read_text(hyp), read_text(ref));
  std::printf("%.4f\n", w);
  return kExitOk;
}

// --------------------------------------------------------------------------
// model

std::vector<TrainingExample> training_examples(const Manifest& m, const Vocabulary& vocab) {
  std::vector<TrainingExample> out;
  for (const auto& e : m.entries) {
    if (e.transcript.find_first_not_of(" \t") == std::string::npos) continue;
    TokenSequence t;
    try {
      t = vocab.encode(e.transcript);
    } catch (const InputError& err) {
      throw ConfigError("transcript of '" + e.path + "': " + err.what());
    }
    out.push_back({read_wav(m.resolve(e)), std::move(t)});
  }
  if (out.empty()) throw ConfigError("training manifest has no transcribed entries");
  return out;
}

int cmd_model_init(const std::string& out, std::uint64_t seed, const std::string& vocab_path) {
  Vocabulary vocab = fixtures::vocabulary();
  if (!vocab_path.empty()) {
    std::vector<std::string> words;
    std::stringstream ss(read_text(vocab_path));
    std::string w;
    while (ss >> w) words.push_back(w);
    vocab = Vocabulary(std::move(words));
  }
  save_checkpoint(ToyModelParams::initialize(seed, std::move(vocab)), out);
  return kExitOk;
}

int cmd_model_train(const std::string& model, const std::string& manifest, const std::string& out,
                    const TrainOptions& opts) {
  const ToyModelParams p = load_checkpoint(model);
  const auto corpus = training_examples(load_manifest(manifest), p.vocab);
  const TrainResult r = train_toy(p, corpus, opts);
  save_checkpoint(r.params, out);
  for (std::size_t e = 0; e < r.loss_log.size(); ++e) {
    std::fprintf(stderr, "epoch %zu\tloss %.6f\n", e + 1, r.loss_log[e]);
  }
  return kExitOk;
}

int cmd_model_inspect(const std::string& model) {
  const ToyModelParams p = load_checkpoint(model);
  const auto& d = p.dims;
  std::printf("sample_rate %d\nwindow %zu\nhop %zu\nfeatures %zu\nhidden %zu\npositions %zu\n",
              p.sample_rate, d.window, d.hop, d.features, d.hidden, d.positions);
  std::printf("parameters %zu\nvocab %zu\n", p.parameter_count(), p.vocab.size());
  std::string words;
  for (const auto& w : p.vocab.words()) words += (words.empty() ? "" : " ") + w;
  std::printf("%s\n", words.c_str());
  return kExitOk;
}

// --------------------------------------------------------------------------
// fixtures

std::string wav_name(const char* stem, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "audio/%s_%03zu.wav", stem, i);
  return buf;
}

int cmd_fixtures(const std::string& dir_str, bool train) {
  const fs::path dir(dir_str);
  fs::create_directories(dir / "audio");
  auto put = [&](const std::string& rel, const Waveform& w) { write_wav(dir / rel, w); };
  const Vocabulary vocab = fixtures::vocabulary();

  Manifest train_m, strong_m, weak_m, held_m;
  const auto corpus = fixtures::training_corpus(24);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const std::string rel = wav_name("train", i);
    put(rel, corpus[i].audio);
    train_m.entries.push_back({rel, i % 3 == 0 ? Role::Carrier : Role::UserPrompt,
                               vocab.decode(corpus[i].transcript)});
  }
  const auto strong = fixtures::strong_fixtures(20);
  for (std::size_t i = 0; i < strong.size(); ++i) {
    const std::string rel = wav_name("carrier", i);
    put(rel, strong[i].carrier);
    strong_m.entries.push_back({rel, Role::Carrier, vocab.decode(strong[i].target)});
  }
  put("audio/command.wav", fixtures::command_carrier());
  weak_m.entries.push_back({"audio/command.wav", Role::Carrier, fixtures::kDenial});
  const auto prompts = fixtures::user_prompts(20);
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    const std::string rel = wav_name("prompt", i);
    put(rel, prompts[i]);
    weak_m.entries.push_back({rel, Role::UserPrompt, ""});
  }
  const auto held = fixtures::held_out_prompts(10);
  for (std::size_t i = 0; i < held.size(); ++i) {
    const std::string rel = wav_name("heldout", i);
    put(rel, held[i]);
    held_m.entries.push_back({rel, Role::UserPrompt, ""});
  }
  const std::pair<fixtures::Voice, Role> pools[] = {
      {fixtures::Voice::Benign, Role::Benign},
      {fixtures::Voice::SoundEffect, Role::SoundEffect},
      {fixtures::Voice::Music, Role::Music}};
  for (const auto& [voice, role] : pools) {
    const auto clips = fixtures::pool(voice, 3);
    for (std::size_t i = 0; i < clips.size(); ++i) {
      std::string stem(to_string(role));
      const std::string rel = wav_name(stem.c_str(), i);
      put(rel, clips[i]);
      strong_m.entries.push_back({rel, role, ""});
      weak_m.entries.push_back({rel, role, ""});
    }
  }
  save_manifest(train_m, dir / "train.tsv");
  save_manifest(strong_m, dir / "strong.tsv");
  save_manifest(weak_m, dir / "weak.tsv");
  save_manifest(held_m, dir / "heldout.tsv");

  const auto rooms = random_rooms(20, 11);
  const auto eval_rooms = random_rooms(5, 12);
  std::vector<Rir> bank, eval_bank;
  for (const auto& r : rooms) bank.push_back(simulate_rir(r));
  for (const auto& r : eval_rooms) eval_bank.push_back(simulate_rir(r));
  save_rir_bank(bank, rooms, dir / "rirs");
  save_rir_bank(eval_bank, eval_rooms, dir / "rirs_eval");

  write_text(dir / "strong.cfg",
             "# Strong adversary, Base strategy, one carrier per iteration.\n"
             "adversary = strong\nstrategy = base\nK = 1\nM = 1\nN = 500\nbeta = 0.001\n"
             "epsilon = 1\nseed = 1\nmanifest = strong.tsv\nmodel = model.ckpt\n"
             "output_dir = out/strong\ntrials = 10\ndecode = greedy\n");
  write_text(dir / "weak.cfg",
             "# Weak adversary, universal over the training prompts.\n"
             "adversary = weak\nstrategy = base\nK = 5\nM = 1\nN = 2000\nbeta = 0.001\n"
             "tau_u = 100\nseed = 1\nmanifest = weak.tsv\neval_manifest = heldout.tsv\n"
             "model = model.ckpt\noutput_dir = out/weak\ntrials = 10\ndecode = greedy\n"
             "delay_grid = 0..100:10\n");
  write_text(dir / "wer_ref.txt", "i cannot help with that request\n");
  write_text(dir / "wer_hyp.txt", "I can help with this request.\n");

  if (train) {
    const TrainResult r =
        train_toy(ToyModelParams::initialize(7, vocab), corpus, TrainOptions{});
    save_checkpoint(r.params, dir / "model.ckpt");
    std::fprintf(stderr, "trained model: final loss %.6f\n", r.loss_log.back());
  }
  std::cout << "fixtures written to " << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ajb: adversarial audio jailbreak toolkit"};
  app.require_subcommand(1);
  int rc = kExitOk;

  ConfigArgs attack_args, eval_args;
  std::string artifact;
  auto* attack = app.add_subcommand("attack", "optimize a jailbreak perturbation");
  add_config_options(attack, attack_args);
  auto* eval = app.add_subcommand("eval", "evaluate a jailbreak artifact");
  add_config_options(eval, eval_args);
  eval->add_option("--artifact", artifact, "artifact path (default: <output_dir>/artifacts)");

  RirArgs rir;
  auto* gen = app.add_subcommand("gen-rir", "simulate room impulse responses");
  gen->add_option("--out", rir.out, "output file, or directory with --bank")->required();
  gen->add_option("--bank", rir.bank, "number of random rooms to draw");
  gen->add_option("--seed", rir.seed, "seed for --bank");
  gen->add_option("--dims", rir.dims, "room size Lx,Ly,Lz in metres");
  gen->add_option("--absorption", rir.absorption, "one value or six comma-separated");
  gen->add_option("--source", rir.source, "source position x,y,z");
  gen->add_option("--mic", rir.mic, "microphone position x,y,z");
  gen->add_option("--order", rir.order, "maximum reflection order");
  gen->add_option("--sound-speed", rir.sound_speed, "m/s");
  gen->add_option("--length", rir.length, "RIR length in samples");
  gen->add_option("--format", rir.format, "wav or raw");

  std::string hyp, ref;
  auto* werc = app.add_subcommand("wer", "word error rate of a hypothesis file");
  werc->add_option("hypothesis", hyp)->required();
  werc->add_option("reference", ref)->required();

  auto* model = app.add_subcommand("model", "toy model checkpoints");
  model->require_subcommand(1);
  std::string m_out, m_vocab, m_in, m_manifest;
  std::uint64_t m_seed = 0;
  TrainOptions topts;
  auto* init = model->add_subcommand("init", "write a freshly initialized checkpoint");
  init->add_option("--out", m_out)->required();
  init->add_option("--seed", m_seed);
  init->add_option("--vocab", m_vocab, "whitespace-separated word list");
  auto* train = model->add_subcommand("train", "train a checkpoint on a manifest");
  train->add_option("--model", m_in)->required();
  train->add_option("--manifest", m_manifest)->required();
  train->add_option("--out", m_out)->required();
  train->add_option("--epochs", topts.epochs);
  train->add_option("--lr", topts.learning_rate);
  train->add_option("--seed", topts.seed);
  train->add_option("--batch-size", topts.batch_size);
  auto* inspect = model->add_subcommand("inspect", "print dimensions and vocabulary");
  inspect->add_option("checkpoint", m_in)->required();

  std::string fx_dir;
  bool fx_train = false;
  auto* fx = app.add_subcommand("fixtures", "write the synthetic demo corpus");
  fx->add_option("--out", fx_dir)->required();
  fx->add_flag("--train", fx_train, "also train model.ckpt on the training manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*attack) rc = cmd_attack(attack_args);
    else if (*eval) rc = cmd_eval(eval_args, artifact);
    else if (*gen) rc = cmd_gen_rir(rir);
    else if (*werc) rc = cmd_wer(hyp, ref);
    else if (*init) rc = cmd_model_init(m_out, m_seed, m_vocab);
    else if (*train) rc = cmd_model_train(m_in, m_manifest, m_out, topts);
    else if (*inspect) rc = cmd_model_inspect(m_in);
    else if (*fx) rc = cmd_fixtures(fx_dir, fx_train);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return rc;
}
