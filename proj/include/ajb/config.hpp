#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ajb/attack.hpp"
#include "ajb/error.hpp"
#include "ajb/eval.hpp"
#include "ajb/model.hpp"

namespace ajb {

enum class Adversary { Strong, Weak };

inline std::string_view to_string(Adversary a) { return a == Adversary::Strong ? "strong" : "weak"; }

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("key '" + std::string(key) + "': '" + std::string(text) +
                      "' is not a number");
  }
  return v;
}

inline std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError("key '" + std::string(key) + "': '" + std::string(text) +
                      "' is not a non-negative integer");
  }
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("key '" + std::string(key) + "': expected true or false");
}

}  // namespace detail

// "a..b:step" (inclusive) or a comma-separated list of delays in ms.
inline std::vector<double> parse_delay_grid(std::string_view text) {
  std::vector<double> out;
  const std::string t = detail::trim(text);
  if (t.empty()) return out;
  const auto dots = t.find("..");
  if (dots != std::string::npos) {
    const auto colon = t.find(':', dots);
    if (colon == std::string::npos) throw ConfigError("delay grid '" + t + "' needs a :step");
    const double lo = detail::parse_number("delay_grid", t.substr(0, dots));
    const double hi = detail::parse_number("delay_grid", t.substr(dots + 2, colon - dots - 2));
    const double step = detail::parse_number("delay_grid", t.substr(colon + 1));
    if (!(step > 0.0) || hi < lo || lo < 0.0) {
      throw ConfigError("delay grid '" + t + "' is empty or has a non-positive step");
    }
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
    return out;
  }
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double v = detail::parse_number("delay_grid", detail::trim(item));
    if (v < 0.0) throw ConfigError("delays must be non-negative");
    out.push_back(v);
  }
  return out;
}

// Everything one attack + evaluation run needs. Paths are kept as written;
// resolve() makes them relative to the config file's directory.
struct RunConfig {
  Adversary adversary = Adversary::Strong;
  AttackConfig attack;
  std::string manifest;
  std::string eval_manifest;
  std::string rir_bank;
  std::string eval_rir_bank;
  std::string model;
  std::string output_dir = "out";
  std::string transcripts;
  std::size_t trials = 10;
  std::vector<double> delay_grid;
  DecodeMode decode;
  double eval_tau_ms = 0.0;
  bool review_substring = true;

  static const std::vector<std::string>& keys() {
    static const std::vector<std::string> k = {
        "adversary", "strategy",  "alpha",      "K",        "M",
        "N",         "beta",      "epsilon",    "tau_u",    "seed",
        "rir_tail",  "manifest",  "eval_manifest", "rir_bank", "eval_rir_bank",
        "model",     "output_dir", "transcripts", "trials",  "delay_grid",
        "decode",    "temperature", "top_k",    "eval_tau", "review_substring"};
    return k;
  }

  void set(std::string_view key, std::string_view raw) {
    using namespace detail;
    const std::string value = trim(raw);
    if (key == "adversary") {
      if (value == "strong") adversary = Adversary::Strong;
      else if (value == "weak") adversary = Adversary::Weak;
      else throw ConfigError("adversary must be strong or weak, got '" + value + "'");
    } else if (key == "strategy") {
      attack.strategy = parse_strategy(value);
    } else if (key == "alpha") {
      attack.alpha = parse_number(key, value);
    } else if (key == "K") {
      attack.K = parse_unsigned(key, value);
    } else if (key == "M") {
      attack.M = parse_unsigned(key, value);
    } else if (key == "N") {
      attack.N = parse_unsigned(key, value);
    } else if (key == "beta") {
      attack.beta = parse_number(key, value);
    } else if (key == "epsilon") {
      attack.epsilon = parse_number(key, value);
    } else if (key == "tau_u") {
      attack.tau_u_ms = parse_number(key, value);
    } else if (key == "seed") {
      attack.seed = parse_unsigned(key, value);
    } else if (key == "rir_tail") {
      if (value == "full") attack.truncate_reverb_tail = false;
      else if (value == "truncate") attack.truncate_reverb_tail = true;
      else throw ConfigError("rir_tail must be full or truncate");
    } else if (key == "manifest") {
      manifest = value;
    } else if (key == "eval_manifest") {
      eval_manifest = value;
    } else if (key == "rir_bank") {
      rir_bank = value;
    } else if (key == "eval_rir_bank") {
      eval_rir_bank = value;
    } else if (key == "model") {
      model = value;
    } else if (key == "output_dir") {
      output_dir = value;
    } else if (key == "transcripts") {
      transcripts = value;
    } else if (key == "trials") {
      trials = parse_unsigned(key, value);
    } else if (key == "delay_grid") {
      delay_grid = parse_delay_grid(value);
    } else if (key == "decode") {
      if (value == "greedy") decode.kind = DecodeMode::Kind::Greedy;
      else if (value == "sampled") decode.kind = DecodeMode::Kind::Sampled;
      else throw ConfigError("decode must be greedy or sampled");
    } else if (key == "temperature") {
      decode.temperature = parse_number(key, value);
    } else if (key == "top_k") {
      decode.top_k = parse_unsigned(key, value);
    } else if (key == "eval_tau") {
      eval_tau_ms = parse_number(key, value);
    } else if (key == "review_substring") {
      review_substring = parse_bool(key, value);
    } else {
      throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
  }

  std::string get(std::string_view key) const {
    using detail::format_number;
    if (key == "adversary") return std::string(to_string(adversary));
    if (key == "strategy") return std::string(to_string(attack.strategy));
    if (key == "alpha") return format_number(attack.alpha);
    if (key == "K") return std::to_string(attack.K);
    if (key == "M") return std::to_string(attack.M);
    if (key == "N") return std::to_string(attack.N);
    if (key == "beta") return format_number(attack.beta);
    if (key == "epsilon") return format_number(attack.epsilon);
    if (key == "tau_u") return format_number(attack.tau_u_ms);
    if (key == "seed") return std::to_string(attack.seed);
    if (key == "rir_tail") return attack.truncate_reverb_tail ? "truncate" : "full";
    if (key == "manifest") return manifest;
    if (key == "eval_manifest") return eval_manifest;
    if (key == "rir_bank") return rir_bank;
    if (key == "eval_rir_bank") return eval_rir_bank;
    if (key == "model") return model;
    if (key == "output_dir") return output_dir;
    if (key == "transcripts") return transcripts;
    if (key == "trials") return std::to_string(trials);
    if (key == "delay_grid") {
      std::string s;
      for (std::size_t i = 0; i < delay_grid.size(); ++i) {
        if (i) s += ',';
        s += format_number(delay_grid[i]);
      }
      return s;
    }
    if (key == "decode") return decode.is_greedy() ? "greedy" : "sampled";
    if (key == "temperature") return format_number(decode.temperature);
    if (key == "top_k") return std::to_string(decode.top_k);
    if (key == "eval_tau") return format_number(eval_tau_ms);
    if (key == "review_substring") return review_substring ? "true" : "false";
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }

  std::string serialize() const {
    std::string out;
    for (const auto& k : keys()) out += k + " = " + get(k) + "\n";
    return out;
  }

  Json to_json() const {
    Json j = Json::object();
    for (const auto& k : keys()) j[k] = get(k);
    return j;
  }

  // Semantic checks that do not touch the filesystem.
  void validate() const {
    if (manifest.empty()) throw ConfigError("config key 'manifest' is required");
    if (model.empty()) throw ConfigError("config key 'model' is required");
    if (trials == 0) throw ConfigError("trials must be positive");
    if (attack.M == 0) throw ConfigError("M must be at least 1");
    if (attack.K == 0) throw ConfigError("K must be at least 1");
    if (attack.M > 1 && rir_bank.empty()) {
      throw ConfigError("M > 1 needs an rir_bank");
    }
    if (!decode.is_greedy() && !(decode.temperature > 0.0)) {
      throw ConfigError("temperature must be positive");
    }
    if (!decode.is_greedy() && decode.top_k == 0) throw ConfigError("top_k must be positive");
    if (eval_tau_ms < 0.0) throw ConfigError("eval_tau must be non-negative");
    if (adversary == Adversary::Strong && !delay_grid.empty()) {
      throw ConfigError("delay_grid applies to the weak adversary only");
    }
  }

  // Makes every non-empty relative path relative to `base`.
  void resolve(const std::filesystem::path& base) {
    for (std::string* p : {&manifest, &eval_manifest, &rir_bank, &eval_rir_bank, &model,
                           &output_dir, &transcripts}) {
      if (!p->empty() && std::filesystem::path(*p).is_relative()) {
        *p = (base / *p).lexically_normal().string();
      }
    }
  }

  // Input paths must exist; output_dir is created on demand.
  void check_paths() const {
    const std::pair<const char*, const std::string*> inputs[] = {
        {"manifest", &manifest},       {"eval_manifest", &eval_manifest},
        {"rir_bank", &rir_bank},       {"eval_rir_bank", &eval_rir_bank},
        {"model", &model},             {"transcripts", &transcripts}};
    for (const auto& [key, path] : inputs) {
      if (!path->empty() && !std::filesystem::exists(*path)) {
        throw ConfigError(std::string(key) + " path '" + *path + "' does not exist");
      }
    }
  }

  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.serialize() == b.serialize();
  }
};

// Flat `key = value` lines; '#' starts a comment line.
inline RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    if (!seen.emplace(key, line_no).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key +
                        "'");
    }
    try {
      cfg.set(key, std::string_view(t).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_run_config(ss.str());
  cfg.resolve(path.parent_path());
  return cfg;
}

}  // namespace ajb
