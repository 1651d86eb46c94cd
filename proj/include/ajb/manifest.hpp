#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ajb/attack.hpp"
#include "ajb/error.hpp"
#include "ajb/model.hpp"
#include "ajb/wav_io.hpp"

namespace ajb {

enum class Role { Carrier, UserPrompt, Benign, SoundEffect, Music };

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::Carrier: return "carrier";
    case Role::UserPrompt: return "user-prompt";
    case Role::Benign: return "benign";
    case Role::SoundEffect: return "sound-effect";
    case Role::Music: return "music";
  }
  return "?";
}

inline Role parse_role(std::string_view s) {
  for (Role r : {Role::Carrier, Role::UserPrompt, Role::Benign, Role::SoundEffect, Role::Music}) {
    if (s == to_string(r)) return r;
  }
  throw ConfigError("unknown manifest role '" + std::string(s) + "'");
}

struct ManifestEntry {
  std::string path;        // as written; also the entry id
  Role role = Role::Carrier;
  std::string transcript;  // target response for carriers, may be empty otherwise
};

// Lines of `<path>\t<role>\t<transcript-or-empty>`. Blank lines and lines
// starting with '#' are skipped. Relative paths resolve against base_dir.
struct Manifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> entries;

  std::filesystem::path resolve(const ManifestEntry& e) const {
    const std::filesystem::path p(e.path);
    return p.is_relative() ? base_dir / p : p;
  }

  std::vector<const ManifestEntry*> with_role(Role r) const {
    std::vector<const ManifestEntry*> out;
    for (const auto& e : entries)
      if (e.role == r) out.push_back(&e);
    return out;
  }

  std::string serialize() const {
    std::string out;
    for (const auto& e : entries) {
      out += e.path + "\t" + std::string(to_string(e.role)) + "\t" + e.transcript + "\n";
    }
    return out;
  }
};

inline Manifest parse_manifest(std::string_view text, std::filesystem::path base_dir = {}) {
  Manifest m;
  m.base_dir = std::move(base_dir);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos
                                                                   : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    const std::string where = "manifest line " + std::to_string(line_no) + ": ";
    if (fields.size() < 2 || fields.size() > 3) {
      throw ConfigError(where + "expected <path>\\t<role>\\t<transcript>");
    }
    if (fields[0].empty()) throw ConfigError(where + "empty path");
    ManifestEntry e;
    e.path = fields[0];
    try {
      e.role = parse_role(fields[1]);
    } catch (const ConfigError& err) {
      throw ConfigError(where + err.what());
    }
    if (fields.size() == 3) e.transcript = fields[2];
    if (e.role == Role::Carrier && e.transcript.find_first_not_of(" \t") == std::string::npos) {
      throw ConfigError(where + "carrier '" + e.path + "' has no target transcript");
    }
    for (const auto& other : m.entries) {
      if (other.path == e.path) throw ConfigError(where + "duplicate path '" + e.path + "'");
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open manifest '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

inline void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write manifest '" + path.string() + "'");
  out << m.serialize();
}

// Audio and encoded targets of a manifest, with ids kept alongside.
struct LoadedCorpus {
  CorpusSet set;
  std::vector<std::string> carrier_ids;
  std::vector<std::string> prompt_ids;
};

inline LoadedCorpus load_corpus(const Manifest& m, const Vocabulary& vocab) {
  LoadedCorpus out;
  for (const auto& e : m.entries) {
    Waveform w = read_wav(m.resolve(e));
    switch (e.role) {
      case Role::Carrier: {
        TokenSequence target;
        try {
          target = vocab.encode(e.transcript);
        } catch (const InputError& err) {
          throw ConfigError("target of '" + e.path + "': " + err.what());
        }
        out.set.carriers.push_back(std::move(w));
        out.set.targets.push_back(std::move(target));
        out.carrier_ids.push_back(e.path);
        break;
      }
      case Role::UserPrompt:
        out.set.user_prompts.push_back(std::move(w));
        out.prompt_ids.push_back(e.path);
        break;
      case Role::Benign: out.set.benign.push_back(std::move(w)); break;
      case Role::SoundEffect: out.set.sound_effects.push_back(std::move(w)); break;
      case Role::Music: out.set.music.push_back(std::move(w)); break;
    }
  }
  return out;
}

}  // namespace ajb
