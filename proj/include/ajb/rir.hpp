#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ajb/error.hpp"
#include "ajb/random.hpp"
#include "ajb/wav_io.hpp"
#include "ajb/waveform.hpp"

namespace ajb {

using Vec3 = std::array<double, 3>;

inline double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Shoebox room with one absorption coefficient per wall, ordered
// {x=0, x=Lx, y=0, y=Ly, z=0, z=Lz}.
struct RoomSpec {
  Vec3 dims{10.0, 4.0, 3.5};
  std::array<double, 6> absorption{0.3, 0.3, 0.3, 0.3, 0.3, 0.3};
  int max_order = 3;
  double sound_speed = 343.0;
  int sample_rate = kDefaultSampleRate;
  Vec3 source{2.0, 2.0, 1.5};
  Vec3 mic{5.0, 2.0, 1.5};
  std::size_t rir_length = 4096;

  double direct_distance() const { return distance(source, mic); }

  std::size_t direct_delay() const {
    return static_cast<std::size_t>(
        std::llround(direct_distance() / sound_speed * sample_rate));
  }

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      if (!(dims[a] > 0.0)) throw ConfigError("room dimensions must be positive");
      if (!(source[a] > 0.0 && source[a] < dims[a])) {
        throw ConfigError("source position lies outside the room");
      }
      if (!(mic[a] > 0.0 && mic[a] < dims[a])) {
        throw ConfigError("microphone position lies outside the room");
      }
    }
    for (double a : absorption) {
      if (!(a >= 0.0 && a <= 1.0)) {
        throw ConfigError("absorption coefficients must lie in [0, 1]");
      }
    }
    if (max_order < 0) throw ConfigError("reflection order must be non-negative");
    if (!(sound_speed > 0.0)) throw ConfigError("sound speed must be positive");
    if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
    if (rir_length == 0) throw ConfigError("rir length must be positive");
    if (direct_delay() >= rir_length) {
      throw ConfigError("direct-path delay of " + std::to_string(direct_delay()) +
                        " samples does not fit in an RIR of length " +
                        std::to_string(rir_length));
    }
  }
};

class Rir {
 public:
  Rir() : taps_{1.0} {}

  explicit Rir(std::vector<double> taps, int sample_rate = kDefaultSampleRate)
      : taps_(std::move(taps)), sample_rate_(sample_rate) {
    if (taps_.empty()) throw ParameterError("an RIR needs at least one tap");
    if (sample_rate_ <= 0) throw ParameterError("RIR sample rate must be positive");
    for (double t : taps_) {
      if (!std::isfinite(t)) throw NumericError("non-finite RIR tap");
    }
  }

  static Rir impulse(int sample_rate = kDefaultSampleRate) {
    return Rir({1.0}, sample_rate);
  }

  std::span<const double> taps() const { return taps_; }
  std::size_t size() const { return taps_.size(); }
  int sample_rate() const { return sample_rate_; }

  friend bool operator==(const Rir&, const Rir&) = default;

 private:
  std::vector<double> taps_;
  int sample_rate_ = kDefaultSampleRate;
};

struct ImageSource {
  std::array<int, 3> cell;     // lattice index m per axis
  std::array<int, 3> mirror;   // q per axis
  int order = 0;
  double distance = 0.0;
  double amplitude = 0.0;      // product of reflection coefficients / (4 pi d)
  std::size_t tap = 0;
};

// All image sources with reflection order <= room.max_order, in a fixed
// enumeration order.
inline std::vector<ImageSource> image_sources(const RoomSpec& room) {
  room.validate();
  std::array<double, 6> beta{};
  for (int i = 0; i < 6; ++i) beta[i] = std::sqrt(1.0 - room.absorption[i]);

  const int k = room.max_order;
  std::vector<ImageSource> images;
  for (int mx = -k - 1; mx <= k + 1; ++mx)
    for (int my = -k - 1; my <= k + 1; ++my)
      for (int mz = -k - 1; mz <= k + 1; ++mz)
        for (int qx = 0; qx <= 1; ++qx)
          for (int qy = 0; qy <= 1; ++qy)
            for (int qz = 0; qz <= 1; ++qz) {
              const std::array<int, 3> m{mx, my, mz};
              const std::array<int, 3> q{qx, qy, qz};
              int order = 0;
              double gain = 1.0;
              Vec3 pos{};
              for (int a = 0; a < 3; ++a) {
                const int near_hits = std::abs(m[a] - q[a]);
                const int far_hits = std::abs(m[a]);
                order += near_hits + far_hits;
                gain *= std::pow(beta[2 * a], near_hits) *
                        std::pow(beta[2 * a + 1], far_hits);
                pos[a] = (1 - 2 * q[a]) * room.source[a] + 2.0 * m[a] * room.dims[a];
              }
              if (order > k) continue;
              ImageSource img;
              img.cell = m;
              img.mirror = q;
              img.order = order;
              img.distance = distance(pos, room.mic);
              img.amplitude = gain / (4.0 * std::numbers::pi * img.distance);
              img.tap = static_cast<std::size_t>(
                  std::llround(img.distance / room.sound_speed * room.sample_rate));
              images.push_back(img);
            }
  return images;
}

// Unnormalized tap accumulation, truncated to rir_length.
inline std::vector<double> accumulate_taps(const RoomSpec& room) {
  std::vector<double> taps(room.rir_length, 0.0);
  for (const auto& img : image_sources(room)) {
    if (img.tap < taps.size()) taps[img.tap] += img.amplitude;
  }
  return taps;
}

// Image Source Method with nearest-sample placement, peak-normalized to 1.
inline Rir simulate_rir(const RoomSpec& room) {
  std::vector<double> taps = accumulate_taps(room);
  double peak = 0.0;
  for (double t : taps) peak = std::max(peak, std::abs(t));
  if (!(peak > 0.0)) throw NumericError("simulated RIR is identically zero");
  for (double& t : taps) t /= peak;
  return Rir(std::move(taps), room.sample_rate);
}

// Ranges for randomly drawn rooms. Positions keep `margin` metres from walls.
struct RoomDistribution {
  std::array<double, 2> length{3.0, 10.0};
  std::array<double, 2> width{3.0, 10.0};
  std::array<double, 2> height{2.5, 4.0};
  std::array<double, 2> absorption{0.1, 0.7};
  int max_order = 3;
  double margin = 0.5;
  int sample_rate = kDefaultSampleRate;
  std::size_t rir_length = 1024;
};

inline RoomSpec random_room(Rng& rng, const RoomDistribution& dist = {}) {
  RoomSpec room;
  room.dims = {rng.uniform(dist.length[0], dist.length[1]),
               rng.uniform(dist.width[0], dist.width[1]),
               rng.uniform(dist.height[0], dist.height[1])};
  for (double& a : room.absorption) a = rng.uniform(dist.absorption[0], dist.absorption[1]);
  for (int a = 0; a < 3; ++a) {
    room.source[a] = rng.uniform(dist.margin, room.dims[a] - dist.margin);
  }
  for (int a = 0; a < 3; ++a) {
    room.mic[a] = rng.uniform(dist.margin, room.dims[a] - dist.margin);
  }
  room.max_order = dist.max_order;
  room.sample_rate = dist.sample_rate;
  room.rir_length = dist.rir_length;
  return room;
}

inline std::vector<RoomSpec> random_rooms(std::size_t count, std::uint64_t seed,
                                          const RoomDistribution& dist = {}) {
  Rng rng(seed);
  std::vector<RoomSpec> rooms;
  rooms.reserve(count);
  for (std::size_t i = 0; i < count; ++i) rooms.push_back(random_room(rng, dist));
  return rooms;
}

inline std::vector<std::size_t> sample_rir_indices(std::size_t bank_size, std::size_t count,
                                                   Rng& rng) {
  if (count < 1) throw ParameterError("must draw at least one RIR");
  if (bank_size < count) {
    throw ParameterError("RIR bank has " + std::to_string(bank_size) +
                         " entries, cannot draw " + std::to_string(count));
  }
  return sample_without_replacement(bank_size, count, rng);
}

inline std::vector<Rir> sample_rir_bank(std::span<const Rir> bank, std::size_t count,
                                        Rng& rng) {
  std::vector<Rir> out;
  for (std::size_t i : sample_rir_indices(bank.size(), count, rng)) out.push_back(bank[i]);
  return out;
}

enum class RirFormat { Wav, Raw };

inline constexpr std::string_view kRirMagic = "AJBRIR01";

inline void save_rir(const Rir& r, const std::filesystem::path& path,
                     RirFormat format = RirFormat::Wav) {
  if (format == RirFormat::Raw) {
    write_file_bytes(path, encode_f64_vector(kRirMagic, r.taps()));
    return;
  }
  std::vector<double> taps(r.taps().begin(), r.taps().end());
  write_wav(path, clamp_valid(taps, r.sample_rate()));
}

// Format is detected from the file header.
inline Rir load_rir(const std::filesystem::path& path,
                    int raw_sample_rate = kDefaultSampleRate) {
  const auto bytes = read_file_bytes(path);
  try {
    if (bytes.size() >= kRirMagic.size() &&
        std::equal(kRirMagic.begin(), kRirMagic.end(), bytes.begin())) {
      auto taps = decode_f64_vector(kRirMagic, bytes);
      if (taps.empty()) throw FormatError("RIR file has no taps");
      return Rir(std::move(taps), raw_sample_rate);
    }
    Waveform w = decode_wav(bytes);
    if (w.empty()) throw FormatError("RIR file has no taps");
    return Rir(w.data(), w.sample_rate());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// A bank on disk is an index file with one `<file>\t<direct-delay-samples>`
// line per RIR; files are relative to the index.
inline constexpr std::string_view kRirIndexName = "index.tsv";

inline std::vector<std::filesystem::path> save_rir_bank(std::span<const Rir> rirs,
                                                        std::span<const RoomSpec> rooms,
                                                        const std::filesystem::path& dir,
                                                        RirFormat format = RirFormat::Wav) {
  if (rirs.size() != rooms.size()) throw ParameterError("one room per RIR expected");
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> files;
  std::string index = "# file\tdirect_delay_samples\n";
  for (std::size_t i = 0; i < rirs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "rir_%03zu.%s", i,
                  format == RirFormat::Wav ? "wav" : "rir");
    save_rir(rirs[i], dir / name, format);
    files.push_back(dir / name);
    index += std::string(name) + "\t" + std::to_string(rooms[i].direct_delay()) + "\n";
  }
  const std::vector<std::uint8_t> bytes(index.begin(), index.end());
  write_file_bytes(dir / kRirIndexName, bytes);
  return files;
}

// Accepts a bank directory, an index file, or a single RIR file.
inline std::vector<Rir> load_rir_bank(const std::filesystem::path& path,
                                      int raw_sample_rate = kDefaultSampleRate) {
  std::filesystem::path index = path;
  if (std::filesystem::is_directory(path)) index = path / kRirIndexName;
  if (index.extension() != ".tsv") return {load_rir(path, raw_sample_rate)};
  const auto bytes = read_file_bytes(index);
  const std::string text(bytes.begin(), bytes.end());
  std::vector<Rir> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string file = line.substr(0, line.find('\t'));
    out.push_back(load_rir(index.parent_path() / file, raw_sample_rate));
  }
  if (out.empty()) throw FormatError(index.string() + ": RIR bank index lists no files");
  return out;
}

// Full convolution followed by clamping into valid audio.
inline Waveform convolve(const Waveform& w, const Rir& r) {
  return clamp_valid(convolve_full(w.samples(), r.taps()), w.sample_rate());
}

}  // namespace ajb
