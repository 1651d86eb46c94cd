#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ajb/error.hpp"
#include "ajb/waveform.hpp"

namespace ajb {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written assuming a little-endian host");

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

inline void put_tag(std::vector<std::uint8_t>& out, std::string_view tag) {
  out.insert(out.end(), tag.begin(), tag.end());
}

// Bounds-checked little-endian reader over a byte buffer.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError(what_ + ": truncated data");
  }

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::int16_t i16() { return static_cast<std::int16_t>(u16()); }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  std::string tag(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

}  // namespace detail

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

inline void write_file_bytes(const std::filesystem::path& path,
                             std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

// PCM16 quantization: round to nearest, saturate to the int16 range.
inline std::int16_t to_pcm16(double x) {
  const double scaled = std::nearbyint(x * 32768.0);
  if (scaled >= 32767.0) return 32767;
  if (scaled <= -32768.0) return -32768;
  return static_cast<std::int16_t>(scaled);
}

inline std::vector<std::uint8_t> encode_wav(const Waveform& w) {
  const auto data_bytes = static_cast<std::uint32_t>(w.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  detail::put_tag(out, "RIFF");
  detail::put_u32(out, 36 + data_bytes);
  detail::put_tag(out, "WAVE");
  detail::put_tag(out, "fmt ");
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);  // PCM
  detail::put_u16(out, 1);  // mono
  detail::put_u32(out, static_cast<std::uint32_t>(w.sample_rate()));
  detail::put_u32(out, static_cast<std::uint32_t>(w.sample_rate()) * 2);
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  detail::put_tag(out, "data");
  detail::put_u32(out, data_bytes);
  for (double s : w.samples()) {
    detail::put_u16(out, static_cast<std::uint16_t>(to_pcm16(s)));
  }
  return out;
}

inline Waveform decode_wav(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "wav");
  if (r.tag(4) != "RIFF") throw FormatError("wav: missing RIFF header");
  r.u32();
  if (r.tag(4) != "WAVE") throw FormatError("wav: missing WAVE tag");

  bool have_fmt = false;
  std::uint32_t rate = 0;
  while (r.remaining() >= 8) {
    const std::string id = r.tag(4);
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      if (size < 16) throw FormatError("wav: fmt chunk too small");
      r.need(size);
      const std::uint16_t format = r.u16();
      const std::uint16_t channels = r.u16();
      rate = r.u32();
      r.u32();
      r.u16();
      const std::uint16_t bits = r.u16();
      r.skip(size - 16);
      if (format != 1) throw FormatError("wav: only PCM is supported");
      if (channels != 1) throw FormatError("wav: only mono is supported");
      if (bits != 16) throw FormatError("wav: only 16-bit samples are supported");
      if (rate == 0) throw FormatError("wav: zero sample rate");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError("wav: data chunk before fmt chunk");
      if (size % 2 != 0) throw FormatError("wav: odd data size");
      r.need(size);
      std::vector<double> samples(size / 2);
      for (auto& s : samples) s = r.i16() / 32768.0;
      return Waveform(std::move(samples), static_cast<int>(rate));
    } else {
      r.skip(size + (size & 1));
    }
  }
  throw FormatError("wav: no data chunk");
}

inline Waveform read_wav(const std::filesystem::path& path) {
  try {
    return decode_wav(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_wav(const std::filesystem::path& path, const Waveform& w) {
  write_file_bytes(path, encode_wav(w));
}

// Raw vector file: 8-byte magic, uint32 count, count float64 values (LE).
inline std::vector<std::uint8_t> encode_f64_vector(std::string_view magic,
                                                   std::span<const double> values) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + values.size() * 8);
  detail::put_tag(out, magic);
  detail::put_u32(out, static_cast<std::uint32_t>(values.size()));
  for (double v : values) detail::put_f64(out, v);
  return out;
}

inline std::vector<double> decode_f64_vector(std::string_view magic,
                                             std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, std::string(magic));
  if (r.tag(magic.size()) != magic) {
    throw FormatError("bad magic, expected " + std::string(magic));
  }
  const std::uint32_t count = r.u32();
  if (r.remaining() != static_cast<std::size_t>(count) * 8) {
    throw FormatError(std::string(magic) + ": payload size does not match count");
  }
  std::vector<double> values(count);
  for (auto& v : values) {
    v = r.f64();
    if (!std::isfinite(v)) throw FormatError(std::string(magic) + ": non-finite value");
  }
  return values;
}

inline constexpr std::string_view kPerturbationMagic = "AJBPRT01";

inline void save_perturbation(const std::filesystem::path& path, const Perturbation& p) {
  write_file_bytes(path, encode_f64_vector(kPerturbationMagic, p.values));
}

inline Perturbation load_perturbation(const std::filesystem::path& path) {
  try {
    return Perturbation{decode_f64_vector(kPerturbationMagic, read_file_bytes(path))};
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace ajb
