#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

#include <fmt/format.h>

#include "igk/audio.hpp"
#include "igk/error.hpp"

namespace igk {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::size_t position() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }

  std::string_view tag() {
    need(4);
    std::string_view s(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return s;
  }
  std::uint16_t u16() {
    need(2);
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }

 private:
  void need(std::size_t n) const {
    if (!has(n)) throw Error(ErrorCode::CorruptHeader, "WAV data ends inside a header field");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, std::string_view tag) {
  out.insert(out.end(), tag.begin(), tag.end());
}

}  // namespace

AudioBuffer parse_wav(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (!r.has(12) || r.tag() != "RIFF") {
    throw Error(ErrorCode::CorruptHeader, "missing RIFF header");
  }
  (void)r.u32();
  if (r.tag() != "WAVE") throw Error(ErrorCode::CorruptHeader, "RIFF form is not WAVE");

  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  while (r.has(8)) {
    const std::string_view id = r.tag();
    const std::uint32_t size = r.u32();
    const std::size_t body = r.position();
    if (!r.has(size)) {
      throw Error(ErrorCode::CorruptHeader, fmt::format("chunk '{}' overruns the file", id));
    }
    if (id == "fmt ") {
      if (size < 16) throw Error(ErrorCode::CorruptHeader, "fmt chunk too small");
      format = r.u16();
      channels = r.u16();
      sample_rate = r.u32();
      (void)r.u32();  // byte rate
      (void)r.u16();  // block align
      bits = r.u16();
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorCode::CorruptHeader, "extensible fmt chunk too small");
        (void)r.u16();  // cbSize
        (void)r.u16();  // valid bits
        (void)r.u32();  // channel mask
        format = r.u16();  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.subspan(body, size);
      have_data = true;
    }
    r.seek(body + size + (size & 1U));
  }

  if (!have_fmt || !have_data) {
    throw Error(ErrorCode::CorruptHeader, "WAV lacks a fmt or data chunk");
  }
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !float32) {
    throw Error(ErrorCode::UnsupportedFormat,
                fmt::format("WAV format {} with {} bits is not PCM16 or float32", format, bits));
  }
  if (channels < 1 || channels > 2) {
    throw Error(ErrorCode::UnsupportedFormat, fmt::format("{} channels not supported", channels));
  }
  if (sample_rate == 0) throw Error(ErrorCode::CorruptHeader, "sample rate is zero");

  const std::size_t width = bits / 8;
  const std::size_t frame_bytes = width * channels;
  const std::size_t frames = data.size() / frame_bytes;
  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = data.data() + f * frame_bytes + c * width;
      if (pcm16) {
        const auto raw = static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
        sum += static_cast<double>(raw) / 32768.0;
      } else {
        const std::uint32_t bitsv = static_cast<std::uint32_t>(p[0]) |
                                    (static_cast<std::uint32_t>(p[1]) << 8) |
                                    (static_cast<std::uint32_t>(p[2]) << 16) |
                                    (static_cast<std::uint32_t>(p[3]) << 24);
        sum += static_cast<double>(std::bit_cast<float>(bitsv));
      }
    }
    out.samples[f] = sum / static_cast<double>(channels);
  }
  return out;
}

AudioBuffer load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open WAV file", path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  try {
    return parse_wav(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), path.string());
  }
}

std::vector<std::uint8_t> encode_wav(std::span<const double> interleaved, std::uint32_t sample_rate,
                                     std::uint16_t channels, WavEncoding encoding) {
  const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
  const auto data_size = static_cast<std::uint32_t>(interleaved.size() * (bits / 8));
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, encoding == WavEncoding::Pcm16 ? kFormatPcm : kFormatFloat);
  put_u16(out, channels);
  put_u32(out, sample_rate);
  put_u32(out, sample_rate * block);
  put_u16(out, block);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (double s : interleaved) {
    if (encoding == WavEncoding::Pcm16) {
      const double scaled = std::clamp(s * 32768.0, -32768.0, 32767.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(scaled))));
    } else {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
    }
  }
  return out;
}

}  // namespace igk
