#include "avcl/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "avcl/error.hpp"
#include "avcl/serialize.hpp"

namespace avcl::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t u32(std::span<const std::uint8_t> b, std::size_t at) {
  return std::uint32_t(b[at]) | std::uint32_t(b[at + 1]) << 8 |
         std::uint32_t(b[at + 2]) << 16 | std::uint32_t(b[at + 3]) << 24;
}

std::uint16_t u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

std::vector<std::uint8_t> encode(const Waveform& w, std::uint16_t format,
                                 std::uint16_t bits) {
  w.validate();
  const std::uint16_t block = static_cast<std::uint16_t>(w.channels * bits / 8);
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * (bits / 8));
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, static_cast<std::uint16_t>(w.channels));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * block);
  put_u16(out, block);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : w.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    if (format == kFormatPcm) {
      const auto q = static_cast<std::int16_t>(std::lround(c * 32767.0));
      put_u16(out, static_cast<std::uint16_t>(q));
    } else {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(c)));
    }
  }
  return out;
}

}  // namespace

Waveform decode_wav(std::span<const std::uint8_t> b) {
  if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE")) {
    throw DecodeError("not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0, block = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> payload;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t size = u32(b, pos + 4);
    const std::size_t body = pos + 8;
    // Streaming writers may leave the data size unset; clamp to what exists.
    const std::size_t avail = std::min<std::size_t>(size, b.size() - body);
    if (tag_is(b, pos, "fmt ")) {
      if (avail < 16) throw DecodeError("fmt chunk too short");
      format = u16(b, body);
      channels = u16(b, body + 2);
      rate = u32(b, body + 4);
      block = u16(b, body + 12);
      bits = u16(b, body + 14);
      if (format == kFormatExtensible) {
        if (avail < 40) throw DecodeError("extensible fmt chunk too short");
        format = u16(b, body + 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (tag_is(b, pos, "data")) {
      payload = b.subspan(body, avail);
      have_data = true;
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw DecodeError("missing fmt chunk");
  if (!have_data) throw DecodeError("missing data chunk");
  if (channels < 1 || channels > 2) {
    throw DecodeError("unsupported channel count " + std::to_string(channels));
  }
  if (rate == 0) throw DecodeError("sample rate is zero");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32) {
    throw DecodeError("unsupported encoding (format " + std::to_string(format) +
                      ", " + std::to_string(bits) + " bits); expected 16-bit PCM or 32-bit float");
  }
  const std::size_t bytes_per_sample = bits / 8u;
  if (block != channels * bytes_per_sample) {
    throw DecodeError("block alignment " + std::to_string(block) +
                      " inconsistent with format");
  }

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.channels = channels;
  const std::size_t n = payload.size() / block * channels;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = i * bytes_per_sample;
    if (pcm16) {
      w.samples[i] = static_cast<std::int16_t>(u16(payload, at)) / 32768.0;
    } else {
      const float v = std::bit_cast<float>(u32(payload, at));
      if (!std::isfinite(v)) throw DecodeError("non-finite float sample");
      w.samples[i] = std::clamp(static_cast<double>(v), -1.0, 1.0);
    }
  }
  return w;
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav_pcm16(const Waveform& w) {
  return encode(w, kFormatPcm, 16);
}

std::vector<std::uint8_t> encode_wav_float32(const Waveform& w) {
  return encode(w, kFormatFloat, 32);
}

void write_wav_pcm16(const std::filesystem::path& path, const Waveform& w) {
  const auto bytes = encode_wav_pcm16(w);
  write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

}  // namespace avcl::audio
