#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "avcl/audio.hpp"

namespace avcl::audio {

// RIFF/WAVE decoding for 16-bit integer PCM and 32-bit IEEE float, one or
// two channels, any sample rate. WAVE_FORMAT_EXTENSIBLE headers are accepted
// when their sub-format is one of those two. Throws DecodeError otherwise.
Waveform decode_wav(std::span<const std::uint8_t> bytes);
Waveform read_wav(const std::filesystem::path& path);

// 16-bit PCM encoding; samples are clamped to [-1, 1] and rounded.
std::vector<std::uint8_t> encode_wav_pcm16(const Waveform& w);
// 32-bit float encoding.
std::vector<std::uint8_t> encode_wav_float32(const Waveform& w);
void write_wav_pcm16(const std::filesystem::path& path, const Waveform& w);

}  // namespace avcl::audio
