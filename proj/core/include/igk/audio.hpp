#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "igk/clip.hpp"
#include "igk/metrics.hpp"

namespace igk {

struct AudioBuffer {
  std::vector<double> samples;  // mono, [-1, 1]
  std::uint32_t sample_rate = 0;

  double duration() const {
    return sample_rate == 0 ? 0.0 : static_cast<double>(samples.size()) / sample_rate;
  }
};

// RIFF/WAVE with PCM 16-bit or IEEE float 32-bit samples, 1-2 channels. Stereo
// is averaged to mono; PCM16 is scaled by 1/32768.
AudioBuffer parse_wav(std::span<const std::uint8_t> bytes);
AudioBuffer load_wav(const std::filesystem::path& path);

enum class WavEncoding { Pcm16, Float32 };

// Interleaved samples in [-1, 1].
std::vector<std::uint8_t> encode_wav(std::span<const double> interleaved, std::uint32_t sample_rate,
                                     std::uint16_t channels, WavEncoding encoding);

struct OnsetConfig {
  double hop_seconds = 0.020;
  double window_seconds = 0.050;
  std::size_t smoothing_hops = 5;
  double min_duration_seconds = 0.5;
};

// Mean |x| over each window (window start = frame time), a centered moving
// average over `smoothing_hops` frames, then local maxima above mean + 1 std
// of the smoothed envelope. Throws TooShort.
BeatTrack audio_onsets(std::span<const double> samples, std::uint32_t sample_rate,
                       const OnsetConfig& config = {});

// Explicit `audio_beats` win; otherwise `audio_ref` (relative to base_dir) is
// loaded and onsets extracted. nullopt when the clip carries neither.
std::optional<BeatTrack> clip_audio_beats(const MotionClip& clip,
                                          const std::filesystem::path& base_dir);

}  // namespace igk
