#include <cmath>
#include <numeric>

#include "igk/audio.hpp"
#include "igk/error.hpp"

namespace igk {

BeatTrack audio_onsets(std::span<const double> samples, std::uint32_t sample_rate,
                       const OnsetConfig& config) {
  if (sample_rate == 0) throw Error(ErrorCode::InvariantViolation, "sample rate is zero");
  const double duration = static_cast<double>(samples.size()) / sample_rate;
  if (duration < config.min_duration_seconds) {
    throw Error(ErrorCode::TooShort, "onset extraction needs at least 0.5 s of audio");
  }

  const auto hop = static_cast<std::size_t>(std::lround(config.hop_seconds * sample_rate));
  const auto window = static_cast<std::size_t>(std::lround(config.window_seconds * sample_rate));
  const std::size_t frames = (samples.size() + hop - 1) / hop;

  std::vector<double> envelope(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t begin = f * hop;
    const std::size_t end = std::min(samples.size(), begin + window);
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += std::abs(samples[i]);
    envelope[f] = sum / static_cast<double>(window);
  }

  const std::size_t half = config.smoothing_hops / 2;
  std::vector<double> smooth(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t lo = f >= half ? f - half : 0;
    const std::size_t hi = std::min(frames - 1, f + half);
    double sum = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) sum += envelope[i];
    smooth[f] = sum / static_cast<double>(hi - lo + 1);
  }

  const double n = static_cast<double>(frames);
  const double mean = std::accumulate(smooth.begin(), smooth.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : smooth) ss += (v - mean) * (v - mean);
  const double threshold = mean + std::sqrt(ss / n);

  BeatTrack beats;
  for (std::size_t f = 1; f + 1 < frames; ++f) {
    // Rising strictly, then not rising: a plateau reports its first frame.
    if (smooth[f] > threshold && smooth[f] > smooth[f - 1] && smooth[f] >= smooth[f + 1]) {
      beats.times.push_back(static_cast<double>(f * hop) / sample_rate);
    }
  }
  return beats;
}

std::optional<BeatTrack> clip_audio_beats(const MotionClip& clip,
                                          const std::filesystem::path& base_dir) {
  if (clip.audio_beats) return clip.audio_beats;
  if (!clip.audio_ref) return std::nullopt;
  std::filesystem::path path(*clip.audio_ref);
  if (path.is_relative()) path = base_dir / path;
  const AudioBuffer audio = load_wav(path);
  return audio_onsets(audio.samples, audio.sample_rate);
}

}  // namespace igk
