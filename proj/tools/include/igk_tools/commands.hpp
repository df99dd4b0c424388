#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <igk/clip.hpp>
#include <igk/error.hpp>
#include <igk/metrics.hpp>
#include <igk/sampler.hpp>
#include <igk/skeleton.hpp>
#include <igk/spatial.hpp>
#include <igk/synth.hpp>

namespace igk::tools {

inline constexpr int kReportFormatVersion = 1;
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Exit status for a library error: bad flag values are usage errors, the rest
// are data errors.
int exit_code_for(const Error& error);

// --skeleton, then $IGK_SKELETON, then the built-in profile.
Skeleton resolve_skeleton(const std::optional<std::filesystem::path>& flag);

// Every *.json clip in a directory except manifest.json, sorted by id.
std::vector<std::pair<std::filesystem::path, MotionClip>> load_clip_dir(
    const std::filesystem::path& dir, unsigned jobs);

// Feature CSV: header row, then `id,f0,f1,...` per clip.
std::map<std::string, std::vector<double>> load_features(const std::filesystem::path& path);

enum class ReportFormat { Csv, Structured };

struct EvaluateOptions {
  std::filesystem::path pred_dir;
  std::filesystem::path ref_dir;
  std::vector<double> thresholds{kPointingThresholdDeg, kGazeThresholdDeg};
  double sigma = kDefaultBeatSigma;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool strict_pairing = false;
  std::optional<std::filesystem::path> pred_features;
  std::optional<std::filesystem::path> ref_features;
};

// Rows are keyed by (track, intent group); point_left and point_right share the
// "pointing" group.
struct ReportRow {
  Track track = Track::I;
  std::string intent;  // "gaze" | "pointing"
  std::size_t clips = 0;
  std::size_t frames = 0;
  std::size_t invalid_frames = 0;
  std::optional<IadSummary> iad;
  std::vector<std::optional<double>> iar;  // one per threshold
  std::vector<std::optional<double>> iou;  // one per threshold; Track-II only
  std::optional<double> fgd;
  std::optional<double> bc;
  std::optional<double> diversity;
};

struct ClipResult {
  std::string id;
  Track track = Track::I;
  Intent intent = Intent::Gaze;
  std::size_t frames = 0;
  std::size_t invalid_frames = 0;
  AngularDeviationSeries series;
  std::vector<TimeSpan> spans;
  std::optional<double> bc;
};

struct MetricReport {
  std::vector<double> thresholds;
  double sigma = kDefaultBeatSigma;
  std::uint64_t seed = 0;
  std::string skeleton;
  double frechet_jitter = 0.0;
  std::vector<std::string> warnings;
  std::vector<ReportRow> rows;
  std::vector<ClipResult> clips;
};

MetricReport evaluate(const EvaluateOptions& options, const Skeleton& skeleton);
std::string render_csv(const MetricReport& report);
std::string render_structured(const MetricReport& report);

struct SynthOptions {
  std::vector<Scenario> scenarios;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  std::string skeleton_profile = "smplh_52.profile";
  unsigned jobs = 1;
};

// Clip i uses scenarios[i % size] and the i-th seed drawn from `seed`.
// Writes synth_NNNN.json files and manifest.json; returns the manifest.
CorpusManifest synthesize_corpus(const SynthOptions& options, const Skeleton& skeleton);

// Gaze and pointing scenarios over every trajectory kind.
std::vector<Scenario> oracle_scenarios(std::size_t frames = 60);

// One row per frame; header = scheme components + "degenerate".
std::string encode_trajectory_csv(const MotionClip& clip, TargetScheme scheme);

// frame,name,x,y,z for every joint then every landmark.
std::string fk_csv(const MotionClip& clip, const Skeleton& skeleton);

BatchRatio parse_ratio(const std::string& text);  // "8:2"; throws RatioIndivisible

struct BatchesOptions {
  std::filesystem::path manifest;
  std::size_t batch_size = 10;
  BatchRatio ratio;
  std::uint64_t seed = 0;
  std::size_t epochs = 1;
  unsigned jobs = 1;
};

BatchPlan plan_batches(const BatchesOptions& options);
std::string batch_summary(const BatchPlan& plan);

// Entry point shared by the binary and the CLI tests.
int run(int argc, char** argv);

}  // namespace igk::tools
