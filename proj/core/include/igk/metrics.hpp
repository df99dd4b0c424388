#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "igk/rotmath.hpp"
#include "igk/skeleton.hpp"

namespace igk {

enum class Intent { Gaze, PointLeft, PointRight };

std::string_view to_string(Intent intent);
Intent parse_intent(std::string_view text);  // throws SchemaError
bool is_pointing(Intent intent);
Hand pointing_hand(Intent intent);  // throws InvariantViolation for gaze

// Default IAR/IoU thresholds in degrees.
inline constexpr double kPointingThresholdDeg = 15.0;
inline constexpr double kGazeThresholdDeg = 30.0;

// A target closer than this to a vector origin makes the frame undefined.
inline constexpr double kDegenerateTargetDistance = 1e-6;

// Half-open frame interval [start, end).
struct TimeSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool contains(std::size_t frame) const { return frame >= start && frame < end; }
  friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

// Per-frame IAD in degrees. A missing value marks a frame whose target sat on a
// vector origin; such frames are excluded from every aggregate.
struct AngularDeviationSeries {
  Intent intent = Intent::Gaze;
  std::vector<std::optional<double>> values;

  std::size_t size() const { return values.size(); }
  std::size_t invalid_count() const;
};

struct PointingDeviation {
  double finger;  // degrees
  double hand;    // min over the wrist->base and wrist->tip directions
  double arm;
  double combined;  // min of the three
};

std::optional<PointingDeviation> pointing_deviation(const PointingVectors& vectors,
                                                    const Vec3& target);
std::optional<double> gaze_deviation(const FaceFrame& face, const Vec3& target);

AngularDeviationSeries iad_pointing(const Skeleton& skeleton,
                                    std::span<const JointPositions> positions,
                                    std::span<const Vec3> targets, Hand hand);
AngularDeviationSeries iad_gaze(const Skeleton& skeleton, std::span<const JointPositions> positions,
                                std::span<const Vec3> targets);
AngularDeviationSeries iad_series(const Skeleton& skeleton,
                                  std::span<const JointPositions> positions,
                                  std::span<const Vec3> targets, Intent intent);

// Valid values of the series, optionally restricted to the union of spans.
std::vector<double> valid_values(const AngularDeviationSeries& series,
                                 std::span<const TimeSpan> restrict = {});

// Fraction of valid (restricted) frames with theta <= k. Throws
// EmptyEvaluationSet when nothing is left to count.
double iar_at_k(const AngularDeviationSeries& series, double k,
                std::span<const TimeSpan> restrict = {});

// Corpus IAR: per-sequence ratio first, then the mean over sequences.
// `restricts` is either empty or holds one span list per sequence (an empty
// list means the whole sequence).
double iar_corpus(std::span<const AngularDeviationSeries> series, double k,
                  std::span<const std::vector<TimeSpan>> restricts = {});

// |T@k n T_gt| / |T@k u T_gt| over frame sets; invalid frames belong to neither.
double iou_at_k(const AngularDeviationSeries& series, double k, std::span<const TimeSpan> gt_spans);

struct IadSummary {
  double mean = 0.0;          // pooled over all valid frames
  double std = 0.0;           // population standard deviation, pooled
  double min_iad_mean = 0.0;  // mean over sequences of each sequence's minimum
  std::size_t frames = 0;
};

IadSummary iad_summary(std::span<const AngularDeviationSeries> series,
                       std::span<const std::vector<TimeSpan>> restricts = {});

// Onset times in seconds; nonnegative, finite, strictly increasing.
struct BeatTrack {
  std::vector<double> times;

  bool empty() const { return times.empty(); }
  std::size_t size() const { return times.size(); }
};

void validate(const BeatTrack& beats);  // throws InvariantViolation

inline constexpr double kDefaultBeatSigma = 0.1;

// Mean over motion beats of exp(-d^2 / (2 sigma^2)), d the distance to the
// nearest audio beat.
double beat_consistency(const BeatTrack& motion_beats, const BeatTrack& audio_beats,
                        double sigma = kDefaultBeatSigma);

// Mean joint speed per frame (m/s), central differences, one-sided at the ends.
std::vector<double> joint_speed_curve(std::span<const JointPositions> positions, double fps);

// Kinematic beats: strict local minima of the 5-frame moving average of the
// speed curve, each lower than both neighbours by more than 1e-9 of the peak
// (floor 1e-9). Throws TooShort below 3 frames.
BeatTrack motion_beats(std::span<const JointPositions> positions, double fps);

// One row per clip, one column per feature dimension.
struct FeatureSet {
  Eigen::MatrixXd samples;

  Eigen::Index size() const { return samples.rows(); }
  Eigen::Index dimension() const { return samples.cols(); }
};

inline constexpr double kFrechetJitter = 1e-6;

struct FrechetResult {
  double distance = 0.0;
  double jitter = 0.0;  // diagonal offset applied to both covariances (0 if none)
};

// ||mu1 - mu2||^2 + tr(S1 + S2 - 2 (S1 S2)^{1/2}) with unbiased sample covariances.
FrechetResult frechet(const FeatureSet& ref, const FeatureSet& gen);
double frechet_distance(const FeatureSet& ref, const FeatureSet& gen);
FrechetResult frechet_from_moments(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1,
                                   const Eigen::VectorXd& mu2, const Eigen::MatrixXd& sigma2);

// Mean L1 distance over all unordered pairs.
double diversity(const FeatureSet& gen);

}  // namespace igk
