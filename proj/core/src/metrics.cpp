#include "igk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "igk/error.hpp"

namespace igk {

std::string_view to_string(Intent intent) {
  switch (intent) {
    case Intent::Gaze: return "gaze";
    case Intent::PointLeft: return "point_left";
    case Intent::PointRight: return "point_right";
  }
  return "gaze";
}

Intent parse_intent(std::string_view text) {
  if (text == "gaze") return Intent::Gaze;
  if (text == "point_left") return Intent::PointLeft;
  if (text == "point_right") return Intent::PointRight;
  throw Error(ErrorCode::SchemaError, fmt::format("unknown intent category '{}'", text));
}

bool is_pointing(Intent intent) { return intent != Intent::Gaze; }

Hand pointing_hand(Intent intent) {
  switch (intent) {
    case Intent::PointLeft: return Hand::Left;
    case Intent::PointRight: return Hand::Right;
    case Intent::Gaze: break;
  }
  throw Error(ErrorCode::InvariantViolation, "gaze intent has no pointing hand");
}

std::size_t AngularDeviationSeries::invalid_count() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), [](const auto& v) { return !v.has_value(); }));
}

namespace {

bool too_close(const Vec3& origin, const Vec3& target) {
  return (target - origin).norm() < kDegenerateTargetDistance;
}

void check_lengths(std::size_t positions, std::size_t targets) {
  if (positions != targets) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("{} pose frames but {} target frames", positions, targets));
  }
}

void check_spans(std::span<const TimeSpan> spans, std::size_t length) {
  for (const auto& s : spans) {
    if (s.end <= s.start || s.end > length) {
      throw Error(ErrorCode::InvariantViolation,
                  fmt::format("span [{}, {}) invalid for {} frames", s.start, s.end, length));
    }
  }
}

// Frame mask for the union of spans; all-true when no spans are given.
std::vector<bool> span_mask(std::span<const TimeSpan> spans, std::size_t length) {
  check_spans(spans, length);
  if (spans.empty()) return std::vector<bool>(length, true);
  std::vector<bool> mask(length, false);
  for (const auto& s : spans) {
    for (std::size_t t = s.start; t < s.end; ++t) mask[t] = true;
  }
  return mask;
}

std::span<const TimeSpan> restrict_for(std::span<const std::vector<TimeSpan>> restricts,
                                       std::size_t i, std::size_t count) {
  if (restricts.empty()) return {};
  if (restricts.size() != count) {
    throw Error(ErrorCode::DimensionMismatch, "one span list per sequence required");
  }
  return restricts[i];
}

}  // namespace

std::optional<PointingDeviation> pointing_deviation(const PointingVectors& v, const Vec3& target) {
  if (too_close(v.finger_origin, target) || too_close(v.wrist_origin, target) ||
      too_close(v.elbow_origin, target)) {
    return std::nullopt;
  }
  try {
    PointingDeviation d{};
    d.finger = angle_between(v.finger_dir, target - v.finger_origin);
    const Vec3 wrist_to_target = target - v.wrist_origin;
    d.hand = std::min(angle_between(v.hand_base_dir, wrist_to_target),
                      angle_between(v.hand_tip_dir, wrist_to_target));
    d.arm = angle_between(v.arm_dir, target - v.elbow_origin);
    d.combined = std::min({d.finger, d.hand, d.arm});
    return d;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateVector) return std::nullopt;
    throw;
  }
}

std::optional<double> gaze_deviation(const FaceFrame& face, const Vec3& target) {
  if (too_close(face.eye_midpoint, target)) return std::nullopt;
  try {
    return angle_between(face.direction, target - face.eye_midpoint);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateVector) return std::nullopt;
    throw;
  }
}

AngularDeviationSeries iad_pointing(const Skeleton& skeleton,
                                    std::span<const JointPositions> positions,
                                    std::span<const Vec3> targets, Hand hand) {
  check_lengths(positions.size(), targets.size());
  AngularDeviationSeries out;
  out.intent = hand == Hand::Left ? Intent::PointLeft : Intent::PointRight;
  out.values.reserve(positions.size());
  for (std::size_t t = 0; t < positions.size(); ++t) {
    const auto d = pointing_deviation(pointing_vectors(skeleton, positions[t], hand), targets[t]);
    out.values.push_back(d ? std::optional<double>(d->combined) : std::nullopt);
  }
  return out;
}

AngularDeviationSeries iad_gaze(const Skeleton& skeleton, std::span<const JointPositions> positions,
                                std::span<const Vec3> targets) {
  check_lengths(positions.size(), targets.size());
  AngularDeviationSeries out;
  out.intent = Intent::Gaze;
  out.values.reserve(positions.size());
  for (std::size_t t = 0; t < positions.size(); ++t) {
    out.values.push_back(gaze_deviation(face_vector(skeleton, positions[t]), targets[t]));
  }
  return out;
}

AngularDeviationSeries iad_series(const Skeleton& skeleton,
                                  std::span<const JointPositions> positions,
                                  std::span<const Vec3> targets, Intent intent) {
  if (intent == Intent::Gaze) return iad_gaze(skeleton, positions, targets);
  return iad_pointing(skeleton, positions, targets, pointing_hand(intent));
}

std::vector<double> valid_values(const AngularDeviationSeries& series,
                                 std::span<const TimeSpan> restrict) {
  const auto mask = span_mask(restrict, series.size());
  std::vector<double> out;
  out.reserve(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (mask[t] && series.values[t]) out.push_back(*series.values[t]);
  }
  return out;
}

double iar_at_k(const AngularDeviationSeries& series, double k, std::span<const TimeSpan> restrict) {
  if (!(k > 0.0)) {
    throw Error(ErrorCode::InvariantViolation, fmt::format("threshold k must be > 0, got {}", k));
  }
  const auto values = valid_values(series, restrict);
  if (values.empty()) {
    throw Error(ErrorCode::EmptyEvaluationSet, "no valid frames to evaluate");
  }
  const auto hits = std::count_if(values.begin(), values.end(), [k](double v) { return v <= k; });
  return static_cast<double>(hits) / static_cast<double>(values.size());
}

double iar_corpus(std::span<const AngularDeviationSeries> series, double k,
                  std::span<const std::vector<TimeSpan>> restricts) {
  if (series.empty()) {
    throw Error(ErrorCode::EmptyEvaluationSet, "no sequences to evaluate");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += iar_at_k(series[i], k, restrict_for(restricts, i, series.size()));
  }
  return sum / static_cast<double>(series.size());
}

double iou_at_k(const AngularDeviationSeries& series, double k, std::span<const TimeSpan> gt_spans) {
  if (!(k > 0.0)) {
    throw Error(ErrorCode::InvariantViolation, fmt::format("threshold k must be > 0, got {}", k));
  }
  if (gt_spans.empty()) {
    throw Error(ErrorCode::InvariantViolation, "IoU needs at least one ground-truth span");
  }
  const auto gt = span_mask(gt_spans, series.size());
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (!series.values[t]) continue;
    const bool hit = *series.values[t] <= k;
    inter += (hit && gt[t]) ? 1 : 0;
    uni += (hit || gt[t]) ? 1 : 0;
  }
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

IadSummary iad_summary(std::span<const AngularDeviationSeries> series,
                       std::span<const std::vector<TimeSpan>> restricts) {
  if (series.empty()) {
    throw Error(ErrorCode::EmptyEvaluationSet, "no sequences to summarize");
  }
  std::vector<double> pooled;
  double min_sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto values = valid_values(series[i], restrict_for(restricts, i, series.size()));
    if (values.empty()) {
      throw Error(ErrorCode::EmptyEvaluationSet,
                  fmt::format("sequence {} has no valid frames", i));
    }
    min_sum += *std::min_element(values.begin(), values.end());
    pooled.insert(pooled.end(), values.begin(), values.end());
  }
  IadSummary s;
  s.frames = pooled.size();
  const double n = static_cast<double>(pooled.size());
  s.mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : pooled) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  s.min_iad_mean = min_sum / static_cast<double>(series.size());
  return s;
}

void validate(const BeatTrack& beats) {
  for (std::size_t i = 0; i < beats.times.size(); ++i) {
    const double t = beats.times[i];
    if (!std::isfinite(t) || t < 0.0) {
      throw Error(ErrorCode::InvariantViolation, "beat time must be finite and nonnegative",
                  fmt::format("beats[{}]", i));
    }
    if (i > 0 && !(t > beats.times[i - 1])) {
      throw Error(ErrorCode::InvariantViolation, "beat times must be strictly increasing",
                  fmt::format("beats[{}]", i));
    }
  }
}

double beat_consistency(const BeatTrack& motion_beats, const BeatTrack& audio_beats, double sigma) {
  if (motion_beats.empty() || audio_beats.empty()) {
    throw Error(ErrorCode::EmptyBeats, "beat consistency needs motion and audio beats");
  }
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::InvariantViolation, "sigma must be > 0");
  }
  const auto& audio = audio_beats.times;
  double sum = 0.0;
  for (double tm : motion_beats.times) {
    // audio is sorted: the nearest beat is adjacent to the insertion point.
    auto it = std::lower_bound(audio.begin(), audio.end(), tm);
    double best = std::numeric_limits<double>::infinity();
    if (it != audio.end()) best = std::min(best, std::abs(*it - tm));
    if (it != audio.begin()) best = std::min(best, std::abs(*std::prev(it) - tm));
    sum += std::exp(-(best * best) / (2.0 * sigma * sigma));
  }
  return sum / static_cast<double>(motion_beats.size());
}

std::vector<double> joint_speed_curve(std::span<const JointPositions> positions, double fps) {
  const std::size_t n = positions.size();
  std::vector<double> speed(n, 0.0);
  if (n < 2) return speed;
  const std::size_t joints = positions[0].joints.size();
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t == 0 ? 0 : t - 1;
    const std::size_t hi = t + 1 == n ? t : t + 1;
    const double dt = static_cast<double>(hi - lo) / fps;
    double sum = 0.0;
    for (std::size_t j = 0; j < joints; ++j) {
      sum += (positions[hi].joints[j] - positions[lo].joints[j]).norm();
    }
    speed[t] = sum / static_cast<double>(joints) / dt;
  }
  return speed;
}

BeatTrack motion_beats(std::span<const JointPositions> positions, double fps) {
  if (positions.size() < 3) {
    throw Error(ErrorCode::TooShort, "motion beats need at least 3 frames");
  }
  if (!(fps > 0.0)) {
    throw Error(ErrorCode::InvariantViolation, "fps must be > 0");
  }
  const auto speed = joint_speed_curve(positions, fps);
  const std::size_t n = speed.size();
  constexpr std::size_t kHalf = 2;  // window of 5, truncated at the ends
  std::vector<double> smooth(n);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t lo = t >= kHalf ? t - kHalf : 0;
    const std::size_t hi = std::min(n - 1, t + kHalf);
    double sum = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) sum += speed[i];
    smooth[t] = sum / static_cast<double>(hi - lo + 1);
  }
  // Rounding noise on a flat curve must not register as a dip.
  const double tol = 1e-9 * std::max(1.0, *std::max_element(smooth.begin(), smooth.end()));
  BeatTrack beats;
  for (std::size_t t = 1; t + 1 < n; ++t) {
    if (smooth[t] < smooth[t - 1] - tol && smooth[t] < smooth[t + 1] - tol) {
      beats.times.push_back(static_cast<double>(t) / fps);
    }
  }
  return beats;
}

namespace {

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x, const Eigen::VectorXd& mean) {
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  return (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

bool is_singular(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double largest = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  return es.eigenvalues().minCoeff() <= 1e-12 * largest;
}

}  // namespace

FrechetResult frechet_from_moments(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& sigma1,
                                   const Eigen::VectorXd& mu2, const Eigen::MatrixXd& sigma2) {
  const auto d = mu1.size();
  if (mu2.size() != d || sigma1.rows() != d || sigma1.cols() != d || sigma2.rows() != d ||
      sigma2.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "Frechet moments disagree in dimension");
  }
  FrechetResult out;
  Eigen::MatrixXd s1 = sigma1;
  Eigen::MatrixXd s2 = sigma2;
  if (is_singular(s1) || is_singular(s2)) {
    out.jitter = kFrechetJitter;
    s1.diagonal().array() += kFrechetJitter;
    s2.diagonal().array() += kFrechetJitter;
  }
  // tr((S1 S2)^{1/2}) = tr((S1^{1/2} S2 S1^{1/2})^{1/2}), the inner matrix symmetric PSD.
  const Eigen::MatrixXd root1 = psd_sqrt(s1);
  const Eigen::MatrixXd inner = root1 * s2 * root1;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (inner + inner.transpose()),
                                                    Eigen::EigenvaluesOnly);
  const double tr_cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double mean_term = (mu1 - mu2).squaredNorm();
  out.distance = std::max(0.0, mean_term + s1.trace() + s2.trace() - 2.0 * tr_cross);
  return out;
}

FrechetResult frechet(const FeatureSet& ref, const FeatureSet& gen) {
  if (ref.dimension() != gen.dimension()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("feature dimensions differ: {} vs {}", ref.dimension(), gen.dimension()));
  }
  if (ref.size() < 2 || gen.size() < 2) {
    throw Error(ErrorCode::InsufficientSamples, "Frechet distance needs >= 2 samples per set");
  }
  const Eigen::VectorXd mu1 = ref.samples.colwise().mean().transpose();
  const Eigen::VectorXd mu2 = gen.samples.colwise().mean().transpose();
  return frechet_from_moments(mu1, sample_covariance(ref.samples, mu1), mu2,
                              sample_covariance(gen.samples, mu2));
}

double frechet_distance(const FeatureSet& ref, const FeatureSet& gen) {
  return frechet(ref, gen).distance;
}

double diversity(const FeatureSet& gen) {
  const auto n = gen.size();
  if (n < 2) {
    throw Error(ErrorCode::InsufficientSamples, "diversity needs >= 2 feature vectors");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      sum += (gen.samples.row(i) - gen.samples.row(j)).cwiseAbs().sum();
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return sum / pairs;
}

}  // namespace igk
