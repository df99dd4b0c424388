#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "igk/clip.hpp"
#include "igk/skeleton.hpp"

namespace igk {

// Procedural gestures whose intent deviation is known in closed form.

enum class Effector { Head, LeftArm, RightArm };

std::string_view to_string(Effector effector);
Effector effector_for(Intent intent);

// Minimum distance between a target and the joint that aims at it.
inline constexpr double kMinAimDistance = 0.05;

// Rotates the head so the face vector points from the eye midpoint at the
// target. Head landmarks move with the head, so the rotation is refined until
// the residual is below 1e-9 degrees. Throws DegenerateTarget.
Pose aim_head(const Skeleton& skeleton, const Pose& pose, const Vec3& target);

// Straightens the chain from the elbow to the index tip so every bone is
// collinear with the upper arm, then swings the shoulder so that line passes
// through the target. Throws DegenerateTarget when the target lies within
// 0.05 m of where the elbow would end up (or behind it).
Pose aim_arm(const Skeleton& skeleton, const Pose& pose, const Vec3& target, Hand hand);

// A pose plus the targets it was aimed at, per effector.
struct AimedPose {
  Pose pose;
  std::array<std::optional<Vec3>, 3> targets;

  bool is_aimed(Effector e) const { return targets[static_cast<std::size_t>(e)].has_value(); }
};

AimedPose aim(const Skeleton& skeleton, const Pose& pose, const Vec3& target, Effector effector);

// Direction of the perturbation axis inside the plane perpendicular to the aim
// direction: 0 deg is the horizontal axis (up x aim), 90 deg the one above it.
struct PerturbAxis {
  double azimuth_deg = 0.0;
};

// Rotates the aiming limb by alpha about an axis perpendicular to the exact aim
// direction. For an arm the pivot is the elbow, so theta_arm equals alpha; for
// the head the angle is solved so that theta_gaze equals alpha.
// Throws NotAimed when the effector was not aimed, InvariantViolation when
// alpha is outside [0, 90].
AimedPose perturb_aim(const Skeleton& skeleton, const AimedPose& aimed, Effector effector,
                      PerturbAxis axis, double alpha_deg);

enum class TrajectoryKind {
  Front,
  Left,
  Right,
  Far,
  Near,
  Up,
  Down,
  Left2Right,
  Right2Left,
  Up2Down,
  Down2Up,
  Near2Far,
  Far2Near,
};

std::string_view to_string(TrajectoryKind kind);
TrajectoryKind parse_trajectory(std::string_view name);
bool is_dynamic(TrajectoryKind kind);

enum class IdleStyle { Static, Sway };

std::string_view to_string(IdleStyle style);
IdleStyle parse_idle(std::string_view name);

inline constexpr double kMaxSwayDeg = 3.0;
inline constexpr double kStandingRootHeight = 0.93;

struct Scenario {
  Intent intent = Intent::Gaze;
  TrajectoryKind trajectory = TrajectoryKind::Front;
  std::optional<Vec3> start;  // overrides the kind's default endpoints
  std::optional<Vec3> end;
  double jitter = 0.0;        // seeded uniform endpoint jitter, meters per axis
  std::size_t frames = 100;
  double fps = kDefaultFps;
  // Aimed frames. Non-empty spans produce a Track-II clip annotated with them;
  // empty spans aim the whole clip and produce a Track-I clip.
  std::vector<TimeSpan> spans;
  IdleStyle idle = IdleStyle::Static;
  std::optional<double> perturbation_deg;
  std::optional<std::string> transcript;
};

// Default endpoints for a trajectory kind (equal for static kinds), in the
// global frame of a speaker standing at the origin facing +Z with +X to the left.
std::pair<Vec3, Vec3> default_endpoints(TrajectoryKind kind);

// Throws DegenerateTarget / InvariantViolation.
void validate(const Scenario& scenario);

// Base idle pose: rest pose with both arms lowered.
Pose idle_pose(const Skeleton& skeleton);

// Deterministic in (scenario, seed). The clip validates under parse_clip.
MotionClip build_scenario(const Scenario& scenario, const Skeleton& skeleton, std::uint64_t seed,
                          const std::string& id);

// Scenario files use the clip dialect: {"scenarios": [{...}, ...]} with keys
// intent, trajectory, start?, end?, jitter?, frames?, fps?, spans?, idle?,
// perturbation?, transcript?.
std::vector<Scenario> parse_scenarios(std::string_view document);
std::string serialize_scenarios(const std::vector<Scenario>& scenarios);

}  // namespace igk
