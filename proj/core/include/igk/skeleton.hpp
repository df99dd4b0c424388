#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "igk/rotmath.hpp"

namespace igk {

enum class Hand { Left, Right };

std::string_view to_string(Hand hand);

// Joints the metrics and the synthetic generator address by role rather than
// by name. The profile's "roles" table maps each role to a joint name.
enum class JointRole {
  Head,
  LeftShoulder,
  RightShoulder,
  LeftElbow,
  RightElbow,
  LeftWrist,
  RightWrist,
  LeftIndexBase,
  RightIndexBase,
};

inline constexpr std::size_t kJointRoleCount = 9;

std::string_view to_string(JointRole role);

struct Joint {
  std::string name;
  std::optional<std::size_t> parent;  // always < own index
  Vec3 rest_offset = Vec3::Zero();     // meters, in the parent frame
};

// A point rigidly attached to a joint frame (ears, eyes, nose, fingertips).
struct Landmark {
  std::string name;
  std::size_t host = 0;
  Vec3 local_offset = Vec3::Zero();
};

namespace landmark_names {
inline constexpr std::string_view kLeftEar = "left_ear";
inline constexpr std::string_view kRightEar = "right_ear";
inline constexpr std::string_view kLeftEye = "left_eye";
inline constexpr std::string_view kRightEye = "right_eye";
inline constexpr std::string_view kNose = "nose";
inline constexpr std::string_view kLeftIndexTip = "left_index_tip";
inline constexpr std::string_view kRightIndexTip = "right_index_tip";
}  // namespace landmark_names

// Immutable joint hierarchy in topological order with a single root at index 0.
// The root's rest offset is ignored: the root sits at the pose's root translation.
class Skeleton {
 public:
  Skeleton(std::string name, std::vector<Joint> joints, std::vector<Landmark> landmarks,
           std::array<std::optional<std::size_t>, kJointRoleCount> roles,
           Vec3 up = Vec3::UnitY(), Vec3 forward = Vec3::UnitZ());

  // Profile documents are JSON; see core/data/smplh_52.profile for the layout.
  static Skeleton from_profile_text(std::string_view text);
  static Skeleton load_profile(const std::filesystem::path& path);
  // The shipped 52-joint SMPL-H profile.
  static const Skeleton& default_profile();

  const std::string& name() const { return name_; }
  std::size_t joint_count() const { return joints_.size(); }
  const std::vector<Joint>& joints() const { return joints_; }
  const Joint& joint(std::size_t i) const { return joints_.at(i); }
  const std::vector<Landmark>& landmarks() const { return landmarks_; }
  const Vec3& up() const { return up_; }
  const Vec3& forward() const { return forward_; }

  std::optional<std::size_t> find_joint(std::string_view name) const;
  std::optional<std::size_t> find_landmark(std::string_view name) const;
  std::size_t joint_index(std::string_view name) const;     // throws MissingJoint
  std::size_t landmark_index(std::string_view name) const;  // throws MissingLandmark
  std::size_t role(JointRole role) const;                   // throws MissingJoint
  bool has_role(JointRole role) const;

  std::vector<std::string> joint_names() const;

 private:
  std::string name_;
  std::vector<Joint> joints_;
  std::vector<Landmark> landmarks_;
  std::array<std::optional<std::size_t>, kJointRoleCount> roles_;
  Vec3 up_;
  Vec3 forward_;
};

// r^x, r^y, r^z (y is height) plus one 6D rotation per joint, local to the parent.
struct Pose {
  Vec3 root_translation = Vec3::Zero();
  std::vector<Rotation6D> joint_rotations;

  static Pose rest(const Skeleton& skeleton);
};

struct JointPositions {
  std::vector<Vec3> joints;     // one per skeleton joint, global frame
  std::vector<Vec3> landmarks;  // one per skeleton landmark, global frame
};

// Global joint frames; positions + rotations. Landmarks are derived from these.
struct GlobalTransforms {
  std::vector<Mat3> rotations;
  std::vector<Vec3> positions;
};

GlobalTransforms global_transforms(const Skeleton& skeleton, const Pose& pose);
JointPositions forward_kinematics(const Skeleton& skeleton, const Pose& pose);
JointPositions positions_from_transforms(const Skeleton& skeleton, const GlobalTransforms& xf);

struct FaceFrame {
  Vec3 direction;     // ear midpoint -> centroid of eyes and nose
  Vec3 eye_midpoint;  // origin of the line of sight
};

FaceFrame face_vector(const Skeleton& skeleton, const JointPositions& positions);

struct PointingVectors {
  Vec3 finger_dir;     // index tip - index base
  Vec3 finger_origin;  // index base
  Vec3 hand_base_dir;  // index base - wrist
  Vec3 hand_tip_dir;   // index tip - wrist
  Vec3 wrist_origin;
  Vec3 arm_dir;        // wrist - elbow
  Vec3 elbow_origin;
};

PointingVectors pointing_vectors(const Skeleton& skeleton, const JointPositions& positions,
                                 Hand hand);

std::string_view index_tip_landmark(Hand hand);
JointRole shoulder_role(Hand hand);
JointRole elbow_role(Hand hand);
JointRole wrist_role(Hand hand);
JointRole index_base_role(Hand hand);

}  // namespace igk
