#include "igk/skeleton.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "igk/error.hpp"

namespace igk {

namespace detail {
std::string_view default_profile_text();
}

namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kJointRoleCount> kRoleNames = {
    "head",        "left_shoulder", "right_shoulder", "left_elbow",       "right_elbow",
    "left_wrist",  "right_wrist",   "left_index_base", "right_index_base",
};

Vec3 read_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::SchemaError, "expected an array of 3 numbers", path);
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) {
      throw Error(ErrorCode::SchemaError, "expected a number", fmt::format("{}[{}]", path, i));
    }
    v[i] = j[i].get<double>();
  }
  if (!v.allFinite()) {
    throw Error(ErrorCode::NonFinite, "non-finite component", path);
  }
  return v;
}

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::SchemaError, fmt::format("missing field '{}'", key), path);
  }
  return *it;
}

}  // namespace

std::string_view to_string(Hand hand) { return hand == Hand::Left ? "left" : "right"; }

std::string_view to_string(JointRole role) { return kRoleNames[static_cast<std::size_t>(role)]; }

Skeleton::Skeleton(std::string name, std::vector<Joint> joints, std::vector<Landmark> landmarks,
                   std::array<std::optional<std::size_t>, kJointRoleCount> roles, Vec3 up,
                   Vec3 forward)
    : name_(std::move(name)),
      joints_(std::move(joints)),
      landmarks_(std::move(landmarks)),
      roles_(roles),
      up_(std::move(up)),
      forward_(std::move(forward)) {
  if (joints_.size() < 2) {
    throw Error(ErrorCode::InvariantViolation, "a skeleton needs at least 2 joints", "joints");
  }
  if (joints_[0].parent.has_value()) {
    throw Error(ErrorCode::InvariantViolation, "joint 0 must be the root", "joints[0].parent");
  }
  for (std::size_t i = 1; i < joints_.size(); ++i) {
    const auto& parent = joints_[i].parent;
    if (!parent.has_value()) {
      throw Error(ErrorCode::InvariantViolation, "more than one root joint",
                  fmt::format("joints[{}].parent", i));
    }
    if (*parent >= i) {
      throw Error(ErrorCode::InvariantViolation, "parent must precede child",
                  fmt::format("joints[{}].parent", i));
    }
  }
  for (std::size_t i = 0; i < landmarks_.size(); ++i) {
    if (landmarks_[i].host >= joints_.size()) {
      throw Error(ErrorCode::InvariantViolation, "landmark host out of range",
                  fmt::format("landmarks[{}].host", i));
    }
  }
  for (std::size_t i = 0; i < roles_.size(); ++i) {
    if (roles_[i] && *roles_[i] >= joints_.size()) {
      throw Error(ErrorCode::InvariantViolation, "role joint out of range",
                  fmt::format("roles.{}", kRoleNames[i]));
    }
  }
}

namespace {
Skeleton skeleton_from_json(const json& doc);
}

Skeleton Skeleton::from_profile_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, e.what(), "<profile>");
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::SchemaError, "profile must be an object", "<profile>");
  }
  try {
    return skeleton_from_json(doc);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, e.what(), "<profile>");
  }
}

namespace {

Skeleton skeleton_from_json(const json& doc) {
  std::string name = doc.value("name", std::string("unnamed"));
  Vec3 up = doc.contains("up") ? read_vec3(doc["up"], "up") : Vec3::UnitY();
  Vec3 forward = doc.contains("forward") ? read_vec3(doc["forward"], "forward") : Vec3::UnitZ();

  const json& jjoints = require(doc, "joints", "<profile>");
  if (!jjoints.is_array()) {
    throw Error(ErrorCode::SchemaError, "expected an array", "joints");
  }
  std::vector<Joint> joints;
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < jjoints.size(); ++i) {
    const std::string path = fmt::format("joints[{}]", i);
    const json& jj = jjoints[i];
    Joint joint;
    const json& jname = require(jj, "name", path);
    if (!jname.is_string()) {
      throw Error(ErrorCode::SchemaError, "expected a string", path + ".name");
    }
    joint.name = jname.get<std::string>();
    if (by_name.count(joint.name) != 0) {
      throw Error(ErrorCode::InvariantViolation, "duplicate joint name '" + joint.name + "'",
                  path + ".name");
    }
    const json& jparent = require(jj, "parent", path);
    if (!jparent.is_null()) {
      if (!jparent.is_string()) {
        throw Error(ErrorCode::SchemaError, "expected a joint name or null", path + ".parent");
      }
      auto it = by_name.find(jparent.get<std::string>());
      if (it == by_name.end()) {
        throw Error(ErrorCode::InvariantViolation,
                    "parent '" + jparent.get<std::string>() + "' is not an earlier joint",
                    path + ".parent");
      }
      joint.parent = it->second;
    }
    joint.rest_offset = read_vec3(require(jj, "offset", path), path + ".offset");
    by_name.emplace(joint.name, i);
    joints.push_back(std::move(joint));
  }

  std::vector<Landmark> landmarks;
  if (doc.contains("landmarks")) {
    const json& jl = doc["landmarks"];
    for (std::size_t i = 0; i < jl.size(); ++i) {
      const std::string path = fmt::format("landmarks[{}]", i);
      Landmark lm;
      lm.name = require(jl[i], "name", path).get<std::string>();
      const std::string host = require(jl[i], "host", path).get<std::string>();
      auto it = by_name.find(host);
      if (it == by_name.end()) {
        throw Error(ErrorCode::MissingJoint, "unknown host joint '" + host + "'", path + ".host");
      }
      lm.host = it->second;
      if (jl[i].contains("along_bone")) {
        // Extends the host joint along its own bone axis (parent -> host).
        const double length = jl[i]["along_bone"].get<double>();
        const Vec3& bone = joints[lm.host].rest_offset;
        if (!joints[lm.host].parent || bone.norm() < 1e-9) {
          throw Error(ErrorCode::SchemaError, "host joint has no bone axis", path + ".along_bone");
        }
        lm.local_offset = bone.normalized() * length;
      } else {
        lm.local_offset = read_vec3(require(jl[i], "offset", path), path + ".offset");
      }
      landmarks.push_back(std::move(lm));
    }
  }

  std::array<std::optional<std::size_t>, kJointRoleCount> roles{};
  const json* jroles = doc.contains("roles") ? &doc["roles"] : nullptr;
  for (std::size_t r = 0; r < kJointRoleCount; ++r) {
    std::string joint_name(kRoleNames[r]);
    if (jroles != nullptr && jroles->contains(joint_name)) {
      joint_name = (*jroles)[joint_name].get<std::string>();
      auto it = by_name.find(joint_name);
      if (it == by_name.end()) {
        throw Error(ErrorCode::MissingJoint, "role maps to unknown joint '" + joint_name + "'",
                    fmt::format("roles.{}", kRoleNames[r]));
      }
      roles[r] = it->second;
    } else if (auto it = by_name.find(joint_name); it != by_name.end()) {
      roles[r] = it->second;
    }
  }

  return Skeleton(std::move(name), std::move(joints), std::move(landmarks), roles, up, forward);
}

}  // namespace

Skeleton Skeleton::load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open skeleton profile", path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return from_profile_text(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), path.string());
  }
}

const Skeleton& Skeleton::default_profile() {
  static const Skeleton profile = from_profile_text(detail::default_profile_text());
  return profile;
}

std::optional<std::size_t> Skeleton::find_joint(std::string_view name) const {
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    if (joints_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Skeleton::find_landmark(std::string_view name) const {
  for (std::size_t i = 0; i < landmarks_.size(); ++i) {
    if (landmarks_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Skeleton::joint_index(std::string_view name) const {
  if (auto i = find_joint(name)) return *i;
  throw Error(ErrorCode::MissingJoint, fmt::format("skeleton '{}' has no joint '{}'", name_, name));
}

std::size_t Skeleton::landmark_index(std::string_view name) const {
  if (auto i = find_landmark(name)) return *i;
  throw Error(ErrorCode::MissingLandmark,
              fmt::format("skeleton '{}' has no landmark '{}'", name_, name));
}

std::size_t Skeleton::role(JointRole r) const {
  const auto& slot = roles_[static_cast<std::size_t>(r)];
  if (!slot) {
    throw Error(ErrorCode::MissingJoint,
                fmt::format("skeleton '{}' maps no joint to role '{}'", name_, to_string(r)));
  }
  return *slot;
}

bool Skeleton::has_role(JointRole r) const {
  return roles_[static_cast<std::size_t>(r)].has_value();
}

std::vector<std::string> Skeleton::joint_names() const {
  std::vector<std::string> names;
  names.reserve(joints_.size());
  for (const auto& j : joints_) names.push_back(j.name);
  return names;
}

Pose Pose::rest(const Skeleton& skeleton) {
  Pose pose;
  pose.joint_rotations.assign(skeleton.joint_count(), Rotation6D::identity());
  return pose;
}

GlobalTransforms global_transforms(const Skeleton& skeleton, const Pose& pose) {
  const std::size_t n = skeleton.joint_count();
  if (pose.joint_rotations.size() != n) {
    throw Error(ErrorCode::MismatchedSkeleton,
                fmt::format("pose has {} rotations, skeleton '{}' has {} joints",
                            pose.joint_rotations.size(), skeleton.name(), n));
  }
  GlobalTransforms xf;
  xf.rotations.resize(n);
  xf.positions.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Mat3 local = decode_6d(pose.joint_rotations[j]);
    const auto& parent = skeleton.joint(j).parent;
    if (!parent) {
      xf.rotations[j] = local;
      xf.positions[j] = pose.root_translation;
    } else {
      xf.rotations[j] = xf.rotations[*parent] * local;
      xf.positions[j] = xf.positions[*parent] + xf.rotations[*parent] * skeleton.joint(j).rest_offset;
    }
  }
  return xf;
}

JointPositions positions_from_transforms(const Skeleton& skeleton, const GlobalTransforms& xf) {
  JointPositions out;
  out.joints = xf.positions;
  out.landmarks.reserve(skeleton.landmarks().size());
  for (const auto& lm : skeleton.landmarks()) {
    out.landmarks.push_back(xf.positions[lm.host] + xf.rotations[lm.host] * lm.local_offset);
  }
  return out;
}

JointPositions forward_kinematics(const Skeleton& skeleton, const Pose& pose) {
  return positions_from_transforms(skeleton, global_transforms(skeleton, pose));
}

namespace {

const Vec3& landmark_at(const Skeleton& skeleton, const JointPositions& positions,
                        std::string_view name) {
  const std::size_t i = skeleton.landmark_index(name);
  if (i >= positions.landmarks.size()) {
    throw Error(ErrorCode::MissingLandmark, fmt::format("positions lack landmark '{}'", name));
  }
  return positions.landmarks[i];
}

const Vec3& joint_at(const Skeleton& skeleton, const JointPositions& positions, JointRole role) {
  const std::size_t i = skeleton.role(role);
  if (i >= positions.joints.size()) {
    throw Error(ErrorCode::MissingJoint, fmt::format("positions lack joint for role '{}'", to_string(role)));
  }
  return positions.joints[i];
}

}  // namespace

FaceFrame face_vector(const Skeleton& skeleton, const JointPositions& positions) {
  namespace ln = landmark_names;
  const Vec3& left_ear = landmark_at(skeleton, positions, ln::kLeftEar);
  const Vec3& right_ear = landmark_at(skeleton, positions, ln::kRightEar);
  const Vec3& left_eye = landmark_at(skeleton, positions, ln::kLeftEye);
  const Vec3& right_eye = landmark_at(skeleton, positions, ln::kRightEye);
  const Vec3& nose = landmark_at(skeleton, positions, ln::kNose);

  const Vec3 ear_mid = 0.5 * (left_ear + right_ear);
  const Vec3 front_mid = (left_eye + right_eye + nose) / 3.0;
  return FaceFrame{front_mid - ear_mid, 0.5 * (left_eye + right_eye)};
}

std::string_view index_tip_landmark(Hand hand) {
  return hand == Hand::Left ? landmark_names::kLeftIndexTip : landmark_names::kRightIndexTip;
}
JointRole shoulder_role(Hand hand) {
  return hand == Hand::Left ? JointRole::LeftShoulder : JointRole::RightShoulder;
}
JointRole elbow_role(Hand hand) {
  return hand == Hand::Left ? JointRole::LeftElbow : JointRole::RightElbow;
}
JointRole wrist_role(Hand hand) {
  return hand == Hand::Left ? JointRole::LeftWrist : JointRole::RightWrist;
}
JointRole index_base_role(Hand hand) {
  return hand == Hand::Left ? JointRole::LeftIndexBase : JointRole::RightIndexBase;
}

PointingVectors pointing_vectors(const Skeleton& skeleton, const JointPositions& positions,
                                 Hand hand) {
  const Vec3& tip = landmark_at(skeleton, positions, index_tip_landmark(hand));
  const Vec3& base = joint_at(skeleton, positions, index_base_role(hand));
  const Vec3& wrist = joint_at(skeleton, positions, wrist_role(hand));
  const Vec3& elbow = joint_at(skeleton, positions, elbow_role(hand));
  return PointingVectors{
      .finger_dir = tip - base,
      .finger_origin = base,
      .hand_base_dir = base - wrist,
      .hand_tip_dir = tip - wrist,
      .wrist_origin = wrist,
      .arm_dir = wrist - elbow,
      .elbow_origin = elbow,
  };
}

}  // namespace igk
