#include <functional>
#include <map>

#include <gtest/gtest.h>

#include <igk/error.hpp>
#include <igk/skeleton.hpp>

#include "test_support.hpp"

using namespace igk;

namespace {

using Roles = std::array<std::optional<std::size_t>, kJointRoleCount>;

std::size_t role_slot(JointRole r) { return static_cast<std::size_t>(r); }

// root -> shoulder -> elbow -> wrist -> index1 -> index2 -> index3, all along +X.
Skeleton straight_arm() {
  std::vector<Joint> joints{
      {"root", std::nullopt, Vec3::Zero()},
      {"shoulder", 0, Vec3(0.2, 1.4, 0.0)},
      {"elbow", 1, Vec3(0.3, 0.0, 0.0)},
      {"wrist", 2, Vec3(0.25, 0.0, 0.0)},
      {"index1", 3, Vec3(0.1, 0.0, 0.0)},
      {"index2", 4, Vec3(0.03, 0.0, 0.0)},
      {"index3", 5, Vec3(0.02, 0.0, 0.0)},
  };
  std::vector<Landmark> landmarks{{"left_index_tip", 6, Vec3(0.02, 0.0, 0.0)}};
  Roles roles{};
  roles[role_slot(JointRole::LeftShoulder)] = 1;
  roles[role_slot(JointRole::LeftElbow)] = 2;
  roles[role_slot(JointRole::LeftWrist)] = 3;
  roles[role_slot(JointRole::LeftIndexBase)] = 4;
  return Skeleton("arm", joints, landmarks, roles);
}

// Independent oracle: recursive FK straight from the definition, no caching.
Mat3 naive_decode(const Rotation6D& r) {
  const Vec3 b1 = r.a1 / std::sqrt(r.a1.dot(r.a1));
  Vec3 b2 = r.a2 - b1.dot(r.a2) * b1;
  b2 /= std::sqrt(b2.dot(b2));
  Mat3 m;
  m << b1, b2, b1.cross(b2);
  return m;
}

Mat3 naive_global_rotation(const Skeleton& s, const Pose& p, std::size_t j) {
  const Mat3 local = naive_decode(p.joint_rotations[j]);
  if (!s.joint(j).parent) return local;
  return naive_global_rotation(s, p, *s.joint(j).parent) * local;
}

Vec3 naive_position(const Skeleton& s, const Pose& p, std::size_t j) {
  const auto parent = s.joint(j).parent;
  if (!parent) return p.root_translation;
  return naive_position(s, p, *parent) + naive_global_rotation(s, p, *parent) * s.joint(j).rest_offset;
}

Vec3 naive_landmark(const Skeleton& s, const Pose& p, std::size_t l) {
  const Landmark& lm = s.landmarks()[l];
  return naive_position(s, p, lm.host) + naive_global_rotation(s, p, lm.host) * lm.local_offset;
}

}  // namespace

TEST(Profile, DefaultProfileShape) {
  const Skeleton& s = Skeleton::default_profile();
  EXPECT_EQ(s.name(), "smplh_52");
  EXPECT_EQ(s.joint_count(), 52U);
  EXPECT_EQ(s.joint(0).name, "pelvis");
  EXPECT_FALSE(s.joint(0).parent.has_value());
  for (std::size_t j = 1; j < s.joint_count(); ++j) {
    ASSERT_TRUE(s.joint(j).parent.has_value());
    EXPECT_LT(*s.joint(j).parent, j);
  }
  for (auto name : {landmark_names::kLeftEar, landmark_names::kRightEar, landmark_names::kLeftEye,
                    landmark_names::kRightEye, landmark_names::kNose,
                    landmark_names::kLeftIndexTip, landmark_names::kRightIndexTip}) {
    EXPECT_TRUE(s.find_landmark(name).has_value()) << name;
  }
  for (std::size_t r = 0; r < kJointRoleCount; ++r) {
    EXPECT_TRUE(s.has_role(static_cast<JointRole>(r)));
  }
  EXPECT_EQ(s.joint(s.role(JointRole::LeftIndexBase)).name, "left_index1");
  EXPECT_EQ(s.up(), Vec3::UnitY());
  EXPECT_EQ(s.forward(), Vec3::UnitZ());
}

TEST(Profile, MirroredArms) {
  const Skeleton& s = Skeleton::default_profile();
  const JointPositions rest = forward_kinematics(s, Pose::rest(s));
  for (const char* side : {"shoulder", "elbow", "wrist", "index1", "index3"}) {
    const Vec3 l = rest.joints[s.joint_index(std::string("left_") + side)];
    const Vec3 r = rest.joints[s.joint_index(std::string("right_") + side)];
    EXPECT_NEAR(l.x(), -r.x(), 1e-12) << side;
    EXPECT_NEAR(l.y(), r.y(), 1e-12) << side;
    EXPECT_NEAR(l.z(), r.z(), 1e-12) << side;
    EXPECT_GT(l.x(), 0.0) << side;
  }
}

TEST(Profile, ShippedFileMatchesBuiltIn) {
  const Skeleton loaded = Skeleton::load_profile(test::source_dir() / "core/data/smplh_52.profile");
  const Skeleton& builtin = Skeleton::default_profile();
  ASSERT_EQ(loaded.joint_count(), builtin.joint_count());
  for (std::size_t j = 0; j < loaded.joint_count(); ++j) {
    EXPECT_EQ(loaded.joint(j).name, builtin.joint(j).name);
    EXPECT_EQ(loaded.joint(j).rest_offset, builtin.joint(j).rest_offset);
  }
}

TEST(Profile, Errors) {
  auto code_of = [](std::string_view text) {
    try {
      Skeleton::from_profile_text(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  EXPECT_EQ(code_of("not json"), ErrorCode::SchemaError);
  EXPECT_EQ(code_of("[]"), ErrorCode::SchemaError);
  EXPECT_EQ(code_of(R"({"name": "x"})"), ErrorCode::SchemaError);
  EXPECT_EQ(code_of(R"({"joints": [{"name": "a", "parent": null, "offset": [0,0,0]},
                                   {"name": "b", "parent": "c", "offset": [0,0,1]}]})"),
            ErrorCode::InvariantViolation);
  EXPECT_EQ(code_of(R"({"joints": [{"name": "a", "parent": null, "offset": [0,0,0]},
                                   {"name": "b", "parent": "a", "offset": [0,1]}]})"),
            ErrorCode::SchemaError);
  EXPECT_EQ(code_of(R"({"joints": [{"name": "a", "parent": null, "offset": [0,0,0]}]})"),
            ErrorCode::InvariantViolation);
  EXPECT_THROW(Skeleton::load_profile("/nonexistent/profile.json"), Error);
}

TEST(Profile, LookupErrors) {
  const Skeleton& s = Skeleton::default_profile();
  try {
    s.joint_index("tail");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingJoint);
  }
  try {
    s.landmark_index("third_eye");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingLandmark);
  }
  const Skeleton arm = straight_arm();
  EXPECT_FALSE(arm.has_role(JointRole::Head));
  EXPECT_THROW(arm.role(JointRole::Head), Error);
}

TEST(ForwardKinematics, RestPoseSumsOffsets) {
  const Skeleton& s = Skeleton::default_profile();
  const JointPositions p = forward_kinematics(s, Pose::rest(s));
  for (std::size_t j = 0; j < s.joint_count(); ++j) {
    Vec3 sum = Vec3::Zero();
    for (auto k = s.joint(j).parent ? std::optional<std::size_t>(j) : std::nullopt; k && s.joint(*k).parent;
         k = s.joint(*k).parent) {
      sum += s.joint(*k).rest_offset;
    }
    EXPECT_LE((p.joints[j] - sum).norm(), 1e-12) << s.joint(j).name;
  }
}

TEST(ForwardKinematics, RootTranslationShiftsEverything) {
  const Skeleton& s = Skeleton::default_profile();
  Pose pose = Pose::rest(s);
  const JointPositions base = forward_kinematics(s, pose);
  pose.root_translation = Vec3(1, 2, 3);
  const JointPositions moved = forward_kinematics(s, pose);
  for (std::size_t j = 0; j < s.joint_count(); ++j) {
    EXPECT_LE((moved.joints[j] - base.joints[j] - Vec3(1, 2, 3)).norm(), 1e-12);
  }
  for (std::size_t l = 0; l < s.landmarks().size(); ++l) {
    EXPECT_LE((moved.landmarks[l] - base.landmarks[l] - Vec3(1, 2, 3)).norm(), 1e-12);
  }
}

TEST(ForwardKinematics, TwoJointChain) {
  const Skeleton s("chain", {{"a", std::nullopt, Vec3::Zero()}, {"b", 0, Vec3(0, 0, 1)}}, {}, Roles{});
  Pose pose = Pose::rest(s);
  pose.root_translation = Vec3(0.5, 0.25, -1.0);
  pose.joint_rotations[0] = encode_6d(from_axis_angle(Vec3::UnitX(), kPi / 2));
  const JointPositions p = forward_kinematics(s, pose);
  EXPECT_LE((p.joints[1] - (pose.root_translation + Vec3(0, -1, 0))).norm(), 1e-15);
}

TEST(ForwardKinematics, MatchesNaiveRecursiveOracle) {
  const Skeleton& s = Skeleton::default_profile();
  test::Random rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    Pose pose = test::random_pose(s, rng, 120.0);
    // Unnormalized, non-orthogonal 6D inputs are part of the contract.
    for (auto& r : pose.joint_rotations) {
      r.a1 *= rng.uniform(0.5, 2.0);
      r.a2 = rng.uniform(0.5, 2.0) * r.a2 + rng.uniform(-0.3, 0.3) * r.a1;
    }
    const JointPositions p = forward_kinematics(s, pose);
    for (std::size_t j = 0; j < s.joint_count(); ++j) {
      EXPECT_LE((p.joints[j] - naive_position(s, pose, j)).norm(), 1e-12);
    }
    for (std::size_t l = 0; l < s.landmarks().size(); ++l) {
      EXPECT_LE((p.landmarks[l] - naive_landmark(s, pose, l)).norm(), 1e-12);
    }
  }
}

TEST(ForwardKinematics, RootRotationEquivariance) {
  const Skeleton& s = Skeleton::default_profile();
  test::Random rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    Pose pose = test::random_pose(s, rng);
    const JointPositions before = forward_kinematics(s, pose);
    const Mat3 r = rng.rotation();
    pose.joint_rotations[0] = encode_6d(r * decode_6d(pose.joint_rotations[0]));
    const JointPositions after = forward_kinematics(s, pose);
    for (std::size_t j = 0; j < s.joint_count(); ++j) {
      const Vec3 expected = pose.root_translation + r * (before.joints[j] - pose.root_translation);
      EXPECT_LE((after.joints[j] - expected).norm(), 1e-9);
    }
  }
}

TEST(ForwardKinematics, LandmarksRigidToHost) {
  const Skeleton& s = Skeleton::default_profile();
  test::Random rng(23);
  const JointPositions rest = forward_kinematics(s, Pose::rest(s));
  for (int trial = 0; trial < 20; ++trial) {
    const JointPositions p = forward_kinematics(s, test::random_pose(s, rng, 150.0));
    for (std::size_t l = 0; l < s.landmarks().size(); ++l) {
      const std::size_t host = s.landmarks()[l].host;
      EXPECT_NEAR((p.landmarks[l] - p.joints[host]).norm(),
                  (rest.landmarks[l] - rest.joints[host]).norm(), 1e-9);
    }
  }
}

TEST(ForwardKinematics, SiblingOrderIrrelevant) {
  const std::vector<Joint> a{{"root", std::nullopt, Vec3::Zero()},
                             {"l", 0, Vec3(1, 0, 0)},
                             {"r", 0, Vec3(-1, 0, 0)},
                             {"l2", 1, Vec3(0, 1, 0)},
                             {"r2", 2, Vec3(0, 0, 1)}};
  const std::vector<Joint> b{{"root", std::nullopt, Vec3::Zero()},
                             {"r", 0, Vec3(-1, 0, 0)},
                             {"r2", 1, Vec3(0, 0, 1)},
                             {"l", 0, Vec3(1, 0, 0)},
                             {"l2", 3, Vec3(0, 1, 0)}};
  const Skeleton sa("a", a, {}, Roles{});
  const Skeleton sb("b", b, {}, Roles{});
  test::Random rng(24);
  std::map<std::string, Rotation6D> rot;
  for (const auto& j : a) rot[j.name] = encode_6d(rng.rotation());
  Pose pa = Pose::rest(sa);
  Pose pb = Pose::rest(sb);
  pa.root_translation = pb.root_translation = Vec3(0.1, 0.2, 0.3);
  for (std::size_t j = 0; j < a.size(); ++j) pa.joint_rotations[j] = rot[a[j].name];
  for (std::size_t j = 0; j < b.size(); ++j) pb.joint_rotations[j] = rot[b[j].name];
  const JointPositions xa = forward_kinematics(sa, pa);
  const JointPositions xb = forward_kinematics(sb, pb);
  for (std::size_t j = 0; j < a.size(); ++j) {
    EXPECT_LE((xa.joints[j] - xb.joints[sb.joint_index(a[j].name)]).norm(), 1e-15);
  }
}

TEST(ForwardKinematics, MismatchedPose) {
  const Skeleton& s = Skeleton::default_profile();
  Pose pose = Pose::rest(s);
  pose.joint_rotations.pop_back();
  try {
    forward_kinematics(s, pose);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MismatchedSkeleton);
  }
  pose = Pose::rest(s);
  pose.joint_rotations[4] = Rotation6D{Vec3::Zero(), Vec3::UnitY()};
  EXPECT_THROW(forward_kinematics(s, pose), Error);
}

TEST(FaceVector, LandmarkTableArithmetic) {
  Roles roles{};
  roles[role_slot(JointRole::Head)] = 1;
  const Skeleton s("head", {{"root", std::nullopt, Vec3::Zero()}, {"head", 0, Vec3(0, 1.6, 0)}},
                   {{"left_ear", 1, Vec3(0.07, 0, 0)},
                    {"right_ear", 1, Vec3(-0.07, 0, 0)},
                    {"left_eye", 1, Vec3(0.03, 0, 0.08)},
                    {"right_eye", 1, Vec3(-0.03, 0, 0.08)},
                    {"nose", 1, Vec3(0, -0.03, 0.10)}},
                   roles);
  const FaceFrame f = face_vector(s, forward_kinematics(s, Pose::rest(s)));
  // Ear midpoint (0, 1.6, 0); eyes+nose centroid (0, 1.59, 0.08667).
  EXPECT_NEAR(f.direction.x(), 0.0, 1e-15);
  EXPECT_NEAR(f.direction.y(), -0.01, 1e-12);
  EXPECT_NEAR(f.direction.z(), 0.26 / 3.0, 1e-12);
  EXPECT_LE((f.eye_midpoint - Vec3(0, 1.6, 0.08)).norm(), 1e-12);
}

TEST(FaceVector, DefaultProfileFacesForward) {
  const Skeleton& s = Skeleton::default_profile();
  const FaceFrame f = face_vector(s, forward_kinematics(s, Pose::rest(s)));
  EXPECT_NEAR(f.direction.x(), 0.0, 1e-12);
  EXPECT_GT(f.direction.z(), 0.0);
  EXPECT_LT(angle_between(f.direction, Vec3::UnitZ()), 10.0);
}

TEST(FaceVector, RotatesWithHead) {
  const Skeleton& s = Skeleton::default_profile();
  Pose pose = Pose::rest(s);
  const FaceFrame before = face_vector(s, forward_kinematics(s, pose));
  const Mat3 yaw = from_axis_angle(Vec3::UnitY(), kPi / 2);
  pose.joint_rotations[s.role(JointRole::Head)] = encode_6d(yaw);
  const FaceFrame after = face_vector(s, forward_kinematics(s, pose));
  EXPECT_LE((after.direction - yaw * before.direction).norm(), 1e-12);
}

TEST(FaceVector, MissingLandmark) {
  const Skeleton arm = straight_arm();
  try {
    face_vector(arm, forward_kinematics(arm, Pose::rest(arm)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingLandmark);
  }
}

TEST(PointingVectors, StraightArm) {
  const Skeleton s = straight_arm();
  const PointingVectors v = pointing_vectors(s, forward_kinematics(s, Pose::rest(s)), Hand::Left);
  for (const Vec3& d : {v.finger_dir, v.hand_base_dir, v.hand_tip_dir, v.arm_dir}) {
    EXPECT_LE((d.normalized() - Vec3::UnitX()).norm(), 1e-15);
  }
  EXPECT_LE((v.elbow_origin - Vec3(0.5, 1.4, 0)).norm(), 1e-15);
  EXPECT_LE((v.wrist_origin - Vec3(0.75, 1.4, 0)).norm(), 1e-15);
  EXPECT_LE((v.finger_origin - Vec3(0.85, 1.4, 0)).norm(), 1e-15);
  EXPECT_THROW(pointing_vectors(s, forward_kinematics(s, Pose::rest(s)), Hand::Right), Error);
}

TEST(PointingVectors, BentElbow) {
  const Skeleton s = straight_arm();
  Pose pose = Pose::rest(s);
  pose.joint_rotations[2] = encode_6d(from_axis_angle(Vec3::UnitY(), -kPi / 2));
  const PointingVectors v = pointing_vectors(s, forward_kinematics(s, pose), Hand::Left);
  EXPECT_LE((v.arm_dir - Vec3(0, 0, 0.25)).norm(), 1e-15);
}

TEST(PointingVectors, MatchOracleDifferences) {
  const Skeleton& s = Skeleton::default_profile();
  test::Random rng(25);
  for (int trial = 0; trial < 20; ++trial) {
    const Pose pose = test::random_pose(s, rng, 90.0);
    for (Hand hand : {Hand::Left, Hand::Right}) {
      const PointingVectors v = pointing_vectors(s, forward_kinematics(s, pose), hand);
      const Vec3 elbow = naive_position(s, pose, s.role(elbow_role(hand)));
      const Vec3 wrist = naive_position(s, pose, s.role(wrist_role(hand)));
      const Vec3 base = naive_position(s, pose, s.role(index_base_role(hand)));
      const Vec3 tip = naive_landmark(s, pose, s.landmark_index(index_tip_landmark(hand)));
      EXPECT_LE((v.finger_dir - (tip - base)).norm(), 1e-12);
      EXPECT_LE((v.hand_base_dir - (base - wrist)).norm(), 1e-12);
      EXPECT_LE((v.hand_tip_dir - (tip - wrist)).norm(), 1e-12);
      EXPECT_LE((v.arm_dir - (wrist - elbow)).norm(), 1e-12);
      EXPECT_LE((v.finger_origin - base).norm(), 1e-12);
      EXPECT_LE((v.wrist_origin - wrist).norm(), 1e-12);
      EXPECT_LE((v.elbow_origin - elbow).norm(), 1e-12);
    }
  }
}
