#include <functional>

#include <gtest/gtest.h>

#include <igk/clip.hpp>
#include <igk/error.hpp>
#include <igk/metrics.hpp>
#include <igk/synth.hpp>

#include "test_support.hpp"

using namespace igk;

namespace {

const Skeleton& skel() { return Skeleton::default_profile(); }

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

double gaze(const Pose& pose, const Vec3& target) {
  const auto fk = forward_kinematics(skel(), pose);
  return *gaze_deviation(face_vector(skel(), fk), target);
}

PointingDeviation pointing(const Pose& pose, const Vec3& target, Hand hand) {
  const auto fk = forward_kinematics(skel(), pose);
  return *pointing_deviation(pointing_vectors(skel(), fk, hand), target);
}

Vec3 shoulder_position(const Pose& pose, Hand hand) {
  return forward_kinematics(skel(), pose).joints[skel().role(shoulder_role(hand))];
}

AngularDeviationSeries clip_series(const MotionClip& clip) {
  const auto positions = clip_positions(skel(), clip);
  return iad_series(skel(), positions, clip.intent.targets, clip.intent.category);
}

}  // namespace

TEST(AimHead, TargetOnFaceAxisLeavesPoseUnchanged) {
  const Pose pose = idle_pose(skel());
  const FaceFrame face = face_vector(skel(), forward_kinematics(skel(), pose));
  const Vec3 target = face.eye_midpoint + 3.0 * face.direction.normalized();
  const Pose aimed = aim_head(skel(), pose, target);
  const std::size_t head = skel().role(JointRole::Head);
  EXPECT_LE((decode_6d(aimed.joint_rotations[head]) - decode_6d(pose.joint_rotations[head]))
                .cwiseAbs()
                .maxCoeff(),
            1e-9);
}

TEST(AimHead, TargetToTheLeft) {
  const Pose pose = idle_pose(skel());
  const FaceFrame face = face_vector(skel(), forward_kinematics(skel(), pose));
  const Vec3 target = face.eye_midpoint + Vec3(3, 0, 0);
  EXPECT_LE(gaze(aim_head(skel(), pose, target), target), 1e-6);
  // Far enough away that the eyes moving with the head do not shift the sight line.
  const Vec3 far = face.eye_midpoint + Vec3(1e5, 0, 0);
  const Pose aimed = aim_head(skel(), pose, far);
  const FaceFrame after = face_vector(skel(), forward_kinematics(skel(), aimed));
  // The face now looks along +X, a 90 degree turn from +Z in the horizontal plane.
  const double yaw = rad_to_deg(std::atan2(after.direction.x(), after.direction.z()));
  EXPECT_NEAR(yaw, 90.0, 1e-3);
}

TEST(AimHead, TargetDirectlyAbove) {
  const Pose pose = idle_pose(skel());
  const FaceFrame face = face_vector(skel(), forward_kinematics(skel(), pose));
  const Vec3 target = face.eye_midpoint + Vec3(0, 2, 0);
  EXPECT_LE(gaze(aim_head(skel(), pose, target), target), 1e-3);
}

TEST(AimHead, RandomTargetsConverge) {
  test::Random rng(51);
  for (int i = 0; i < 100; ++i) {
    const Vec3 target = rng.vec(-4, 4);
    const FaceFrame face = face_vector(skel(), forward_kinematics(skel(), idle_pose(skel())));
    if ((target - face.eye_midpoint).norm() < 0.5) continue;
    EXPECT_LE(gaze(aim_head(skel(), idle_pose(skel()), target), target), 1e-6);
  }
}

TEST(AimHead, TargetOnEyes) {
  const Pose pose = idle_pose(skel());
  const FaceFrame face = face_vector(skel(), forward_kinematics(skel(), pose));
  EXPECT_EQ(code_of([&] { aim_head(skel(), pose, face.eye_midpoint + Vec3(0.01, 0, 0)); }),
            ErrorCode::DegenerateTarget);
}

TEST(AimArm, TargetAtShoulderHeight) {
  const Pose pose = idle_pose(skel());
  const Vec3 s = shoulder_position(pose, Hand::Left);
  const Vec3 target(1.0, s.y(), 1.0);
  const Pose aimed = aim_arm(skel(), pose, target, Hand::Left);
  const PointingDeviation d = pointing(aimed, target, Hand::Left);
  EXPECT_LE(d.combined, 1e-3);
  EXPECT_LE(d.arm, 1e-6);
  EXPECT_LE(d.finger, 1e-6);
  EXPECT_LE(d.hand, 1e-6);
}

TEST(AimArm, TargetAlongCurrentAxisKeepsShoulder) {
  const Pose pose = idle_pose(skel());
  const Vec3 target(1.5, 1.8, 1.2);
  const Pose once = aim_arm(skel(), pose, target, Hand::Right);
  const auto fk = forward_kinematics(skel(), once);
  const Vec3 s = fk.joints[skel().role(JointRole::RightShoulder)];
  const Vec3 further = s + 2.5 * (target - s);
  const Pose twice = aim_arm(skel(), once, further, Hand::Right);
  const std::size_t sh = skel().role(JointRole::RightShoulder);
  EXPECT_LE((decode_6d(twice.joint_rotations[sh]) - decode_6d(once.joint_rotations[sh]))
                .cwiseAbs()
                .maxCoeff(),
            1e-9);
}

TEST(AimArm, MirroredTargetsGiveMirroredShoulders) {
  const Pose pose = idle_pose(skel());
  const Mat3 m = Vec3(-1, 1, 1).asDiagonal();
  test::Random rng(52);
  for (int i = 0; i < 20; ++i) {
    const Vec3 target(rng.uniform(0.5, 3), rng.uniform(0, 3), rng.uniform(0.5, 3));
    const Pose left = aim_arm(skel(), pose, target, Hand::Left);
    const Pose right = aim_arm(skel(), pose, m * target, Hand::Right);
    const Mat3 rl = decode_6d(left.joint_rotations[skel().role(JointRole::LeftShoulder)]);
    const Mat3 rr = decode_6d(right.joint_rotations[skel().role(JointRole::RightShoulder)]);
    EXPECT_LE((m * rl * m - rr).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(AimArm, RandomTargetsAreExact) {
  test::Random rng(53);
  for (int i = 0; i < 100; ++i) {
    const Hand hand = i % 2 ? Hand::Left : Hand::Right;
    const Vec3 target = rng.vec(-4, 4);
    const Vec3 s = shoulder_position(idle_pose(skel()), hand);
    if ((target - s).norm() < 0.6) continue;
    const Pose aimed = aim_arm(skel(), test::random_pose(skel(), rng, 40.0), target, hand);
    EXPECT_LE(pointing(aimed, target, hand).combined, 1e-6);
  }
}

TEST(AimArm, TargetInsideReach) {
  const Pose pose = idle_pose(skel());
  const Vec3 s = shoulder_position(pose, Hand::Left);
  EXPECT_EQ(code_of([&] { aim_arm(skel(), pose, s + Vec3(0.1, 0, 0.1), Hand::Left); }),
            ErrorCode::DegenerateTarget);
}

TEST(Perturb, ZeroIsIdentity) {
  const AimedPose aimed = aim(skel(), idle_pose(skel()), Vec3(1, 1.4, 2), Effector::LeftArm);
  const AimedPose same = perturb_aim(skel(), aimed, Effector::LeftArm, {}, 0.0);
  for (std::size_t j = 0; j < skel().joint_count(); ++j) {
    EXPECT_EQ(same.pose.joint_rotations[j].a1, aimed.pose.joint_rotations[j].a1);
    EXPECT_EQ(same.pose.joint_rotations[j].a2, aimed.pose.joint_rotations[j].a2);
  }
}

TEST(Perturb, ArmAngleEqualsAlpha) {
  const Vec3 target(1.2, 1.5, 2.0);
  const AimedPose aimed = aim(skel(), idle_pose(skel()), target, Effector::RightArm);
  for (double alpha : {1.0, 5.0, 15.0, 30.0, 60.0, 90.0}) {
    for (double azimuth : {0.0, 90.0, 217.0}) {
      const AimedPose p = perturb_aim(skel(), aimed, Effector::RightArm, {azimuth}, alpha);
      const PointingDeviation d = pointing(p.pose, target, Hand::Right);
      EXPECT_NEAR(d.arm, alpha, 1e-6) << alpha << " " << azimuth;
      EXPECT_NEAR(d.combined, alpha, 0.1) << alpha << " " << azimuth;
    }
  }
}

TEST(Perturb, HeadAngleEqualsAlpha) {
  const Vec3 target(0.8, 1.7, 2.5);
  const AimedPose aimed = aim(skel(), idle_pose(skel()), target, Effector::Head);
  for (double alpha : {1.0, 5.0, 30.0, 60.0, 90.0}) {
    for (double azimuth : {0.0, 90.0, 300.0}) {
      const AimedPose p = perturb_aim(skel(), aimed, Effector::Head, {azimuth}, alpha);
      EXPECT_NEAR(gaze(p.pose, target), alpha, 0.1) << alpha << " " << azimuth;
    }
  }
}

TEST(Perturb, Errors) {
  const AimedPose aimed = aim(skel(), idle_pose(skel()), Vec3(1, 1.4, 2), Effector::LeftArm);
  EXPECT_EQ(code_of([&] { perturb_aim(skel(), aimed, Effector::Head, {}, 10.0); }),
            ErrorCode::NotAimed);
  EXPECT_EQ(code_of([&] { perturb_aim(skel(), aimed, Effector::LeftArm, {}, 91.0); }),
            ErrorCode::InvariantViolation);
  EXPECT_EQ(code_of([&] { perturb_aim(skel(), aimed, Effector::LeftArm, {}, -1.0); }),
            ErrorCode::InvariantViolation);
}

TEST(IdlePose, ArmsLoweredAndStanding) {
  const auto fk = forward_kinematics(skel(), idle_pose(skel()));
  for (Hand hand : {Hand::Left, Hand::Right}) {
    const Vec3 s = fk.joints[skel().role(shoulder_role(hand))];
    const Vec3 w = fk.joints[skel().role(wrist_role(hand))];
    EXPECT_LT(w.y(), s.y() - 0.3);
  }
  EXPECT_NEAR(fk.joints[0].y(), kStandingRootHeight, 1e-12);
}

TEST(Scenario, StaticGazeWholeClip) {
  Scenario sc;
  sc.intent = Intent::Gaze;
  sc.trajectory = TrajectoryKind::Front;
  sc.frames = 40;
  sc.spans = {{0, 40}};
  const MotionClip clip = build_scenario(sc, skel(), 1, "g");
  EXPECT_EQ(clip.track, Track::II);
  const auto series = clip_series(clip);
  EXPECT_EQ(iar_at_k(series, 30.0), 1.0);
  EXPECT_EQ(iou_at_k(series, 30.0, clip.intent.gt_spans), 1.0);
  for (const auto& v : series.values) EXPECT_LE(*v, 1e-3);
}

TEST(Scenario, DynamicPointingWithSway) {
  Scenario sc;
  sc.intent = Intent::PointLeft;
  sc.trajectory = TrajectoryKind::Left2Right;
  sc.frames = 100;
  sc.spans = {{20, 60}};
  sc.idle = IdleStyle::Sway;
  const MotionClip clip = build_scenario(sc, skel(), 2, "p");
  const auto series = clip_series(clip);
  EXPECT_GE(iou_at_k(series, 15.0, clip.intent.gt_spans), 0.9);
  for (std::size_t t = 20; t < 60; ++t) EXPECT_LE(*series.values[t], 1e-3) << t;
  // Targets move linearly between the endpoints.
  const auto [a, b] = default_endpoints(TrajectoryKind::Left2Right);
  EXPECT_LE((clip.intent.targets.front() - a).norm(), 1e-12);
  EXPECT_LE((clip.intent.targets.back() - b).norm(), 1e-12);
  EXPECT_LE((clip.intent.targets[33] - (a + (33.0 / 99.0) * (b - a))).norm(), 1e-12);
}

TEST(Scenario, PerturbationDefeatsThreshold) {
  Scenario sc;
  sc.intent = Intent::PointRight;
  sc.trajectory = TrajectoryKind::Up2Down;
  sc.frames = 50;
  sc.spans = {{10, 40}};
  sc.perturbation_deg = 45.0;
  const MotionClip clip = build_scenario(sc, skel(), 3, "x");
  const auto series = clip_series(clip);
  EXPECT_EQ(iar_at_k(series, 15.0, clip.intent.gt_spans), 0.0);
  for (std::size_t t = 10; t < 40; ++t) EXPECT_NEAR(*series.values[t], 45.0, 0.1);
}

TEST(Scenario, TrackOneAimsWholeClip) {
  Scenario sc;
  sc.intent = Intent::Gaze;
  sc.trajectory = TrajectoryKind::Near2Far;
  sc.frames = 30;
  sc.idle = IdleStyle::Sway;
  const MotionClip clip = build_scenario(sc, skel(), 4, "t1");
  EXPECT_EQ(clip.track, Track::I);
  EXPECT_TRUE(clip.intent.gt_spans.empty());
  for (const auto& v : clip_series(clip).values) EXPECT_LE(*v, 1e-3);
}

TEST(Scenario, EveryKindAndIntentIsExact) {
  for (int k = 0; k <= static_cast<int>(TrajectoryKind::Far2Near); ++k) {
    for (Intent intent : {Intent::Gaze, Intent::PointLeft, Intent::PointRight}) {
      Scenario sc;
      sc.intent = intent;
      sc.trajectory = static_cast<TrajectoryKind>(k);
      sc.frames = 20;
      sc.jitter = 0.2;
      sc.idle = IdleStyle::Sway;
      const MotionClip clip = build_scenario(sc, skel(), 100 + k, "k");
      for (const auto& v : clip_series(clip).values) {
        ASSERT_TRUE(v.has_value());
        EXPECT_LE(*v, 1e-3) << to_string(sc.trajectory) << " " << to_string(intent);
      }
    }
  }
}

TEST(Scenario, DeterministicAndRoundTrips) {
  Scenario sc;
  sc.intent = Intent::PointLeft;
  sc.trajectory = TrajectoryKind::Down2Up;
  sc.frames = 25;
  sc.jitter = 0.3;
  sc.idle = IdleStyle::Sway;
  sc.spans = {{3, 9}, {12, 20}};
  const std::string a = serialize_clip(build_scenario(sc, skel(), 77, "d"));
  EXPECT_EQ(a, serialize_clip(build_scenario(sc, skel(), 77, "d")));
  EXPECT_NE(a, serialize_clip(build_scenario(sc, skel(), 78, "d")));
  EXPECT_EQ(serialize_clip(parse_clip(a)), a);
}

TEST(Scenario, ValidationErrors) {
  Scenario sc;
  sc.start = Vec3(0.01, 0, 0.02);
  EXPECT_EQ(code_of([&] { validate(sc); }), ErrorCode::DegenerateTarget);
  sc.start = Vec3(0, 6, 1);
  EXPECT_EQ(code_of([&] { validate(sc); }), ErrorCode::InvariantViolation);
  sc = Scenario{};
  sc.spans = {{0, 200}};
  EXPECT_EQ(code_of([&] { validate(sc); }), ErrorCode::InvariantViolation);
  sc = Scenario{};
  sc.perturbation_deg = 120.0;
  EXPECT_EQ(code_of([&] { validate(sc); }), ErrorCode::InvariantViolation);
  sc = Scenario{};
  sc.start = Vec3::Zero();
  EXPECT_EQ(code_of([&] { build_scenario(sc, skel(), 1, "z"); }), ErrorCode::DegenerateTarget);
}

TEST(ScenarioFile, RoundTrip) {
  Scenario a;
  a.intent = Intent::PointRight;
  a.trajectory = TrajectoryKind::Right2Left;
  a.start = Vec3(-2, 1.5, 2);
  a.end = Vec3(2, 1.5, 2);
  a.spans = {{5, 50}};
  a.perturbation_deg = 12.5;
  a.transcript = "that one";
  Scenario b;
  b.idle = IdleStyle::Sway;
  b.frames = 33;
  const std::string text = serialize_scenarios({a, b});
  const auto parsed = parse_scenarios(text);
  ASSERT_EQ(parsed.size(), 2U);
  EXPECT_EQ(serialize_scenarios(parsed), text);
  EXPECT_EQ(parsed[0].start, a.start);
  EXPECT_EQ(parsed[0].spans, a.spans);
  EXPECT_EQ(parsed[1].frames, 33U);
  EXPECT_EQ(code_of([] { parse_scenarios(R"({"scenarios": [{"intent": "gaze", "trajectory": "sideways"}]})"); }),
            ErrorCode::SchemaError);
}

TEST(ScenarioFile, ShippedOracleSetParses) {
  const auto scenarios =
      parse_scenarios(read_text_file(test::source_dir() / "data/scenarios/oracle.json"));
  EXPECT_EQ(scenarios.size(), 26U);
  for (const auto& s : scenarios) validate(s);
}
