#include "igk/synth.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "igk/error.hpp"
#include "igk/metrics.hpp"
#include "igk/sampler.hpp"

namespace igk {

namespace {

constexpr double kHeadConvergenceDeg = 1e-9;
constexpr int kMaxHeadIterations = 64;

Hand hand_of(Effector e) { return e == Effector::LeftArm ? Hand::Left : Hand::Right; }

Mat3 parent_rotation(const Skeleton& skeleton, const GlobalTransforms& xf, std::size_t joint) {
  const auto& parent = skeleton.joint(joint).parent;
  return parent ? xf.rotations[*parent] : Mat3::Identity();
}

// Replaces a joint's local rotation so that its global rotation becomes `global`.
void set_global_rotation(const Skeleton& skeleton, const GlobalTransforms& xf, Pose& pose,
                         std::size_t joint, const Mat3& global) {
  const Mat3 local = parent_rotation(skeleton, xf, joint).transpose() * global;
  pose.joint_rotations[joint] = encode_6d(local);
}

// Joints from the elbow down to the host of the index tip, in chain order.
std::vector<std::size_t> arm_chain(const Skeleton& skeleton, Hand hand) {
  const std::size_t elbow = skeleton.role(elbow_role(hand));
  const std::size_t tip_host =
      skeleton.landmarks()[skeleton.landmark_index(index_tip_landmark(hand))].host;
  std::vector<std::size_t> chain;
  std::optional<std::size_t> j = tip_host;
  while (j && *j != elbow) {
    chain.push_back(*j);
    j = skeleton.joint(*j).parent;
  }
  if (!j) {
    throw Error(ErrorCode::MissingJoint,
                fmt::format("{} index tip does not descend from the elbow", to_string(hand)));
  }
  chain.push_back(elbow);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

double gaze_error(const Skeleton& skeleton, const Pose& pose, const Vec3& target) {
  const auto face = face_vector(skeleton, forward_kinematics(skeleton, pose));
  return angle_between(face.direction, target - face.eye_midpoint);
}

Vec3 perturbation_axis(const Vec3& aim_dir, const Vec3& up, PerturbAxis choice) {
  const Vec3 d = aim_dir.normalized();
  Vec3 e1 = up.cross(d);
  if (e1.norm() < 1e-9) {
    e1 = any_perpendicular(d);
  }
  e1.normalize();
  const Vec3 e2 = d.cross(e1);
  const double az = deg_to_rad(choice.azimuth_deg);
  return (std::cos(az) * e1 + std::sin(az) * e2).normalized();
}

}  // namespace

std::string_view to_string(Effector effector) {
  switch (effector) {
    case Effector::Head: return "head";
    case Effector::LeftArm: return "left_arm";
    case Effector::RightArm: return "right_arm";
  }
  return "head";
}

Effector effector_for(Intent intent) {
  switch (intent) {
    case Intent::Gaze: return Effector::Head;
    case Intent::PointLeft: return Effector::LeftArm;
    case Intent::PointRight: return Effector::RightArm;
  }
  return Effector::Head;
}

Pose aim_head(const Skeleton& skeleton, const Pose& pose, const Vec3& target) {
  const std::size_t head = skeleton.role(JointRole::Head);
  Pose out = pose;
  {
    const auto face = face_vector(skeleton, forward_kinematics(skeleton, out));
    if ((target - face.eye_midpoint).norm() < kMinAimDistance) {
      throw Error(ErrorCode::DegenerateTarget, "gaze target lies on the eyes");
    }
  }
  for (int it = 0; it < kMaxHeadIterations; ++it) {
    const auto xf = global_transforms(skeleton, out);
    const auto face = face_vector(skeleton, positions_from_transforms(skeleton, xf));
    const Vec3 sight = target - face.eye_midpoint;
    if (sight.norm() < kMinAimDistance) {
      throw Error(ErrorCode::DegenerateTarget, "gaze target lies on the eyes");
    }
    if (angle_between(face.direction, sight) < kHeadConvergenceDeg) break;
    const Mat3 q = rotation_between(face.direction, sight);
    set_global_rotation(skeleton, xf, out, head, q * xf.rotations[head]);
  }
  return out;
}

Pose aim_arm(const Skeleton& skeleton, const Pose& pose, const Vec3& target, Hand hand) {
  const std::size_t shoulder = skeleton.role(shoulder_role(hand));
  const auto chain = arm_chain(skeleton, hand);
  const auto& tip = skeleton.landmarks()[skeleton.landmark_index(index_tip_landmark(hand))];

  Pose out = pose;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const std::size_t j = chain[k];
    const Vec3& bone = skeleton.joint(j).rest_offset;
    const Vec3& child = k + 1 < chain.size() ? skeleton.joint(chain[k + 1]).rest_offset
                                             : tip.local_offset;
    if (bone.norm() < 1e-9 || child.norm() < 1e-9) {
      throw Error(ErrorCode::InvariantViolation,
                  fmt::format("joint '{}' has a zero-length bone", skeleton.joint(j).name));
    }
    out.joint_rotations[j] = encode_6d(rotation_between(child, bone));
  }

  const auto xf = global_transforms(skeleton, out);
  const Vec3& s = xf.positions[shoulder];
  const Vec3& e = xf.positions[chain.front()];
  const Vec3& w = xf.positions[chain[1]];
  if ((target - s).norm() < (e - s).norm() + kMinAimDistance) {
    throw Error(ErrorCode::DegenerateTarget, "pointing target is within reach of the elbow");
  }
  const Mat3 q = rotation_between(w - s, target - s);
  set_global_rotation(skeleton, xf, out, shoulder, q * xf.rotations[shoulder]);
  return out;
}

AimedPose aim(const Skeleton& skeleton, const Pose& pose, const Vec3& target, Effector effector) {
  AimedPose out;
  out.pose = effector == Effector::Head ? aim_head(skeleton, pose, target)
                                        : aim_arm(skeleton, pose, target, hand_of(effector));
  out.targets[static_cast<std::size_t>(effector)] = target;
  return out;
}

AimedPose perturb_aim(const Skeleton& skeleton, const AimedPose& aimed, Effector effector,
                      PerturbAxis axis, double alpha_deg) {
  if (!aimed.is_aimed(effector)) {
    throw Error(ErrorCode::NotAimed,
                fmt::format("pose was not aimed with the {}", to_string(effector)));
  }
  if (!(alpha_deg >= 0.0 && alpha_deg <= 90.0)) {
    throw Error(ErrorCode::InvariantViolation,
                fmt::format("perturbation {} deg outside [0, 90]", alpha_deg));
  }
  if (alpha_deg == 0.0) return aimed;

  const Vec3 target = *aimed.targets[static_cast<std::size_t>(effector)];
  AimedPose out = aimed;
  const auto xf = global_transforms(skeleton, aimed.pose);

  if (effector != Effector::Head) {
    const std::size_t elbow = skeleton.role(elbow_role(hand_of(effector)));
    const Vec3 aim_dir = target - xf.positions[elbow];
    const Mat3 p = from_axis_angle(perturbation_axis(aim_dir, skeleton.up(), axis),
                                   deg_to_rad(alpha_deg));
    set_global_rotation(skeleton, xf, out.pose, elbow, p * xf.rotations[elbow]);
    return out;
  }

  // The eyes sit off the head pivot, so rotating the head by beta changes the
  // gaze error by slightly less than beta. Solve error(beta) = alpha.
  const std::size_t head = skeleton.role(JointRole::Head);
  const auto face = face_vector(skeleton, positions_from_transforms(skeleton, xf));
  const Vec3 u = perturbation_axis(target - face.eye_midpoint, skeleton.up(), axis);
  const Mat3 aimed_global = xf.rotations[head];
  auto rotated = [&](double beta_deg) {
    Pose p = aimed.pose;
    set_global_rotation(skeleton, xf, p, head,
                        from_axis_angle(u, deg_to_rad(beta_deg)) * aimed_global);
    return p;
  };
  auto residual = [&](double beta_deg) {
    return gaze_error(skeleton, rotated(beta_deg), target) - alpha_deg;
  };

  double lo = 0.0;
  double hi = alpha_deg;
  while (residual(hi) < 0.0) {
    lo = hi;
    hi = std::min(180.0, hi * 1.25 + 1.0);
    if (hi >= 180.0) break;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  out.pose = rotated(0.5 * (lo + hi));
  return out;
}

std::string_view to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::Front: return "front";
    case TrajectoryKind::Left: return "left";
    case TrajectoryKind::Right: return "right";
    case TrajectoryKind::Far: return "far";
    case TrajectoryKind::Near: return "near";
    case TrajectoryKind::Up: return "up";
    case TrajectoryKind::Down: return "down";
    case TrajectoryKind::Left2Right: return "left2right";
    case TrajectoryKind::Right2Left: return "right2left";
    case TrajectoryKind::Up2Down: return "up2down";
    case TrajectoryKind::Down2Up: return "down2up";
    case TrajectoryKind::Near2Far: return "near2far";
    case TrajectoryKind::Far2Near: return "far2near";
  }
  return "front";
}

TrajectoryKind parse_trajectory(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(TrajectoryKind::Far2Near); ++k) {
    const auto kind = static_cast<TrajectoryKind>(k);
    if (to_string(kind) == name) return kind;
  }
  throw Error(ErrorCode::SchemaError, fmt::format("unknown trajectory '{}'", name));
}

bool is_dynamic(TrajectoryKind kind) {
  return static_cast<int>(kind) >= static_cast<int>(TrajectoryKind::Left2Right);
}

std::string_view to_string(IdleStyle style) { return style == IdleStyle::Static ? "static" : "sway"; }

IdleStyle parse_idle(std::string_view name) {
  if (name == "static") return IdleStyle::Static;
  if (name == "sway") return IdleStyle::Sway;
  throw Error(ErrorCode::SchemaError, fmt::format("unknown idle style '{}'", name));
}

std::pair<Vec3, Vec3> default_endpoints(TrajectoryKind kind) {
  auto fixed = [](double x, double y, double z) {
    return std::pair<Vec3, Vec3>{Vec3(x, y, z), Vec3(x, y, z)};
  };
  switch (kind) {
    case TrajectoryKind::Front: return fixed(0.0, 1.45, 2.5);
    case TrajectoryKind::Left: return fixed(2.5, 1.45, 1.0);
    case TrajectoryKind::Right: return fixed(-2.5, 1.45, 1.0);
    case TrajectoryKind::Far: return fixed(0.0, 1.45, 4.5);
    case TrajectoryKind::Near: return fixed(0.0, 1.3, 1.2);
    case TrajectoryKind::Up: return fixed(0.0, 3.2, 1.5);
    case TrajectoryKind::Down: return fixed(0.0, 0.2, 1.6);
    case TrajectoryKind::Left2Right: return {Vec3(2.0, 1.45, 2.0), Vec3(-2.0, 1.45, 2.0)};
    case TrajectoryKind::Right2Left: return {Vec3(-2.0, 1.45, 2.0), Vec3(2.0, 1.45, 2.0)};
    case TrajectoryKind::Up2Down: return {Vec3(0.3, 3.0, 2.0), Vec3(0.3, 0.3, 2.0)};
    case TrajectoryKind::Down2Up: return {Vec3(0.3, 0.3, 2.0), Vec3(0.3, 3.0, 2.0)};
    case TrajectoryKind::Near2Far: return {Vec3(0.3, 1.4, 1.2), Vec3(0.3, 1.4, 4.5)};
    case TrajectoryKind::Far2Near: return {Vec3(0.3, 1.4, 4.5), Vec3(0.3, 1.4, 1.2)};
  }
  return fixed(0.0, 1.45, 2.5);
}

namespace {

void check_endpoint(const Vec3& p, const char* which) {
  if (!p.allFinite() || (p.cwiseAbs().array() > 5.0).any()) {
    throw Error(ErrorCode::InvariantViolation, "endpoint outside [-5, 5]^3", which);
  }
  if (p.norm() < kMinAimDistance) {
    throw Error(ErrorCode::DegenerateTarget, "endpoint within 0.05 m of the origin", which);
  }
}

}  // namespace

void validate(const Scenario& s) {
  if (s.frames == 0) throw Error(ErrorCode::InvariantViolation, "scenario has no frames", "frames");
  if (!(s.fps > 0.0)) throw Error(ErrorCode::InvariantViolation, "fps must be positive", "fps");
  if (s.jitter < 0.0) throw Error(ErrorCode::InvariantViolation, "negative jitter", "jitter");
  const auto [a, b] = default_endpoints(s.trajectory);
  check_endpoint(s.start.value_or(a), "start");
  check_endpoint(s.end.value_or(s.start && !is_dynamic(s.trajectory) ? *s.start : b), "end");
  for (std::size_t i = 0; i < s.spans.size(); ++i) {
    const auto& span = s.spans[i];
    if (span.end <= span.start || span.end > s.frames) {
      throw Error(ErrorCode::InvariantViolation, "span outside the clip",
                  fmt::format("spans[{}]", i));
    }
  }
  if (s.perturbation_deg && !(*s.perturbation_deg >= 0.0 && *s.perturbation_deg <= 90.0)) {
    throw Error(ErrorCode::InvariantViolation, "perturbation outside [0, 90]", "perturbation");
  }
}

Pose idle_pose(const Skeleton& skeleton) {
  Pose pose = Pose::rest(skeleton);
  pose.root_translation = Vec3(0.0, kStandingRootHeight, 0.0);
  constexpr double kArmDrop = 70.0;
  for (Hand hand : {Hand::Left, Hand::Right}) {
    if (!skeleton.has_role(shoulder_role(hand))) continue;
    const double sign = hand == Hand::Left ? -1.0 : 1.0;
    pose.joint_rotations[skeleton.role(shoulder_role(hand))] =
        encode_6d(from_axis_angle(Vec3::UnitZ(), sign * deg_to_rad(kArmDrop)));
  }
  return pose;
}

namespace {

struct SwayTerm {
  Vec3 axis;
  double amplitude_rad;
  double frequency_hz;
  double phase;
};

double uniform(SeededEngine& engine, double lo, double hi) {
  // 53 random bits -> [0, 1).
  const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

Vec3 random_unit(SeededEngine& engine) {
  for (;;) {
    const Vec3 v(uniform(engine, -1, 1), uniform(engine, -1, 1), uniform(engine, -1, 1));
    const double n = v.norm();
    if (n > 1e-3 && n <= 1.0) return v / n;
  }
}

}  // namespace

MotionClip build_scenario(const Scenario& scenario, const Skeleton& skeleton, std::uint64_t seed,
                          const std::string& id) {
  validate(scenario);
  SeededEngine engine(seed);

  auto [start, end] = default_endpoints(scenario.trajectory);
  if (scenario.start) {
    start = *scenario.start;
    if (!is_dynamic(scenario.trajectory)) end = start;
  }
  if (scenario.end) end = *scenario.end;
  if (scenario.jitter > 0.0) {
    const Vec3 j0(uniform(engine, -1, 1), uniform(engine, -1, 1), uniform(engine, -1, 1));
    const Vec3 j1(uniform(engine, -1, 1), uniform(engine, -1, 1), uniform(engine, -1, 1));
    start += scenario.jitter * j0;
    end = is_dynamic(scenario.trajectory) ? Vec3(end + scenario.jitter * j1) : start;
  }
  check_endpoint(start, "start");
  check_endpoint(end, "end");

  const std::size_t n = scenario.frames;
  std::vector<SwayTerm> sway;
  if (scenario.idle == IdleStyle::Sway) {
    sway.reserve(skeleton.joint_count());
    for (std::size_t j = 0; j < skeleton.joint_count(); ++j) {
      SwayTerm term;
      term.axis = random_unit(engine);
      term.amplitude_rad = deg_to_rad(uniform(engine, 0.5, kMaxSwayDeg));
      term.frequency_hz = uniform(engine, 0.2, 0.8);
      term.phase = uniform(engine, 0.0, 2.0 * kPi);
      sway.push_back(term);
    }
  }
  const PerturbAxis perturb_axis{uniform(engine, 0.0, 360.0)};

  const Effector effector = effector_for(scenario.intent);
  std::vector<std::size_t> aim_joints;
  if (effector == Effector::Head) {
    aim_joints.push_back(skeleton.role(JointRole::Head));
  } else {
    const Hand hand = hand_of(effector);
    aim_joints = arm_chain(skeleton, hand);
    aim_joints.push_back(skeleton.role(shoulder_role(hand)));
  }

  const std::vector<TimeSpan> aim_spans =
      scenario.spans.empty() ? std::vector<TimeSpan>{TimeSpan{0, n}} : scenario.spans;
  auto aimed_frame = [&aim_spans](std::size_t t) {
    return std::any_of(aim_spans.begin(), aim_spans.end(),
                       [t](const TimeSpan& s) { return s.contains(t); });
  };

  const Pose base = idle_pose(skeleton);
  MotionClip clip;
  clip.id = id;
  clip.fps = scenario.fps;
  clip.track = scenario.spans.empty() ? Track::I : Track::II;
  clip.joint_names = skeleton.joint_names();
  clip.intent.category = scenario.intent;
  clip.intent.gt_spans = scenario.spans;
  clip.initial_posture = InitialPosture::Standing;
  clip.transcript = scenario.transcript;
  clip.poses.reserve(n);
  clip.intent.targets.reserve(n);

  for (std::size_t t = 0; t < n; ++t) {
    const double s = n > 1 ? static_cast<double>(t) / static_cast<double>(n - 1) : 0.0;
    const Vec3 target = start + s * (end - start);
    const bool aimed_now = aimed_frame(t);

    Pose pose = base;
    if (!sway.empty()) {
      const double time = static_cast<double>(t) / scenario.fps;
      for (std::size_t j = 1; j < skeleton.joint_count(); ++j) {
        if (aimed_now && std::find(aim_joints.begin(), aim_joints.end(), j) != aim_joints.end()) {
          continue;
        }
        const auto& term = sway[j];
        const double angle =
            term.amplitude_rad * std::sin(2.0 * kPi * term.frequency_hz * time + term.phase);
        pose.joint_rotations[j] =
            encode_6d(decode_6d(base.joint_rotations[j]) * from_axis_angle(term.axis, angle));
      }
    }
    if (aimed_now) {
      AimedPose aimed = aim(skeleton, pose, target, effector);
      if (scenario.perturbation_deg && *scenario.perturbation_deg > 0.0) {
        aimed = perturb_aim(skeleton, aimed, effector, perturb_axis, *scenario.perturbation_deg);
      }
      pose = std::move(aimed.pose);
    }
    clip.poses.push_back(std::move(pose));
    clip.intent.targets.push_back(target);
  }

  validate(clip);
  return clip;
}

namespace {

using nlohmann::json;

Vec3 json_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::SchemaError, "expected an array of 3 numbers", path);
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::vector<Scenario> parse_scenarios(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, e.what(), "<scenarios>");
  }
  if (!doc.is_object() || !doc.contains("scenarios") || !doc["scenarios"].is_array()) {
    throw Error(ErrorCode::SchemaError, "expected {\"scenarios\": [...]}", "scenarios");
  }
  std::vector<Scenario> out;
  const json& list = doc["scenarios"];
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = fmt::format("scenarios[{}]", i);
    const json& js = list[i];
    try {
      Scenario s;
      s.intent = parse_intent(js.at("intent").get<std::string>());
      s.trajectory = parse_trajectory(js.at("trajectory").get<std::string>());
      if (js.contains("start")) s.start = json_vec3(js["start"], path + ".start");
      if (js.contains("end")) s.end = json_vec3(js["end"], path + ".end");
      s.jitter = js.value("jitter", 0.0);
      s.frames = js.value("frames", std::size_t{100});
      s.fps = js.value("fps", kDefaultFps);
      if (js.contains("spans")) {
        for (const auto& span : js["spans"]) {
          s.spans.push_back(TimeSpan{span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()});
        }
      }
      if (js.contains("idle")) s.idle = parse_idle(js["idle"].get<std::string>());
      if (js.contains("perturbation") && !js["perturbation"].is_null()) {
        s.perturbation_deg = js["perturbation"].get<double>();
      }
      if (js.contains("transcript")) s.transcript = js["transcript"].get<std::string>();
      validate(s);
      out.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::SchemaError, e.what(), path);
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), e.path().empty() ? path : path + "." + e.path());
    }
  }
  return out;
}

std::string serialize_scenarios(const std::vector<Scenario>& scenarios) {
  nlohmann::ordered_json doc;
  auto& list = doc["scenarios"] = nlohmann::ordered_json::array();
  for (const auto& s : scenarios) {
    nlohmann::ordered_json js;
    js["intent"] = to_string(s.intent);
    js["trajectory"] = to_string(s.trajectory);
    if (s.start) js["start"] = {s.start->x(), s.start->y(), s.start->z()};
    if (s.end) js["end"] = {s.end->x(), s.end->y(), s.end->z()};
    js["jitter"] = s.jitter;
    js["frames"] = s.frames;
    js["fps"] = s.fps;
    auto& spans = js["spans"] = nlohmann::ordered_json::array();
    for (const auto& span : s.spans) spans.push_back({span.start, span.end});
    js["idle"] = to_string(s.idle);
    if (s.perturbation_deg) js["perturbation"] = *s.perturbation_deg;
    if (s.transcript) js["transcript"] = *s.transcript;
    list.push_back(std::move(js));
  }
  return doc.dump(2) + "\n";
}

}  // namespace igk
