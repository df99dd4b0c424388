#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "igk/clip.hpp"
#include "igk/error.hpp"
#include "igk/sampler.hpp"

namespace igk {

using nlohmann::json;

std::string_view to_string(Track track) { return track == Track::I ? "I" : "II"; }

Track parse_track(std::string_view text) {
  if (text == "I") return Track::I;
  if (text == "II") return Track::II;
  throw Error(ErrorCode::SchemaError, fmt::format("unknown track '{}' (expected I or II)", text));
}

std::string_view to_string(InitialPosture posture) {
  switch (posture) {
    case InitialPosture::Sitting: return "sitting";
    case InitialPosture::Standing: return "standing";
    case InitialPosture::Squatting: return "squatting";
    case InitialPosture::Lying: return "lying";
  }
  return "standing";
}

InitialPosture parse_posture(std::string_view text) {
  for (auto p : {InitialPosture::Sitting, InitialPosture::Standing, InitialPosture::Squatting,
                 InitialPosture::Lying}) {
    if (to_string(p) == text) return p;
  }
  throw Error(ErrorCode::SchemaError, fmt::format("unknown initial posture '{}'", text));
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  throw Error(ErrorCode::SchemaError, fmt::format("unknown split '{}'", text));
}

std::array<double, 3> IntentTrack::one_hot() const {
  std::array<double, 3> v{0.0, 0.0, 0.0};
  v[static_cast<std::size_t>(category)] = 1.0;
  return v;
}

void validate(const MotionClip& clip) {
  const std::size_t n = clip.poses.size();
  if (clip.id.empty()) throw Error(ErrorCode::InvariantViolation, "clip id is empty", "id");
  if (!(clip.fps > 0.0) || !std::isfinite(clip.fps)) {
    throw Error(ErrorCode::InvariantViolation, "fps must be positive", "fps");
  }
  if (n == 0) {
    throw Error(ErrorCode::InvariantViolation, "clip has no frames", "motion.root_translation");
  }
  if (clip.intent.targets.size() != n) {
    throw Error(ErrorCode::InvariantViolation,
                fmt::format("{} target frames for {} pose frames", clip.intent.targets.size(), n),
                "intent.target");
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (!clip.intent.targets[t].allFinite()) {
      throw Error(ErrorCode::InvariantViolation, "non-finite target",
                  fmt::format("intent.target[{}]", t));
    }
  }
  if (clip.track == Track::II && clip.intent.gt_spans.empty()) {
    throw Error(ErrorCode::InvariantViolation, "Track-II clips need at least one span",
                "intent.gt_spans");
  }
  if (clip.track == Track::I && !clip.intent.gt_spans.empty()) {
    throw Error(ErrorCode::InvariantViolation, "Track-I clips carry no spans", "intent.gt_spans");
  }
  for (std::size_t i = 0; i < clip.intent.gt_spans.size(); ++i) {
    const auto& s = clip.intent.gt_spans[i];
    if (s.end <= s.start || s.end > n) {
      throw Error(ErrorCode::InvariantViolation,
                  fmt::format("span [{}, {}) invalid for {} frames", s.start, s.end, n),
                  fmt::format("intent.gt_spans[{}]", i));
    }
  }
  const std::size_t joints = clip.joint_names.size();
  if (joints < 2) {
    throw Error(ErrorCode::InvariantViolation, "a clip needs at least 2 joints",
                "motion.joint_names");
  }
  for (std::size_t t = 0; t < n; ++t) {
    const auto& pose = clip.poses[t];
    if (!pose.root_translation.allFinite()) {
      throw Error(ErrorCode::InvariantViolation, "non-finite root translation",
                  fmt::format("motion.root_translation[{}]", t));
    }
    if (pose.joint_rotations.size() != joints) {
      throw Error(ErrorCode::InvariantViolation,
                  fmt::format("{} rotations for {} joints", pose.joint_rotations.size(), joints),
                  fmt::format("motion.joint_rotations_6d[{}]", t));
    }
    for (std::size_t j = 0; j < joints; ++j) {
      const auto& r = pose.joint_rotations[j];
      const std::string path = fmt::format("motion.joint_rotations_6d[{}][{}]", t, j);
      if (!r.a1.allFinite() || !r.a2.allFinite()) {
        throw Error(ErrorCode::InvariantViolation, "non-finite rotation", path);
      }
      try {
        (void)decode_6d(r);
      } catch (const Error& e) {
        throw Error(ErrorCode::DegenerateRotation, e.what(), path);
      }
    }
  }
  if (clip.audio_beats) {
    try {
      validate(*clip.audio_beats);
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), "audio_beats");
    }
  }
}

namespace {

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw Error(ErrorCode::SchemaError, "expected an object", path);
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::SchemaError, "missing field",
                path.empty() ? std::string(key) : path + "." + key);
  }
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw Error(ErrorCode::SchemaError, "expected a number", path);
  return j.get<double>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) throw Error(ErrorCode::SchemaError, "expected a string", path);
  return j.get<std::string>();
}

const json& array(const json& j, const std::string& path, std::optional<std::size_t> size = {}) {
  if (!j.is_array()) throw Error(ErrorCode::SchemaError, "expected an array", path);
  if (size && j.size() != *size) {
    throw Error(ErrorCode::SchemaError,
                fmt::format("expected {} elements, got {}", *size, j.size()), path);
  }
  return j;
}

Vec3 vec3(const json& j, const std::string& path) {
  array(j, path, 3);
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]"), number(j[2], path + "[2]")};
}

std::size_t frame_index(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw Error(ErrorCode::SchemaError, "expected a nonnegative integer", path);
  }
  return j.get<std::size_t>();
}

std::string fixed(double v) {
  std::string s = fmt::format("{:.9f}", v);
  if (s == "-0.000000000") s = "0.000000000";
  return s;
}

std::string quoted(const std::string& s) { return json(s).dump(); }

template <typename... Args>
void put(std::string& out, fmt::format_string<Args...> format, Args&&... args) {
  fmt::format_to(std::back_inserter(out), format, std::forward<Args>(args)...);
}

void write_vec3(std::string& out, const Vec3& v) {
  fmt::format_to(std::back_inserter(out), "[{}, {}, {}]", fixed(v.x()), fixed(v.y()),
                 fixed(v.z()));
}

// Attaches `path` to enum-parsing errors, which carry none of their own.
template <typename Parse>
auto at_path(const std::string& path, Parse&& parse) {
  try {
    return parse();
  } catch (const Error& e) {
    if (!e.path().empty()) throw;
    throw Error(e.code(), e.what(), path);
  }
}

}  // namespace

MotionClip parse_clip(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, e.what(), "<document>");
  }
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "expected an object", "<document>");

  const auto version = number(field(doc, "version", ""), "version");
  if (version != kClipFormatVersion) {
    throw Error(ErrorCode::SchemaError, fmt::format("unsupported clip version {}", version),
                "version");
  }

  MotionClip clip;
  clip.id = text(field(doc, "id", ""), "id");
  clip.fps = number(field(doc, "fps", ""), "fps");
  clip.track = at_path("track", [&] { return parse_track(text(field(doc, "track", ""), "track")); });
  if (doc.contains("initial_posture")) {
    clip.initial_posture = at_path("initial_posture", [&] {
      return parse_posture(text(doc["initial_posture"], "initial_posture"));
    });
  }
  if (doc.contains("transcript")) clip.transcript = text(doc["transcript"], "transcript");
  if (doc.contains("audio_ref")) clip.audio_ref = text(doc["audio_ref"], "audio_ref");
  if (doc.contains("audio_beats")) {
    const json& jb = array(doc["audio_beats"], "audio_beats");
    BeatTrack beats;
    for (std::size_t i = 0; i < jb.size(); ++i) {
      beats.times.push_back(number(jb[i], fmt::format("audio_beats[{}]", i)));
    }
    clip.audio_beats = std::move(beats);
  }

  const json& jintent = field(doc, "intent", "");
  clip.intent.category = at_path("intent.category", [&] {
    return parse_intent(text(field(jintent, "category", "intent"), "intent.category"));
  });
  const json& jtarget = array(field(jintent, "target", "intent"), "intent.target");
  clip.intent.targets.reserve(jtarget.size());
  for (std::size_t t = 0; t < jtarget.size(); ++t) {
    clip.intent.targets.push_back(vec3(jtarget[t], fmt::format("intent.target[{}]", t)));
  }
  if (jintent.contains("gt_spans")) {
    const json& js = array(jintent["gt_spans"], "intent.gt_spans");
    for (std::size_t i = 0; i < js.size(); ++i) {
      const std::string path = fmt::format("intent.gt_spans[{}]", i);
      array(js[i], path, 2);
      clip.intent.gt_spans.push_back(
          TimeSpan{frame_index(js[i][0], path + "[0]"), frame_index(js[i][1], path + "[1]")});
    }
  }

  const json& jmotion = field(doc, "motion", "");
  const json& jnames = array(field(jmotion, "joint_names", "motion"), "motion.joint_names");
  for (std::size_t j = 0; j < jnames.size(); ++j) {
    clip.joint_names.push_back(text(jnames[j], fmt::format("motion.joint_names[{}]", j)));
  }
  const std::size_t joints = clip.joint_names.size();
  const json& jroot =
      array(field(jmotion, "root_translation", "motion"), "motion.root_translation");
  const json& jrot =
      array(field(jmotion, "joint_rotations_6d", "motion"), "motion.joint_rotations_6d");
  if (jrot.size() != jroot.size()) {
    throw Error(ErrorCode::SchemaError,
                fmt::format("{} rotation frames for {} translation frames", jrot.size(),
                            jroot.size()),
                "motion.joint_rotations_6d");
  }
  clip.poses.resize(jroot.size());
  for (std::size_t t = 0; t < jroot.size(); ++t) {
    auto& pose = clip.poses[t];
    pose.root_translation = vec3(jroot[t], fmt::format("motion.root_translation[{}]", t));
    const std::string frame_path = fmt::format("motion.joint_rotations_6d[{}]", t);
    const json& jframe = array(jrot[t], frame_path, joints);
    pose.joint_rotations.resize(joints);
    for (std::size_t j = 0; j < joints; ++j) {
      const std::string path = fmt::format("{}[{}]", frame_path, j);
      const json& jr = array(jframe[j], path, 6);
      std::array<double, 6> v{};
      for (std::size_t k = 0; k < 6; ++k) v[k] = number(jr[k], fmt::format("{}[{}]", path, k));
      pose.joint_rotations[j] = Rotation6D{Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])};
    }
  }

  validate(clip);
  return clip;
}

std::string serialize_clip(const MotionClip& clip) {
  std::string out;
  put(out, "{{\n");
  put(out, "  \"version\": {},\n", kClipFormatVersion);
  put(out, "  \"id\": {},\n", quoted(clip.id));
  put(out, "  \"fps\": {},\n", clip.fps);
  put(out, "  \"track\": \"{}\",\n", to_string(clip.track));
  if (clip.initial_posture) put(out, "  \"initial_posture\": \"{}\",\n", to_string(*clip.initial_posture));
  if (clip.transcript) put(out, "  \"transcript\": {},\n", quoted(*clip.transcript));
  if (clip.audio_ref) put(out, "  \"audio_ref\": {},\n", quoted(*clip.audio_ref));
  if (clip.audio_beats) {
    put(out, "  \"audio_beats\": [");
    for (std::size_t i = 0; i < clip.audio_beats->times.size(); ++i) {
      put(out, "{}{}", i == 0 ? "" : ", ", fixed(clip.audio_beats->times[i]));
    }
    put(out, "],\n");
  }

  put(out, "  \"intent\": {{\n");
  put(out, "    \"category\": \"{}\",\n", to_string(clip.intent.category));
  put(out, "    \"target\": [\n");
  for (std::size_t t = 0; t < clip.intent.targets.size(); ++t) {
    put(out, "      ");
    write_vec3(out, clip.intent.targets[t]);
    put(out, "{}\n", t + 1 < clip.intent.targets.size() ? "," : "");
  }
  put(out, "    ]");
  if (!clip.intent.gt_spans.empty()) {
    put(out, ",\n    \"gt_spans\": [");
    for (std::size_t i = 0; i < clip.intent.gt_spans.size(); ++i) {
      const auto& s = clip.intent.gt_spans[i];
      put(out, "{}[{}, {}]", i == 0 ? "" : ", ", s.start, s.end);
    }
    put(out, "]");
  }
  put(out, "\n  }},\n");

  put(out, "  \"motion\": {{\n");
  put(out, "    \"joint_names\": [");
  for (std::size_t j = 0; j < clip.joint_names.size(); ++j) {
    put(out, "{}{}", j == 0 ? "" : ", ", quoted(clip.joint_names[j]));
  }
  put(out, "],\n");
  put(out, "    \"root_translation\": [\n");
  for (std::size_t t = 0; t < clip.poses.size(); ++t) {
    put(out, "      ");
    write_vec3(out, clip.poses[t].root_translation);
    put(out, "{}\n", t + 1 < clip.poses.size() ? "," : "");
  }
  put(out, "    ],\n");
  put(out, "    \"joint_rotations_6d\": [\n");
  for (std::size_t t = 0; t < clip.poses.size(); ++t) {
    put(out, "      [");
    const auto& rots = clip.poses[t].joint_rotations;
    for (std::size_t j = 0; j < rots.size(); ++j) {
      const auto& r = rots[j];
      put(out, "{}[{}, {}, {}, {}, {}, {}]", j == 0 ? "" : ", ", fixed(r.a1.x()), fixed(r.a1.y()),
        fixed(r.a1.z()), fixed(r.a2.x()), fixed(r.a2.y()), fixed(r.a2.z()));
    }
    put(out, "]{}\n", t + 1 < clip.poses.size() ? "," : "");
  }
  put(out, "    ]\n");
  put(out, "  }}\n");
  put(out, "}}\n");
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open file for reading", path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open file for writing", path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed", path.string());
}

MotionClip load_clip(const std::filesystem::path& path) {
  const std::string doc = read_text_file(path);
  try {
    return parse_clip(doc);
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{} (in {})", e.what(), path.string()), e.path());
  }
}

void save_clip(const std::filesystem::path& path, const MotionClip& clip) {
  write_text_file(path, serialize_clip(clip));
}

std::vector<JointPositions> clip_positions(const Skeleton& skeleton, const MotionClip& clip) {
  if (clip.joint_names.size() != skeleton.joint_count()) {
    throw Error(ErrorCode::MismatchedSkeleton,
                fmt::format("clip '{}' has {} joints, skeleton '{}' has {}", clip.id,
                            clip.joint_names.size(), skeleton.name(), skeleton.joint_count()));
  }
  for (std::size_t j = 0; j < clip.joint_names.size(); ++j) {
    if (clip.joint_names[j] != skeleton.joint(j).name) {
      throw Error(ErrorCode::MismatchedSkeleton,
                  fmt::format("clip joint '{}' where skeleton has '{}'", clip.joint_names[j],
                              skeleton.joint(j).name),
                  fmt::format("motion.joint_names[{}]", j));
    }
  }
  std::vector<JointPositions> out;
  out.reserve(clip.poses.size());
  for (const auto& pose : clip.poses) out.push_back(forward_kinematics(skeleton, pose));
  return out;
}

std::vector<Split> assign_splits(const std::vector<std::string>& ids, const SplitRatios& ratios,
                                 std::uint64_t seed) {
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvariantViolation, "split ratios must be nonnegative and sum to 1",
                "split_ratios");
  }
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&ids](std::size_t a, std::size_t b) {
    return ids[a] < ids[b];
  });
  SeededEngine engine(seed);
  seeded_shuffle(order, engine);

  const auto n = static_cast<double>(ids.size());
  const auto n_train = static_cast<std::size_t>(std::floor(n * ratios.train));
  const auto n_val = static_cast<std::size_t>(std::floor(n * ratios.val));
  std::vector<Split> out(ids.size(), Split::Test);
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k < n_train) {
      out[order[k]] = Split::Train;
    } else if (k < n_train + n_val) {
      out[order[k]] = Split::Val;
    }
  }
  return out;
}

CorpusManifest parse_manifest(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, e.what(), "<manifest>");
  }
  CorpusManifest m;
  const json& jclips = array(field(doc, "clips", ""), "clips");
  for (std::size_t i = 0; i < jclips.size(); ++i) {
    const std::string path = fmt::format("clips[{}]", i);
    ManifestEntry e;
    e.id = text(field(jclips[i], "id", path), path + ".id");
    e.file = text(field(jclips[i], "file", path), path + ".file");
    const json& jc = jclips[i];
    if (jc.contains("track")) {
      e.track = at_path(path + ".track", [&] { return parse_track(text(jc["track"], path + ".track")); });
    }
    if (jc.contains("intent")) {
      e.intent =
          at_path(path + ".intent", [&] { return parse_intent(text(jc["intent"], path + ".intent")); });
    }
    if (jc.contains("split")) {
      e.split = at_path(path + ".split", [&] { return parse_split(text(jc["split"], path + ".split")); });
    }
    m.clips.push_back(std::move(e));
  }
  if (doc.contains("skeleton_profile")) {
    m.skeleton_profile = text(doc["skeleton_profile"], "skeleton_profile");
  }
  if (doc.contains("split_seed")) {
    if (!doc["split_seed"].is_number_unsigned()) {
      throw Error(ErrorCode::SchemaError, "expected an unsigned integer", "split_seed");
    }
    m.split_seed = doc["split_seed"].get<std::uint64_t>();
  }
  if (doc.contains("split_ratios")) {
    const json& jr = array(doc["split_ratios"], "split_ratios", 3);
    m.split_ratios = {number(jr[0], "split_ratios[0]"), number(jr[1], "split_ratios[1]"),
                      number(jr[2], "split_ratios[2]")};
  }
  return m;
}

std::string serialize_manifest(const CorpusManifest& m) {
  nlohmann::ordered_json doc;
  auto& clips = doc["clips"] = nlohmann::ordered_json::array();
  for (const auto& e : m.clips) {
    nlohmann::ordered_json je;
    je["id"] = e.id;
    je["file"] = e.file;
    if (e.track) je["track"] = to_string(*e.track);
    if (e.intent) je["intent"] = to_string(*e.intent);
    if (e.split) je["split"] = to_string(*e.split);
    clips.push_back(std::move(je));
  }
  doc["skeleton_profile"] = m.skeleton_profile;
  doc["split_seed"] = m.split_seed;
  doc["split_ratios"] = {m.split_ratios.train, m.split_ratios.val, m.split_ratios.test};
  return doc.dump(2) + "\n";
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  try {
    return parse_manifest(read_text_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("{} (in {})", e.what(), path.string()), e.path());
  }
}

Corpus load_corpus(const std::filesystem::path& manifest_path) {
  const CorpusManifest m = load_manifest(manifest_path);
  const auto base = manifest_path.parent_path();
  Corpus corpus;
  std::vector<std::string> ids;
  for (const auto& e : m.clips) {
    MotionClip clip = load_clip(base / e.file);
    if (clip.id != e.id) {
      throw Error(ErrorCode::InvariantViolation,
                  fmt::format("manifest id '{}' but file holds '{}'", e.id, clip.id), e.file);
    }
    ids.push_back(clip.id);
    corpus.clips.push_back(std::move(clip));
  }
  corpus.splits = assign_splits(ids, m.split_ratios, m.split_seed);
  for (std::size_t i = 0; i < m.clips.size(); ++i) {
    if (m.clips[i].split) corpus.splits[i] = *m.clips[i].split;
  }
  return corpus;
}

}  // namespace igk
