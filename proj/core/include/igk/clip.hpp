#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "igk/metrics.hpp"
#include "igk/skeleton.hpp"

namespace igk {

inline constexpr int kClipFormatVersion = 1;
inline constexpr double kDefaultFps = 20.0;

// Track-I clips carry no interaction spans; Track-II clips carry at least one.
enum class Track { I, II };

std::string_view to_string(Track track);
Track parse_track(std::string_view text);

enum class InitialPosture { Sitting, Standing, Squatting, Lying };

std::string_view to_string(InitialPosture posture);
InitialPosture parse_posture(std::string_view text);

struct IntentTrack {
  Intent category = Intent::Gaze;
  std::vector<Vec3> targets;  // one per frame, global frame, meters
  std::vector<TimeSpan> gt_spans;

  // Order: gaze, point_left, point_right.
  std::array<double, 3> one_hot() const;
};

struct MotionClip {
  std::string id;
  double fps = kDefaultFps;
  Track track = Track::I;
  std::vector<std::string> joint_names;
  std::vector<Pose> poses;
  IntentTrack intent;
  std::optional<std::string> audio_ref;
  std::optional<BeatTrack> audio_beats;
  std::optional<std::string> transcript;
  std::optional<InitialPosture> initial_posture;

  std::size_t frame_count() const { return poses.size(); }
};

// Throws InvariantViolation / DegenerateRotation with the offending field path.
void validate(const MotionClip& clip);

// Clip documents are JSON (schema version 1):
//   version, id, fps, track, initial_posture?, transcript?, audio_ref?, audio_beats?,
//   intent{category, target[N][3], gt_spans[[start,end)]?},
//   motion{joint_names[J], root_translation[N][3], joint_rotations_6d[N][J][6]}
// with each 6D rotation stored as (a1.x, a1.y, a1.z, a2.x, a2.y, a2.z).
MotionClip parse_clip(std::string_view document);

// Canonical field order, fixed 9-decimal reals, one frame per line.
std::string serialize_clip(const MotionClip& clip);

MotionClip load_clip(const std::filesystem::path& path);
void save_clip(const std::filesystem::path& path, const MotionClip& clip);

// Joint positions for every frame; clip joint names must match the skeleton.
std::vector<JointPositions> clip_positions(const Skeleton& skeleton, const MotionClip& clip);

enum class Split { Train, Val, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct SplitRatios {
  double train = 0.8;
  double val = 0.05;
  double test = 0.15;
};

// Sorts the ids, shuffles them with the seeded generator, then assigns the
// first floor(n*train) to train, the next floor(n*val) to val, the rest to test.
// The result is indexed like the input.
std::vector<Split> assign_splits(const std::vector<std::string>& ids, const SplitRatios& ratios,
                                 std::uint64_t seed);

struct ManifestEntry {
  std::string id;
  std::string file;  // relative to the manifest's directory
  std::optional<Track> track;
  std::optional<Intent> intent;
  std::optional<Split> split;
};

struct CorpusManifest {
  std::vector<ManifestEntry> clips;
  std::string skeleton_profile = "smplh_52.profile";
  std::uint64_t split_seed = 0;
  SplitRatios split_ratios;
};

CorpusManifest parse_manifest(std::string_view document);
std::string serialize_manifest(const CorpusManifest& manifest);
CorpusManifest load_manifest(const std::filesystem::path& path);

struct Corpus {
  std::vector<MotionClip> clips;
  std::vector<Split> splits;  // parallel to clips
};

Corpus load_corpus(const std::filesystem::path& manifest_path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace igk
