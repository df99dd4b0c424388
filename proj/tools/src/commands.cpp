#include "igk_tools/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include <igk/audio.hpp>
#include <igk/error.hpp>

namespace igk::tools {

namespace fs = std::filesystem;

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first
// failure by index so error reporting does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  const unsigned workers = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  std::string s(buf, end);
  if (s == "-0") s = "0";
  return s;
}

std::string fixed6(const std::optional<double>& v, std::string_view missing = "NA") {
  if (!v) return std::string(missing);
  std::string s = fmt::format("{:.6f}", *v);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string threshold_label(double k) { return shortest(k); }

std::string intent_group(Intent intent) { return is_pointing(intent) ? "pointing" : "gaze"; }

}  // namespace

int exit_code_for(const Error& error) {
  switch (error.code()) {
    case ErrorCode::RatioIndivisible:
    case ErrorCode::UnknownScheme:
      return kExitUsage;
    default:
      return kExitData;
  }
}

Skeleton resolve_skeleton(const std::optional<fs::path>& flag) {
  if (flag) return Skeleton::load_profile(*flag);
  if (const char* env = std::getenv("IGK_SKELETON"); env != nullptr && *env != '\0') {
    return Skeleton::load_profile(env);
  }
  return Skeleton::default_profile();
}

std::vector<std::pair<fs::path, MotionClip>> load_clip_dir(const fs::path& dir, unsigned jobs) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::IoError, "not a directory", dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    if (entry.path().filename() == "manifest.json") continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::pair<fs::path, MotionClip>> clips(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    clips[i] = {files[i], load_clip(files[i])};
  });
  std::sort(clips.begin(), clips.end(),
            [](const auto& a, const auto& b) { return a.second.id < b.second.id; });
  for (std::size_t i = 1; i < clips.size(); ++i) {
    if (clips[i].second.id == clips[i - 1].second.id) {
      throw Error(ErrorCode::InvariantViolation,
                  fmt::format("clip id '{}' appears twice", clips[i].second.id), dir.string());
    }
  }
  return clips;
}

std::map<std::string, std::vector<double>> load_features(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::map<std::string, std::vector<double>> out;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> dim;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 || line.empty()) continue;  // header
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    const std::string where = fmt::format("{}:{}", path.string(), line_no);
    if (cells.size() < 2) throw Error(ErrorCode::SchemaError, "expected id and features", where);
    std::vector<double> values;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      const auto* first = cells[c].data();
      const auto* last = first + cells[c].size();
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) {
        throw Error(ErrorCode::SchemaError, fmt::format("bad number '{}'", cells[c]), where);
      }
      values.push_back(v);
    }
    if (dim && *dim != values.size()) {
      throw Error(ErrorCode::DimensionMismatch, "feature rows differ in length", where);
    }
    dim = values.size();
    out[cells[0]] = std::move(values);
  }
  return out;
}

namespace {

FeatureSet gather(const std::map<std::string, std::vector<double>>& features,
                  const std::vector<std::string>& ids) {
  std::vector<const std::vector<double>*> rows;
  for (const auto& id : ids) {
    if (auto it = features.find(id); it != features.end()) rows.push_back(&it->second);
  }
  FeatureSet set;
  if (rows.empty()) return set;
  set.samples.resize(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(rows.front()->size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r]->size(); ++c) {
      set.samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = (*rows[r])[c];
    }
  }
  return set;
}

template <typename Fn>
auto guarded(Fn&& fn) -> std::optional<decltype(fn())> {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptyEvaluationSet || e.code() == ErrorCode::InsufficientSamples ||
        e.code() == ErrorCode::EmptyBeats) {
      return std::nullopt;
    }
    throw;
  }
}

}  // namespace

MetricReport evaluate(const EvaluateOptions& options, const Skeleton& skeleton) {
  if (options.thresholds.empty()) {
    throw Error(ErrorCode::InvariantViolation, "at least one threshold is required");
  }
  for (double k : options.thresholds) {
    if (!(k > 0.0)) throw Error(ErrorCode::InvariantViolation, "thresholds must be > 0");
  }
  if (!(options.sigma > 0.0)) throw Error(ErrorCode::InvariantViolation, "sigma must be > 0");

  MetricReport report;
  report.thresholds = options.thresholds;
  report.sigma = options.sigma;
  report.seed = options.seed;
  report.skeleton = skeleton.name();

  const auto preds = load_clip_dir(options.pred_dir, options.jobs);
  const auto refs = load_clip_dir(options.ref_dir, options.jobs);
  std::map<std::string, std::size_t> ref_index;
  for (std::size_t i = 0; i < refs.size(); ++i) ref_index[refs[i].second.id] = i;

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::set<std::string> matched;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& id = preds[i].second.id;
    auto it = ref_index.find(id);
    if (it == ref_index.end()) {
      if (options.strict_pairing) {
        throw Error(ErrorCode::UnpairedClip, fmt::format("prediction '{}' has no reference", id),
                    preds[i].first.string());
      }
      report.warnings.push_back(fmt::format("UnpairedClip: prediction '{}' has no reference", id));
      continue;
    }
    matched.insert(id);
    pairs.emplace_back(i, it->second);
  }
  for (const auto& [path, ref] : refs) {
    if (matched.count(ref.id) != 0) continue;
    if (options.strict_pairing) {
      throw Error(ErrorCode::UnpairedClip, fmt::format("reference '{}' has no prediction", ref.id),
                  path.string());
    }
    report.warnings.push_back(fmt::format("UnpairedClip: reference '{}' has no prediction", ref.id));
  }
  if (pairs.empty()) {
    throw Error(ErrorCode::EmptyEvaluationSet, "no prediction/reference pairs to evaluate");
  }

  report.clips.resize(pairs.size());
  parallel_for(pairs.size(), options.jobs, [&](std::size_t p) {
    const auto& [pred_path, pred] = preds[pairs[p].first];
    const auto& [ref_path, ref] = refs[pairs[p].second];
    if (pred.frame_count() != ref.frame_count() || pred.fps != ref.fps ||
        pred.intent.category != ref.intent.category || pred.track != ref.track) {
      throw Error(ErrorCode::IncompatiblePair,
                  fmt::format("clip '{}': prediction and reference differ in length, fps, track "
                              "or intent", pred.id),
                  pred_path.string());
    }
    ClipResult r;
    r.id = pred.id;
    r.track = ref.track;
    r.intent = ref.intent.category;
    r.frames = pred.frame_count();
    r.spans = ref.intent.gt_spans;
    try {
      const auto positions = clip_positions(skeleton, pred);
      r.series = iad_series(skeleton, positions, ref.intent.targets, ref.intent.category);
      std::optional<BeatTrack> audio = clip_audio_beats(ref, ref_path.parent_path());
      if (!audio) audio = clip_audio_beats(pred, pred_path.parent_path());
      if (audio && positions.size() >= 3) {
        const BeatTrack motion = motion_beats(positions, pred.fps);
        r.bc = guarded([&] { return beat_consistency(motion, *audio, options.sigma); });
      }
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("{} (clip '{}')", e.what(), pred.id), pred_path.string());
    }
    r.invalid_frames = r.series.invalid_count();
    report.clips[p] = std::move(r);
  });

  std::optional<std::map<std::string, std::vector<double>>> pred_features;
  std::optional<std::map<std::string, std::vector<double>>> ref_features;
  if (options.pred_features) pred_features = load_features(*options.pred_features);
  if (options.ref_features) ref_features = load_features(*options.ref_features);

  for (Track track : {Track::I, Track::II}) {
    for (const char* group : {"gaze", "pointing"}) {
      std::vector<const ClipResult*> members;
      for (const auto& c : report.clips) {
        if (c.track == track && intent_group(c.intent) == group) members.push_back(&c);
      }
      if (members.empty()) continue;

      ReportRow row;
      row.track = track;
      row.intent = group;
      row.clips = members.size();
      std::vector<AngularDeviationSeries> series;
      std::vector<std::vector<TimeSpan>> restricts;
      std::vector<std::string> ids;
      double bc_sum = 0.0;
      std::size_t bc_count = 0;
      for (const auto* c : members) {
        row.frames += c->frames;
        row.invalid_frames += c->invalid_frames;
        series.push_back(c->series);
        restricts.push_back(track == Track::II ? c->spans : std::vector<TimeSpan>{});
        ids.push_back(c->id);
        if (c->bc) {
          bc_sum += *c->bc;
          ++bc_count;
        }
      }
      row.iad = guarded([&] { return iad_summary(series, restricts); });
      for (double k : options.thresholds) {
        row.iar.push_back(guarded([&] { return iar_corpus(series, k, restricts); }));
        if (track == Track::II) {
          row.iou.push_back(guarded([&] {
            double sum = 0.0;
            for (const auto* c : members) sum += iou_at_k(c->series, k, c->spans);
            return sum / static_cast<double>(members.size());
          }));
        }
      }
      if (bc_count > 0) row.bc = bc_sum / static_cast<double>(bc_count);
      if (pred_features) {
        const FeatureSet gen = gather(*pred_features, ids);
        if (gen.size() >= 2) row.diversity = diversity(gen);
        if (ref_features) {
          const FeatureSet ref = gather(*ref_features, ids);
          if (gen.size() >= 2 && ref.size() >= 2) {
            const FrechetResult f = frechet(ref, gen);
            row.fgd = f.distance;
            report.frechet_jitter = std::max(report.frechet_jitter, f.jitter);
          }
        }
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::string render_csv(const MetricReport& report) {
  std::string out;
  auto put = [&out](std::string_view s) { out.append(s); };
  std::string ks;
  for (std::size_t i = 0; i < report.thresholds.size(); ++i) {
    ks += (i ? ";" : "") + threshold_label(report.thresholds[i]);
  }
  put(fmt::format("# igk-report version={}\n", kReportFormatVersion));
  put(fmt::format("# thresholds_deg={}\n", ks));
  put(fmt::format("# default_pointing_k={} default_gaze_k={}\n",
                  threshold_label(kPointingThresholdDeg), threshold_label(kGazeThresholdDeg)));
  put(fmt::format("# bc_sigma_s={}\n", shortest(report.sigma)));
  put(fmt::format("# seed={}\n", report.seed));
  put(fmt::format("# skeleton={}\n", report.skeleton));
  put(fmt::format("# frechet_jitter={}\n", shortest(report.frechet_jitter)));

  put("track,intent,clips,frames,invalid_frames,iad_mean,iad_std,min_iad");
  for (double k : report.thresholds) put(",iar@" + threshold_label(k));
  for (double k : report.thresholds) put(",iou@" + threshold_label(k));
  put(",fgd,bc,diversity\n");

  for (const auto& row : report.rows) {
    put(fmt::format("{},{},{},{},{}", to_string(row.track), row.intent, row.clips, row.frames,
                    row.invalid_frames));
    const auto& iad = row.iad;
    put("," + fixed6(iad ? std::optional(iad->mean) : std::nullopt));
    put("," + fixed6(iad ? std::optional(iad->std) : std::nullopt));
    put("," + fixed6(iad ? std::optional(iad->min_iad_mean) : std::nullopt));
    for (const auto& v : row.iar) put("," + fixed6(v));
    for (std::size_t i = 0; i < report.thresholds.size(); ++i) {
      put("," + (row.track == Track::II ? fixed6(row.iou[i]) : std::string("-")));
    }
    put("," + fixed6(row.fgd) + "," + fixed6(row.bc) + "," + fixed6(row.diversity) + "\n");
  }
  return out;
}

std::string render_structured(const MetricReport& report) {
  using ojson = nlohmann::ordered_json;
  auto opt = [](const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); };
  ojson doc;
  doc["metadata"] = {
      {"format", "igk-report"},
      {"version", kReportFormatVersion},
      {"thresholds_deg", report.thresholds},
      {"default_pointing_k", kPointingThresholdDeg},
      {"default_gaze_k", kGazeThresholdDeg},
      {"bc_sigma_s", report.sigma},
      {"seed", report.seed},
      {"skeleton", report.skeleton},
      {"frechet_jitter", report.frechet_jitter},
  };
  doc["warnings"] = report.warnings;
  auto& rows = doc["rows"] = ojson::array();
  for (const auto& row : report.rows) {
    ojson jr;
    jr["track"] = to_string(row.track);
    jr["intent"] = row.intent;
    jr["clips"] = row.clips;
    jr["frames"] = row.frames;
    jr["invalid_frames"] = row.invalid_frames;
    jr["iad_mean"] = row.iad ? ojson(row.iad->mean) : ojson(nullptr);
    jr["iad_std"] = row.iad ? ojson(row.iad->std) : ojson(nullptr);
    jr["min_iad"] = row.iad ? ojson(row.iad->min_iad_mean) : ojson(nullptr);
    ojson iar = ojson::object();
    for (std::size_t i = 0; i < report.thresholds.size(); ++i) {
      iar[threshold_label(report.thresholds[i])] = opt(row.iar[i]);
    }
    jr["iar"] = std::move(iar);
    if (row.track == Track::II) {
      ojson iou = ojson::object();
      for (std::size_t i = 0; i < report.thresholds.size(); ++i) {
        iou[threshold_label(report.thresholds[i])] = opt(row.iou[i]);
      }
      jr["iou"] = std::move(iou);
    }
    jr["fgd"] = opt(row.fgd);
    jr["bc"] = opt(row.bc);
    jr["diversity"] = opt(row.diversity);
    rows.push_back(std::move(jr));
  }
  auto& clips = doc["clips"] = ojson::array();
  for (const auto& c : report.clips) {
    clips.push_back({{"id", c.id},
                     {"track", to_string(c.track)},
                     {"intent", to_string(c.intent)},
                     {"frames", c.frames},
                     {"invalid_frames", c.invalid_frames},
                     {"bc", opt(c.bc)}});
  }
  return doc.dump(2) + "\n";
}

std::vector<Scenario> oracle_scenarios(std::size_t frames) {
  std::vector<Scenario> out;
  const int kinds = static_cast<int>(TrajectoryKind::Far2Near) + 1;
  for (int k = 0; k < kinds; ++k) {
    for (bool pointing : {false, true}) {
      Scenario s;
      s.trajectory = static_cast<TrajectoryKind>(k);
      s.intent = !pointing ? Intent::Gaze : (k % 2 == 0 ? Intent::PointLeft : Intent::PointRight);
      s.frames = frames;
      s.jitter = 0.15;
      s.idle = (k % 2 == 0) ? IdleStyle::Sway : IdleStyle::Static;
      switch (k % 3) {
        case 0: s.spans = {TimeSpan{0, frames}}; break;
        case 1: s.spans = {TimeSpan{frames / 5, frames * 4 / 5}}; break;
        default: break;  // Track-I: aimed throughout, no annotation
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

CorpusManifest synthesize_corpus(const SynthOptions& options, const Skeleton& skeleton) {
  if (options.scenarios.empty()) {
    throw Error(ErrorCode::InvariantViolation, "no scenarios to synthesize");
  }
  fs::create_directories(options.out_dir);
  SeededEngine engine(options.seed);
  std::vector<std::uint64_t> seeds(options.count);
  for (auto& s : seeds) s = engine();

  CorpusManifest manifest;
  manifest.skeleton_profile = options.skeleton_profile;
  manifest.split_seed = options.seed;
  manifest.clips.resize(options.count);
  parallel_for(options.count, options.jobs, [&](std::size_t i) {
    const Scenario& scenario = options.scenarios[i % options.scenarios.size()];
    const std::string id = fmt::format("synth_{:04d}", i);
    MotionClip clip;
    try {
      clip = build_scenario(scenario, skeleton, seeds[i], id);
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("{} (scenario {})", e.what(), i % options.scenarios.size()),
                  e.path());
    }
    const std::string file = id + ".json";
    save_clip(options.out_dir / file, clip);
    manifest.clips[i] = ManifestEntry{id, file, clip.track, clip.intent.category, std::nullopt};
  });
  write_text_file(options.out_dir / "manifest.json", serialize_manifest(manifest));
  return manifest;
}

std::string encode_trajectory_csv(const MotionClip& clip, TargetScheme scheme) {
  std::string out;
  const auto names = component_names(scheme);
  for (const auto& n : names) {
    out += n;
    out += ',';
  }
  out += "degenerate\n";
  for (const auto& target : clip.intent.targets) {
    const TargetEncoding e = encode_target(target, scheme);
    for (double v : e.values) {
      out += shortest(v);
      out += ',';
    }
    out += e.degenerate ? "1\n" : "0\n";
  }
  return out;
}

std::string fk_csv(const MotionClip& clip, const Skeleton& skeleton) {
  const auto positions = clip_positions(skeleton, clip);
  std::string out = "frame,name,x,y,z\n";
  for (std::size_t t = 0; t < positions.size(); ++t) {
    for (std::size_t j = 0; j < skeleton.joint_count(); ++j) {
      const Vec3& p = positions[t].joints[j];
      out += fmt::format("{},{},{:.9f},{:.9f},{:.9f}\n", t, skeleton.joint(j).name, p.x(), p.y(),
                         p.z());
    }
    for (std::size_t l = 0; l < skeleton.landmarks().size(); ++l) {
      const Vec3& p = positions[t].landmarks[l];
      out += fmt::format("{},{},{:.9f},{:.9f},{:.9f}\n", t, skeleton.landmarks()[l].name, p.x(),
                         p.y(), p.z());
    }
  }
  return out;
}

BatchRatio parse_ratio(const std::string& text) {
  const auto colon = text.find(':');
  auto parse = [&text](std::string_view s) {
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      throw Error(ErrorCode::RatioIndivisible, fmt::format("bad ratio '{}' (expected N:M)", text));
    }
    return v;
  };
  if (colon == std::string::npos) {
    throw Error(ErrorCode::RatioIndivisible, fmt::format("bad ratio '{}' (expected N:M)", text));
  }
  const std::string_view view(text);
  return BatchRatio{parse(view.substr(0, colon)), parse(view.substr(colon + 1))};
}

BatchPlan plan_batches(const BatchesOptions& options) {
  batch_quotas(options.batch_size, options.ratio);  // fail fast on bad flags
  const CorpusManifest manifest = load_manifest(options.manifest);
  const fs::path base = options.manifest.parent_path();
  std::vector<Track> tracks(manifest.clips.size());
  parallel_for(manifest.clips.size(), options.jobs, [&](std::size_t i) {
    const auto& e = manifest.clips[i];
    tracks[i] = e.track ? *e.track : load_clip(base / e.file).track;
  });
  std::vector<std::string> track2;
  std::vector<std::string> track1;
  for (std::size_t i = 0; i < manifest.clips.size(); ++i) {
    (tracks[i] == Track::II ? track2 : track1).push_back(manifest.clips[i].id);
  }
  return mixture_batches(std::move(track2), std::move(track1), options.batch_size, options.ratio,
                         options.seed, options.epochs);
}

std::string batch_summary(const BatchPlan& plan) {
  std::string out;
  for (std::size_t i = 0; i < plan.batches.size(); ++i) {
    const auto& b = plan.batches[i];
    out += fmt::format("batch {} (epoch {}): {} II + {} I\n", i, b.epoch, b.track2_ids.size(),
                       b.track1_ids.size());
  }
  out += fmt::format("{} batches\n", plan.batches.size());
  return out;
}

}  // namespace igk::tools
