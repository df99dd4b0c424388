#include <charconv>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <igk/error.hpp>

#include "igk_tools/commands.hpp"

namespace igk::tools {

namespace fs = std::filesystem;

namespace {

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                          : comma - pos);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || !(v > 0.0)) {
      throw CLI::ValidationError("--thresholds", "expected a comma-separated list of degrees > 0");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

void emit(const std::string& text, const std::optional<fs::path>& out) {
  if (out) {
    write_text_file(*out, text);
  } else {
    std::cout << text;
    std::cout.flush();
  }
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Skeletal kinematics and intent-aware gesture evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "igk 0.1.0");

  std::optional<fs::path> skeleton_path;
  std::string thresholds_text;
  double sigma = kDefaultBeatSigma;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::string format = "csv";
  std::optional<fs::path> out_file;

  app.add_option("--skeleton", skeleton_path, "Skeleton profile (default: $IGK_SKELETON, then built-in)");
  app.add_option("--thresholds", thresholds_text, "Comma-separated IAR/IoU thresholds in degrees");
  app.add_option("--sigma", sigma, "Beat consistency sigma in seconds")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1U, 1024U));
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "structured"}));
  app.add_option("-o,--output", out_file, "Write output to a file instead of stdout");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score predicted clips against references");
  fs::path pred_dir;
  fs::path ref_dir;
  std::optional<fs::path> pred_features;
  std::optional<fs::path> ref_features;
  bool strict = false;
  evaluate_cmd->add_option("pred", pred_dir, "Directory of predicted clips")->required();
  evaluate_cmd->add_option("ref", ref_dir, "Directory of reference clips")->required();
  evaluate_cmd->add_option("--pred-features", pred_features, "Feature CSV for predictions");
  evaluate_cmd->add_option("--ref-features", ref_features, "Feature CSV for references");
  evaluate_cmd->add_flag("--strict", strict, "Fail on unpaired clips");

  auto* synth_cmd = app.add_subcommand("synth", "Generate an analytic oracle corpus");
  std::optional<fs::path> scenario_file;
  std::string preset;
  std::size_t count = 0;
  std::size_t frames = 60;
  fs::path synth_out;
  auto* scenarios_opt = synth_cmd->add_option("--scenarios", scenario_file, "Scenario file");
  synth_cmd->add_option("--preset", preset, "Built-in scenario set")
      ->check(CLI::IsMember({"oracle"}))
      ->excludes(scenarios_opt);
  synth_cmd->add_option("--count", count, "Number of clips (default: one per scenario)");
  synth_cmd->add_option("--frames", frames, "Frames per clip for --preset")->check(CLI::Range(1U, 100000U));
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();

  auto* encode_cmd = app.add_subcommand("encode", "Encode a clip's intent trajectory");
  fs::path encode_clip;
  std::string scheme_name = "global";
  encode_cmd->add_option("clip", encode_clip, "Clip file")->required();
  encode_cmd->add_option("--scheme", scheme_name, "global | xz_unit_y | xz_polar_y | spherical");

  auto* batches_cmd = app.add_subcommand("batches", "Plan mixture batches for a corpus manifest");
  fs::path manifest_path;
  std::size_t batch_size = 10;
  std::string ratio_text = "8:2";
  std::size_t epochs = 1;
  batches_cmd->add_option("manifest", manifest_path, "Corpus manifest")->required();
  batches_cmd->add_option("--batch-size", batch_size, "Clips per batch");
  batches_cmd->add_option("--ratio", ratio_text, "Track-II:Track-I ratio");
  batches_cmd->add_option("--epochs", epochs, "Epochs to plan");

  auto* fk_cmd = app.add_subcommand("fk", "Dump joint and landmark positions as CSV");
  fs::path fk_clip;
  fk_cmd->add_option("clip", fk_clip, "Clip file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (evaluate_cmd->parsed()) {
      EvaluateOptions options;
      options.pred_dir = pred_dir;
      options.ref_dir = ref_dir;
      if (!thresholds_text.empty()) options.thresholds = parse_thresholds(thresholds_text);
      options.sigma = sigma;
      options.seed = seed;
      options.jobs = jobs;
      options.strict_pairing = strict;
      options.pred_features = pred_features;
      options.ref_features = ref_features;
      const Skeleton skeleton = resolve_skeleton(skeleton_path);
      const MetricReport report = evaluate(options, skeleton);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
      emit(format == "csv" ? render_csv(report) : render_structured(report), out_file);
    } else if (synth_cmd->parsed()) {
      SynthOptions options;
      if (scenario_file) {
        options.scenarios = parse_scenarios(read_text_file(*scenario_file));
      } else if (!preset.empty()) {
        options.scenarios = oracle_scenarios(frames);
      } else {
        throw CLI::RequiredError("--scenarios or --preset");
      }
      for (std::size_t i = 0; i < options.scenarios.size(); ++i) {
        try {
          validate(options.scenarios[i]);
        } catch (const Error& e) {
          throw Error(e.code(), fmt::format("scenario {}: {}", i, e.what()),
                      scenario_file ? scenario_file->string() : std::string());
        }
      }
      options.count = count > 0 ? count : options.scenarios.size();
      options.seed = seed;
      options.out_dir = synth_out;
      options.jobs = jobs;
      const Skeleton skeleton = resolve_skeleton(skeleton_path);
      options.skeleton_profile = skeleton_path ? skeleton_path->filename().string()
                                               : skeleton.name() + ".profile";
      const CorpusManifest manifest = synthesize_corpus(options, skeleton);
      std::cerr << fmt::format("wrote {} clips to {}\n", manifest.clips.size(), synth_out.string());
    } else if (encode_cmd->parsed()) {
      const TargetScheme scheme = parse_scheme(scheme_name);
      emit(encode_trajectory_csv(load_clip(encode_clip), scheme), out_file);
    } else if (batches_cmd->parsed()) {
      BatchesOptions options;
      options.manifest = manifest_path;
      options.batch_size = batch_size;
      options.ratio = parse_ratio(ratio_text);
      options.seed = seed;
      options.epochs = epochs;
      options.jobs = jobs;
      const BatchPlan plan = plan_batches(options);
      std::cerr << batch_summary(plan);
      emit(serialize_batch_plan(plan), out_file);
    } else if (fk_cmd->parsed()) {
      const Skeleton skeleton = resolve_skeleton(skeleton_path);
      emit(fk_csv(load_clip(fk_clip), skeleton), out_file);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace igk::tools
