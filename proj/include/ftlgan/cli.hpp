#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftlgan/evaluation.hpp"
#include "ftlgan/training.hpp"

namespace ftlgan::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kData = 3, kConfig = 4 };

struct GlobalOptions {
  std::uint64_t seed = 0;
  /// True when --seed was given; train then overrides the config seed with it.
  bool seed_given = false;
  std::filesystem::path out = "out";
  std::string device = "cpu";
  bool toy = false;
};

struct RunRecord {
  std::string run_id;
  nlohmann::json config;
  std::map<std::string, std::string> artifacts;
  std::string started_at;
  std::string finished_at;
  std::string status;
};

void to_json(nlohmann::json& j, const RunRecord& r);

/// Appends one line to <out>/runs.jsonl.
void append_run_index(const std::filesystem::path& out_root, const RunRecord& record);
/// "<name>-s<seed>", suffixed with -2, -3, ... until no directory <out>/runs/<id> exists.
std::string unique_run_id(const std::filesystem::path& out_root, const std::string& name, std::uint64_t seed);

struct PrepareOptions {
  std::filesystem::path corpus;
  std::vector<int> resolutions{14, 28, 56};
  double test_fraction = 0.25;
  /// Triplets per anchor resolution; 0 means one per train anchor.
  int triplets = 0;
};

struct PrepareSummary {
  DatasetManifest manifest;
  /// Per (split, resolution): images and identities.
  std::map<std::pair<std::string, int>, std::pair<int, int>> counts;
  std::string text() const;
};

PrepareSummary cmd_prepare(const GlobalOptions& g, const PrepareOptions& o);

struct TrainOptions {
  std::filesystem::path config;
  std::filesystem::path data;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
};

RunRecord cmd_train(const GlobalOptions& g, const TrainOptions& o);

/// A model spec: a baseline resampler name, or a checkpoint path in which "{res}" is replaced
/// by the probe resolution. An optional "label=" prefix names the row.
struct ModelSpec {
  std::string label;
  std::string spec;
  static ModelSpec parse(const std::string& text);
  /// InvalidArgument listing the baselines when `spec` is neither a baseline nor a file.
  SrModel resolve(int resolution) const;
};

struct EvaluateOptions {
  std::string model;
  std::filesystem::path data;
  int resolution = 28;
  int pairs = 2000;
  std::string extractor = "facenet_pretrained";
};

EvalReport cmd_evaluate(const GlobalOptions& g, const EvaluateOptions& o);

struct AblateOptions {
  std::filesystem::path data;
  std::vector<std::string> only;
  std::optional<int> epochs;
  std::optional<double> learning_rate;
  std::optional<int> batch_size;
  std::optional<int> triplets;
  int pairs = 2000;
};

struct AblateResult {
  std::vector<RunRecord> runs;
  ComparisonTable table;
};

AblateResult cmd_ablate(const GlobalOptions& g, const AblateOptions& o);

struct CompareOptions {
  std::vector<std::string> models;
  std::filesystem::path data;
  std::vector<int> resolutions{14, 28, 56};
  int pairs = 2000;
  std::string extractor = "facenet_pretrained";
};

ComparisonTable cmd_compare(const GlobalOptions& g, const CompareOptions& o);

struct SynthOptions {
  int identities = 32;
  int images = 6;
};

void cmd_synth(const GlobalOptions& g, const SynthOptions& o);

/// Parses argv, dispatches, and maps errors to exit codes.
int run(int argc, char** argv);

}  // namespace ftlgan::cli
