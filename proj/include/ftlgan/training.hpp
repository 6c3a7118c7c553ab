#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftlgan/datasets.hpp"
#include "ftlgan/embeddings.hpp"
#include "ftlgan/evaluation.hpp"
#include "ftlgan/generator.hpp"
#include "ftlgan/losses.hpp"

namespace ftlgan {

enum class ImageMode { real, synthetic };

std::string to_string(ImageMode m);
ImageMode parse_image_mode(const std::string& s);

struct DivergencePolicy {
  int window = 200;
  double blowup_factor = 10.0;
  bool nan_abort = true;

  /// ConfigError unless window >= 1 and blowup_factor > 1.
  void validate() const;
  bool operator==(const DivergencePolicy&) const = default;
};

struct ExperimentConfig {
  std::string name = "base";
  int anchor_resolution = 28;
  ImageMode image_mode = ImageMode::real;
  LossConfig losses;
  std::string extractor = "facenet_pretrained";
  GeneratorConfig generator;
  std::string optimizer = "sgd";
  double learning_rate = 1e-5;
  int epochs = 10;
  int batch_size = 16;
  std::uint64_t seed = 0;
  DivergencePolicy divergence;
  /// Triplets drawn per epoch; 0 uses one per training anchor image.
  int triplets_per_epoch = 0;
  /// Draw a fresh triplet list each epoch instead of reusing the first one.
  bool resample_triplets = false;
  /// Pairs in the per-epoch validation score set.
  int validation_pairs = 2000;

  /// ConfigError on any inconsistent field, including generator.scale * anchor_resolution != 112.
  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
void save_experiment_config(const std::filesystem::path& path, const ExperimentConfig& config);

/// Desk-scale variant: toy generator at the same scale, the toy counterpart extractor, and a
/// divergence window of at most 20 steps.
ExperimentConfig toy_variant(ExperimentConfig config);

/// One triplet with images resolved: LR anchor, HR positive, HR negative. Keys identify the
/// HR images for caching their (fixed) embeddings and features.
struct TripletSample {
  ImageArray anchor;
  ImageArray positive;
  ImageArray negative;
  std::string positive_key;
  std::string negative_key;
  std::string anchor_identity;
  std::string negative_identity;
};

struct StepMetrics {
  double l_triplet = 0.0;
  double l_percep = 0.0;
  double l_total = 0.0;
  double grad_norm = 0.0;
  /// False when the loss or gradient was non-finite; no update is applied then.
  bool finite = true;
  int active_triplets = 0;
};

/// Holds the frozen networks and caches of HR embeddings and features across steps.
class TripletTrainer {
 public:
  TripletTrainer(std::shared_ptr<const EmbeddingExtractor> extractor, LossConfig losses);

  /// One SGD step on the generator. l_t is the batch mean triplet loss, l_p the batch mean
  /// perceptual (or MSE) loss of G(bicubic-degraded positive) against the positive, and
  /// l_total = alpha * l_p + beta * l_t.
  StepMetrics step(GeneratorParams& params, std::span<const TripletSample> batch, double lr);

  const EmbeddingExtractor& extractor() const { return *extractor_; }
  const FeatureNet& feature_net() const { return features_; }

 private:
  const Tensor& hr_embedding(const std::string& key, const ImageArray& image);
  const Tensor& hr_features(const std::string& key, const ImageArray& image);

  std::shared_ptr<const EmbeddingExtractor> extractor_;
  LossConfig losses_;
  FeatureNet features_;
  std::map<std::string, Tensor> embed_cache_;
  std::map<std::string, Tensor> feature_cache_;
};

/// Uncached single step.
StepMetrics train_step(GeneratorParams& params, std::span<const TripletSample> batch,
                       const EmbeddingExtractor& extractor, const LossConfig& losses, double lr);

enum class RunStatus { running, completed, diverged };

std::string to_string(RunStatus s);

struct StepRecord {
  int step = 0;
  int epoch = 0;
  double l_triplet = 0.0;
  double l_percep = 0.0;
  double l_total = 0.0;
  double grad_norm = 0.0;
  double wall_time = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double d_prime = 0.0;
  double auc = 0.5;
  double mean_loss = 0.0;
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  RunStatus status = RunStatus::running;

  /// Throws InvalidArgument when the step number does not increase.
  void append(const StepRecord& r);
  std::vector<double> losses() const;
};

/// Line-delimited JSON: one {"type":"step"|"epoch"|"status", ...} object per line.
void save_train_log(const std::filesystem::path& path, const TrainLog& log);
TrainLog load_train_log(const std::filesystem::path& path);

/// True when any loss is non-finite (with nan_abort), or when the mean of the last `window`
/// losses exceeds blowup_factor times the mean of the first `window`. The ratio test waits
/// until two disjoint windows exist, so a short noisy start cannot trip it.
/// InvalidArgument on an empty log.
bool detect_divergence(std::span<const double> losses, const DivergencePolicy& policy);
bool detect_divergence(const TrainLog& log, const DivergencePolicy& policy);

struct ExperimentResult {
  TrainLog log;
  GeneratorParams final_params;
  int best_epoch = -1;
  double best_dprime = 0.0;
  std::filesystem::path final_checkpoint;
  std::filesystem::path best_checkpoint;
  std::filesystem::path log_path;
};

struct RunOptions {
  /// Directory holding the images the manifest paths are relative to.
  std::filesystem::path data_root;
  /// Artifacts go here; nothing is written when empty.
  std::filesystem::path out_dir;
  /// Skip the per-epoch validation snapshot.
  bool validate_each_epoch = true;
  /// Extractor override; when null the config's backend is loaded.
  std::shared_ptr<const EmbeddingExtractor> extractor;
};

/// Full training run on the train split with per-epoch validation on the test split.
/// Stops with status diverged as soon as detect_divergence fires.
ExperimentResult run_experiment(const ExperimentConfig& config, const DatasetManifest& manifest,
                                const RunOptions& options);

/// Test-split probes at `resolution` and HR gallery, as evaluation samples.
std::pair<std::vector<FaceSample>, std::vector<FaceSample>> load_eval_split(const DatasetManifest& manifest,
                                                                            ImageStore& store, int resolution);

/// base, 1 (synthetic, TL), 2 (real, TL), 3 (TL + MSE), 4 (online-mined TL + perceptual),
/// 5 (angular extractor); all with anchors at 28x28.
std::vector<ExperimentConfig> ablation_matrix();

}  // namespace ftlgan
