#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ftlgan/embeddings.hpp"
#include "ftlgan/image.hpp"

namespace ftlgan {

enum class PairLabel { genuine, impostor };

struct ScorePair {
  double distance = 0.0;
  PairLabel label = PairLabel::impostor;
  std::string probe_id;
  std::string gallery_id;
};

struct ScoreSet {
  std::vector<ScorePair> pairs;
  int resolution = 0;
  std::string model;
  std::uint64_t seed = 0;

  std::vector<double> genuine() const;
  std::vector<double> impostor() const;
  /// DegenerateInput unless both populations are non-empty.
  void validate() const;
};

/// One face image with its identity (in image.identity) and source image id.
struct FaceSample {
  std::string image_id;
  ImageArray image;
};

/// Maps a probe to a 112x112 image.
using SrModel = std::function<ImageArray(const ImageArray&)>;

struct PairIndex {
  int probe = 0;
  int gallery = 0;
  PairLabel label = PairLabel::impostor;
};

/// Balanced seeded pair list: pair_count/2 genuine pairs (same identity, different source
/// image) and pair_count/2 impostor pairs. Depends only on identities, ids and the seed,
/// so every model evaluated on the same data shares it.
std::vector<PairIndex> sample_pairs(std::span<const FaceSample> probes, std::span<const FaceSample> gallery,
                                    int pair_count, std::uint64_t seed);

/// Super-resolves each probe used by the sampled pairs, embeds probe and gallery images
/// (L2-normalised when `normalize`), and records Euclidean distances.
ScoreSet build_score_set(std::span<const FaceSample> probes, std::span<const FaceSample> gallery, const SrModel& sr_model,
                         const EmbeddingExtractor& extractor, int pair_count, std::uint64_t seed,
                         bool normalize = true);

/// |mu_g - mu_i| / sqrt((sg^2 + si^2) / 2) with population standard deviations.
double dprime(std::span<const double> genuine, std::span<const double> impostor);

struct RocPoint {
  double fmr = 0.0;
  /// 1 - FNMR
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

/// Threshold sweep over every distinct distance plus -inf/+inf; a pair is accepted when its
/// distance is strictly below the threshold. Consecutive duplicate points are dropped.
std::vector<RocPoint> roc(const ScoreSet& scores);
std::vector<RocPoint> roc(std::span<const double> genuine, std::span<const double> impostor);

/// Trapezoidal area over FMR. Input is sorted internally; repeated points are dropped.
double auc(std::vector<RocPoint> points);

struct Histogram {
  std::vector<double> edges;
  std::vector<double> genuine;
  std::vector<double> impostor;
};

/// Area-normalised densities of both populations over their shared range.
Histogram histogram(std::span<const double> genuine, std::span<const double> impostor, int bins);

struct EvalReport {
  double d_prime = 0.0;
  double auc = 0.5;
  std::vector<RocPoint> roc_points;
  Histogram hist;
  std::size_t n_genuine = 0;
  std::size_t n_impostor = 0;
};

EvalReport evaluate_scores(const ScoreSet& scores, int bins = 40);

struct ModelResult {
  std::string model;
  int resolution = 0;
  EvalReport report;
};

struct ComparisonRow {
  std::string model;
  std::vector<std::optional<std::pair<double, double>>> cells;  // per resolution: (d', AUC)
  double avg_dprime = 0.0;
  double avg_auc = 0.0;
  bool has_absent = false;
};

struct ComparisonTable {
  std::vector<int> resolutions{14, 28, 56};
  std::vector<ComparisonRow> rows;

  std::string to_csv() const;
  std::string to_text() const;
};

/// Rows in first-seen model order; averages over the resolutions a model has.
ComparisonTable comparison_report(std::span<const ModelResult> results, std::vector<int> resolutions = {14, 28, 56});

// Persistence.
void save_score_set_csv(const std::filesystem::path& path, const ScoreSet& scores);
void save_report_json(const std::filesystem::path& path, const EvalReport& report, const ScoreSet& scores);
/// Overlaid genuine (green) and impostor (red) densities.
void plot_histogram_png(const std::filesystem::path& path, const Histogram& hist);
/// ROC curve with the AUC 0.5 diagonal as reference.
void plot_roc_png(const std::filesystem::path& path, std::span<const RocPoint> points);

}  // namespace ftlgan
