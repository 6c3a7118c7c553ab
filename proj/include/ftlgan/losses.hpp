#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftlgan/autodiff.hpp"
#include "ftlgan/embeddings.hpp"
#include "ftlgan/image.hpp"

namespace ftlgan {

enum class Mining { off, online_semi_hard };
/// Image-space supervision term weighted by alpha.
enum class PixelTerm { none, perceptual, mse };
enum class FeatureDistance { l1, l2 };

struct LossConfig {
  double triplet_margin = 0.2;
  double alpha = 0.8;
  double beta = 0.2;
  Mining mining = Mining::off;
  PixelTerm pixel_term = PixelTerm::perceptual;
  double eps_plus = 0.0;
  double eps_minus = 1.0;
  /// Triplet distances on L2-normalised embeddings.
  bool normalize_embeddings = true;
  FeatureDistance feature_distance = FeatureDistance::l1;
  /// Perceptual tap: -1 means identity features (pixels); otherwise the stage index of a
  /// frozen conv-stack feature network, taken before its activation.
  int feature_layer = -1;

  /// ConfigError unless alpha, beta >= 0, alpha + beta > 0 and margin >= 0.
  void validate() const;
  bool operator==(const LossConfig&) const = default;
};

void to_json(nlohmann::json& j, const LossConfig& c);
void from_json(const nlohmann::json& j, LossConfig& c);

/// max(0, |a-p|^2 - |a-n|^2 + margin).
double triplet_loss(const EmbeddingVector& a, const EmbeddingVector& p, const EmbeddingVector& n, double margin);

struct TripletGradient {
  double value = 0.0;
  std::vector<double> d_anchor, d_positive, d_negative;
};
/// Value and gradient of triplet_loss; the gradient is zero on the inactive side of the hinge.
TripletGradient triplet_loss_gradient(const EmbeddingVector& a, const EmbeddingVector& p, const EmbeddingVector& n,
                                      double margin);

/// y * max(0, d - eps+) + (1 - y) * max(0, eps- - d) with d = |fi - fj|.
double contrastive_loss(const EmbeddingVector& fi, const EmbeddingVector& fj, int y, double eps_plus, double eps_minus);

double combined_loss(double l_percep, double l_triplet, double alpha, double beta);

double mse_loss(const ImageArray& sr, const ImageArray& hr);

/// Frozen feature map used by the perceptual loss.
class FeatureNet {
 public:
  /// Features are the pixels themselves.
  static FeatureNet identity();
  /// Pre-activation output of `stage` in a frozen conv-stack network.
  static FeatureNet from_extractor(std::shared_ptr<const EmbeddingExtractor> net, int stage);

  ad::Var features(const ad::Var& image) const;
  Tensor features(const Tensor& image) const;
  bool is_identity() const { return !net_; }
  std::string weights_hash() const;

 private:
  std::shared_ptr<const EmbeddingExtractor> net_;
  int stage_ = 0;
};

/// Mean L1 (or squared L2) distance between the feature maps of sr and hr.
double perceptual_loss(const ImageArray& sr, const ImageArray& hr, const FeatureNet& net,
                       FeatureDistance dist = FeatureDistance::l1);

// Graph forms. Each returns a scalar node whose gradient flows into the Var arguments.
ad::Var triplet_loss_graph(const ad::Var& a, const ad::Var& p, const ad::Var& n, double margin);
ad::Var feature_distance_graph(const ad::Var& x, const Tensor& target, FeatureDistance dist);
ad::Var mse_graph(const ad::Var& sr, const Tensor& hr);

struct MinedTriplet {
  int anchor = 0;
  int positive = 0;
  int negative = 0;
  bool operator==(const MinedTriplet&) const = default;
};

/// For every ordered (anchor, positive) pair with equal labels, picks the semi-hard negative
/// (smallest |a-n|^2 with |a-p|^2 < |a-n|^2 < |a-p|^2 + margin); when none exists, the hardest
/// negative (smallest |a-n|^2). Ties go to the lowest index. Empty when the batch has no
/// valid pair or no second identity.
std::vector<MinedTriplet> mine_triplets_online(std::span<const EmbeddingVector> embeddings,
                                               std::span<const std::string> labels, double margin);

}  // namespace ftlgan
