#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftlgan/autodiff.hpp"
#include "ftlgan/image.hpp"
#include "ftlgan/weights_io.hpp"

namespace ftlgan {

enum class ExtractorBackend { facenet_pretrained, arcface_pretrained, toy_deterministic, toy_angular };

std::string to_string(ExtractorBackend b);
/// Throws InvalidArgument listing the accepted names.
ExtractorBackend parse_backend(const std::string& name);
bool is_angular(ExtractorBackend b);
/// Desk-scale stand-in: facenet -> toy_deterministic, arcface -> toy_angular.
ExtractorBackend toy_counterpart(ExtractorBackend b);

struct EmbeddingVector {
  std::vector<double> values;
  bool normalized = false;

  std::size_t dim() const { return values.size(); }
};

/// alpha * v / ||v||. Throws DegenerateInput on the zero vector.
EmbeddingVector normalize(const EmbeddingVector& v, double alpha = 1.0);
/// Euclidean distance; InvalidArgument on dimension mismatch.
double distance(const EmbeddingVector& a, const EmbeddingVector& b);
double squared_distance(const EmbeddingVector& a, const EmbeddingVector& b);

/// Architecture manifest of the convolutional embedding family: one 3x3 conv + activation
/// + 2x2 mean-pool stage per entry of `channels`, then a linear head to `embed_dim`.
struct ConvStackArch {
  std::vector<int> channels{8, 16, 32};
  int embed_dim = 64;
  int input_size = 112;
  /// Input is mapped to (x - 0.5) * input_gain before the first convolution.
  double input_gain = 2.0;
  /// "leaky_relu" or "sin".
  std::string activation = "leaky_relu";

  bool operator==(const ConvStackArch&) const = default;
  std::vector<std::pair<std::string, std::vector<int>>> layout() const;
};

void to_json(nlohmann::json& j, const ConvStackArch& a);
void from_json(const nlohmann::json& j, ConvStackArch& a);

/// Frozen, differentiable face-embedding network. Weights are fixed at construction and
/// there is no way to mutate them; every embedding call is read-only.
class EmbeddingExtractor {
 public:
  EmbeddingExtractor(ExtractorBackend backend, ConvStackArch arch, std::vector<NamedArray> weights);

  ExtractorBackend backend() const { return backend_; }
  const ConvStackArch& arch() const { return arch_; }
  int embed_dim() const { return arch_.embed_dim; }
  bool frozen() const { return true; }

  std::vector<NamedArray> weights() const;
  std::string weights_hash() const;

  /// Raw (unnormalised) embedding of a 112x112 image. InvalidArgument on any other shape.
  EmbeddingVector embed(const ImageArray& image) const;
  /// Same computation as a graph so gradients reach `image`; the weights are constants.
  ad::Var embed_graph(const ad::Var& image) const;

  /// Features before the activation of stage `stage` (0-based); used as a perceptual
  /// feature network.
  ad::Var stage_features(const ad::Var& image, int stage) const;

 private:
  ad::Var run(const ad::Var& image, int stop_stage) const;

  ExtractorBackend backend_;
  ConvStackArch arch_;
  std::vector<std::string> names_;
  std::vector<ad::Var> params_;
};

/// Architecture for a backend. Pretrained backends use 512-d heads; toy backends 64-d.
ConvStackArch default_arch(ExtractorBackend backend);

/// Builds a conv-stack extractor with weights drawn from `seed`.
EmbeddingExtractor make_seeded_extractor(ExtractorBackend backend, const ConvStackArch& arch, std::uint64_t seed);

/// Toy backends need no file. Pretrained backends read `weights_path`, or
/// $FTLGAN_WEIGHTS_DIR/<backend>.ftw, or ./weights/<backend>.ftw; LoadError names the path
/// when missing or when arrays do not match the declared architecture.
EmbeddingExtractor load_extractor(ExtractorBackend backend, const std::optional<std::filesystem::path>& weights_path = {});
EmbeddingExtractor load_extractor(const std::string& backend, const std::optional<std::filesystem::path>& weights_path = {});

std::filesystem::path default_weights_path(ExtractorBackend backend);
void save_extractor(const std::filesystem::path& path, const EmbeddingExtractor& extractor);

}  // namespace ftlgan
