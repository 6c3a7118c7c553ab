#include "ftlgan/embeddings.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>

#include "ftlgan/error.hpp"

namespace ftlgan {

namespace {

constexpr std::uint64_t kToySeed = 0x5eed0001;
constexpr std::uint64_t kToyAngularSeed = 0x5eed0002;

void require_same_dim(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument("embedding dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

}  // namespace

std::string to_string(ExtractorBackend b) {
  switch (b) {
    case ExtractorBackend::facenet_pretrained: return "facenet_pretrained";
    case ExtractorBackend::arcface_pretrained: return "arcface_pretrained";
    case ExtractorBackend::toy_deterministic: return "toy_deterministic";
    case ExtractorBackend::toy_angular: return "toy_angular";
  }
  return "unknown";
}

ExtractorBackend parse_backend(const std::string& name) {
  for (auto b : {ExtractorBackend::facenet_pretrained, ExtractorBackend::arcface_pretrained,
                 ExtractorBackend::toy_deterministic, ExtractorBackend::toy_angular}) {
    if (to_string(b) == name) return b;
  }
  throw InvalidArgument("unknown extractor backend '" + name +
                        "' (expected facenet_pretrained, arcface_pretrained, toy_deterministic or toy_angular)");
}

bool is_angular(ExtractorBackend b) {
  return b == ExtractorBackend::arcface_pretrained || b == ExtractorBackend::toy_angular;
}

ExtractorBackend toy_counterpart(ExtractorBackend b) {
  return is_angular(b) ? ExtractorBackend::toy_angular : ExtractorBackend::toy_deterministic;
}

EmbeddingVector normalize(const EmbeddingVector& v, double alpha) {
  double sq = 0.0;
  for (double x : v.values) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0)) throw DegenerateInput("cannot normalize a zero-norm embedding");
  EmbeddingVector out;
  out.values.reserve(v.dim());
  for (double x : v.values) out.values.push_back(alpha * x / norm);
  out.normalized = alpha == 1.0;
  return out;
}

double squared_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a.values[i] - b.values[i];
    s += d * d;
  }
  return s;
}

double distance(const EmbeddingVector& a, const EmbeddingVector& b) { return std::sqrt(squared_distance(a, b)); }

std::vector<std::pair<std::string, std::vector<int>>> ConvStackArch::layout() const {
  std::vector<std::pair<std::string, std::vector<int>>> out;
  int in_c = 3;
  int size = input_size;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const std::string name = "stage" + std::to_string(i + 1);
    out.emplace_back(name + ".weight", std::vector<int>{channels[i], in_c, 3, 3});
    out.emplace_back(name + ".bias", std::vector<int>{channels[i]});
    in_c = channels[i];
    size /= 2;
  }
  out.emplace_back("head.weight", std::vector<int>{embed_dim, in_c * size * size});
  out.emplace_back("head.bias", std::vector<int>{embed_dim});
  return out;
}

void to_json(nlohmann::json& j, const ConvStackArch& a) {
  j = {{"family", "conv_stack"},
       {"channels", a.channels},
       {"embed_dim", a.embed_dim},
       {"input_size", a.input_size},
       {"input_gain", a.input_gain},
       {"activation", a.activation}};
}

void from_json(const nlohmann::json& j, ConvStackArch& a) {
  if (j.value("family", std::string{}) != "conv_stack") throw LoadError("unsupported extractor architecture family");
  a.channels = j.at("channels").get<std::vector<int>>();
  a.embed_dim = j.at("embed_dim").get<int>();
  a.input_size = j.value("input_size", 112);
  a.input_gain = j.value("input_gain", 2.0);
  a.activation = j.value("activation", std::string("leaky_relu"));
}

EmbeddingExtractor::EmbeddingExtractor(ExtractorBackend backend, ConvStackArch arch, std::vector<NamedArray> weights)
    : backend_(backend), arch_(std::move(arch)) {
  if (arch_.activation != "leaky_relu" && arch_.activation != "sin") {
    throw LoadError("unsupported extractor activation '" + arch_.activation + "'");
  }
  const auto layout = arch_.layout();
  if (layout.size() != weights.size()) throw LoadError("extractor weight count does not match its architecture");
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i].first != weights[i].name || layout[i].second != weights[i].value.shape()) {
      throw LoadError("extractor weight '" + weights[i].name + "' has shape " + weights[i].value.shape_string() +
                      ", architecture expects '" + layout[i].first + "'");
    }
    names_.push_back(weights[i].name);
    params_.push_back(ad::Var::constant(std::move(weights[i].value)));
  }
}

std::vector<NamedArray> EmbeddingExtractor::weights() const {
  std::vector<NamedArray> out;
  for (std::size_t i = 0; i < params_.size(); ++i) out.push_back({names_[i], params_[i].value()});
  return out;
}

std::string EmbeddingExtractor::weights_hash() const { return hash_arrays(weights()); }

ad::Var EmbeddingExtractor::run(const ad::Var& image, int stop_stage) const {
  const Tensor& in = image.value();
  if (in.rank() != 3 || in.dim(0) != 3 || in.dim(1) != arch_.input_size || in.dim(2) != arch_.input_size) {
    throw InvalidArgument("extractor expects 3x" + std::to_string(arch_.input_size) + "x" +
                          std::to_string(arch_.input_size) + " input, got " + in.shape_string());
  }
  ad::Var x = ad::scale(ad::add(image, ad::Var::constant(Tensor(in.shape(), -0.5))), arch_.input_gain);
  const int stages = static_cast<int>(arch_.channels.size());
  for (int s = 0; s < stages; ++s) {
    x = ad::conv2d(x, params_[2 * s], params_[2 * s + 1], 1);
    if (s == stop_stage) return x;
    x = arch_.activation == "sin" ? ad::sin(x) : ad::leaky_relu(x, 0.2);
    x = ad::avg_pool(x, 2);
  }
  return ad::linear(x, params_[2 * stages], params_[2 * stages + 1]);
}

ad::Var EmbeddingExtractor::embed_graph(const ad::Var& image) const { return run(image, -1); }

ad::Var EmbeddingExtractor::stage_features(const ad::Var& image, int stage) const {
  if (stage < 0 || stage >= static_cast<int>(arch_.channels.size())) {
    throw InvalidArgument("feature stage " + std::to_string(stage) + " out of range");
  }
  return run(image, stage);
}

EmbeddingVector EmbeddingExtractor::embed(const ImageArray& image) const {
  const ad::Var out = embed_graph(ad::Var::constant(image.pixels));
  return EmbeddingVector{out.value().storage(), false};
}

ConvStackArch default_arch(ExtractorBackend backend) {
  ConvStackArch a;
  switch (backend) {
    case ExtractorBackend::toy_deterministic:
      break;
    case ExtractorBackend::toy_angular:
      // High-gain periodic first stage. Input gradients scale with input_gain, which is set
      // high enough that plain SGD at desk learning rates runs away.
      a.activation = "sin";
      a.input_gain = 1.0e5;
      break;
    case ExtractorBackend::facenet_pretrained:
    case ExtractorBackend::arcface_pretrained:
      a.channels = {32, 64, 128, 256};
      a.embed_dim = 512;
      break;
  }
  return a;
}

EmbeddingExtractor make_seeded_extractor(ExtractorBackend backend, const ConvStackArch& arch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<NamedArray> weights;
  for (auto& [name, shape] : arch.layout()) {
    Tensor t(shape);
    const bool is_weight = name.ends_with(".weight");
    if (is_weight) {
      int fan_in = 1;
      for (std::size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
      const double std_dev = std::sqrt((shape.size() == 4 ? 2.0 : 1.0) / fan_in);
      std::normal_distribution<double> dist(0.0, std_dev);
      for (double& v : t.values()) v = dist(rng);
    } else if (arch.activation == "sin") {
      std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
      for (double& v : t.values()) v = phase(rng);
    }
    weights.push_back({name, std::move(t)});
  }
  return EmbeddingExtractor(backend, arch, std::move(weights));
}

std::filesystem::path default_weights_path(ExtractorBackend backend) {
  std::filesystem::path dir = "weights";
  if (const char* env = std::getenv("FTLGAN_WEIGHTS_DIR"); env && *env) dir = env;
  return dir / (to_string(backend) + ".ftw");
}

EmbeddingExtractor load_extractor(ExtractorBackend backend, const std::optional<std::filesystem::path>& weights_path) {
  if (backend == ExtractorBackend::toy_deterministic) {
    return make_seeded_extractor(backend, default_arch(backend), kToySeed);
  }
  if (backend == ExtractorBackend::toy_angular) {
    return make_seeded_extractor(backend, default_arch(backend), kToyAngularSeed);
  }
  const std::filesystem::path path = weights_path.value_or(default_weights_path(backend));
  if (!std::filesystem::exists(path)) {
    throw LoadError("pretrained weights for " + to_string(backend) + " not found at expected path " + path.string());
  }
  WeightFile f = load_weight_file(path);
  if (f.meta.value("kind", std::string{}) != "extractor") throw LoadError(path.string() + " is not an extractor weight file");
  if (f.meta.value("backend", std::string{}) != to_string(backend)) {
    throw LoadError(path.string() + " declares backend '" + f.meta.value("backend", std::string{}) + "', expected " +
                    to_string(backend));
  }
  ConvStackArch arch;
  try {
    arch = f.meta.at("arch").get<ConvStackArch>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("bad architecture manifest in " + path.string() + ": " + e.what());
  }
  return EmbeddingExtractor(backend, arch, std::move(f.arrays));
}

EmbeddingExtractor load_extractor(const std::string& backend, const std::optional<std::filesystem::path>& weights_path) {
  return load_extractor(parse_backend(backend), weights_path);
}

void save_extractor(const std::filesystem::path& path, const EmbeddingExtractor& extractor) {
  WeightFile f;
  f.meta = {{"kind", "extractor"}, {"backend", to_string(extractor.backend())}, {"arch", extractor.arch()}};
  f.arrays = extractor.weights();
  save_weight_file(path, f);
}

}  // namespace ftlgan
