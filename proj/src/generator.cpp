#include "ftlgan/generator.hpp"

#include <cmath>
#include <random>

#include "ftlgan/error.hpp"
#include "ftlgan/kernels.hpp"
#include "ftlgan/upsamplers.hpp"

namespace ftlgan {

namespace {

constexpr double kSlope = 0.2;
constexpr double kResidualScale = 0.2;

// Walks generator_layout() order while building the graph.
class ParamCursor {
 public:
  explicit ParamCursor(std::span<const ad::Var> p) : params_(p) {}
  const ad::Var& next() {
    if (pos_ >= params_.size()) throw InvalidArgument("generator parameter list too short");
    return params_[pos_++];
  }
  bool exhausted() const { return pos_ == params_.size(); }

 private:
  std::span<const ad::Var> params_;
  std::size_t pos_ = 0;
};

ad::Var conv(ParamCursor& cur, const ad::Var& x) {
  const ad::Var& w = cur.next();
  const ad::Var& b = cur.next();
  return ad::conv2d(x, w, b, 1);
}

ad::Var dense_block(ParamCursor& cur, const ad::Var& x) {
  std::vector<ad::Var> feats{x};
  for (int i = 0; i < 4; ++i) feats.push_back(ad::leaky_relu(conv(cur, ad::concat_channels(feats)), kSlope));
  const ad::Var out = conv(cur, ad::concat_channels(feats));
  return ad::add_scaled(x, out, kResidualScale);
}

ad::Var rrdb(ParamCursor& cur, const ad::Var& x) {
  ad::Var y = x;
  for (int i = 0; i < 3; ++i) y = dense_block(cur, y);
  return ad::add_scaled(x, y, kResidualScale);
}

void add_conv(std::vector<std::pair<std::string, std::vector<int>>>& out, const std::string& name, int out_c, int in_c) {
  out.emplace_back(name + ".weight", std::vector<int>{out_c, in_c, 3, 3});
  out.emplace_back(name + ".bias", std::vector<int>{out_c});
}

}  // namespace

std::string to_string(UpsampleKind kind) { return kind == UpsampleKind::subpixel ? "subpixel" : "transposed"; }

UpsampleKind parse_upsample_kind(const std::string& name) {
  if (name == "subpixel") return UpsampleKind::subpixel;
  if (name == "transposed") return UpsampleKind::transposed;
  throw ConfigError("unknown upsample_kind '" + name + "' (expected subpixel or transposed)");
}

GeneratorConfig GeneratorConfig::toy(int scale) {
  GeneratorConfig c;
  c.n_rrdb = 2;
  c.base_channels = 16;
  c.growth_channels = 8;
  c.scale = scale;
  return c;
}

void GeneratorConfig::validate() const {
  if (scale != 2 && scale != 4 && scale != 8) throw ConfigError("generator scale must be 2, 4 or 8, got " + std::to_string(scale));
  if (n_rrdb < 1) throw ConfigError("n_rrdb must be >= 1, got " + std::to_string(n_rrdb));
  if (base_channels < 1 || growth_channels < 1) throw ConfigError("generator channel counts must be >= 1");
}

int GeneratorConfig::stages() const { return scale == 8 ? 3 : scale == 4 ? 2 : 1; }

void to_json(nlohmann::json& j, const GeneratorConfig& c) {
  j = {{"n_rrdb", c.n_rrdb},
       {"base_channels", c.base_channels},
       {"growth_channels", c.growth_channels},
       {"scale", c.scale},
       {"upsample_kind", to_string(c.upsample_kind)},
       {"global_skip", c.global_skip}};
}

void from_json(const nlohmann::json& j, GeneratorConfig& c) {
  GeneratorConfig d;
  c.n_rrdb = j.value("n_rrdb", d.n_rrdb);
  c.base_channels = j.value("base_channels", d.base_channels);
  c.growth_channels = j.value("growth_channels", d.growth_channels);
  c.scale = j.value("scale", d.scale);
  c.upsample_kind = parse_upsample_kind(j.value("upsample_kind", to_string(d.upsample_kind)));
  c.global_skip = j.value("global_skip", d.global_skip);
}

std::vector<std::pair<std::string, std::vector<int>>> generator_layout(const GeneratorConfig& config) {
  config.validate();
  const int nf = config.base_channels;
  const int gc = config.growth_channels;
  std::vector<std::pair<std::string, std::vector<int>>> out;
  add_conv(out, "conv_first", nf, 3);
  for (int r = 0; r < config.n_rrdb; ++r) {
    for (int d = 0; d < 3; ++d) {
      const std::string prefix = "trunk." + std::to_string(r) + ".rdb" + std::to_string(d + 1) + ".conv";
      for (int k = 0; k < 4; ++k) add_conv(out, prefix + std::to_string(k + 1), gc, nf + k * gc);
      add_conv(out, prefix + "5", nf, nf + 4 * gc);
    }
  }
  add_conv(out, "trunk_conv", nf, nf);
  for (int s = 0; s < config.stages(); ++s) {
    const int out_c = config.upsample_kind == UpsampleKind::subpixel ? 4 * nf : nf;
    add_conv(out, "upconv" + std::to_string(s + 1), out_c, nf);
  }
  add_conv(out, "hr_conv", nf, nf);
  add_conv(out, "conv_last", 3, nf);
  return out;
}

std::size_t GeneratorParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& a : arrays) n += a.value.size();
  return n;
}

GeneratorParams init_generator(const GeneratorConfig& config, std::uint64_t seed) {
  GeneratorParams p;
  p.config = config;
  p.seed = seed;
  std::mt19937_64 rng(seed);
  for (auto& [name, shape] : generator_layout(config)) {
    Tensor t(shape);
    if (shape.size() == 4) {
      const int fan_in = shape[1] * shape[2] * shape[3];
      double gain = std::sqrt(2.0 / fan_in);
      if (name.starts_with("trunk.")) gain *= 0.1;
      if (name.starts_with("conv_last")) gain *= config.global_skip ? 0.01 : 0.1;
      std::normal_distribution<double> dist(0.0, gain);
      for (double& v : t.values()) v = dist(rng);
    }
    p.arrays.push_back({name, std::move(t)});
  }
  return p;
}

std::vector<ad::Var> bind_parameters(const GeneratorParams& params, bool requires_grad) {
  std::vector<ad::Var> vars;
  vars.reserve(params.arrays.size());
  for (const auto& a : params.arrays) vars.push_back(requires_grad ? ad::Var::leaf(a.value) : ad::Var::constant(a.value));
  return vars;
}

ad::Var generator_graph(const GeneratorConfig& config, std::span<const ad::Var> params, const ad::Var& lr) {
  const Tensor& in = lr.value();
  if (in.rank() != 3 || in.dim(0) != 3) throw InvalidArgument("generator input must be 3xHxW, got " + in.shape_string());
  ParamCursor cur(params);
  const ad::Var fea = conv(cur, lr);
  ad::Var trunk = fea;
  for (int r = 0; r < config.n_rrdb; ++r) trunk = rrdb(cur, trunk);
  ad::Var x = ad::add(fea, conv(cur, trunk));
  for (int s = 0; s < config.stages(); ++s) {
    if (config.upsample_kind == UpsampleKind::subpixel) {
      x = ad::pixel_shuffle(conv(cur, x), 2);
    } else {
      x = conv(cur, ad::zero_insert(x, 2));
    }
    x = ad::leaky_relu(x, kSlope);
  }
  x = ad::leaky_relu(conv(cur, x), kSlope);
  x = conv(cur, x);
  if (!cur.exhausted()) throw InvalidArgument("generator parameter list does not match config");
  if (config.global_skip) {
    x = ad::add(x, ad::resize(lr, in.dim(1) * config.scale, in.dim(2) * config.scale, ResampleMethod::bicubic()));
  }
  return x;
}

ImageArray forward(const GeneratorParams& params, const ImageArray& lr, bool clamp) {
  const auto vars = bind_parameters(params, false);
  ImageArray out(generator_graph(params.config, vars, ad::Var::constant(lr.pixels)).value(), lr.identity);
  if (clamp) out.clip_unit();
  return out;
}

ImageArray super_resolve(const GeneratorParams& params, const ImageArray& lr, int target) {
  if (lr.height() * params.config.scale != target || lr.width() * params.config.scale != target) {
    throw InvalidArgument("input " + lr.pixels.shape_string() + " at scale " + std::to_string(params.config.scale) +
                          " does not produce " + std::to_string(target) + "x" + std::to_string(target));
  }
  return forward(params, lr, true);
}

Tensor subpixel_upsample(const Tensor& features, int s) { return kernels::pixel_shuffle(features, s); }

Tensor transposed_upsample(const Tensor& features, const Tensor& weight, const Tensor& bias, int s) {
  if (s < 2) throw InvalidArgument("transposed upsampling stride must be >= 2, got " + std::to_string(s));
  if (weight.rank() != 4 || weight.dim(2) != 3) throw InvalidArgument("transposed upsampling expects a 3x3 kernel");
  return kernels::conv2d(kernels::zero_insert(features, s), weight, bias, 1);
}

void save_checkpoint(const std::filesystem::path& path, const GeneratorParams& params) {
  WeightFile f;
  f.meta = {{"kind", "generator"}, {"config", params.config}, {"seed", params.seed}};
  f.arrays = params.arrays;
  save_weight_file(path, f);
}

GeneratorParams load_checkpoint(const std::filesystem::path& path) {
  WeightFile f = load_weight_file(path);
  if (f.meta.value("kind", std::string{}) != "generator") throw LoadError(path.string() + " is not a generator checkpoint");
  GeneratorParams p;
  try {
    p.config = f.meta.at("config").get<GeneratorConfig>();
    p.seed = f.meta.value("seed", std::uint64_t{0});
  } catch (const std::exception& e) {
    throw LoadError("bad checkpoint config in " + path.string() + ": " + e.what());
  }
  const auto layout = generator_layout(p.config);
  if (layout.size() != f.arrays.size()) throw LoadError("checkpoint array count does not match its config: " + path.string());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i].first != f.arrays[i].name || layout[i].second != f.arrays[i].value.shape()) {
      throw LoadError("checkpoint array '" + f.arrays[i].name + "' does not match layout in " + path.string());
    }
  }
  p.arrays = std::move(f.arrays);
  return p;
}

}  // namespace ftlgan
