#include "ftlgan/losses.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ftlgan/error.hpp"

namespace ftlgan {

namespace {

void require_same_dim(const EmbeddingVector& a, const EmbeddingVector& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw InvalidArgument(std::string(what) + ": embedding dimension mismatch " + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()));
  }
}

// max(0, x) that keeps NaN visible.
double hinge(double x) { return std::isnan(x) ? x : std::max(0.0, x); }

EmbeddingVector as_embedding(const Tensor& t) { return EmbeddingVector{t.storage(), false}; }

std::string mining_name(Mining m) { return m == Mining::off ? "off" : "online_semi_hard"; }

Mining parse_mining(const std::string& s) {
  if (s == "off") return Mining::off;
  if (s == "online_semi_hard") return Mining::online_semi_hard;
  throw ConfigError("unknown mining mode '" + s + "' (expected off or online_semi_hard)");
}

std::string pixel_term_name(PixelTerm t) {
  switch (t) {
    case PixelTerm::none: return "none";
    case PixelTerm::perceptual: return "perceptual";
    case PixelTerm::mse: return "mse";
  }
  return "none";
}

PixelTerm parse_pixel_term(const std::string& s) {
  if (s == "none") return PixelTerm::none;
  if (s == "perceptual") return PixelTerm::perceptual;
  if (s == "mse") return PixelTerm::mse;
  throw ConfigError("unknown pixel_term '" + s + "' (expected none, perceptual or mse)");
}

}  // namespace

void LossConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("loss weights alpha and beta must be >= 0");
  if (!(alpha + beta > 0.0)) throw ConfigError("alpha + beta must be > 0");
  if (!(triplet_margin >= 0.0)) throw ConfigError("triplet_margin must be >= 0");
}

void to_json(nlohmann::json& j, const LossConfig& c) {
  j = {{"triplet_margin", c.triplet_margin},
       {"alpha", c.alpha},
       {"beta", c.beta},
       {"mining", mining_name(c.mining)},
       {"pixel_term", pixel_term_name(c.pixel_term)},
       {"eps_plus", c.eps_plus},
       {"eps_minus", c.eps_minus},
       {"normalize_embeddings", c.normalize_embeddings},
       {"feature_distance", c.feature_distance == FeatureDistance::l1 ? "l1" : "l2"},
       {"feature_layer", c.feature_layer}};
}

void from_json(const nlohmann::json& j, LossConfig& c) {
  LossConfig d;
  c.triplet_margin = j.value("triplet_margin", d.triplet_margin);
  c.alpha = j.value("alpha", d.alpha);
  c.beta = j.value("beta", d.beta);
  c.mining = parse_mining(j.value("mining", mining_name(d.mining)));
  c.pixel_term = parse_pixel_term(j.value("pixel_term", pixel_term_name(d.pixel_term)));
  c.eps_plus = j.value("eps_plus", d.eps_plus);
  c.eps_minus = j.value("eps_minus", d.eps_minus);
  c.normalize_embeddings = j.value("normalize_embeddings", d.normalize_embeddings);
  const std::string fd = j.value("feature_distance", std::string("l1"));
  if (fd != "l1" && fd != "l2") throw ConfigError("feature_distance must be l1 or l2");
  c.feature_distance = fd == "l1" ? FeatureDistance::l1 : FeatureDistance::l2;
  c.feature_layer = j.value("feature_layer", d.feature_layer);
}

double triplet_loss(const EmbeddingVector& a, const EmbeddingVector& p, const EmbeddingVector& n, double margin) {
  require_same_dim(a, p, "triplet_loss");
  require_same_dim(a, n, "triplet_loss");
  return hinge(squared_distance(a, p) - squared_distance(a, n) + margin);
}

TripletGradient triplet_loss_gradient(const EmbeddingVector& a, const EmbeddingVector& p, const EmbeddingVector& n,
                                      double margin) {
  TripletGradient g;
  g.value = triplet_loss(a, p, n, margin);
  const std::size_t d = a.dim();
  g.d_anchor.assign(d, 0.0);
  g.d_positive.assign(d, 0.0);
  g.d_negative.assign(d, 0.0);
  if (g.value > 0.0) {
    // d/da = 2(a-p) - 2(a-n) = 2(n-p); d/dp = -2(a-p); d/dn = 2(a-n)
    for (std::size_t i = 0; i < d; ++i) {
      g.d_anchor[i] = 2.0 * (n.values[i] - p.values[i]);
      g.d_positive[i] = -2.0 * (a.values[i] - p.values[i]);
      g.d_negative[i] = 2.0 * (a.values[i] - n.values[i]);
    }
  }
  return g;
}

double contrastive_loss(const EmbeddingVector& fi, const EmbeddingVector& fj, int y, double eps_plus, double eps_minus) {
  require_same_dim(fi, fj, "contrastive_loss");
  if (y != 0 && y != 1) throw InvalidArgument("contrastive label must be 0 or 1");
  const double d = distance(fi, fj);
  return y * hinge(d - eps_plus) + (1 - y) * hinge(eps_minus - d);
}

double combined_loss(double l_percep, double l_triplet, double alpha, double beta) {
  return alpha * l_percep + beta * l_triplet;
}

double mse_loss(const ImageArray& sr, const ImageArray& hr) {
  require_same_shape(sr.pixels, hr.pixels, "mse_loss");
  double s = 0.0;
  for (std::size_t i = 0; i < sr.pixels.size(); ++i) {
    const double d = sr.pixels[i] - hr.pixels[i];
    s += d * d;
  }
  return s / static_cast<double>(sr.pixels.size());
}

FeatureNet FeatureNet::identity() { return FeatureNet{}; }

FeatureNet FeatureNet::from_extractor(std::shared_ptr<const EmbeddingExtractor> net, int stage) {
  if (!net) throw InvalidArgument("feature network is null");
  if (stage < 0 || stage >= static_cast<int>(net->arch().channels.size())) {
    throw InvalidArgument("feature layer " + std::to_string(stage) + " out of range");
  }
  FeatureNet f;
  f.net_ = std::move(net);
  f.stage_ = stage;
  return f;
}

ad::Var FeatureNet::features(const ad::Var& image) const {
  return net_ ? net_->stage_features(image, stage_) : image;
}

Tensor FeatureNet::features(const Tensor& image) const {
  return net_ ? net_->stage_features(ad::Var::constant(image), stage_).value() : image;
}

std::string FeatureNet::weights_hash() const { return net_ ? net_->weights_hash() : "identity"; }

double perceptual_loss(const ImageArray& sr, const ImageArray& hr, const FeatureNet& net, FeatureDistance dist) {
  require_same_shape(sr.pixels, hr.pixels, "perceptual_loss");
  return feature_distance_graph(ad::Var::constant(net.features(sr.pixels)), net.features(hr.pixels), dist).value()[0];
}

ad::Var triplet_loss_graph(const ad::Var& a, const ad::Var& p, const ad::Var& n, double margin) {
  const auto ea = as_embedding(a.value());
  const auto ep = as_embedding(p.value());
  const auto en = as_embedding(n.value());
  TripletGradient g = triplet_loss_gradient(ea, ep, en, margin);
  const std::vector<int> shape = a.value().shape();
  return ad::scalar_function({a, p, n}, g.value,
                             {Tensor(shape, std::move(g.d_anchor)), Tensor(shape, std::move(g.d_positive)),
                              Tensor(shape, std::move(g.d_negative))});
}

ad::Var feature_distance_graph(const ad::Var& x, const Tensor& target, FeatureDistance dist) {
  require_same_shape(x.value(), target, "feature distance");
  const Tensor& v = x.value();
  const double inv = 1.0 / static_cast<double>(v.size());
  Tensor grad(v.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - target[i];
    if (dist == FeatureDistance::l1) {
      total += std::abs(d);
      grad[i] = d > 0.0 ? inv : d < 0.0 ? -inv : 0.0;
    } else {
      total += d * d;
      grad[i] = 2.0 * d * inv;
    }
  }
  return ad::scalar_function({x}, total * inv, {std::move(grad)});
}

ad::Var mse_graph(const ad::Var& sr, const Tensor& hr) { return feature_distance_graph(sr, hr, FeatureDistance::l2); }

std::vector<MinedTriplet> mine_triplets_online(std::span<const EmbeddingVector> embeddings,
                                               std::span<const std::string> labels, double margin) {
  if (embeddings.size() != labels.size()) throw InvalidArgument("mining: one label per embedding required");
  const int n = static_cast<int>(embeddings.size());
  std::vector<double> d2(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d2[static_cast<std::size_t>(i) * n + j] = squared_distance(embeddings[i], embeddings[j]);
  auto dist = [&](int i, int j) { return d2[static_cast<std::size_t>(i) * n + j]; };

  std::vector<MinedTriplet> out;
  for (int a = 0; a < n; ++a) {
    for (int p = 0; p < n; ++p) {
      if (p == a || labels[a] != labels[p]) continue;
      const double dap = dist(a, p);
      int semi = -1, hardest = -1;
      for (int neg = 0; neg < n; ++neg) {
        if (labels[neg] == labels[a]) continue;
        const double dan = dist(a, neg);
        if (hardest < 0 || dan < dist(a, hardest)) hardest = neg;
        if (dan > dap && dan < dap + margin && (semi < 0 || dan < dist(a, semi))) semi = neg;
      }
      if (hardest < 0) continue;
      out.push_back({a, p, semi >= 0 ? semi : hardest});
    }
  }
  if (out.empty()) spdlog::debug("online mining: batch of {} has no valid anchor/positive/negative", n);
  return out;
}

}  // namespace ftlgan
