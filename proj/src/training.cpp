#include "ftlgan/training.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>

#include "ftlgan/error.hpp"

namespace ftlgan {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kValidationSeedSalt = 0x9e3779b97f4a7c15ULL;

Tensor embedding_tensor(const EmbeddingVector& v) {
  return Tensor({static_cast<int>(v.dim())}, v.values);
}

EmbeddingVector as_embedding(const Tensor& t) { return EmbeddingVector{t.storage(), false}; }

nlohmann::json step_json(const StepRecord& r) {
  return {{"type", "step"},         {"step", r.step},           {"epoch", r.epoch},
          {"l_triplet", r.l_triplet}, {"l_percep", r.l_percep}, {"l_total", r.l_total},
          {"grad_norm", r.grad_norm}, {"wall_time", r.wall_time}};
}

// JSON has no NaN; non-finite numbers are written as strings.
nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

double read_number(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  throw DataError("bad number in train log: " + s);
}

}  // namespace

std::string to_string(ImageMode m) { return m == ImageMode::real ? "real" : "synthetic"; }

ImageMode parse_image_mode(const std::string& s) {
  if (s == "real") return ImageMode::real;
  if (s == "synthetic") return ImageMode::synthetic;
  throw ConfigError("unknown image_mode '" + s + "' (expected real or synthetic)");
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::running: return "running";
    case RunStatus::completed: return "completed";
    case RunStatus::diverged: return "diverged";
  }
  return "running";
}

void DivergencePolicy::validate() const {
  if (window < 1) throw ConfigError("divergence.window must be >= 1");
  if (!(blowup_factor > 1.0)) throw ConfigError("divergence.blowup_factor must be > 1");
}

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("experiment name is empty");
  if (anchor_resolution != 14 && anchor_resolution != 28 && anchor_resolution != 56) {
    throw ConfigError("anchor_resolution must be 14, 28 or 56, got " + std::to_string(anchor_resolution));
  }
  generator.validate();
  if (generator.scale * anchor_resolution != 112) {
    throw ConfigError("generator.scale " + std::to_string(generator.scale) + " x anchor_resolution " +
                      std::to_string(anchor_resolution) + " must equal 112");
  }
  losses.validate();
  try {
    parse_backend(extractor);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (optimizer != "sgd") throw ConfigError("optimizer must be sgd, got '" + optimizer + "'");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be finite and >= 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (triplets_per_epoch < 0) throw ConfigError("triplets_per_epoch must be >= 0");
  if (validation_pairs < 2) throw ConfigError("validation_pairs must be >= 2");
  divergence.validate();
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"name", c.name},
       {"anchor_resolution", c.anchor_resolution},
       {"image_mode", to_string(c.image_mode)},
       {"losses", c.losses},
       {"extractor", c.extractor},
       {"generator", c.generator},
       {"optimizer", c.optimizer},
       {"learning_rate", c.learning_rate},
       {"epochs", c.epochs},
       {"batch_size", c.batch_size},
       {"seed", c.seed},
       {"divergence",
        {{"window", c.divergence.window},
         {"blowup_factor", c.divergence.blowup_factor},
         {"nan_abort", c.divergence.nan_abort}}},
       {"triplets_per_epoch", c.triplets_per_epoch},
       {"resample_triplets", c.resample_triplets},
       {"validation_pairs", c.validation_pairs}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  const ExperimentConfig d;
  try {
    c.name = j.value("name", d.name);
    c.anchor_resolution = j.value("anchor_resolution", d.anchor_resolution);
    c.image_mode = parse_image_mode(j.value("image_mode", to_string(d.image_mode)));
    c.losses = j.contains("losses") ? j.at("losses").get<LossConfig>() : d.losses;
    c.extractor = j.value("extractor", d.extractor);
    if (j.contains("generator")) {
      c.generator = j.at("generator").get<GeneratorConfig>();
    } else {
      c.generator = d.generator;
      c.generator.scale = 112 / std::max(c.anchor_resolution, 1);
    }
    c.optimizer = j.value("optimizer", d.optimizer);
    c.learning_rate = j.value("learning_rate", d.learning_rate);
    c.epochs = j.value("epochs", d.epochs);
    c.batch_size = j.value("batch_size", d.batch_size);
    c.seed = j.value("seed", d.seed);
    c.divergence = d.divergence;
    if (j.contains("divergence")) {
      const auto& dv = j.at("divergence");
      c.divergence.window = dv.value("window", d.divergence.window);
      c.divergence.blowup_factor = dv.value("blowup_factor", d.divergence.blowup_factor);
      c.divergence.nan_abort = dv.value("nan_abort", d.divergence.nan_abort);
    }
    c.triplets_per_epoch = j.value("triplets_per_epoch", d.triplets_per_epoch);
    c.resample_triplets = j.value("resample_triplets", d.resample_triplets);
    c.validation_pairs = j.value("validation_pairs", d.validation_pairs);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  auto c = j.get<ExperimentConfig>();
  c.validate();
  return c;
}

void save_experiment_config(const fs::path& path, const ExperimentConfig& config) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << nlohmann::json(config).dump(2) << '\n';
}

ExperimentConfig toy_variant(ExperimentConfig config) {
  GeneratorConfig g = GeneratorConfig::toy(config.generator.scale);
  g.upsample_kind = config.generator.upsample_kind;
  g.global_skip = config.generator.global_skip;
  config.generator = g;
  config.extractor = to_string(toy_counterpart(parse_backend(config.extractor)));
  // Desk runs last a few hundred steps at most; a 200-step window would never fill twice.
  config.divergence.window = std::min(config.divergence.window, 20);
  return config;
}

TripletTrainer::TripletTrainer(std::shared_ptr<const EmbeddingExtractor> extractor, LossConfig losses)
    : extractor_(std::move(extractor)), losses_(losses) {
  if (!extractor_) throw InvalidArgument("trainer needs an extractor");
  losses_.validate();
  features_ = losses_.feature_layer >= 0 ? FeatureNet::from_extractor(extractor_, losses_.feature_layer)
                                         : FeatureNet::identity();
}

const Tensor& TripletTrainer::hr_embedding(const std::string& key, const ImageArray& image) {
  auto it = embed_cache_.find(key);
  if (it == embed_cache_.end() || key.empty()) {
    EmbeddingVector e = extractor_->embed(image);
    if (losses_.normalize_embeddings) e = normalize(e);
    it = embed_cache_.insert_or_assign(key, embedding_tensor(e)).first;
  }
  return it->second;
}

const Tensor& TripletTrainer::hr_features(const std::string& key, const ImageArray& image) {
  auto it = feature_cache_.find(key);
  if (it == feature_cache_.end() || key.empty()) {
    it = feature_cache_.insert_or_assign(key, features_.features(image.pixels)).first;
  }
  return it->second;
}

StepMetrics TripletTrainer::step(GeneratorParams& params, std::span<const TripletSample> batch, double lr) {
  if (batch.empty()) throw InvalidArgument("train step needs a non-empty batch");
  if (!(lr >= 0.0)) throw InvalidArgument("learning rate must be >= 0");
  const GeneratorConfig& cfg = params.config;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const double alpha = losses_.alpha;
  const double beta = losses_.beta;
  auto leaves = bind_parameters(params, true);
  auto embed = [&](const ad::Var& img) {
    ad::Var e = extractor_->embed_graph(img);
    return losses_.normalize_embeddings ? ad::l2_normalize(e) : e;
  };

  StepMetrics m;
  try {
    if (losses_.mining == Mining::off) {
      for (const auto& t : batch) {
        ad::Var sr = generator_graph(cfg, leaves, ad::Var::constant(t.anchor.pixels));
        ad::Var lt = triplet_loss_graph(embed(sr), ad::Var::constant(hr_embedding(t.positive_key, t.positive)),
                                        ad::Var::constant(hr_embedding(t.negative_key, t.negative)),
                                        losses_.triplet_margin);
        const double v = lt.value()[0];
        m.l_triplet += v * inv_b;
        if (v > 0.0) ++m.active_triplets;
        if (beta > 0.0 && v > 0.0 && std::isfinite(v)) ad::backward(ad::scale(lt, beta * inv_b));
      }
    } else {
      // Pool: SR anchors first, then HR positives and negatives. Only SR entries carry
      // gradient, and mined triplets are restricted to SR anchors.
      const int b = static_cast<int>(batch.size());
      std::vector<EmbeddingVector> pool;
      std::vector<std::string> labels;
      for (const auto& t : batch) {
        EmbeddingVector e = extractor_->embed(forward(params, t.anchor, false));
        pool.push_back(losses_.normalize_embeddings ? normalize(e) : e);
        labels.push_back(t.anchor_identity);
      }
      for (const auto& t : batch) {
        pool.push_back(as_embedding(hr_embedding(t.positive_key, t.positive)));
        labels.push_back(t.anchor_identity);
      }
      for (const auto& t : batch) {
        pool.push_back(as_embedding(hr_embedding(t.negative_key, t.negative)));
        labels.push_back(t.negative_identity);
      }
      auto mined = mine_triplets_online(pool, labels, losses_.triplet_margin);
      std::erase_if(mined, [b](const MinedTriplet& x) { return x.anchor >= b; });
      std::vector<std::vector<double>> grads(static_cast<std::size_t>(b));
      const double inv_t = mined.empty() ? 0.0 : 1.0 / static_cast<double>(mined.size());
      auto add = [&](int idx, const std::vector<double>& g) {
        if (idx >= b) return;
        auto& dst = grads[static_cast<std::size_t>(idx)];
        if (dst.empty()) dst.assign(g.size(), 0.0);
        for (std::size_t k = 0; k < g.size(); ++k) dst[k] += beta * inv_t * g[k];
      };
      for (const auto& x : mined) {
        TripletGradient g = triplet_loss_gradient(pool[x.anchor], pool[x.positive], pool[x.negative],
                                                  losses_.triplet_margin);
        m.l_triplet += g.value * inv_t;
        if (g.value > 0.0) {
          ++m.active_triplets;
          add(x.anchor, g.d_anchor);
          add(x.positive, g.d_positive);
          add(x.negative, g.d_negative);
        }
      }
      if (beta > 0.0 && std::isfinite(m.l_triplet)) {
        for (int i = 0; i < b; ++i) {
          auto& g = grads[static_cast<std::size_t>(i)];
          if (g.empty()) continue;
          ad::Var e = embed(generator_graph(cfg, leaves, ad::Var::constant(batch[i].anchor.pixels)));
          ad::backward(e, Tensor(e.value().shape(), std::move(g)));
        }
      }
    }

    if (losses_.pixel_term != PixelTerm::none && alpha > 0.0) {
      for (const auto& t : batch) {
        const ImageArray lr_pos = synthetic_degrade(t.positive, t.anchor.height());
        ad::Var srp = generator_graph(cfg, leaves, ad::Var::constant(lr_pos.pixels));
        ad::Var term = losses_.pixel_term == PixelTerm::mse
                           ? mse_graph(srp, t.positive.pixels)
                           : feature_distance_graph(features_.features(srp), hr_features(t.positive_key, t.positive),
                                                    losses_.feature_distance);
        const double v = term.value()[0];
        m.l_percep += v * inv_b;
        if (std::isfinite(v)) ad::backward(ad::scale(term, alpha * inv_b));
      }
    }
  } catch (const DegenerateInput& e) {
    spdlog::warn("train step: {}", e.what());
    m.l_triplet = std::numeric_limits<double>::quiet_NaN();
  }

  m.l_total = combined_loss(m.l_percep, m.l_triplet, alpha, beta);
  double sq = 0.0;
  for (const auto& leaf : leaves) {
    if (leaf.grad().size() != 0) sq += leaf.grad().squared_norm();
  }
  m.grad_norm = std::sqrt(sq);
  m.finite = std::isfinite(m.l_total) && std::isfinite(m.grad_norm);
  if (m.finite && lr > 0.0) {
    for (std::size_t k = 0; k < leaves.size(); ++k) {
      const Tensor& g = leaves[k].grad();
      if (g.size() == 0) continue;
      auto& w = params.arrays[k].value;
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
    }
  }
  return m;
}

StepMetrics train_step(GeneratorParams& params, std::span<const TripletSample> batch,
                       const EmbeddingExtractor& extractor, const LossConfig& losses, double lr) {
  std::shared_ptr<const EmbeddingExtractor> view(&extractor, [](const EmbeddingExtractor*) {});
  TripletTrainer trainer(view, losses);
  return trainer.step(params, batch, lr);
}

void TrainLog::append(const StepRecord& r) {
  if (!steps.empty() && r.step <= steps.back().step) {
    throw InvalidArgument("train log steps must increase (" + std::to_string(r.step) + " after " +
                          std::to_string(steps.back().step) + ")");
  }
  steps.push_back(r);
}

std::vector<double> TrainLog::losses() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.l_total);
  return out;
}

void save_train_log(const fs::path& path, const TrainLog& log) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& s : log.steps) {
    auto j = step_json(s);
    for (const char* k : {"l_triplet", "l_percep", "l_total", "grad_norm"}) j[k] = number(j[k].get<double>());
    out << j.dump() << '\n';
  }
  for (const auto& e : log.epochs) {
    out << nlohmann::json{{"type", "epoch"},
                          {"epoch", e.epoch},
                          {"d_prime", number(e.d_prime)},
                          {"auc", number(e.auc)},
                          {"mean_loss", number(e.mean_loss)}}
               .dump()
        << '\n';
  }
  out << nlohmann::json{{"type", "status"}, {"status", to_string(log.status)}}.dump() << '\n';
}

TrainLog load_train_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open train log " + path.string());
  TrainLog log;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto type = j.at("type").get<std::string>();
    if (type == "step") {
      log.append({j.at("step").get<int>(), j.at("epoch").get<int>(), read_number(j.at("l_triplet")),
                  read_number(j.at("l_percep")), read_number(j.at("l_total")), read_number(j.at("grad_norm")),
                  j.at("wall_time").get<double>()});
    } else if (type == "epoch") {
      log.epochs.push_back({j.at("epoch").get<int>(), read_number(j.at("d_prime")), read_number(j.at("auc")),
                            read_number(j.at("mean_loss"))});
    } else if (type == "status") {
      const auto s = j.at("status").get<std::string>();
      log.status = s == "completed" ? RunStatus::completed : s == "diverged" ? RunStatus::diverged : RunStatus::running;
    }
  }
  return log;
}

bool detect_divergence(std::span<const double> losses, const DivergencePolicy& policy) {
  if (losses.empty()) throw InvalidArgument("detect_divergence needs a non-empty log");
  if (policy.nan_abort && std::any_of(losses.begin(), losses.end(), [](double x) { return !std::isfinite(x); })) {
    return true;
  }
  const auto w = static_cast<std::size_t>(policy.window);
  if (losses.size() < 2 * w) return false;
  const double first = std::accumulate(losses.begin(), losses.begin() + static_cast<std::ptrdiff_t>(w), 0.0) / w;
  const double last = std::accumulate(losses.end() - static_cast<std::ptrdiff_t>(w), losses.end(), 0.0) / w;
  return last > policy.blowup_factor * first;
}

bool detect_divergence(const TrainLog& log, const DivergencePolicy& policy) {
  const auto l = log.losses();
  return detect_divergence(l, policy);
}

std::pair<std::vector<FaceSample>, std::vector<FaceSample>> load_eval_split(const DatasetManifest& manifest,
                                                                            ImageStore& store, int resolution) {
  const DatasetManifest test = manifest.split_view(Split::test);
  std::vector<FaceSample> probes, gallery;
  for (const auto& e : test.select(resolution)) {
    FaceSample s{e.image_id, store.get(e.path, e.identity)};
    s.image.identity = e.identity;
    probes.push_back(std::move(s));
  }
  for (const auto& e : test.select(112)) {
    FaceSample s{e.image_id, store.get(e.path, e.identity)};
    s.image.identity = e.identity;
    gallery.push_back(std::move(s));
  }
  return {std::move(probes), std::move(gallery)};
}

ExperimentResult run_experiment(const ExperimentConfig& config, const DatasetManifest& manifest,
                                const RunOptions& options) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  auto extractor = options.extractor ? options.extractor
                                     : std::make_shared<const EmbeddingExtractor>(load_extractor(config.extractor));
  const DatasetManifest train = manifest.split_view(Split::train);
  const int res = config.anchor_resolution;
  const int count = config.triplets_per_epoch > 0 ? config.triplets_per_epoch
                                                  : static_cast<int>(train.select(res).size());
  if (count == 0) throw DataError("no training anchors at resolution " + std::to_string(res));

  ImageStore store(options.data_root);
  ExperimentResult result;
  result.final_params = init_generator(config.generator, config.seed);
  GeneratorParams& params = result.final_params;
  TripletTrainer trainer(extractor, config.losses);
  const bool write = !options.out_dir.empty();
  if (write) {
    fs::create_directories(options.out_dir);
    save_experiment_config(options.out_dir / "config.json", config);
    result.log_path = options.out_dir / "train_log.jsonl";
  }

  std::vector<FaceSample> probes, gallery;
  if (options.validate_each_epoch) std::tie(probes, gallery) = load_eval_split(manifest, store, res);

  std::vector<TripletRecord> triplets = sample_triplets(train, res, count, config.seed);
  TrainLog& log = result.log;
  int step = 0;
  for (int epoch = 0; epoch < config.epochs && log.status == RunStatus::running; ++epoch) {
    if (config.resample_triplets && epoch > 0) {
      triplets = sample_triplets(train, res, count, config.seed + static_cast<std::uint64_t>(epoch));
    }
    std::vector<std::size_t> order(triplets.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.seed * 1000003ULL + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    int epoch_steps = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<TripletSample> batch;
      for (std::size_t k = start; k < end; ++k) {
        const TripletRecord& t = triplets[order[k]];
        const ManifestEntry* a = train.find(t.anchor);
        const ManifestEntry* n = train.find(t.negative);
        if (!a || !n) throw DataError("triplet references an image outside the train split: " + t.anchor);
        TripletSample s;
        s.positive = store.get(t.positive, a->identity);
        s.negative = store.get(t.negative, n->identity);
        s.anchor = config.image_mode == ImageMode::synthetic ? synthetic_degrade(s.positive, res)
                                                             : store.get(t.anchor, a->identity);
        s.positive_key = t.positive;
        s.negative_key = t.negative;
        s.anchor_identity = a->identity;
        s.negative_identity = n->identity;
        batch.push_back(std::move(s));
      }
      const StepMetrics m = trainer.step(params, batch, config.learning_rate);
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log.append({step++, epoch, m.l_triplet, m.l_percep, m.l_total, m.grad_norm, wall});
      epoch_loss += m.l_total;
      ++epoch_steps;
      if (!m.finite) spdlog::warn("{}: non-finite step {} (loss {}, grad norm {})", config.name, step - 1, m.l_total, m.grad_norm);
      if (detect_divergence(log, config.divergence)) {
        log.status = RunStatus::diverged;
        spdlog::warn("{}: diverged at step {} (epoch {})", config.name, step - 1, epoch);
        break;
      }
    }

    EpochRecord rec{epoch, 0.0, 0.5, epoch_steps ? epoch_loss / epoch_steps : 0.0};
    if (options.validate_each_epoch) {
      try {
        auto scores = build_score_set(
            probes, gallery, [&](const ImageArray& x) { return super_resolve(params, x); }, *extractor,
            config.validation_pairs, config.seed ^ kValidationSeedSalt);
        const EvalReport rep = evaluate_scores(scores);
        rec.d_prime = rep.d_prime;
        rec.auc = rep.auc;
      } catch (const DegenerateInput& e) {
        spdlog::warn("{}: validation snapshot degenerate at epoch {}: {}", config.name, epoch, e.what());
      }
    }
    log.epochs.push_back(rec);
    spdlog::info("{}: epoch {} loss {:.5f} d' {:.4f} AUC {:.4f}", config.name, epoch, rec.mean_loss, rec.d_prime,
                 rec.auc);
    if (options.validate_each_epoch && (result.best_epoch < 0 || rec.d_prime > result.best_dprime)) {
      result.best_epoch = epoch;
      result.best_dprime = rec.d_prime;
      if (write) {
        result.best_checkpoint = options.out_dir / "checkpoint_best.ftw";
        save_checkpoint(result.best_checkpoint, params);
      }
    }
    if (write) save_train_log(result.log_path, log);
  }
  if (log.status == RunStatus::running) log.status = RunStatus::completed;
  if (write) {
    result.final_checkpoint = options.out_dir / "checkpoint_final.ftw";
    save_checkpoint(result.final_checkpoint, params);
    save_train_log(result.log_path, log);
  }
  return result;
}

std::vector<ExperimentConfig> ablation_matrix() {
  ExperimentConfig base;
  base.name = "base";
  base.anchor_resolution = 28;
  base.generator.scale = 4;
  base.image_mode = ImageMode::real;
  base.extractor = "facenet_pretrained";
  base.losses.pixel_term = PixelTerm::perceptual;
  base.seed = 28;

  ExperimentConfig e1 = base;
  e1.name = "1";
  e1.image_mode = ImageMode::synthetic;
  e1.losses.alpha = 0.0;
  e1.losses.pixel_term = PixelTerm::none;

  ExperimentConfig e2 = base;
  e2.name = "2";
  e2.losses.alpha = 0.0;
  e2.losses.pixel_term = PixelTerm::none;

  ExperimentConfig e3 = base;
  e3.name = "3";
  e3.losses.pixel_term = PixelTerm::mse;

  ExperimentConfig e4 = base;
  e4.name = "4";
  e4.losses.mining = Mining::online_semi_hard;

  ExperimentConfig e5 = base;
  e5.name = "5";
  e5.extractor = "arcface_pretrained";

  return {base, e1, e2, e3, e4, e5};
}

}  // namespace ftlgan
