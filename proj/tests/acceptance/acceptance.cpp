// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ftlgan/cli.hpp"
#include "ftlgan/datasets.hpp"
#include "ftlgan/error.hpp"
#include "ftlgan/evaluation.hpp"
#include "ftlgan/generator.hpp"
#include "ftlgan/kernels.hpp"
#include "ftlgan/losses.hpp"
#include "ftlgan/training.hpp"
#include "ftlgan/upsamplers.hpp"

using namespace ftlgan;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kAucTol = 1e-9;
constexpr double kDprimeTol = 1e-12;
constexpr double kAffineRelTol = 1e-9;
constexpr double kTripletGradRelTol = 1e-4;
constexpr double kResampleTol = 1e-6;
constexpr double kDcTol = 1e-9;
constexpr double kGeneratorGradRelTol = 1e-3;
constexpr double kDeskMargin = 0.05;

// Desk-scale experiment setup.
constexpr int kDeskIdentities = 32;
constexpr int kDeskResolution = 14;
constexpr int kDeskEpochs = 10;
constexpr int kDeskBatch = 8;
constexpr double kDeskLr = 0.02;
constexpr int kDeskPairs = 2000;
constexpr std::uint64_t kDeskPairSeed = 99;
constexpr std::uint64_t kDeskSeeds[] = {1, 2, 3};

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ftlgan_accept_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

bool same_bits(const GeneratorParams& a, const GeneratorParams& b) {
  if (a.arrays.size() != b.arrays.size()) return false;
  for (std::size_t k = 0; k < a.arrays.size(); ++k) {
    const auto& x = a.arrays[k].value;
    const auto& y = b.arrays[k].value;
    if (x.shape() != y.shape() || std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

// 1
Outcome metric_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> size(4, 200);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  double worst_auc = 0, worst_d = 0;
  int checked_d = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = size(rng);
    const int ng = std::uniform_int_distribution<int>(2, n - 2)(rng);
    ScoreSet s;
    std::vector<double> pool;
    for (int k = 0; k < n; ++k) {
      double d = u(rng);
      // Ties: coarse quantisation on a third of the sets, repeats of earlier values on another.
      if (t % 3 == 0) d = std::round(d * 8) / 8;
      if (t % 3 == 1 && !pool.empty() && k % 4 == 0) d = pool[rng() % pool.size()];
      pool.push_back(d);
      s.pairs.push_back({d, k < ng ? PairLabel::genuine : PairLabel::impostor, "p", "g"});
    }
    const auto g = s.genuine(), i = s.impostor();
    worst_auc = std::max(worst_auc, std::abs(auc(roc(s)) - oracle::auc_pair_count(g, i)));
    try {
      const double want = oracle::dprime_direct(g, i);
      worst_d = std::max(worst_d, std::abs(dprime(g, i) - want));
      ++checked_d;
    } catch (const DegenerateInput&) {
      // Both populations constant: no d' to compare.
    }
  }
  const double secs = seconds_since(t0);
  return {worst_auc <= kAucTol && worst_d <= kDprimeTol && secs < 60.0,
          "max |auc-oracle| " + fmt("%.2e", worst_auc) + ", max |d'-direct| " + fmt("%.2e", worst_d) + " over " +
              std::to_string(checked_d) + " sets, " + fmt("%.1f s", secs)};
}

// 2
Outcome affine_invariance() {
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> u(0.0, 2.0), coef(-10.0, 10.0);
  std::uniform_int_distribution<int> size(2, 60);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> g(size(rng)), i(size(rng));
    for (auto& x : g) x = u(rng);
    for (auto& x : i) x = u(rng) + 0.5;
    double a = 0;
    while (std::abs(a) < 1e-3) a = coef(rng);
    const double b = coef(rng);
    std::vector<double> g2, i2;
    for (double x : g) g2.push_back(a * x + b);
    for (double x : i) i2.push_back(a * x + b);
    const double d = dprime(g, i);
    worst = std::max(worst, std::abs(dprime(g2, i2) - d) / std::max(1.0, std::abs(d)));
  }
  bool raised = false;
  try {
    const std::vector<double> g{0.3, 0.3, 0.3}, i{0.7, 0.7};
    dprime(g, i);
  } catch (const DegenerateInput&) {
    raised = true;
  }
  return {worst <= kAffineRelTol && raised,
          "max relative change " + fmt("%.2e", worst) + ", zero-variance error " + (raised ? "raised" : "missing")};
}

// 3
Outcome triplet_semantics() {
  std::mt19937_64 rng(1003);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> m(0.0, 2.0);
  int wrong = 0;
  for (int t = 0; t < 10000; ++t) {
    const int dim = 1 + static_cast<int>(rng() % 8);
    EmbeddingVector a{{}, false}, p{{}, false}, n{{}, false};
    for (int k = 0; k < dim; ++k) {
      a.values.push_back(g(rng));
      p.values.push_back(g(rng));
      n.values.push_back(g(rng));
    }
    const double margin = m(rng);
    const double l = triplet_loss(a, p, n, margin);
    const bool satisfied = squared_distance(a, n) >= squared_distance(a, p) + margin;
    if (satisfied ? l != 0.0 : !(l > 0.0)) ++wrong;
  }
  double worst = 0;
  int checked = 0;
  for (int t = 0; checked < 500 && t < 5000; ++t) {
    std::vector<double> a(6), p(6), n(6);
    for (int k = 0; k < 6; ++k) a[k] = g(rng), p[k] = g(rng), n[k] = g(rng);
    const double margin = m(rng);
    auto vec = [](const std::vector<double>& v) { return EmbeddingVector{v, false}; };
    const double inner = squared_distance(vec(a), vec(p)) - squared_distance(vec(a), vec(n)) + margin;
    if (std::abs(inner) < 1e-3) continue;
    const auto tg = triplet_loss_gradient(vec(a), vec(p), vec(n), margin);
    const double eps = 1e-6;
    for (int which = 0; which < 3; ++which) {
      for (int k = 0; k < 6; ++k) {
        auto pa = a, pp = p, pn = n, ma = a, mp = p, mn = n;
        (which == 0 ? pa : which == 1 ? pp : pn)[k] += eps;
        (which == 0 ? ma : which == 1 ? mp : mn)[k] -= eps;
        const double fd =
            (triplet_loss(vec(pa), vec(pp), vec(pn), margin) - triplet_loss(vec(ma), vec(mp), vec(mn), margin)) /
            (2 * eps);
        const auto& an = which == 0 ? tg.d_anchor : which == 1 ? tg.d_positive : tg.d_negative;
        worst = std::max(worst, oracle::rel_err(an[k], fd, 1e-6));
      }
    }
    ++checked;
  }
  return {wrong == 0 && worst < kTripletGradRelTol,
          std::to_string(wrong) + " hinge violations in 10000 triples, gradient max rel err " + fmt("%.2e", worst) +
              " over " + std::to_string(checked) + " triples"};
}

// 4
Outcome combined_composition() {
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  double worst = 0;
  bool limits = true;
  for (int t = 0; t < 1000; ++t) {
    const double lp = u(rng), lt = u(rng);
    const double want = 0.8 * lp + 0.2 * lt;
    worst = std::max(worst, std::abs(combined_loss(lp, lt, 0.8, 0.2) - want) / std::max(1.0, want));
    limits = limits && combined_loss(lp, lt, 0.8, 0.0) == 0.8 * lp && combined_loss(lp, lt, 0.0, 0.2) == 0.2 * lt;
  }
  // The single-loss ablation rows are the alpha = 0 limit.
  const auto m = ablation_matrix();
  const bool rows = m.size() == 6 && m[1].losses.alpha == 0.0 && m[2].losses.alpha == 0.0 &&
                    m[1].losses.pixel_term == PixelTerm::none && m[2].losses.pixel_term == PixelTerm::none;
  const bool ok = worst <= 2 * std::numeric_limits<double>::epsilon() && limits &&
                  std::abs(combined_loss(1.0, 0.5, 0.8, 0.2) - 0.9) <= 2 * std::numeric_limits<double>::epsilon() && rows;
  return {ok, "max rel err " + fmt("%.2e", worst) + ", limits " + (limits ? "exact" : "wrong") + ", TL-only rows " +
                  (rows ? "alpha=0" : "wrong")};
}

// 5
Outcome resampler_correctness() {
  std::mt19937_64 rng(1005);
  std::uniform_int_distribution<int> size(1, 16), out(1, 40);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const Tensor src = oracle::random_tensor({3, size(rng), size(rng)}, rng);
    const int oh = out(rng), ow = out(rng);
    auto diff = [](const Tensor& a, const Tensor& b) {
      double m = 0;
      for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
      return m;
    };
    worst = std::max(worst, diff(resize_planes(src, oh, ow, ResampleMethod::bicubic()), oracle::bicubic_direct(src, oh, ow)));
    worst = std::max(worst, diff(resize_planes(src, oh, ow, ResampleMethod::lanczos()), oracle::lanczos_direct(src, oh, ow)));
  }
  double dc = 0;
  for (const auto& name : resample_method_names()) {
    const auto m = ResampleMethod::parse(name);
    for (int t = 0; t < 20; ++t) {
      const double c = std::uniform_real_distribution<double>(0, 1)(rng);
      const Tensor r = resize_planes(Tensor({3, size(rng), size(rng)}, c), out(rng) + 2, out(rng) + 2, m);
      for (double v : r.values()) dc = std::max(dc, std::abs(v - c));
    }
  }
  bool blocks = true;
  for (int t = 0; t < 20; ++t) {
    const int h = size(rng), w = size(rng);
    const Tensor src = oracle::random_tensor({3, h, w}, rng);
    const Tensor r = resize_planes(src, 2 * h, 2 * w, ResampleMethod::nearest());
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 2 * h; ++y)
        for (int x = 0; x < 2 * w; ++x) blocks = blocks && r.at(c, y, x) == src.at(c, y / 2, x / 2);
  }
  return {worst <= kResampleTol && dc <= kDcTol && blocks,
          "max |resize-oracle| " + fmt("%.2e", worst) + ", DC error " + fmt("%.2e", dc) + ", nearest x2 " +
              (blocks ? "exact" : "mismatch")};
}

// 6
Outcome generator_contracts() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1006);
  bool shapes = true;
  for (auto kind : {UpsampleKind::subpixel, UpsampleKind::transposed})
    for (int s : {2, 4, 8}) {
      GeneratorConfig c = GeneratorConfig::toy(s);
      c.upsample_kind = kind;
      const auto p = init_generator(c, 3);
      for (int h : {3, 7}) {
        const ImageArray out = forward(p, oracle::random_image(h, h + 2, rng));
        shapes = shapes && out.height() == s * h && out.width() == s * (h + 2);
      }
    }
  bool bijection = true;
  for (int s : {1, 2, 4}) {
    const Tensor r = oracle::random_tensor({3 * s * s, 5, 4}, rng);
    bijection = bijection && kernels::pixel_unshuffle(kernels::pixel_shuffle(r, s), s).storage() == r.storage();
  }

  const GeneratorConfig c = GeneratorConfig::toy(2);
  const GeneratorParams p = init_generator(c, 11);
  const ImageArray lr = oracle::random_image(6, 6, rng);
  auto leaves = bind_parameters(p, true);
  const ad::Var out = generator_graph(c, leaves, ad::Var::constant(lr.pixels));
  const double n = static_cast<double>(out.value().size());
  ad::backward(out, Tensor(out.value().shape(), 1.0 / n));
  // d(mean output)/d(theta) for 20 randomly drawn scalar parameters against central
  // differences with eps = 1e-4.
  std::size_t total = 0;
  for (const auto& a : p.arrays) total += a.value.size();
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    std::size_t r = rng() % total, k = 0;
    while (r >= p.arrays[k].value.size()) r -= p.arrays[k++].value.size();
    GeneratorParams plus = p, minus = p;
    plus.arrays[k].value[r] += 1e-4;
    minus.arrays[k].value[r] -= 1e-4;
    const double fd = (forward(plus, lr, false).pixels.sum() - forward(minus, lr, false).pixels.sum()) / n / 2e-4;
    worst = std::max(worst, oracle::rel_err(leaves[k].grad()[r], fd));
  }

  const fs::path dir = scratch("gen");
  GeneratorConfig tc = GeneratorConfig::toy(4);
  tc.upsample_kind = UpsampleKind::transposed;
  const auto q = init_generator(tc, 21);
  save_checkpoint(dir / "g.ftw", q);
  const auto back = load_checkpoint(dir / "g.ftw");
  const bool round_trip = back.config == tc && same_bits(back, q);
  fs::remove_all(dir);
  const double secs = seconds_since(t0);
  return {shapes && bijection && worst < kGeneratorGradRelTol && round_trip && secs < 120.0,
          std::string("shapes ") + (shapes ? "ok" : "wrong") + ", shuffle " + (bijection ? "bijective" : "broken") +
              ", FD max rel err over 20 parameters " + fmt("%.2e", worst) + ", checkpoint " +
              (round_trip ? "bit-exact" : "differs") + ", " + fmt("%.1f s", secs)};
}

// 7
Outcome frozen_extractor() {
  const fs::path root = scratch("frozen");
  SyntheticCorpusOptions so;
  so.identities = 6;
  so.images_per_identity = 3;
  so.seed = 7;
  make_synthetic_corpus(root / "corpus", so);
  const auto manifest = build_resolution_sets(root / "corpus", root / "data", {28, 112}, 7);
  auto ex = std::make_shared<const EmbeddingExtractor>(load_extractor("toy_deterministic"));
  const std::string ex_before = ex->weights_hash();

  ExperimentConfig c;
  c.name = "frozen";
  c.anchor_resolution = 28;
  c.generator = GeneratorConfig::toy(4);
  c.generator.n_rrdb = 1;
  c.extractor = "toy_deterministic";
  c.losses.feature_layer = 1;
  c.learning_rate = 0.01;
  c.batch_size = 1;
  c.epochs = 1;
  c.triplets_per_epoch = 100;
  c.seed = 7;
  const std::string gen_before = init_generator(c.generator, c.seed).hash();
  RunOptions ro;
  ro.data_root = root / "data";
  ro.validate_each_epoch = false;
  ro.extractor = ex;
  const auto r = run_experiment(c, manifest, ro);
  fs::remove_all(root);
  const bool ok = r.log.steps.size() == 100 && ex->weights_hash() == ex_before &&
                  load_extractor("toy_deterministic").weights_hash() == ex_before && r.final_params.hash() != gen_before;
  return {ok, std::to_string(r.log.steps.size()) + " steps, extractor hash " +
                  (ex->weights_hash() == ex_before ? "unchanged" : "CHANGED") + ", generator hash " +
                  (r.final_params.hash() != gen_before ? "changed" : "unchanged")};
}

// 8
Outcome mining_equivalence() {
  std::mt19937_64 rng(1008);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> size(2, 32), ids(1, 6);
  int mismatches = 0, mined = 0;
  for (int b = 0; b < 50; ++b) {
    const int n = size(rng), k = ids(rng);
    std::vector<EmbeddingVector> e;
    std::vector<std::vector<double>> raw;
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) {
      std::vector<double> v(4);
      for (auto& x : v) x = g(rng);
      raw.push_back(v);
      e.push_back({v, false});
      labels.push_back(std::to_string(std::uniform_int_distribution<int>(0, k - 1)(rng)));
    }
    const auto got = mine_triplets_online(e, labels, 0.3);
    const auto want = oracle::mine_brute_force(raw, labels, 0.3);
    mined += static_cast<int>(got.size());
    if (got.size() != want.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t t = 0; t < got.size(); ++t)
      if (got[t].anchor != want[t].a || got[t].positive != want[t].p || got[t].negative != want[t].n) {
        ++mismatches;
        break;
      }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatching batches of 50 (" + std::to_string(mined) +
                               " triplets mined)"};
}

// 9
Outcome desk_experiment() {
  const auto t0 = Clock::now();
  int holds = 0;
  std::string detail;
  auto ex = std::make_shared<const EmbeddingExtractor>(load_extractor("toy_deterministic"));
  for (std::uint64_t seed : kDeskSeeds) {
    const fs::path root = scratch("desk_" + std::to_string(seed));
    SyntheticCorpusOptions so;
    so.identities = kDeskIdentities;
    so.seed = seed;
    make_synthetic_corpus(root / "corpus", so);
    const auto manifest = build_resolution_sets(root / "corpus", root / "data", {kDeskResolution, 112}, seed, 0.25);

    ExperimentConfig c;
    c.name = "desk";
    c.anchor_resolution = kDeskResolution;
    c.generator = GeneratorConfig::toy(112 / kDeskResolution);
    c.extractor = "toy_deterministic";
    c.learning_rate = kDeskLr;
    c.epochs = kDeskEpochs;
    c.batch_size = kDeskBatch;
    c.seed = seed;
    c = toy_variant(c);
    RunOptions ro;
    ro.data_root = root / "data";
    ro.validate_each_epoch = false;
    ro.extractor = ex;
    const auto r = run_experiment(c, manifest, ro);

    ImageStore store(root / "data");
    const auto [probes, gallery] = load_eval_split(manifest, store, kDeskResolution);
    const auto& params = r.final_params;
    auto score = [&](const SrModel& m) {
      return evaluate_scores(build_score_set(probes, gallery, m, *ex, kDeskPairs, kDeskPairSeed)).d_prime;
    };
    const double bicubic = score([](const ImageArray& x) { return upsample_chain(x, 112, ResampleMethod::bicubic()); });
    double trained = 0.0;
    try {
      trained = score([&params](const ImageArray& x) { return super_resolve(params, x); });
    } catch (const DegenerateInput&) {
      trained = 0.0;
    }
    const auto& ep = r.log.epochs;
    const bool decreased = r.log.status == RunStatus::completed && ep.size() == static_cast<std::size_t>(kDeskEpochs) &&
                           ep.back().mean_loss < ep.front().mean_loss;
    const bool better = trained >= bicubic + kDeskMargin;
    holds += decreased && better;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%sseed %llu: loss %.4f->%.4f (%s), d' %.3f vs bicubic %.3f (%+.3f)",
                  detail.empty() ? "" : "; ", static_cast<unsigned long long>(seed),
                  ep.empty() ? 0.0 : ep.front().mean_loss, ep.empty() ? 0.0 : ep.back().mean_loss,
                  to_string(r.log.status).c_str(), trained, bicubic, trained - bicubic);
    detail += buf;
    fs::remove_all(root);
  }
  const double secs = seconds_since(t0);
  return {holds >= 2 && secs < 600.0, std::to_string(holds) + "/3 seeds hold; " + detail + "; " + fmt("%.0f s", secs)};
}

// 10
Outcome ablation_harness() {
  const fs::path root = scratch("ablate");
  cli::GlobalOptions g;
  g.seed = 10;
  g.toy = true;
  g.out = root / "corpus";
  cli::cmd_synth(g, {12, 3});
  g.out = root / "data";
  cli::PrepareOptions po;
  po.corpus = root / "corpus";
  po.resolutions = {28};
  cli::cmd_prepare(g, po);

  cli::AblateOptions ao;
  ao.data = root / "data";
  ao.epochs = 2;
  ao.learning_rate = kDeskLr;
  ao.batch_size = 1;
  ao.triplets = 24;
  ao.pairs = 40;
  g.out = root / "out";
  const auto res = cli::cmd_ablate(g, ao);

  const auto want = ablation_matrix();
  bool configs = res.runs.size() == 6 && res.table.rows.size() == 6;
  for (std::size_t k = 0; configs && k < 6; ++k) {
    ExperimentConfig got = res.runs[k].config.get<ExperimentConfig>();
    const ExperimentConfig& w = want[k];
    configs = got.name == w.name && got.anchor_resolution == 28 && got.image_mode == w.image_mode &&
              got.losses.alpha == w.losses.alpha && got.losses.beta == w.losses.beta &&
              got.losses.pixel_term == w.losses.pixel_term && got.losses.mining == w.losses.mining &&
              got.extractor == to_string(toy_counterpart(parse_backend(w.extractor))) &&
              res.table.rows[k].model == w.name;
  }
  // Pairwise differences from base: exactly the documented field per row.
  const bool matrix = want[1].image_mode == ImageMode::synthetic && want[2].image_mode == ImageMode::real &&
                      want[3].losses.pixel_term == PixelTerm::mse && want[4].losses.mining == Mining::online_semi_hard &&
                      is_angular(parse_backend(want[5].extractor)) && !is_angular(parse_backend(want[0].extractor));
  std::string statuses;
  for (const auto& r : res.runs) statuses += (statuses.empty() ? "" : ", ") + r.config["name"].get<std::string>() + "=" + r.status;
  const bool diverged = res.runs.size() == 6 && res.runs[5].status == "diverged";
  const double d5 = res.table.rows.size() == 6 && res.table.rows[5].cells[0] ? res.table.rows[5].cells[0]->first : -1;
  fs::remove_all(root);
  return {configs && matrix && diverged,
          std::string("6 configs ") + (configs && matrix ? "match" : "MISMATCH") + "; " + statuses + "; exp 5 d' " +
              fmt("%.3f", d5)};
}

// 11
Outcome report_arithmetic() {
  std::vector<ModelResult> rs;
  const double ftl[] = {1.099, 2.112, 3.049}, base[] = {0.411, 0.933, 1.523};
  const int res[] = {14, 28, 56};
  for (int k = 0; k < 3; ++k) {
    ModelResult a{"FTLGAN +FaceNet", res[k], {}}, b{"Baseline", res[k], {}};
    a.report.d_prime = ftl[k];
    b.report.d_prime = base[k];
    rs.push_back(a);
    rs.push_back(b);
  }
  const auto t = comparison_report(rs);
  const double a = t.rows.at(0).avg_dprime, b = t.rows.at(1).avg_dprime;
  const bool ok = std::abs(a - 2.0867) < 5e-5 && std::abs(a - 2.086) <= 0.001 && std::abs(b - 0.9557) < 5e-5 &&
                  std::abs(b - 0.956) <= 0.001;
  return {ok, "FTLGAN avg " + fmt("%.4f", a) + " (published 2.086), Baseline avg " + fmt("%.4f", b) + " (published 0.956)"};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"metric oracle equivalence", metric_oracle},
      {"d' affine invariance", affine_invariance},
      {"triplet loss semantics", triplet_semantics},
      {"combined loss composition", combined_composition},
      {"resampler correctness", resampler_correctness},
      {"generator contracts", generator_contracts},
      {"frozen extractor", frozen_extractor},
      {"online mining equivalence", mining_equivalence},
      {"desk-scale directional experiment", desk_experiment},
      {"ablation harness", ablation_harness},
      {"report arithmetic", report_arithmetic},
  };
  // Optional filter: substring of a criterion name.
  const std::string only = argc > 1 ? argv[1] : "";
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto& [name, fn] = criteria[k];
    if (!only.empty() && name.find(only) == std::string::npos) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
