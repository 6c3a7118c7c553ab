#include "ftlgan/evaluation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ftlgan/error.hpp"

namespace ftlgan {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

// Minimal RGB raster for report plots.
class Canvas {
 public:
  Canvas(int w, int h) : img_(h, w, 1.0) {}
  void blend(int x, int y, std::array<double, 3> c, double a = 1.0) {
    if (x < 0 || y < 0 || x >= img_.width() || y >= img_.height()) return;
    for (int ch = 0; ch < 3; ++ch) img_.at(ch, y, x) = (1 - a) * img_.at(ch, y, x) + a * c[ch];
  }
  void rect(int x0, int y0, int x1, int y1, std::array<double, 3> c, double a) {
    for (int y = std::min(y0, y1); y <= std::max(y0, y1); ++y)
      for (int x = std::min(x0, x1); x <= std::max(x0, x1); ++x) blend(x, y, c, a);
  }
  void line(double x0, double y0, double x1, double y1, std::array<double, 3> c) {
    const int steps = static_cast<int>(std::max(std::abs(x1 - x0), std::abs(y1 - y0))) + 1;
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
      const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
      blend(x, y, c);
      blend(x + 1, y, c);
    }
  }
  const ImageArray& image() const { return img_; }

 private:
  ImageArray img_;
};

constexpr int kPlotW = 420, kPlotH = 320, kMargin = 30;

}  // namespace

std::vector<double> ScoreSet::genuine() const {
  std::vector<double> out;
  for (const auto& p : pairs) {
    if (p.label == PairLabel::genuine) out.push_back(p.distance);
  }
  return out;
}

std::vector<double> ScoreSet::impostor() const {
  std::vector<double> out;
  for (const auto& p : pairs) {
    if (p.label == PairLabel::impostor) out.push_back(p.distance);
  }
  return out;
}

void ScoreSet::validate() const {
  const auto g = genuine().size();
  const auto i = impostor().size();
  if (g == 0 || i == 0) {
    throw DegenerateInput("score set needs genuine and impostor pairs (have " + std::to_string(g) + " genuine, " +
                          std::to_string(i) + " impostor)");
  }
}

std::vector<PairIndex> sample_pairs(std::span<const FaceSample> probes, std::span<const FaceSample> gallery,
                                    int pair_count, std::uint64_t seed) {
  if (pair_count < 2) {
    throw DegenerateInput("pair_count " + std::to_string(pair_count) +
                          " leaves the genuine or impostor population empty (need >= 2)");
  }
  std::map<std::string, std::vector<int>> gallery_by_id;
  for (int j = 0; j < static_cast<int>(gallery.size()); ++j) gallery_by_id[gallery[j].image.identity].push_back(j);

  std::vector<int> genuine_probes, impostor_probes;
  int excluded = 0;
  for (int i = 0; i < static_cast<int>(probes.size()); ++i) {
    const auto& p = probes[i];
    auto it = gallery_by_id.find(p.image.identity);
    const bool has_partner = it != gallery_by_id.end() &&
                             std::any_of(it->second.begin(), it->second.end(),
                                         [&](int j) { return gallery[j].image_id != p.image_id; });
    if (has_partner) {
      genuine_probes.push_back(i);
    } else {
      ++excluded;
    }
    const bool has_other = gallery_by_id.size() > (it == gallery_by_id.end() ? 0u : 1u);
    if (has_other) impostor_probes.push_back(i);
  }
  if (excluded > 0) spdlog::info("{} probes have no genuine gallery partner and only form impostor pairs", excluded);
  if (genuine_probes.empty()) throw DegenerateInput("no genuine pairs can be formed");
  if (impostor_probes.empty()) throw DegenerateInput("no impostor pairs can be formed");

  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::vector<std::string> ids;
  for (const auto& [id, _] : gallery_by_id) ids.push_back(id);

  std::vector<PairIndex> pairs;
  const int n_genuine = pair_count / 2;
  for (int k = 0; k < n_genuine; ++k) {
    const int pi = genuine_probes[pick(genuine_probes.size())];
    std::vector<int> partners;
    for (int j : gallery_by_id[probes[pi].image.identity]) {
      if (gallery[j].image_id != probes[pi].image_id) partners.push_back(j);
    }
    pairs.push_back({pi, partners[pick(partners.size())], PairLabel::genuine});
  }
  for (int k = n_genuine; k < 2 * n_genuine; ++k) {
    const int pi = impostor_probes[pick(impostor_probes.size())];
    std::vector<std::string> others;
    for (const auto& id : ids) {
      if (id != probes[pi].image.identity) others.push_back(id);
    }
    const auto& cands = gallery_by_id[others[pick(others.size())]];
    pairs.push_back({pi, cands[pick(cands.size())], PairLabel::impostor});
  }
  return pairs;
}

ScoreSet build_score_set(std::span<const FaceSample> probes, std::span<const FaceSample> gallery, const SrModel& sr_model,
                         const EmbeddingExtractor& extractor, int pair_count, std::uint64_t seed, bool normalize) {
  const auto pairs = sample_pairs(probes, gallery, pair_count, seed);
  auto finish = [normalize](EmbeddingVector v) {
    if (!normalize) return v;
    try {
      return ftlgan::normalize(v);
    } catch (const DegenerateInput&) {
      return v;
    }
  };
  std::map<int, EmbeddingVector> probe_emb, gallery_emb;
  ScoreSet s;
  s.seed = seed;
  s.resolution = probes.empty() ? 0 : probes[0].image.height();
  for (const auto& pr : pairs) {
    auto pit = probe_emb.find(pr.probe);
    if (pit == probe_emb.end()) {
      ImageArray sr = sr_model(probes[pr.probe].image);
      sr.clip_unit();
      pit = probe_emb.emplace(pr.probe, finish(extractor.embed(sr))).first;
    }
    auto git = gallery_emb.find(pr.gallery);
    if (git == gallery_emb.end()) git = gallery_emb.emplace(pr.gallery, finish(extractor.embed(gallery[pr.gallery].image))).first;
    s.pairs.push_back({distance(pit->second, git->second), pr.label, probes[pr.probe].image_id,
                       gallery[pr.gallery].image_id});
  }
  s.validate();
  return s;
}

double dprime(std::span<const double> genuine, std::span<const double> impostor) {
  if (genuine.size() < 2 || impostor.size() < 2) throw DegenerateInput("d' needs at least 2 samples per population");
  auto moments = [](std::span<const double> xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::pair{mean, var / static_cast<double>(xs.size())};
  };
  const auto [mg, vg] = moments(genuine);
  const auto [mi, vi] = moments(impostor);
  if (vg == 0.0 && vi == 0.0) throw DegenerateInput("d' undefined: both populations have zero variance");
  return std::abs(mg - mi) / std::sqrt((vg + vi) / 2.0);
}

std::vector<RocPoint> roc(std::span<const double> genuine, std::span<const double> impostor) {
  if (genuine.empty() || impostor.empty()) throw DegenerateInput("ROC needs genuine and impostor scores");
  std::vector<double> g(genuine.begin(), genuine.end()), im(impostor.begin(), impostor.end());
  std::sort(g.begin(), g.end());
  std::sort(im.begin(), im.end());
  std::vector<double> thresholds;
  thresholds.reserve(g.size() + im.size() + 2);
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  std::merge(g.begin(), g.end(), im.begin(), im.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin() + 1, thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  std::vector<RocPoint> out;
  for (double t : thresholds) {
    const auto accepted_g = std::lower_bound(g.begin(), g.end(), t) - g.begin();
    const auto accepted_i = std::lower_bound(im.begin(), im.end(), t) - im.begin();
    const RocPoint p{static_cast<double>(accepted_i) / static_cast<double>(im.size()),
                     static_cast<double>(accepted_g) / static_cast<double>(g.size())};
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  return out;
}

std::vector<RocPoint> roc(const ScoreSet& scores) {
  scores.validate();
  const auto g = scores.genuine();
  const auto i = scores.impostor();
  return roc(g, i);
}

double auc(std::vector<RocPoint> points) {
  if (points.size() < 2) throw InvalidArgument("AUC needs at least 2 ROC points");
  std::sort(points.begin(), points.end(),
            [](const RocPoint& a, const RocPoint& b) { return a.fmr != b.fmr ? a.fmr < b.fmr : a.tpr < b.tpr; });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  double area = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) {
    area += (points[k].fmr - points[k - 1].fmr) * (points[k].tpr + points[k - 1].tpr) / 2.0;
  }
  return area;
}

Histogram histogram(std::span<const double> genuine, std::span<const double> impostor, int bins) {
  if (genuine.empty() || impostor.empty()) throw DegenerateInput("histogram needs non-empty populations");
  if (bins < 1) throw InvalidArgument("histogram needs >= 1 bin");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (auto xs : {genuine, impostor}) {
    for (double x : xs) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  Histogram h;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(b == bins ? hi : lo + b * width);
  auto fill = [&](std::span<const double> xs) {
    std::vector<double> dens(static_cast<std::size_t>(bins), 0.0);
    for (double x : xs) {
      const int b = std::clamp(static_cast<int>((x - lo) / width), 0, bins - 1);
      dens[static_cast<std::size_t>(b)] += 1.0;
    }
    for (double& d : dens) d /= static_cast<double>(xs.size()) * width;
    return dens;
  };
  h.genuine = fill(genuine);
  h.impostor = fill(impostor);
  return h;
}

EvalReport evaluate_scores(const ScoreSet& scores, int bins) {
  scores.validate();
  const auto g = scores.genuine();
  const auto i = scores.impostor();
  EvalReport r;
  r.d_prime = dprime(g, i);
  r.roc_points = roc(g, i);
  r.auc = auc(r.roc_points);
  r.hist = histogram(g, i, bins);
  r.n_genuine = g.size();
  r.n_impostor = i.size();
  return r;
}

ComparisonTable comparison_report(std::span<const ModelResult> results, std::vector<int> resolutions) {
  if (results.empty()) throw InvalidArgument("comparison report needs at least one result");
  ComparisonTable t;
  t.resolutions = std::move(resolutions);
  for (const auto& r : results) {
    auto row = std::find_if(t.rows.begin(), t.rows.end(), [&](const ComparisonRow& x) { return x.model == r.model; });
    if (row == t.rows.end()) {
      t.rows.push_back({r.model, std::vector<std::optional<std::pair<double, double>>>(t.resolutions.size()), 0, 0, false});
      row = t.rows.end() - 1;
    }
    const auto col = std::find(t.resolutions.begin(), t.resolutions.end(), r.resolution);
    if (col == t.resolutions.end()) throw InvalidArgument("resolution " + std::to_string(r.resolution) + " not in report columns");
    row->cells[static_cast<std::size_t>(col - t.resolutions.begin())] = std::pair{r.report.d_prime, r.report.auc};
  }
  for (auto& row : t.rows) {
    double sd = 0.0, sa = 0.0;
    int n = 0;
    for (const auto& c : row.cells) {
      if (!c) {
        row.has_absent = true;
        continue;
      }
      sd += c->first;
      sa += c->second;
      ++n;
    }
    row.avg_dprime = n ? sd / n : std::numeric_limits<double>::quiet_NaN();
    row.avg_auc = n ? sa / n : std::numeric_limits<double>::quiet_NaN();
  }
  return t;
}

std::string ComparisonTable::to_csv() const {
  std::ostringstream out;
  out << "model";
  for (int r : resolutions) out << ",dprime_" << r << ",auc_" << r;
  out << ",dprime_avg,auc_avg\n";
  bool footnote = false;
  for (const auto& row : rows) {
    footnote = footnote || row.has_absent;
    out << row.model << (row.has_absent ? " *" : "");
    for (const auto& c : row.cells) {
      if (c) {
        out << ',' << fixed(c->first, 6) << ',' << fixed(c->second, 6);
      } else {
        out << ",NA,NA";
      }
    }
    out << ',' << fixed(row.avg_dprime, 6) << ',' << fixed(row.avg_auc, 6) << '\n';
  }
  if (footnote) out << "# * missing resolutions excluded from the average\n";
  return out.str();
}

std::string ComparisonTable::to_text() const {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"model"};
  for (int r : resolutions) {
    header.push_back("d'@" + std::to_string(r));
    header.push_back("AUC@" + std::to_string(r));
  }
  header.push_back("d' avg");
  header.push_back("AUC avg");
  cells.push_back(header);
  bool footnote = false;
  for (const auto& row : rows) {
    std::vector<std::string> line{row.model + (row.has_absent ? " *" : "")};
    footnote = footnote || row.has_absent;
    for (const auto& c : row.cells) {
      line.push_back(c ? fixed(c->first, 3) : "-");
      line.push_back(c ? fixed(c->second, 2) : "-");
    }
    line.push_back(fixed(row.avg_dprime, 3));
    line.push_back(fixed(row.avg_auc, 2));
    cells.push_back(line);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells)
    for (std::size_t k = 0; k < line.size(); ++k) width[k] = std::max(width[k], line[k].size());
  std::ostringstream out;
  for (const auto& line : cells) {
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (k) out << "  ";
      const std::string pad(width[k] - line[k].size(), ' ');
      out << (k == 0 ? line[k] + pad : pad + line[k]);
    }
    out << '\n';
  }
  if (footnote) out << "* missing resolutions excluded from the average\n";
  return out.str();
}

void save_score_set_csv(const std::filesystem::path& path, const ScoreSet& scores) {
  std::ostringstream out;
  out << "probe,gallery,distance,label\n";
  char buf[64];
  for (const auto& p : scores.pairs) {
    std::snprintf(buf, sizeof buf, "%.17g", p.distance);
    out << p.probe_id << ',' << p.gallery_id << ',' << buf << ','
        << (p.label == PairLabel::genuine ? "genuine" : "impostor") << '\n';
  }
  write_text(path, out.str());
}

void save_report_json(const std::filesystem::path& path, const EvalReport& report, const ScoreSet& scores) {
  nlohmann::json j;
  j["model"] = scores.model;
  j["resolution"] = scores.resolution;
  j["pair_seed"] = scores.seed;
  j["d_prime"] = report.d_prime;
  j["auc"] = report.auc;
  j["n_genuine"] = report.n_genuine;
  j["n_impostor"] = report.n_impostor;
  j["roc"] = nlohmann::json::array();
  for (const auto& p : report.roc_points) j["roc"].push_back({p.fmr, p.tpr});
  j["histogram"] = {{"edges", report.hist.edges}, {"genuine", report.hist.genuine}, {"impostor", report.hist.impostor}};
  write_text(path, j.dump(2) + "\n");
}

void plot_histogram_png(const std::filesystem::path& path, const Histogram& hist) {
  Canvas cv(kPlotW, kPlotH);
  const int bins = static_cast<int>(hist.genuine.size());
  double peak = 1e-12;
  for (std::size_t b = 0; b < hist.genuine.size(); ++b) peak = std::max({peak, hist.genuine[b], hist.impostor[b]});
  const double bw = static_cast<double>(kPlotW - 2 * kMargin) / std::max(bins, 1);
  auto bar = [&](const std::vector<double>& d, std::array<double, 3> col) {
    for (int b = 0; b < bins; ++b) {
      const int x0 = kMargin + static_cast<int>(b * bw);
      const int x1 = kMargin + static_cast<int>((b + 1) * bw) - 1;
      const int top = kPlotH - kMargin - static_cast<int>(d[static_cast<std::size_t>(b)] / peak * (kPlotH - 2 * kMargin));
      if (top < kPlotH - kMargin) cv.rect(x0, top, x1, kPlotH - kMargin, col, 0.45);
    }
  };
  bar(hist.impostor, {0.85, 0.1, 0.1});
  bar(hist.genuine, {0.1, 0.65, 0.1});
  cv.line(kMargin, kPlotH - kMargin, kPlotW - kMargin, kPlotH - kMargin, {0, 0, 0});
  cv.line(kMargin, kMargin, kMargin, kPlotH - kMargin, {0, 0, 0});
  write_png(path, cv.image());
}

void plot_roc_png(const std::filesystem::path& path, std::span<const RocPoint> points) {
  Canvas cv(kPlotH, kPlotH);
  const double span = kPlotH - 2 * kMargin;
  auto px = [&](double f) { return kMargin + f * span; };
  auto py = [&](double t) { return kPlotH - kMargin - t * span; };
  cv.line(px(0), py(0), px(1), py(1), {0.85, 0.1, 0.1});
  for (std::size_t k = 1; k < points.size(); ++k) {
    cv.line(px(points[k - 1].fmr), py(points[k - 1].tpr), px(points[k].fmr), py(points[k].tpr), {0.1, 0.2, 0.8});
  }
  cv.line(px(0), py(0), px(1), py(0), {0, 0, 0});
  cv.line(px(0), py(0), px(0), py(1), {0, 0, 0});
  write_png(path, cv.image());
}

}  // namespace ftlgan
