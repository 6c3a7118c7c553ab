#include "ftlgan/datasets.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include <json.hpp>

#include "ftlgan/error.hpp"
#include "ftlgan/upsamplers.hpp"

namespace fs = std::filesystem;

namespace ftlgan {

namespace {

std::vector<fs::path> sorted_children(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (directories ? e.is_directory() : (e.is_regular_file() && e.path().extension() == ".png")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string entry_path(Split split, int res, const std::string& id, const std::string& image_id) {
  return to_string(split) + "/" + std::to_string(res) + "/" + id + "/" + image_id + ".png";
}

}  // namespace

std::string to_string(Split s) { return s == Split::train ? "train" : "test"; }

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw DataError("unknown split '" + s + "'");
}

DatasetManifest DatasetManifest::split_view(Split split) const {
  DatasetManifest m;
  m.seed = seed;
  for (const auto& e : entries) {
    if (e.split == split) m.entries.push_back(e);
  }
  return m;
}

std::vector<ManifestEntry> DatasetManifest::select(int resolution) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries) {
    if (e.resolution == resolution) out.push_back(e);
  }
  return out;
}

std::vector<std::string> DatasetManifest::identities() const {
  std::set<std::string> ids;
  for (const auto& e : entries) ids.insert(e.identity);
  return {ids.begin(), ids.end()};
}

const ManifestEntry* DatasetManifest::find(const std::string& path) const {
  for (const auto& e : entries) {
    if (e.path == path) return &e;
  }
  return nullptr;
}

DatasetManifest build_resolution_sets(const fs::path& corpus_dir, const fs::path& out_root,
                                      const std::vector<int>& resolutions, std::uint64_t seed, double test_fraction) {
  if (!fs::is_directory(corpus_dir)) throw DataError("corpus directory not found: " + corpus_dir.string());
  if (resolutions.empty()) throw InvalidArgument("no resolutions requested");
  for (int r : resolutions) require_corpus_resolution(r);
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw InvalidArgument("test_fraction must be in [0, 1)");

  struct Source {
    std::string identity, image_id;
    ImageArray hr;
  };
  std::map<std::string, std::vector<Source>> by_identity;
  int skipped = 0;
  for (const auto& id_dir : sorted_children(corpus_dir, true)) {
    const std::string id = id_dir.filename().string();
    for (const auto& file : sorted_children(id_dir, false)) {
      ImageArray img;
      try {
        img = read_png(file);
      } catch (const DataError& e) {
        spdlog::warn("skipping unreadable image {}: {}", file.string(), e.what());
        ++skipped;
        continue;
      }
      if (img.height() < 112 || img.width() < 112) {
        spdlog::warn("skipping {}: {}x{} is below 112x112", file.string(), img.height(), img.width());
        ++skipped;
        continue;
      }
      if (img.height() != 112 || img.width() != 112) img = resize(img, 112, 112, ResampleMethod::bicubic());
      img.identity = id;
      by_identity[id].push_back({id, file.stem().string(), std::move(img)});
    }
  }
  if (by_identity.empty()) throw DataError("no readable images under " + corpus_dir.string());

  std::vector<std::string> ids;
  for (const auto& [id, _] : by_identity) ids.push_back(id);
  std::mt19937_64 rng(seed);
  std::vector<std::string> shuffled = ids;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(ids.size())));
  if (test_fraction > 0.0 && ids.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, ids.size() - 1);
  const std::set<std::string> test_ids(shuffled.begin(), shuffled.begin() + static_cast<long>(n_test));

  DatasetManifest m;
  m.seed = seed;
  int singletons = 0;
  for (const auto& id : ids) {
    const auto& sources = by_identity[id];
    if (sources.size() < 2) ++singletons;
    const Split split = test_ids.contains(id) ? Split::test : Split::train;
    for (const auto& src : sources) {
      for (int r : resolutions) {
        const ImageArray derived = r == 112 ? src.hr : synthetic_degrade(src.hr, r);
        ManifestEntry e{entry_path(split, r, id, src.image_id), id, src.image_id, r, split};
        write_png(out_root / e.path, derived);
        m.entries.push_back(std::move(e));
      }
    }
  }
  if (singletons > 0) spdlog::info("{} identities have fewer than 2 images and cannot anchor triplets", singletons);
  if (skipped > 0) spdlog::warn("{} corpus images skipped", skipped);
  return m;
}

std::vector<TripletRecord> sample_triplets(const DatasetManifest& manifest, int anchor_resolution, int count,
                                           std::uint64_t seed) {
  if (anchor_resolution != 14 && anchor_resolution != 28 && anchor_resolution != 56) {
    throw InvalidArgument("anchor resolution must be 14, 28 or 56, got " + std::to_string(anchor_resolution));
  }
  if (count < 0) throw InvalidArgument("triplet count must be >= 0");

  std::map<std::string, std::vector<const ManifestEntry*>> hr_by_id;
  for (const auto& e : manifest.entries) {
    if (e.resolution == 112) hr_by_id[e.identity].push_back(&e);
  }
  if (hr_by_id.size() < 2) throw DataError("no negative identity available: manifest has " +
                                           std::to_string(hr_by_id.size()) + " identity with HR images");

  std::vector<const ManifestEntry*> anchors;
  for (const auto& e : manifest.entries) {
    if (e.resolution != anchor_resolution) continue;
    auto it = hr_by_id.find(e.identity);
    if (it == hr_by_id.end()) continue;
    const bool has_positive = std::any_of(it->second.begin(), it->second.end(),
                                          [&](const ManifestEntry* p) { return p->image_id != e.image_id; });
    if (has_positive) anchors.push_back(&e);
  }
  if (count > 0 && anchors.empty()) {
    throw DataError("empty dataset: no eligible anchors at resolution " + std::to_string(anchor_resolution));
  }

  std::vector<std::string> ids;
  for (const auto& [id, _] : hr_by_id) ids.push_back(id);

  std::mt19937_64 rng(seed);
  auto pick = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::vector<TripletRecord> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const ManifestEntry* a = anchors[pick(anchors.size())];
    std::vector<const ManifestEntry*> positives;
    for (const auto* p : hr_by_id[a->identity]) {
      if (p->image_id != a->image_id) positives.push_back(p);
    }
    const ManifestEntry* p = positives[pick(positives.size())];
    std::size_t neg_id = pick(ids.size() - 1);
    const auto own = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), a->identity) - ids.begin());
    if (neg_id >= own) ++neg_id;
    const auto& negatives = hr_by_id[ids[neg_id]];
    const ManifestEntry* n = negatives[pick(negatives.size())];
    out.push_back({a->path, p->path, n->path});
  }
  return out;
}

ImageArray synthetic_degrade(const ImageArray& image, int target) {
  if (target != 14 && target != 28 && target != 56) {
    throw InvalidArgument("degradation target must be 14, 28 or 56, got " + std::to_string(target));
  }
  if (target >= image.height() || target >= image.width()) {
    throw InvalidArgument("degradation target " + std::to_string(target) + " is not below source size " +
                          image.pixels.shape_string());
  }
  return resize(image, target, target, ResampleMethod::bicubic());
}

void save_manifest(const fs::path& path, const DatasetManifest& manifest) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << nlohmann::json{{"seed", manifest.seed}}.dump() << '\n';
  for (const auto& e : manifest.entries) {
    out << nlohmann::json{{"path", e.path},
                          {"identity", e.identity},
                          {"image_id", e.image_id},
                          {"resolution", e.resolution},
                          {"split", to_string(e.split)}}
               .dump()
        << '\n';
  }
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("manifest not found: " + path.string());
  DatasetManifest m;
  std::string line;
  bool header = true;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      if (header) {
        m.seed = j.at("seed").get<std::uint64_t>();
        header = false;
        continue;
      }
      m.entries.push_back({j.at("path").get<std::string>(), j.at("identity").get<std::string>(),
                           j.at("image_id").get<std::string>(), j.at("resolution").get<int>(),
                           parse_split(j.at("split").get<std::string>())});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (header) throw DataError("empty manifest " + path.string());
  return m;
}

void save_triplets(const fs::path& path, const std::vector<TripletRecord>& triplets) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write triplets " + path.string());
  for (const auto& t : triplets) out << t.anchor << '\t' << t.positive << '\t' << t.negative << '\n';
}

std::vector<TripletRecord> load_triplets(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("triplet file not found: " + path.string());
  std::vector<TripletRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw DataError("malformed triplet line in " + path.string());
    out.push_back({line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1), line.substr(t2 + 1)});
  }
  return out;
}

const ImageArray& ImageStore::get(const std::string& relative_path, const std::string& identity) {
  auto it = cache_.find(relative_path);
  if (it == cache_.end()) {
    ImageArray img = read_png(root_ / relative_path);
    img.identity = identity;
    it = cache_.emplace(relative_path, std::move(img)).first;
  }
  return it->second;
}

void make_synthetic_corpus(const fs::path& dir, const SyntheticCorpusOptions& options) {
  if (options.identities < 1 || options.images_per_identity < 1 || options.size < 16) {
    throw InvalidArgument("synthetic corpus needs >= 1 identity, >= 1 image and size >= 16");
  }
  const int size = options.size;
  const double unit = size / 112.0;
  for (int id = 0; id < options.identities; ++id) {
    std::mt19937_64 id_rng(options.seed * 7919u + static_cast<std::uint64_t>(id) * 104729u + 17u);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto range = [&](double lo, double hi) { return lo + (hi - lo) * u(id_rng); };
    // Colours come from a few shared palettes so that identity is carried mostly by
    // geometry and fine texture rather than by mean colour.
    static constexpr std::array<std::array<double, 3>, 4> kSkin{{{0.80, 0.62, 0.50}, {0.62, 0.45, 0.35},
                                                                  {0.45, 0.32, 0.25}, {0.85, 0.72, 0.62}}};
    const auto& base = kSkin[static_cast<std::size_t>(id_rng() % kSkin.size())];
    std::array<double, 3> skin{}, eye{}, mouth{}, stripe{};
    for (int c = 0; c < 3; ++c) {
      skin[c] = base[c] + range(-0.04, 0.04);
      eye[c] = range(0.05, 0.25);
      mouth[c] = range(0.3, 0.6);
      stripe[c] = range(-1.0, 1.0);
    }
    const double head_cx = range(52, 60), head_cy = range(54, 62);
    const double head_rx = range(32, 40), head_ry = range(38, 46);
    const double eye_y = range(42, 54), eye_dx = range(8, 15), eye_r = range(2.5, 6.0);
    const double brow_dy = range(5, 9), brow_w = range(5, 9), brow_tilt = range(-0.35, 0.35);
    const double mouth_y = range(72, 84), mouth_w = range(8, 18), mouth_h = range(1.5, 4.0);
    const double stripe_freq = range(0.025, 0.055), stripe_theta = range(0, std::numbers::pi), stripe_amp = range(0.08, 0.18);
    std::array<std::array<double, 3>, 3> spots{};
    for (auto& sp : spots) sp = {range(-22, 22), range(-26, 26), range(1.5, 4.0)};

    const std::string id_name = [&] {
      char buf[16];
      std::snprintf(buf, sizeof buf, "id_%03d", id);
      return std::string(buf);
    }();
    for (int k = 0; k < options.images_per_identity; ++k) {
      std::mt19937_64 rng(id_rng() ^ (static_cast<std::uint64_t>(k) * 0x9e3779b97f4a7c15ull));
      std::uniform_real_distribution<double> v(-1.0, 1.0);
      std::normal_distribution<double> noise(0.0, 0.03);
      const double dx = 4.0 * v(rng), dy = 4.0 * v(rng);
      const double light = 1.0 + 0.06 * v(rng);
      const double tilt = 0.1 * v(rng);
      std::array<double, 3> cast{}, background{};
      for (int c = 0; c < 3; ++c) {
        cast[c] = 0.02 * v(rng);
        background[c] = 0.25 + 0.04 * v(rng);
      }
      ImageArray img(size, size, 0.0, id_name);
      for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
          const double px = x / unit - dx, py = y / unit - dy;
          const double hx = (px - head_cx) / head_rx, hy = (py - head_cy) / head_ry;
          std::array<double, 3> col = background;
          const double shade = 0.1 * (px / 112.0 - 0.5) + tilt * (py / 112.0 - 0.5);
          if (hx * hx + hy * hy <= 1.0) {
            const double phase = 2.0 * std::numbers::pi * stripe_freq *
                                 (px * std::cos(stripe_theta) + py * std::sin(stripe_theta));
            for (int c = 0; c < 3; ++c) col[c] = skin[c] + stripe_amp * stripe[c] * std::sin(phase);
            for (const auto& sp : spots) {
              const double bx = px - head_cx - sp[0], by = py - head_cy - sp[1];
              if (bx * bx + by * by < sp[2] * sp[2]) {
                for (int c = 0; c < 3; ++c) col[c] = 0.5 * col[c] + 0.5 * eye[c];
              }
            }
            for (double side : {-1.0, 1.0}) {
              const double ex = px - (head_cx + side * eye_dx), ey = py - eye_y;
              if (ex * ex + ey * ey < eye_r * eye_r) col = eye;
              const double bx = ex / brow_w;
              const double by = ey + brow_dy + side * brow_tilt * ex;
              if (bx * bx < 1.0 && by * by < 1.5) col = eye;
            }
            const double mx = (px - head_cx) / mouth_w, my = (py - mouth_y) / mouth_h;
            if (mx * mx + my * my < 1.0) col = mouth;
          }
          for (int c = 0; c < 3; ++c) img.at(c, y, x) = (col[c] + shade + cast[c]) * light + noise(rng);
        }
      }
      img.clip_unit();
      char name[32];
      std::snprintf(name, sizeof name, "img_%02d.png", k);
      write_png(dir / id_name / name, img);
    }
  }
}

}  // namespace ftlgan
