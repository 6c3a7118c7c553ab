#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "../support/oracles.hpp"
#include "ftlgan/datasets.hpp"
#include "ftlgan/error.hpp"
#include "ftlgan/upsamplers.hpp"

using namespace ftlgan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ImageArray checkerboard() {
  ImageArray img(112, 112);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 112; ++y)
      for (int x = 0; x < 112; ++x) img.at(c, y, x) = ((x + y) % 2) ? 1.0 : 0.0;
  return img;
}

void write_corpus(const fs::path& dir, int identities, int images, const ImageArray& img) {
  for (int i = 0; i < identities; ++i)
    for (int k = 0; k < images; ++k) {
      fs::create_directories(dir / ("id" + std::to_string(i)));
      write_png(dir / ("id" + std::to_string(i)) / ("img" + std::to_string(k) + ".png"), img);
    }
}

}  // namespace

TEST_CASE("resolution sets count entries and identities") {
  TempDir t("ftlgan_ds_count");
  write_corpus(t.path / "corpus", 4, 3, ImageArray(112, 112, 0.5));
  const auto m = build_resolution_sets(t.path / "corpus", t.path / "data", {14, 112}, 1);
  CHECK(m.entries.size() == 24);
  CHECK(m.identities().size() == 4);
  for (const auto& e : m.entries) {
    CHECK(fs::exists(t.path / "data" / e.path));
    // Whole identities land in one split.
    for (const auto& f : m.entries)
      if (f.identity == e.identity) CHECK(f.split == e.split);
  }
  save_manifest(t.path / "m.jsonl", m);
  const auto back = load_manifest(t.path / "m.jsonl");
  CHECK(back.entries == m.entries);
  CHECK(back.seed == m.seed);
  CHECK_THROWS_AS(build_resolution_sets(t.path / "nowhere", t.path / "data", {14}, 1), DataError);
}

TEST_CASE("constant gray source stays constant") {
  TempDir t("ftlgan_ds_gray");
  write_corpus(t.path / "corpus", 2, 2, ImageArray(112, 112, 128.0 / 255.0));
  const auto m = build_resolution_sets(t.path / "corpus", t.path / "data", {14}, 1);
  for (const auto& e : m.select(14)) {
    const ImageArray img = read_png(t.path / "data" / e.path);
    CHECK(img.height() == 14);
    for (double v : img.pixels.values()) CHECK(v == 128.0 / 255.0);
  }
  const ImageArray d = synthetic_degrade(ImageArray(112, 112, 0.3), 28);
  for (double v : d.pixels.values()) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("checkerboard downscale matches the direct bicubic oracle") {
  const ImageArray board = checkerboard();
  Tensor want = oracle::bicubic_direct(board.pixels, 56, 56);
  for (double& v : want.values()) v = std::clamp(v, 0.0, 1.0);
  const ImageArray got = synthetic_degrade(board, 56);
  double worst = 0;
  for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(got.pixels[i] - want[i]));
  CHECK(worst < 1e-9);

  // The on-disk derivative is the same image after 8-bit rounding.
  TempDir t("ftlgan_ds_board");
  write_corpus(t.path / "corpus", 2, 2, board);
  const auto m = build_resolution_sets(t.path / "corpus", t.path / "data", {56}, 1);
  const ImageArray disk = read_png(t.path / "data" / m.select(56).front().path);
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(disk.pixels[i] - want[i]) <= 0.5 / 255 + 1e-12);
}

TEST_CASE("synthetic degrade of a horizontal ramp is the analytic ramp") {
  ImageArray ramp(112, 112);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 112; ++y)
      for (int x = 0; x < 112; ++x) ramp.at(c, y, x) = x / 111.0;
  const ImageArray d = synthetic_degrade(ramp, 56);
  // Output column j samples source coordinate 2j + 0.5. Border columns see clamped taps,
  // so only columns whose kernel support lies inside the image are compared.
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 56; ++y)
      for (int j = 2; j < 54; ++j) CHECK(std::abs(d.at(c, y, j) - (2 * j + 0.5) / 111.0) < 1e-6);
  CHECK(synthetic_degrade(ramp, 28).pixels.storage() == resize(ramp, 28, 28, ResampleMethod::bicubic()).pixels.storage());
  CHECK_THROWS_AS(synthetic_degrade(ramp, 20), InvalidArgument);
}

TEST_CASE("triplet sampling invariants and determinism") {
  DatasetManifest m;
  for (const char* id : {"A", "B"})
    for (int k = 0; k < 2; ++k)
      for (int r : {14, 112}) {
        const std::string img = std::string(id) + std::to_string(k);
        m.entries.push_back({"train/" + std::to_string(r) + "/" + id + "/" + img + ".png", id, img, r, Split::train});
      }
  const auto ts = sample_triplets(m, 14, 100, 7);
  REQUIRE(ts.size() == 100);
  for (const auto& t : ts) {
    const auto* a = m.find(t.anchor);
    const auto* p = m.find(t.positive);
    const auto* n = m.find(t.negative);
    REQUIRE((a && p && n));
    CHECK(a->resolution == 14);
    CHECK(p->resolution == 112);
    CHECK(n->resolution == 112);
    CHECK(a->identity == p->identity);
    CHECK(a->identity != n->identity);
    CHECK(a->image_id != p->image_id);
  }
  CHECK(sample_triplets(m, 14, 100, 7) == ts);
  CHECK(sample_triplets(m, 14, 100, 8) != ts);

  TempDir t("ftlgan_ds_trip");
  save_triplets(t.path / "t.tsv", ts);
  CHECK(load_triplets(t.path / "t.tsv") == ts);

  DatasetManifest one;
  for (const auto& e : m.entries)
    if (e.identity == "A") one.entries.push_back(e);
  try {
    sample_triplets(one, 14, 10, 1);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("no negative identity available") != std::string::npos);
  }
}

TEST_CASE("synthetic corpus is deterministic and separates identities") {
  TempDir t("ftlgan_ds_synth");
  SyntheticCorpusOptions o;
  o.identities = 3;
  o.images_per_identity = 2;
  o.seed = 4;
  make_synthetic_corpus(t.path / "a", o);
  make_synthetic_corpus(t.path / "b", o);
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(t.path / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), t.path / "a");
    CHECK(read_png(e.path()).pixels.storage() == read_png(t.path / "b" / rel).pixels.storage());
  }
  CHECK(files == 6);
}
