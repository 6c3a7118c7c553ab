#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ftlgan/image.hpp"

namespace ftlgan {

enum class Split { train, test };

std::string to_string(Split s);
Split parse_split(const std::string& s);

struct ManifestEntry {
  /// Relative to the data root: <split>/<resolution>/<identity>/<image_id>.png
  std::string path;
  std::string identity;
  /// Source image stem, shared by every resolution derived from the same photo.
  std::string image_id;
  int resolution = 112;
  Split split = Split::train;

  bool operator==(const ManifestEntry&) const = default;
};

/// LR anchor, HR positive (same identity, different source image), HR negative.
struct TripletRecord {
  std::string anchor;
  std::string positive;
  std::string negative;

  bool operator==(const TripletRecord&) const = default;
};

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::vector<ManifestEntry> entries;
  std::vector<TripletRecord> triplets;

  /// Entries of one split (triplets are not carried over).
  DatasetManifest split_view(Split split) const;
  std::vector<ManifestEntry> select(int resolution) const;
  std::vector<std::string> identities() const;
  const ManifestEntry* find(const std::string& path) const;
};

/// Scans <corpus>/<identity>/<image>.png (sorted), assigns whole identities to train/test
/// (test_fraction of them, shuffled with `seed`), and writes one bicubic derivative per
/// (image, resolution) under `out_root`. Unreadable or undersized images are skipped with
/// a warning. Throws DataError when the corpus directory is missing or yields nothing.
DatasetManifest build_resolution_sets(const std::filesystem::path& corpus_dir, const std::filesystem::path& out_root,
                                      const std::vector<int>& resolutions, std::uint64_t seed,
                                      double test_fraction = 0.25);

/// Draws `count` triplets with anchors at `anchor_resolution` from the manifest's entries.
/// Anchor uniform over eligible anchors, positive uniform over the other HR images of the
/// same identity, negative identity uniform then image uniform. Throws DataError
/// ("no negative identity available" / empty dataset) when impossible.
std::vector<TripletRecord> sample_triplets(const DatasetManifest& manifest, int anchor_resolution, int count,
                                           std::uint64_t seed);

/// Bicubic downscale of a 112x112 image to target x target, target in {14, 28, 56}.
ImageArray synthetic_degrade(const ImageArray& image, int target);

// Manifest files: JSON lines, first line {"seed": ...}, then one entry per line with
// path, identity, image_id, resolution, split.
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);
// Triplet files: "anchor<TAB>positive<TAB>negative" per line.
void save_triplets(const std::filesystem::path& path, const std::vector<TripletRecord>& triplets);
std::vector<TripletRecord> load_triplets(const std::filesystem::path& path);

/// Read-through cache of images under a data root.
class ImageStore {
 public:
  explicit ImageStore(std::filesystem::path root) : root_(std::move(root)) {}
  const ImageArray& get(const std::string& relative_path, const std::string& identity = {});
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::map<std::string, ImageArray> cache_;
};

struct SyntheticCorpusOptions {
  int identities = 32;
  int images_per_identity = 6;
  int size = 112;
  std::uint64_t seed = 0;
};

/// Procedurally generated face-like corpus: each identity has its own palette, head and
/// feature geometry and a stripe texture; images of an identity differ by small shifts,
/// illumination and pixel noise. Writes <dir>/id_NNN/img_NN.png.
void make_synthetic_corpus(const std::filesystem::path& dir, const SyntheticCorpusOptions& options);

}  // namespace ftlgan
