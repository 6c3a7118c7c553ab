#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftlgan/tensor.hpp"

namespace ftlgan {

struct NamedArray {
  std::string name;
  Tensor value;
};

/// Named-array container used for generator checkpoints and extractor weights.
///
/// Layout: 8-byte magic "FTLGANW1", little-endian u64 header length, a JSON header
/// ({"meta": ..., "arrays": [{"name", "shape"}...], "sha256": hex of the data block}),
/// then every array's doubles back to back in IEEE-754 little-endian order.
struct WeightFile {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedArray> arrays;
};

void save_weight_file(const std::filesystem::path& path, const WeightFile& file);

/// Throws LoadError on a missing file, bad magic, truncated data or checksum mismatch.
WeightFile load_weight_file(const std::filesystem::path& path);

std::string sha256_hex(std::span<const unsigned char> bytes);

/// SHA-256 over array names, shapes and raw values; stable identity of a weight set.
std::string hash_arrays(std::span<const NamedArray> arrays);

}  // namespace ftlgan
