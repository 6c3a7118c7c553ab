#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ftlgan/autodiff.hpp"
#include "ftlgan/image.hpp"
#include "ftlgan/weights_io.hpp"

namespace ftlgan {

enum class UpsampleKind { subpixel, transposed };

std::string to_string(UpsampleKind kind);
UpsampleKind parse_upsample_kind(const std::string& name);

/// RRDB super-resolution generator shape. Defaults are the full-size network;
/// toy() is the small CPU configuration.
struct GeneratorConfig {
  int n_rrdb = 16;
  int base_channels = 64;
  int growth_channels = 32;
  int scale = 4;
  UpsampleKind upsample_kind = UpsampleKind::subpixel;
  /// Adds a bicubic upscaling of the input to the network output.
  bool global_skip = true;

  static GeneratorConfig toy(int scale);

  /// Throws ConfigError on scale not in {2,4,8}, n_rrdb < 1 or non-positive channels.
  void validate() const;
  int stages() const;

  bool operator==(const GeneratorConfig&) const = default;
};

void to_json(nlohmann::json& j, const GeneratorConfig& c);
void from_json(const nlohmann::json& j, GeneratorConfig& c);

/// Ordered (name, shape) list of every weight the config implies.
std::vector<std::pair<std::string, std::vector<int>>> generator_layout(const GeneratorConfig& config);

struct GeneratorParams {
  GeneratorConfig config;
  std::vector<NamedArray> arrays;
  std::uint64_t seed = 0;

  std::size_t parameter_count() const;
  std::string hash() const { return hash_arrays(arrays); }
};

/// Kaiming-normal initialisation with zero biases. Trunk convolutions are scaled by 0.1 and
/// the output convolution by 0.01 (0.1 without the global skip), so the untrained network
/// stays close to its bicubic skip path.
GeneratorParams init_generator(const GeneratorConfig& config, std::uint64_t seed);

/// Differentiable forward pass. `params` are graph leaves aligned with generator_layout().
ad::Var generator_graph(const GeneratorConfig& config, std::span<const ad::Var> params, const ad::Var& lr);

/// Wraps each weight array as a graph leaf (or constant when requires_grad is false).
std::vector<ad::Var> bind_parameters(const GeneratorParams& params, bool requires_grad);

/// Inference: output is (H*scale, W*scale) and clamped to [0,1] when `clamp` is set.
ImageArray forward(const GeneratorParams& params, const ImageArray& lr, bool clamp = true);

/// forward() that also checks lr.height() * scale == target (InvalidArgument otherwise).
ImageArray super_resolve(const GeneratorParams& params, const ImageArray& lr, int target = 112);

/// Pixel shuffle: (C*s*s, H, W) -> (C, s*H, s*W). s = 1 is the identity.
Tensor subpixel_upsample(const Tensor& features, int s);

/// Zero insertion at stride s followed by a padded 3x3 convolution; weight is (O, C, 3, 3).
Tensor transposed_upsample(const Tensor& features, const Tensor& weight, const Tensor& bias, int s);

void save_checkpoint(const std::filesystem::path& path, const GeneratorParams& params);
/// Throws LoadError when the stored arrays do not match the stored config's layout.
GeneratorParams load_checkpoint(const std::filesystem::path& path);

}  // namespace ftlgan
