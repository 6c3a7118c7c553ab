#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ftlgan/image.hpp"
#include "ftlgan/tensor.hpp"

namespace ftlgan {

enum class ResampleKind { nearest, bilinear, bicubic, area, lanczos };

struct ResampleMethod {
  ResampleKind kind = ResampleKind::bicubic;
  double bicubic_a = -0.5;
  int lanczos_taps = 3;

  static ResampleMethod nearest() { return {ResampleKind::nearest}; }
  static ResampleMethod bilinear() { return {ResampleKind::bilinear}; }
  static ResampleMethod bicubic() { return {ResampleKind::bicubic}; }
  static ResampleMethod area() { return {ResampleKind::area}; }
  static ResampleMethod lanczos() { return {ResampleKind::lanczos}; }

  /// Accepts "nearest", "bilinear", "bicubic", "area", "lanczos"; anything else throws
  /// InvalidArgument listing the options.
  static ResampleMethod parse(std::string_view name);
  std::string name() const;
};

/// Names accepted by ResampleMethod::parse, in canonical order.
const std::vector<std::string>& resample_method_names();

/// Sparse 1-D resampling matrix: out[i] = sum over taps[i] of weight * in[index].
///
/// Sample centres follow the half-pixel convention (centre of output pixel i sits at
/// source coordinate (i + 0.5) * in/out - 0.5). When shrinking, the bilinear, bicubic and
/// Lanczos kernels are stretched by in/out so the filter also low-passes. Out-of-range
/// taps are clamped to the edge pixel and every row of weights sums to one.
struct AxisWeights {
  int in_size = 0;
  int out_size = 0;
  std::vector<std::vector<std::pair<int, double>>> taps;
};

AxisWeights axis_weights(int in_size, int out_size, const ResampleMethod& method);

/// Resamples every plane of a (C, H, W) tensor. No clipping; linear in `planes`.
Tensor resize_planes(const Tensor& planes, int out_h, int out_w, const ResampleMethod& method);

/// Transpose of resize_planes: maps a gradient on the output grid back to the input grid.
Tensor resize_planes_adjoint(const Tensor& grad, int in_h, int in_w, const ResampleMethod& method);

/// Image resize with output clipped to [0, 1]. Throws InvalidArgument on non-positive sizes.
ImageArray resize(const ImageArray& image, int out_h, int out_w, const ResampleMethod& method);

/// One resize straight to target x target; target must be 112 and the source 14, 28 or 56.
ImageArray upsample_chain(const ImageArray& image, int target, const ResampleMethod& method);

}  // namespace ftlgan
