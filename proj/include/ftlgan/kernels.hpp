#pragma once

#include "ftlgan/tensor.hpp"

// Plain tensor kernels shared by the autodiff ops and the public layer functions.
// All feature maps are (C, H, W).
namespace ftlgan::kernels {

/// Stride-1 2-D convolution with square kernel and symmetric zero padding.
/// `weight` is (O, C, K, K); `bias` is (O) or empty.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int pad);

/// Gradients of conv2d. Either output pointer may be null to skip that term.
void conv2d_backward(const Tensor& input, const Tensor& weight, int pad, const Tensor& grad_out,
                     Tensor* grad_input, Tensor* grad_weight, Tensor* grad_bias);

/// (C*s*s, H, W) -> (C, H*s, W*s); out[c, y, x] = in[c*s*s + (y%s)*s + x%s, y/s, x/s].
Tensor pixel_shuffle(const Tensor& input, int s);
/// Exact inverse of pixel_shuffle.
Tensor pixel_unshuffle(const Tensor& input, int s);

/// (C, H, W) -> (C, s*H, s*W) with input samples at (s*y, s*x) and zeros elsewhere.
Tensor zero_insert(const Tensor& input, int s);
/// Adjoint of zero_insert: picks the (s*y, s*x) samples.
Tensor zero_insert_adjoint(const Tensor& grad, int s);

/// Non-overlapping k x k mean pooling; H and W must be divisible by k.
Tensor avg_pool(const Tensor& input, int k);
Tensor avg_pool_adjoint(const Tensor& grad, int k);

}  // namespace ftlgan::kernels
