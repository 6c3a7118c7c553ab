#include "ftlgan/kernels.hpp"

#include <Eigen/Core>

#include <algorithm>

#include "ftlgan/error.hpp"

namespace ftlgan::kernels {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapConst = Eigen::Map<const RowMatrix>;
using Map = Eigen::Map<RowMatrix>;

struct ConvGeometry {
  int channels, height, width, k, pad, out_h, out_w;
  Eigen::Index rows() const { return static_cast<Eigen::Index>(channels) * k * k; }
  Eigen::Index cols() const { return static_cast<Eigen::Index>(out_h) * out_w; }
};

ConvGeometry geometry(const Tensor& input, const Tensor& weight, int pad) {
  if (input.rank() != 3) throw InvalidArgument("conv2d input must be CxHxW, got " + input.shape_string());
  if (weight.rank() != 4 || weight.dim(2) != weight.dim(3)) {
    throw InvalidArgument("conv2d weight must be OxCxKxK, got " + weight.shape_string());
  }
  if (weight.dim(1) != input.dim(0)) {
    throw InvalidArgument("conv2d channel mismatch: input " + input.shape_string() + ", weight " +
                          weight.shape_string());
  }
  ConvGeometry g{input.dim(0), input.dim(1), input.dim(2), weight.dim(2), pad, 0, 0};
  g.out_h = g.height + 2 * pad - g.k + 1;
  g.out_w = g.width + 2 * pad - g.k + 1;
  if (g.out_h < 1 || g.out_w < 1) throw InvalidArgument("conv2d output would be empty");
  return g;
}

RowMatrix im2col(const Tensor& input, const ConvGeometry& g) {
  RowMatrix col(g.rows(), g.cols());
  const double* src = input.data();
  for (int c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        double* dst = col.row((static_cast<Eigen::Index>(c) * g.k + ky) * g.k + kx).data();
        for (int y = 0; y < g.out_h; ++y) {
          const int sy = y + ky - g.pad;
          double* out_row = dst + static_cast<std::size_t>(y) * g.out_w;
          if (sy < 0 || sy >= g.height) {
            std::fill(out_row, out_row + g.out_w, 0.0);
            continue;
          }
          const double* in_row = src + (static_cast<std::size_t>(c) * g.height + sy) * g.width;
          for (int x = 0; x < g.out_w; ++x) {
            const int sx = x + kx - g.pad;
            out_row[x] = (sx < 0 || sx >= g.width) ? 0.0 : in_row[sx];
          }
        }
      }
    }
  }
  return col;
}

void col2im(const RowMatrix& col, const ConvGeometry& g, Tensor& out) {
  double* dst = out.data();
  for (int c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < g.k; ++ky) {
      for (int kx = 0; kx < g.k; ++kx) {
        const double* src = col.row((static_cast<Eigen::Index>(c) * g.k + ky) * g.k + kx).data();
        for (int y = 0; y < g.out_h; ++y) {
          const int sy = y + ky - g.pad;
          if (sy < 0 || sy >= g.height) continue;
          double* in_row = dst + (static_cast<std::size_t>(c) * g.height + sy) * g.width;
          const double* col_row = src + static_cast<std::size_t>(y) * g.out_w;
          for (int x = 0; x < g.out_w; ++x) {
            const int sx = x + kx - g.pad;
            if (sx >= 0 && sx < g.width) in_row[sx] += col_row[x];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int pad) {
  const ConvGeometry g = geometry(input, weight, pad);
  const int out_c = weight.dim(0);
  Tensor out({out_c, g.out_h, g.out_w});
  const RowMatrix col = im2col(input, g);
  MapConst w(weight.data(), out_c, g.rows());
  Map o(out.data(), out_c, g.cols());
  o.noalias() = w * col;
  if (!bias.empty()) {
    if (bias.size() != static_cast<std::size_t>(out_c)) throw InvalidArgument("conv2d bias size mismatch");
    for (int oc = 0; oc < out_c; ++oc) o.row(oc).array() += bias[static_cast<std::size_t>(oc)];
  }
  return out;
}

void conv2d_backward(const Tensor& input, const Tensor& weight, int pad, const Tensor& grad_out,
                     Tensor* grad_input, Tensor* grad_weight, Tensor* grad_bias) {
  const ConvGeometry g = geometry(input, weight, pad);
  const int out_c = weight.dim(0);
  MapConst go(grad_out.data(), out_c, g.cols());
  if (grad_weight) {
    const RowMatrix col = im2col(input, g);
    if (grad_weight->empty()) *grad_weight = Tensor(weight.shape());
    Map gw(grad_weight->data(), out_c, g.rows());
    gw.noalias() += go * col.transpose();
  }
  if (grad_bias) {
    if (grad_bias->empty()) *grad_bias = Tensor({out_c});
    // Plain loop: Eigen's vectorised sum peels by pointer alignment, which would make the
    // result depend on where the buffer happens to live.
    for (int oc = 0; oc < out_c; ++oc) {
      double s = 0.0;
      const double* row = go.row(oc).data();
      for (Eigen::Index i = 0; i < go.cols(); ++i) s += row[i];
      (*grad_bias)[static_cast<std::size_t>(oc)] += s;
    }
  }
  if (grad_input) {
    MapConst w(weight.data(), out_c, g.rows());
    const RowMatrix gcol = w.transpose() * go;
    if (grad_input->empty()) *grad_input = Tensor(input.shape());
    col2im(gcol, g, *grad_input);
  }
}

Tensor pixel_shuffle(const Tensor& input, int s) {
  if (s < 1) throw InvalidArgument("pixel shuffle factor must be >= 1");
  if (input.rank() != 3) throw InvalidArgument("pixel shuffle expects CxHxW");
  const int cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (cin % (s * s) != 0) {
    throw InvalidArgument("pixel shuffle: " + std::to_string(cin) + " channels not divisible by s^2 = " +
                          std::to_string(s * s));
  }
  const int c = cin / (s * s);
  Tensor out({c, h * s, w * s});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h * s; ++y)
      for (int x = 0; x < w * s; ++x) out.at(ch, y, x) = input.at(ch * s * s + (y % s) * s + (x % s), y / s, x / s);
  return out;
}

Tensor pixel_unshuffle(const Tensor& input, int s) {
  if (s < 1) throw InvalidArgument("pixel unshuffle factor must be >= 1");
  if (input.rank() != 3 || input.dim(1) % s != 0 || input.dim(2) % s != 0) {
    throw InvalidArgument("pixel unshuffle: spatial dims not divisible by s");
  }
  const int c = input.dim(0), h = input.dim(1) / s, w = input.dim(2) / s;
  Tensor out({c * s * s, h, w});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h * s; ++y)
      for (int x = 0; x < w * s; ++x) out.at(ch * s * s + (y % s) * s + (x % s), y / s, x / s) = input.at(ch, y, x);
  return out;
}

Tensor zero_insert(const Tensor& input, int s) {
  if (s < 1) throw InvalidArgument("zero insertion stride must be >= 1");
  const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
  Tensor out({c, h * s, w * s});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(ch, y * s, x * s) = input.at(ch, y, x);
  return out;
}

Tensor zero_insert_adjoint(const Tensor& grad, int s) {
  const int c = grad.dim(0), h = grad.dim(1) / s, w = grad.dim(2) / s;
  Tensor out({c, h, w});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(ch, y, x) = grad.at(ch, y * s, x * s);
  return out;
}

Tensor avg_pool(const Tensor& input, int k) {
  if (input.rank() != 3 || input.dim(1) % k != 0 || input.dim(2) % k != 0) {
    throw InvalidArgument("avg_pool: " + input.shape_string() + " not divisible by " + std::to_string(k));
  }
  const int c = input.dim(0), h = input.dim(1) / k, w = input.dim(2) / k;
  Tensor out({c, h, w});
  const double inv = 1.0 / (k * k);
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h * k; ++y)
      for (int x = 0; x < w * k; ++x) out.at(ch, y / k, x / k) += input.at(ch, y, x) * inv;
  return out;
}

Tensor avg_pool_adjoint(const Tensor& grad, int k) {
  const int c = grad.dim(0), h = grad.dim(1) * k, w = grad.dim(2) * k;
  Tensor out({c, h, w});
  const double inv = 1.0 / (k * k);
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(ch, y, x) = grad.at(ch, y / k, x / k) * inv;
  return out;
}

}  // namespace ftlgan::kernels
