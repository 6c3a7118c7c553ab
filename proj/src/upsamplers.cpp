#include "ftlgan/upsamplers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ftlgan/error.hpp"

namespace ftlgan {

namespace {

double cubic_kernel(double x, double a) {
  x = std::abs(x);
  if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double lanczos_kernel(double x, int taps) {
  if (std::abs(x) >= taps) return 0.0;
  return sinc(x) * sinc(x / taps);
}

double kernel_support(const ResampleMethod& m) {
  switch (m.kind) {
    case ResampleKind::bilinear: return 1.0;
    case ResampleKind::bicubic: return 2.0;
    case ResampleKind::lanczos: return static_cast<double>(m.lanczos_taps);
    default: return 0.0;
  }
}

double kernel_eval(const ResampleMethod& m, double x) {
  switch (m.kind) {
    case ResampleKind::bilinear: return std::max(0.0, 1.0 - std::abs(x));
    case ResampleKind::bicubic: return cubic_kernel(x, m.bicubic_a);
    case ResampleKind::lanczos: return lanczos_kernel(x, m.lanczos_taps);
    default: return 0.0;
  }
}

void add_tap(std::vector<std::pair<int, double>>& row, int index, double w) {
  for (auto& [j, v] : row) {
    if (j == index) {
      v += w;
      return;
    }
  }
  row.emplace_back(index, w);
}

// Applies `w` along one axis of a (C, H, W) tensor. `along_width` picks the axis.
Tensor apply_axis(const Tensor& in, const AxisWeights& w, bool along_width) {
  const int c = in.dim(0), h = in.dim(1), wd = in.dim(2);
  Tensor out({c, along_width ? h : w.out_size, along_width ? w.out_size : wd});
  for (int ch = 0; ch < c; ++ch) {
    if (along_width) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w.out_size; ++x) {
          double acc = 0.0;
          for (const auto& [j, v] : w.taps[static_cast<std::size_t>(x)]) acc += v * in.at(ch, y, j);
          out.at(ch, y, x) = acc;
        }
      }
    } else {
      for (int y = 0; y < w.out_size; ++y) {
        for (int x = 0; x < wd; ++x) out.at(ch, y, x) = 0.0;
        for (const auto& [j, v] : w.taps[static_cast<std::size_t>(y)]) {
          for (int x = 0; x < wd; ++x) out.at(ch, y, x) += v * in.at(ch, j, x);
        }
      }
    }
  }
  return out;
}

// Transpose of apply_axis.
Tensor apply_axis_adjoint(const Tensor& grad, const AxisWeights& w, bool along_width) {
  const int c = grad.dim(0), h = grad.dim(1), wd = grad.dim(2);
  Tensor out({c, along_width ? h : w.in_size, along_width ? w.in_size : wd});
  for (int ch = 0; ch < c; ++ch) {
    if (along_width) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w.out_size; ++x) {
          const double g = grad.at(ch, y, x);
          for (const auto& [j, v] : w.taps[static_cast<std::size_t>(x)]) out.at(ch, y, j) += v * g;
        }
      }
    } else {
      for (int y = 0; y < w.out_size; ++y) {
        for (const auto& [j, v] : w.taps[static_cast<std::size_t>(y)]) {
          for (int x = 0; x < wd; ++x) out.at(ch, j, x) += v * grad.at(ch, y, x);
        }
      }
    }
  }
  return out;
}

void require_positive_size(int h, int w) {
  if (h < 1 || w < 1) {
    throw InvalidArgument("resize target must be positive, got " + std::to_string(h) + "x" + std::to_string(w));
  }
}

}  // namespace

const std::vector<std::string>& resample_method_names() {
  static const std::vector<std::string> names{"nearest", "bilinear", "bicubic", "area", "lanczos"};
  return names;
}

ResampleMethod ResampleMethod::parse(std::string_view name) {
  if (name == "nearest") return nearest();
  if (name == "bilinear") return bilinear();
  if (name == "bicubic") return bicubic();
  if (name == "area") return area();
  if (name == "lanczos") return lanczos();
  std::string options;
  for (const auto& n : resample_method_names()) options += (options.empty() ? "" : ", ") + n;
  throw InvalidArgument("unknown resample method '" + std::string(name) + "' (expected one of: " + options + ")");
}

std::string ResampleMethod::name() const {
  switch (kind) {
    case ResampleKind::nearest: return "nearest";
    case ResampleKind::bilinear: return "bilinear";
    case ResampleKind::bicubic: return "bicubic";
    case ResampleKind::area: return "area";
    case ResampleKind::lanczos: return "lanczos";
  }
  return "unknown";
}

AxisWeights axis_weights(int in_size, int out_size, const ResampleMethod& method) {
  if (in_size < 1 || out_size < 1) throw InvalidArgument("axis sizes must be positive");
  AxisWeights w;
  w.in_size = in_size;
  w.out_size = out_size;
  w.taps.resize(static_cast<std::size_t>(out_size));
  const double scale = static_cast<double>(in_size) / out_size;
  auto clamp_index = [&](long j) { return static_cast<int>(std::clamp<long>(j, 0, in_size - 1)); };

  for (int i = 0; i < out_size; ++i) {
    auto& row = w.taps[static_cast<std::size_t>(i)];
    switch (method.kind) {
      case ResampleKind::nearest: {
        row.emplace_back(clamp_index(static_cast<long>(std::floor((i + 0.5) * scale))), 1.0);
        break;
      }
      case ResampleKind::area: {
        const double lo = i * scale;
        const double hi = (i + 1) * scale;
        for (long j = static_cast<long>(std::floor(lo)); j < hi; ++j) {
          const double overlap = std::min<double>(hi, j + 1) - std::max<double>(lo, j);
          if (overlap > 0.0) add_tap(row, clamp_index(j), overlap / scale);
        }
        break;
      }
      default: {
        const double stretch = std::max(1.0, scale);
        const double support = kernel_support(method) * stretch;
        const double center = (i + 0.5) * scale - 0.5;
        const long first = static_cast<long>(std::floor(center - support));
        const long last = static_cast<long>(std::ceil(center + support));
        double total = 0.0;
        std::vector<std::pair<long, double>> raw;
        for (long j = first; j <= last; ++j) {
          const double v = kernel_eval(method, (static_cast<double>(j) - center) / stretch);
          if (v != 0.0) {
            raw.emplace_back(j, v);
            total += v;
          }
        }
        for (const auto& [j, v] : raw) add_tap(row, clamp_index(j), v / total);
        break;
      }
    }
  }
  return w;
}

Tensor resize_planes(const Tensor& planes, int out_h, int out_w, const ResampleMethod& method) {
  require_positive_size(out_h, out_w);
  if (planes.rank() != 3) throw InvalidArgument("resize expects a CxHxW tensor, got " + planes.shape_string());
  const Tensor wide = apply_axis(planes, axis_weights(planes.dim(2), out_w, method), true);
  return apply_axis(wide, axis_weights(planes.dim(1), out_h, method), false);
}

Tensor resize_planes_adjoint(const Tensor& grad, int in_h, int in_w, const ResampleMethod& method) {
  if (grad.rank() != 3) throw InvalidArgument("resize adjoint expects a CxHxW tensor");
  const Tensor tall = apply_axis_adjoint(grad, axis_weights(in_h, grad.dim(1), method), false);
  return apply_axis_adjoint(tall, axis_weights(in_w, grad.dim(2), method), true);
}

ImageArray resize(const ImageArray& image, int out_h, int out_w, const ResampleMethod& method) {
  require_positive_size(out_h, out_w);
  ImageArray out(resize_planes(image.pixels, out_h, out_w, method), image.identity);
  out.clip_unit();
  return out;
}

ImageArray upsample_chain(const ImageArray& image, int target, const ResampleMethod& method) {
  if (target != 112) throw InvalidArgument("upsample target must be 112, got " + std::to_string(target));
  const int src = image.height();
  if (!image.is_square() || (src != 14 && src != 28 && src != 56)) {
    throw InvalidArgument("upsample source must be square 14, 28 or 56, got " + image.pixels.shape_string());
  }
  return resize(image, target, target, method);
}

}  // namespace ftlgan
