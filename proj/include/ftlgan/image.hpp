#pragma once

#include <filesystem>
#include <string>

#include "ftlgan/tensor.hpp"

namespace ftlgan {

/// RGB image stored planar as a (3, H, W) tensor of values nominally in [0, 1].
struct ImageArray {
  Tensor pixels;
  std::string identity;

  ImageArray() = default;
  ImageArray(int height, int width, double fill = 0.0, std::string id = {})
      : pixels({3, height, width}, fill), identity(std::move(id)) {}
  explicit ImageArray(Tensor p, std::string id = {});

  int height() const { return pixels.dim(1); }
  int width() const { return pixels.dim(2); }
  bool is_square() const { return height() == width(); }
  int resolution() const { return height(); }

  double& at(int c, int y, int x) { return pixels.at(c, y, x); }
  double at(int c, int y, int x) const { return pixels.at(c, y, x); }

  /// Clamps every value to [0, 1]; NaN maps to 0.
  void clip_unit();
};

/// Throws InvalidArgument unless `r` is one of the corpus resolutions 14, 28, 56, 112.
void require_corpus_resolution(int r);

/// 8-bit RGB PNG <-> [0,1] floats via /255 and round(x*255).
ImageArray read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ImageArray& image);

/// Round-trips through the 8-bit encoding without touching disk.
ImageArray quantize_8bit(const ImageArray& image);

}  // namespace ftlgan
