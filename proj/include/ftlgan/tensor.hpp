#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ftlgan {

/// Dense row-major array of doubles with a dynamic shape.
///
/// Feature maps and images are stored channel-major as (C, H, W); convolution
/// weights as (O, I, K, K); linear weights as (O, I).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0);
  Tensor(std::vector<int> shape, std::vector<double> values);

  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape_); }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// (C, H, W) element access.
  double& at(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }
  double at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }

  void fill(double v);
  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(double s);

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  double sum() const;
  double squared_norm() const;
  bool all_finite() const;

  Tensor reshaped(std::vector<int> shape) const;

  /// "3x112x112"
  std::string shape_string() const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

std::size_t shape_volume(const std::vector<int>& shape);

/// Throws InvalidArgument naming `what` when shapes differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

}  // namespace ftlgan
