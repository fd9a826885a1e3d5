#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace covgen {

using Shape = std::vector<size_t>;

size_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);

// Dense row-major array of 64-bit floats. Rank 1 and 2 cover the whole
// model; scalars are shape {1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor full(Shape shape, double v);
  static Tensor row(std::initializer_list<double> values);

  size_t rank() const { return shape_.size(); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  const Shape& shape() const { return shape_; }

  // rank-2 accessors
  size_t rows() const;
  size_t cols() const;
  double at(size_t r, size_t c) const { return data_[r * cols_ + c]; }
  double& at(size_t r, size_t c) { return data_[r * cols_ + c]; }

  double operator[](size_t i) const { return data_[i]; }
  double& operator[](size_t i) { return data_[i]; }

  const double* data() const { return data_.data(); }
  double* data() { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> data_;
  size_t cols_ = 0;  // cached for rank-2 indexing
};

double dot(const Tensor& a, const Tensor& b);
double l2_norm_squared(const Tensor& a);

}  // namespace covgen
