#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "forcediff/errors.hpp"

namespace forcediff {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array. An empty shape denotes a scalar holding one value.
template <typename T>
class Array {
 public:
  using value_type = T;

  Array() : shape_{}, data_(1, T{0}) {}
  explicit Array(Shape shape, T fill = T{0});
  Array(Shape shape, std::vector<T> data);

  static Array scalar(T value) { return Array(Shape{}, std::vector<T>{value}); }
  static Array from_list(Shape shape, std::initializer_list<T> values) {
    return Array(std::move(shape), std::vector<T>(values));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  const T& at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  T& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  const T& at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  // Same data, new extents; the element count must not change.
  Array reshaped(Shape shape) const;
  void fill(T value);

  template <typename U>
  Array<U> cast() const {
    std::vector<U> out(data_.begin(), data_.end());
    return Array<U>(shape_, std::move(out));
  }

  bool all_finite() const;
  // Throws NumericError naming `what` when any element is NaN or Inf.
  void require_finite(const char* what) const;

  friend bool operator==(const Array& a, const Array& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
};

// Euclidean norm over every element, accumulated in double.
template <typename T>
double l2_norm(const Array<T>& a);

void require_shape(const Shape& actual, const Shape& expected, const char* what);

extern template class Array<float>;
extern template class Array<double>;

}  // namespace forcediff
