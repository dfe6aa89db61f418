#include "forcediff/core/array.hpp"

#include <cmath>
#include <sstream>

namespace forcediff {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

void require_shape(const Shape& actual, const Shape& expected, const char* what) {
  if (actual != expected) {
    throw DimensionError(std::string(what) + ": expected shape " + shape_string(expected) +
                         ", got " + shape_string(actual));
  }
}

template <typename T>
Array<T>::Array(Shape shape, T fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

template <typename T>
Array<T>::Array(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    throw DimensionError("array data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string(shape_));
  }
}

template <typename T>
std::size_t Array<T>::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                         shape_string(shape_));
  }
  return shape_[axis];
}

template <typename T>
Array<T> Array<T>::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) {
    throw DimensionError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  return Array(std::move(shape), data_);
}

template <typename T>
void Array<T>::fill(T value) {
  for (auto& v : data_) v = value;
}

template <typename T>
bool Array<T>::all_finite() const {
  // v * 0 is NaN exactly when v is infinite or NaN; the sum stays NaN.
  T acc{0};
  for (T v : data_) acc += v * T{0};
  return acc == T{0};
}

template <typename T>
void Array<T>::require_finite(const char* what) const {
  if (!all_finite()) throw NumericError(std::string("non-finite value produced by ") + what);
}

template <typename T>
double l2_norm(const Array<T>& a) {
  double acc = 0.0;
  for (T v : a.data()) acc += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(acc);
}

template class Array<float>;
template class Array<double>;
template double l2_norm(const Array<float>&);
template double l2_norm(const Array<double>&);

}  // namespace forcediff
