#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace egoav {

// Dense row-major tensor of rank 1..4. The whole pipeline runs in float;
// tests instantiate the same code with double for 64-bit oracles.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape, T fill = T(0)) : shape_(std::move(shape)) {
    for (int d : shape_) {
      if (d <= 0) throw std::invalid_argument("Tensor: non-positive dimension");
    }
    data_.assign(numel_of(shape_), fill);
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int> shape, T value) { return Tensor(std::move(shape), value); }

  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(int i, int j) { return data_[static_cast<std::size_t>(i) * shape_[1] + j]; }
  const T& at(int i, int j) const { return data_[static_cast<std::size_t>(i) * shape_[1] + j]; }

  T& at(int i, int j, int k) {
    return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }
  const T& at(int i, int j, int k) const {
    return data_[(static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }

  T& at(int i, int j, int k, int l) {
    return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }
  const T& at(int i, int j, int k, int l) const {
    return data_[((static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  Tensor reshaped(std::vector<int> new_shape) const {
    if (numel_of(new_shape) != data_.size())
      throw std::invalid_argument("Tensor::reshaped: element count mismatch");
    Tensor out;
    out.shape_ = std::move(new_shape);
    out.data_ = data_;
    return out;
  }

  bool all_finite() const {
    for (T v : data_) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  T min() const { return *std::min_element(data_.begin(), data_.end()); }
  T max() const { return *std::max_element(data_.begin(), data_.end()); }
  T sum() const { return std::accumulate(data_.begin(), data_.end(), T(0)); }

  T max_abs() const {
    T m = T(0);
    for (T v : data_) m = std::max(m, static_cast<T>(std::abs(static_cast<double>(v))));
    return m;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out = Tensor<U>(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  std::string shape_str() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) os << ',';
      os << shape_[i];
    }
    os << ')';
    return os.str();
  }

  static std::size_t numel_of(const std::vector<int>& shape) {
    std::size_t n = shape.empty() ? 0 : 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }

 private:
  std::vector<int> shape_;
  std::vector<T> data_;
};

template <typename T>
void check_shape(const Tensor<T>& t, const std::vector<int>& expect, const char* what) {
  if (t.shape() != expect) {
    std::ostringstream os;
    os << what << ": expected shape (";
    for (std::size_t i = 0; i < expect.size(); ++i) os << (i ? "," : "") << expect[i];
    os << "), got " << t.shape_str();
    throw std::invalid_argument(os.str());
  }
}

}  // namespace egoav
