#pragma once

// Dense row-major 2-D tensor. Matrix products are delegated to Eigen maps
// (single-threaded); everything else is plain loops. Scalars are modeled as
// 1x1 tensors throughout the autodiff layer.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gantab/error.hpp"

namespace gantab {

template <class T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw Error("negative tensor shape");
  }

  static Tensor zeros(int r, int c) { return Tensor(r, c, T(0)); }
  static Tensor ones(int r, int c) { return Tensor(r, c, T(1)); }
  static Tensor scalar(T v) {
    Tensor t(1, 1);
    t.data_[0] = v;
    return t;
  }
  static Tensor from(std::vector<T> values, int r, int c) {
    if (values.size() != static_cast<std::size_t>(r) * c)
      throw Error("tensor shape does not match value count");
    Tensor t;
    t.rows_ = r;
    t.cols_ = c;
    t.data_ = std::move(values);
    return t;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  T operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

  T item() const {
    if (size() != 1) throw Error("item() on non-scalar tensor");
    return data_[0];
  }

  bool all_finite() const {
    for (T v : data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <class U>
  Tensor<U> cast() const {
    Tensor<U> out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i)
      out.raw()[i] = static_cast<U>(data_[i]);
    return out;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<T> data_;
};

template <class T>
using EigenMap =
    Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <class T>
using EigenConstMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

template <class T>
inline Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.cols() != b.rows()) throw Error("matmul shape mismatch");
  Tensor<T> out(a.rows(), b.cols());
  EigenConstMap<T> ma(a.data(), a.rows(), a.cols());
  EigenConstMap<T> mb(b.data(), b.rows(), b.cols());
  EigenMap<T> mo(out.data(), out.rows(), out.cols());
  mo.noalias() = ma * mb;
  return out;
}

template <class T>
inline Tensor<T> transpose(const Tensor<T>& a) {
  Tensor<T> out(a.cols(), a.rows());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
  return out;
}

}  // namespace gantab
