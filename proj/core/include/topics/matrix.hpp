#pragma once

#include <cstddef>
#include <vector>

namespace topics {

// Row-major matrix. Parameters are stored as f32 (Matrix); activations and
// gradients are computed and held in f64 (DMatrix).
template <typename T>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) { return data_[idx(r, c)]; }
  T operator()(int r, int c) const { return data_[idx(r, c)]; }
  T* row(int r) { return data_.data() + idx(r, 0); }
  const T* row(int r) const { return data_.data() + idx(r, 0); }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  template <typename U, typename S>
  void add_scaled(const Mat<U>& o, S scale) {
    for (std::size_t i = 0; i < data_.size(); ++i) {
      data_[i] += static_cast<T>(scale * o.data()[i]);
    }
  }

 private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using Matrix = Mat<float>;
using DMatrix = Mat<double>;

}  // namespace topics
