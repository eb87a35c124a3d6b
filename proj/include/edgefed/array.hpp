#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <vector>

namespace edgefed {

// Dense row-major 2-d array.
template <typename T>
class Array2 {
public:
  Array2() = default;
  Array2(std::size_t rows, std::size_t cols, const T& init = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, init) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t i, std::size_t j) {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }
  const T& operator()(std::size_t i, std::size_t j) const {
    assert(i < rows_ && j < cols_);
    return data_[i * cols_ + j];
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Array2&, const Array2&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// Dense row-major 3-d array.
template <typename T>
class Array3 {
public:
  Array3() = default;
  Array3(std::size_t n0, std::size_t n1, std::size_t n2, const T& init = T{})
      : n0_(n0), n1_(n1), n2_(n2), data_(n0 * n1 * n2, init) {}

  std::size_t extent0() const noexcept { return n0_; }
  std::size_t extent1() const noexcept { return n1_; }
  std::size_t extent2() const noexcept { return n2_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t i, std::size_t j, std::size_t k) {
    assert(i < n0_ && j < n1_ && k < n2_);
    return data_[(i * n1_ + j) * n2_ + k];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    assert(i < n0_ && j < n1_ && k < n2_);
    return data_[(i * n1_ + j) * n2_ + k];
  }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Array3&, const Array3&) = default;

private:
  std::size_t n0_ = 0;
  std::size_t n1_ = 0;
  std::size_t n2_ = 0;
  std::vector<T> data_;
};

} // namespace edgefed
