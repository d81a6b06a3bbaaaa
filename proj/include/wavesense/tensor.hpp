/* Copyright 2026 The WaveSense Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace wavesense {

// Dense row-major 2-D array. Weight matrices are [out x in]; time sequences
// are stored time-major as [bins x width] so one bin is contiguous.
template <typename T>
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  const T& operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool operator==(const Tensor2&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

namespace detail {

// y = W x, accumulated in column order. Every forward path (tape, streaming
// stepper) goes through this routine so their rounding is identical.
template <typename Real, typename Input>
void matvec(const Tensor2<Real>& w, std::span<const Input> x,
            std::span<Real> y) {
  assert(x.size() == w.cols() && y.size() == w.rows());
  // Spike inputs are sparse; zero entries contribute nothing to the sum.
  thread_local std::vector<std::size_t> active;
  active.clear();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (static_cast<Real>(x[i]) != Real{0}) active.push_back(i);
  }
  for (std::size_t o = 0; o < w.rows(); ++o) {
    const auto wrow = w.row(o);
    Real acc{0};
    for (std::size_t i : active) acc += wrow[i] * static_cast<Real>(x[i]);
    y[o] = acc;
  }
}

}  // namespace detail

}  // namespace wavesense
