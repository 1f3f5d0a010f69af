// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <concepts>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rln/errors.hpp"

namespace rln {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

/// Dense row-major array. Rank 1 tensors behave as a single row when a
/// matrix view is needed.
template <std::floating_point T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(Shape shape, T fill = T{0})
      : shape_(std::move(shape)), values_(shape_size(shape_), fill) {}

  Tensor(Shape shape, std::vector<T> values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    if (values_.size() != shape_size(shape_)) {
      throw DimensionError("tensor shape " + shape_string(shape_) + " needs " +
                           std::to_string(shape_size(shape_)) +
                           " values, got " + std::to_string(values_.size()));
    }
  }

  static Tensor scalar(T v) { return Tensor(Shape{1}, std::vector<T>{v}); }

  static Tensor matrix(std::initializer_list<std::initializer_list<T>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    std::vector<T> v;
    v.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) throw DimensionError("ragged matrix literal");
      v.insert(v.end(), row.begin(), row.end());
    }
    return Tensor(Shape{r, c}, std::move(v));
  }

  static Tensor vector(std::initializer_list<T> v) {
    return Tensor(Shape{v.size()}, std::vector<T>(v));
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  /// Matrix view: rank-1 tensors are one row.
  std::size_t rows() const {
    if (shape_.size() == 2) return shape_[0];
    return shape_.empty() ? 0 : 1;
  }
  std::size_t cols() const {
    if (shape_.size() == 2) return shape_[1];
    return shape_.empty() ? 0 : shape_[0];
  }

  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }
  std::vector<T>& buffer() { return values_; }
  const std::vector<T>& buffer() const { return values_; }

  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }
  T& operator()(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols() + c];
  }

  std::span<T> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
  std::span<const T> row(std::size_t r) const {
    return {values_.data() + r * cols(), cols()};
  }

  void fill(T v) { std::fill(values_.begin(), values_.end(), v); }

  Tensor reshaped(Shape shape) const { return Tensor(std::move(shape), values_); }

  template <std::floating_point U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, std::vector<U>(values_.begin(), values_.end()));
  }

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<T> values_;
};

}  // namespace rln
