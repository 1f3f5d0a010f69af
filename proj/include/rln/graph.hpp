// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <concepts>
#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rln/tensor.hpp"

namespace rln {

template <std::floating_point T>
class Graph;

/// Named trainable tensors and their gradient accumulators, in insertion order.
template <std::floating_point T>
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
  };

  Tensor<T>& add(const std::string& name, Tensor<T> init);

  bool contains(const std::string& name) const { return index_.contains(name); }
  std::size_t index_of(const std::string& name) const;

  Tensor<T>& value(const std::string& name) { return entries_[index_of(name)].value; }
  const Tensor<T>& value(const std::string& name) const {
    return entries_[index_of(name)].value;
  }
  Tensor<T>& grad(const std::string& name) { return entries_[index_of(name)].grad; }
  const Tensor<T>& grad(const std::string& name) const {
    return entries_[index_of(name)].grad;
  }

  std::vector<Entry>& entries() { return entries_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  void zero_grads();

  template <std::floating_point U>
  ParameterStore<U> cast() const {
    ParameterStore<U> out;
    for (const auto& e : entries_) out.add(e.name, e.value.template cast<U>());
    return out;
  }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
template <std::floating_point T>
class Var {
 public:
  Var() = default;
  Var(Graph<T>* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph<T>& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

  const Tensor<T>& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  Graph<T>* graph_ = nullptr;
  std::size_t id_ = 0;
};

/// Tape of operations for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so the tape is topologically sorted
/// by construction. Building a graph over a ParameterStore zeroes its gradient
/// accumulators; one backward() per graph is allowed.
template <std::floating_point T>
class Graph {
 public:
  /// Propagates the gradient of node `self` into its parents.
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;

  explicit Graph(ParameterStore<T>* params = nullptr);

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<T> constant(Tensor<T> value);

  /// Leaf bound to a named parameter. Repeated calls return the same node.
  Var<T> parameter(const std::string& name);

  /// Appends an operation node. Throws NumericError on non-finite output.
  Var<T> emit(std::string_view op, Tensor<T> value,
              std::vector<std::size_t> parents, BackwardFn backward);

  const Tensor<T>& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor<T>& value(Var<T> v) const { return nodes_[v.id()].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

  /// Gradient buffer of a node, allocated as zeros on first access.
  Tensor<T>& grad(std::size_t id);
  bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }

  /// Back-propagates from a scalar loss and adds parameter gradients into the
  /// bound ParameterStore.
  void backward(Var<T> loss);

  std::size_t size() const { return nodes_.size(); }
  ParameterStore<T>* parameters() const { return params_; }

 private:
  struct Node {
    std::string_view op;
    Tensor<T> value;
    Tensor<T> grad;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    bool needs_grad = false;
    std::ptrdiff_t param_index = -1;
  };

  ParameterStore<T>* params_;
  std::deque<Node> nodes_;  // stable element addresses across growth
  std::unordered_map<std::size_t, std::size_t> param_nodes_;
  bool backward_done_ = false;
};

template <std::floating_point T>
const Tensor<T>& Var<T>::value() const {
  return graph_->value(id_);
}

// Differentiable operations. Binary elementwise ops require equal shapes,
// except that an operand of shape [1] broadcasts as a scalar.

template <std::floating_point T> Var<T> matmul(Var<T> a, Var<T> b);
/// a · bᵀ
template <std::floating_point T> Var<T> matmul_transposed(Var<T> a, Var<T> b);

template <std::floating_point T> Var<T> add(Var<T> a, Var<T> b);
template <std::floating_point T> Var<T> sub(Var<T> a, Var<T> b);
template <std::floating_point T> Var<T> mul(Var<T> a, Var<T> b);
template <std::floating_point T> Var<T> tanh(Var<T> a);
template <std::floating_point T> Var<T> sigmoid(Var<T> a);
template <std::floating_point T> Var<T> square(Var<T> a);
template <std::floating_point T> Var<T> scale(Var<T> a, T factor);
/// 1 - a
template <std::floating_point T> Var<T> one_minus(Var<T> a);

template <std::floating_point T> Var<T> softmax_rows(Var<T> x);

/// x[r][c] + row[c] for every row r.
template <std::floating_point T> Var<T> add_row(Var<T> x, Var<T> row);
template <std::floating_point T> Var<T> sub_row(Var<T> x, Var<T> row);
template <std::floating_point T> Var<T> div_row(Var<T> x, Var<T> row);

template <std::floating_point T> Var<T> sum(Var<T> a);
template <std::floating_point T> Var<T> mean(Var<T> a);

/// Per-column mean of a matrix, shape [cols].
template <std::floating_point T> Var<T> col_mean(Var<T> x);
/// Per-column population standard deviation around `mu`, floored at `floor`.
template <std::floating_point T> Var<T> col_std(Var<T> x, Var<T> mu, T floor);

/// Element `index` of a as a shape-[1] scalar.
template <std::floating_point T> Var<T> pick(Var<T> a, std::size_t index);

/// Rows [begin, begin + count) of a matrix.
template <std::floating_point T>
Var<T> slice_rows(Var<T> a, std::size_t begin, std::size_t count);

/// Stacks selected rows of several equally wide matrices: row i of the result
/// is row `rows[i].second` of `sources[rows[i].first]`.
template <std::floating_point T>
Var<T> gather_rows(const std::vector<Var<T>>& sources,
                   const std::vector<std::pair<std::size_t, std::size_t>>& rows);

template <std::floating_point T> Var<T> operator+(Var<T> a, Var<T> b) { return add(a, b); }
template <std::floating_point T> Var<T> operator-(Var<T> a, Var<T> b) { return sub(a, b); }
template <std::floating_point T> Var<T> operator*(Var<T> a, Var<T> b) { return mul(a, b); }

// Plain kernels shared with non-graph code.
namespace kernel {

/// c = a · b (+ c when accumulate)
template <std::floating_point T>
void gemm(const Tensor<T>& a, bool transpose_a, const Tensor<T>& b,
          bool transpose_b, Tensor<T>& c, bool accumulate);

template <std::floating_point T>
void softmax_row(std::span<const T> in, std::span<T> out);

}  // namespace kernel

}  // namespace rln
