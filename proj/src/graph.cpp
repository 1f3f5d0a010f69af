// Copyright 2026 The RLN Authors
// SPDX-License-Identifier: Apache-2.0

#include "rln/graph.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rln {

// ---------------------------------------------------------------------------
// ParameterStore

template <std::floating_point T>
Tensor<T>& ParameterStore<T>::add(const std::string& name, Tensor<T> init) {
  if (index_.contains(name)) {
    throw std::invalid_argument("duplicate parameter '" + name + "'");
  }
  index_.emplace(name, entries_.size());
  Tensor<T> grad(init.shape());
  entries_.push_back({name, std::move(init), std::move(grad)});
  return entries_.back().value;
}

template <std::floating_point T>
std::size_t ParameterStore<T>::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter '" + name + "'");
  return it->second;
}

template <std::floating_point T>
std::size_t ParameterStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

template <std::floating_point T>
void ParameterStore<T>::zero_grads() {
  for (auto& e : entries_) {
    if (e.grad.shape() != e.value.shape()) e.grad = Tensor<T>(e.value.shape());
    e.grad.fill(T{0});
  }
}

// ---------------------------------------------------------------------------
// Graph

template <std::floating_point T>
Graph<T>::Graph(ParameterStore<T>* params) : params_(params) {
  if (params_) params_->zero_grads();
}

template <std::floating_point T>
Var<T> Graph<T>::constant(Tensor<T> value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var<T>(this, nodes_.size() - 1);
}

template <std::floating_point T>
Var<T> Graph<T>::parameter(const std::string& name) {
  if (!params_) throw std::logic_error("graph has no parameter store");
  const std::size_t index = params_->index_of(name);
  if (auto it = param_nodes_.find(index); it != param_nodes_.end()) {
    return Var<T>(this, it->second);
  }
  Node n;
  n.op = "parameter";
  n.value = params_->entries()[index].value;
  n.needs_grad = true;
  n.param_index = static_cast<std::ptrdiff_t>(index);
  nodes_.push_back(std::move(n));
  param_nodes_.emplace(index, nodes_.size() - 1);
  return Var<T>(this, nodes_.size() - 1);
}

template <std::floating_point T>
Var<T> Graph<T>::emit(std::string_view op, Tensor<T> value,
                      std::vector<std::size_t> parents, BackwardFn backward) {
  for (T v : value.values()) {
    if (!std::isfinite(v)) {
      throw NumericError("non-finite value produced by " + std::string(op));
    }
  }
  Node n;
  n.op = op;
  n.value = std::move(value);
  n.needs_grad = std::any_of(parents.begin(), parents.end(),
                             [this](std::size_t p) { return nodes_[p].needs_grad; });
  if (n.needs_grad) n.backward = std::move(backward);
  n.parents = std::move(parents);
  nodes_.push_back(std::move(n));
  return Var<T>(this, nodes_.size() - 1);
}

template <std::floating_point T>
Tensor<T>& Graph<T>::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor<T>(n.value.shape());
  return n.grad;
}

template <std::floating_point T>
void Graph<T>::backward(Var<T> loss) {
  if (loss.valid() && &loss.graph() != this) {
    throw std::invalid_argument("loss belongs to another graph");
  }
  if (nodes_[loss.id()].value.size() != 1) {
    throw DimensionError("backward needs a scalar loss, got shape " +
                         shape_string(nodes_[loss.id()].value.shape()));
  }
  if (backward_done_) {
    throw std::logic_error("backward already ran on this graph");
  }
  backward_done_ = true;
  grad(loss.id()).fill(T{1});
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, i);
  }
  if (!params_) return;
  for (const auto& [index, node] : param_nodes_) {
    const Node& n = nodes_[node];
    if (n.grad.empty()) continue;
    auto& acc = params_->entries()[index].grad;
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += n.grad[k];
  }
}

// ---------------------------------------------------------------------------
// Kernels

namespace kernel {

template <std::floating_point T>
void gemm(const Tensor<T>& a, bool transpose_a, const Tensor<T>& b,
          bool transpose_b, Tensor<T>& c, bool accumulate) {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Map = Eigen::Map<Mat>;
  using CMap = Eigen::Map<const Mat>;
  CMap ma(a.data(), static_cast<Eigen::Index>(a.rows()), static_cast<Eigen::Index>(a.cols()));
  CMap mb(b.data(), static_cast<Eigen::Index>(b.rows()), static_cast<Eigen::Index>(b.cols()));
  const std::size_t m = transpose_a ? a.cols() : a.rows();
  const std::size_t n = transpose_b ? b.rows() : b.cols();
  if (c.rows() != m || c.cols() != n) c = Tensor<T>(Shape{m, n});
  Map mc(c.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  if (!accumulate) mc.setZero();
  if (!transpose_a && !transpose_b) {
    mc.noalias() += ma * mb;
  } else if (!transpose_a && transpose_b) {
    mc.noalias() += ma * mb.transpose();
  } else if (transpose_a && !transpose_b) {
    mc.noalias() += ma.transpose() * mb;
  } else {
    mc.noalias() += ma.transpose() * mb.transpose();
  }
}

template <std::floating_point T>
void softmax_row(std::span<const T> in, std::span<T> out) {
  const T top = *std::max_element(in.begin(), in.end());
  T total = 0;
  for (std::size_t k = 0; k < in.size(); ++k) {
    out[k] = std::exp(in[k] - top);
    total += out[k];
  }
  for (auto& v : out) v /= total;
}

}  // namespace kernel

// ---------------------------------------------------------------------------
// Operations

namespace {

template <std::floating_point T>
void require_same_graph(Var<T> a, Var<T> b) {
  if (&a.graph() != &b.graph()) throw std::invalid_argument("operands from different graphs");
}

template <std::floating_point T>
void require_matrix(const Tensor<T>& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + " needs a matrix, got " + shape_string(t.shape()));
  }
}

bool is_scalar_shape(const Shape& s) { return s.size() == 1 && s[0] == 1; }

template <std::floating_point T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <std::floating_point T, typename Fwd, typename Dfn>
Var<T> unary(std::string_view name, Var<T> a, Fwd fwd, Dfn dfn) {
  const Tensor<T>& x = a.value();
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  const std::size_t ia = a.id();
  // dfn(x, y) is the local derivative dy/dx.
  return a.graph().emit(name, std::move(y), {ia}, [ia, dfn](Graph<T>& g, std::size_t self) {
    const Tensor<T>& gy = g.grad(self);
    const Tensor<T>& xv = g.value(ia);
    const Tensor<T>& yv = g.value(self);
    Tensor<T>& gx = g.grad(ia);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i] * dfn(xv[i], yv[i]);
  });
}

enum class BinaryKind { kAdd, kSub, kMul };

template <std::floating_point T>
Var<T> binary(BinaryKind kind, std::string_view name, Var<T> a, Var<T> b) {
  require_same_graph(a, b);
  const Tensor<T>& x = a.value();
  const Tensor<T>& y = b.value();
  const bool same = x.shape() == y.shape();
  const bool a_scalar = !same && is_scalar_shape(x.shape());
  const bool b_scalar = !same && is_scalar_shape(y.shape());
  if (!same && !a_scalar && !b_scalar) {
    throw DimensionError(std::string(name) + ": shape mismatch " + shape_string(x.shape()) +
                         " vs " + shape_string(y.shape()));
  }
  const Tensor<T>& big = a_scalar ? y : x;
  Tensor<T> out(big.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T xi = a_scalar ? x[0] : x[i];
    const T yi = b_scalar ? y[0] : y[i];
    switch (kind) {
      case BinaryKind::kAdd: out[i] = xi + yi; break;
      case BinaryKind::kSub: out[i] = xi - yi; break;
      case BinaryKind::kMul: out[i] = xi * yi; break;
    }
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().emit(
      name, std::move(out), {ia, ib},
      [kind, ia, ib, a_scalar, b_scalar](Graph<T>& g, std::size_t self) {
        const Tensor<T>& go = g.grad(self);
        const std::size_t n = go.size();
        if (g.needs_grad(ia)) {
          Tensor<T>& ga = g.grad(ia);
          for (std::size_t i = 0; i < n; ++i) {
            T d = go[i];
            if (kind == BinaryKind::kMul) d *= b_scalar ? g.value(ib)[0] : g.value(ib)[i];
            ga[a_scalar ? 0 : i] += d;
          }
        }
        if (g.needs_grad(ib)) {
          Tensor<T>& gb = g.grad(ib);
          for (std::size_t i = 0; i < n; ++i) {
            T d = go[i];
            if (kind == BinaryKind::kSub) d = -d;
            if (kind == BinaryKind::kMul) d *= a_scalar ? g.value(ia)[0] : g.value(ia)[i];
            gb[b_scalar ? 0 : i] += d;
          }
        }
      });
}

enum class RowKind { kAdd, kSub, kDiv };

template <std::floating_point T>
Var<T> row_op(RowKind kind, std::string_view name, Var<T> x, Var<T> row) {
  require_same_graph(x, row);
  const Tensor<T>& xv = x.value();
  const Tensor<T>& rv = row.value();
  require_matrix(xv, name.data());
  if (rv.size() != xv.cols()) {
    throw DimensionError(std::string(name) + ": row of " + shape_string(rv.shape()) +
                         " does not fit " + shape_string(xv.shape()));
  }
  Tensor<T> out(xv.shape());
  const std::size_t rows = xv.rows(), cols = xv.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const T a = xv(r, c), b = rv[c];
      out(r, c) = kind == RowKind::kAdd ? a + b : kind == RowKind::kSub ? a - b : a / b;
    }
  }
  const std::size_t ix = x.id(), ir = row.id();
  return x.graph().emit(name, std::move(out), {ix, ir},
                        [kind, ix, ir, rows, cols](Graph<T>& g, std::size_t self) {
    const Tensor<T>& go = g.grad(self);
    const Tensor<T>& rv = g.value(ir);
    if (g.needs_grad(ix)) {
      Tensor<T>& gx = g.grad(ix);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          gx(r, c) += kind == RowKind::kDiv ? go(r, c) / rv[c] : go(r, c);
        }
      }
    }
    if (g.needs_grad(ir)) {
      Tensor<T>& gr = g.grad(ir);
      const Tensor<T>& yv = g.value(self);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          switch (kind) {
            case RowKind::kAdd: gr[c] += go(r, c); break;
            case RowKind::kSub: gr[c] -= go(r, c); break;
            // y = x / s  =>  dy/ds = -y / s
            case RowKind::kDiv: gr[c] -= go(r, c) * yv(r, c) / rv[c]; break;
          }
        }
      }
    }
  });
}

}  // namespace

template <std::floating_point T>
Var<T> matmul(Var<T> a, Var<T> b) {
  require_same_graph(a, b);
  const Tensor<T>& x = a.value();
  const Tensor<T>& y = b.value();
  require_matrix(x, "matmul");
  require_matrix(y, "matmul");
  if (x.cols() != y.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(x.shape()) +
                         " x " + shape_string(y.shape()));
  }
  Tensor<T> out(Shape{x.rows(), y.cols()});
  kernel::gemm(x, false, y, false, out, false);
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().emit("matmul", std::move(out), {ia, ib}, [ia, ib](Graph<T>& g, std::size_t self) {
    const Tensor<T>& go = g.grad(self);
    if (g.needs_grad(ia)) kernel::gemm(go, false, g.value(ib), true, g.grad(ia), true);
    if (g.needs_grad(ib)) kernel::gemm(g.value(ia), true, go, false, g.grad(ib), true);
  });
}

template <std::floating_point T>
Var<T> matmul_transposed(Var<T> a, Var<T> b) {
  require_same_graph(a, b);
  const Tensor<T>& x = a.value();
  const Tensor<T>& y = b.value();
  require_matrix(x, "matmul_transposed");
  require_matrix(y, "matmul_transposed");
  if (x.cols() != y.cols()) {
    throw DimensionError("matmul_transposed: inner dimensions differ, " +
                         shape_string(x.shape()) + " x " + shape_string(y.shape()) + "^T");
  }
  Tensor<T> out(Shape{x.rows(), y.rows()});
  kernel::gemm(x, false, y, true, out, false);
  const std::size_t ia = a.id(), ib = b.id();
  return a.graph().emit("matmul_transposed", std::move(out), {ia, ib},
                        [ia, ib](Graph<T>& g, std::size_t self) {
    const Tensor<T>& go = g.grad(self);
    if (g.needs_grad(ia)) kernel::gemm(go, false, g.value(ib), false, g.grad(ia), true);
    if (g.needs_grad(ib)) kernel::gemm(go, true, g.value(ia), false, g.grad(ib), true);
  });
}

template <std::floating_point T>
Var<T> add(Var<T> a, Var<T> b) { return binary(BinaryKind::kAdd, "add", a, b); }
template <std::floating_point T>
Var<T> sub(Var<T> a, Var<T> b) { return binary(BinaryKind::kSub, "sub", a, b); }
template <std::floating_point T>
Var<T> mul(Var<T> a, Var<T> b) { return binary(BinaryKind::kMul, "mul", a, b); }

template <std::floating_point T>
Var<T> tanh(Var<T> a) {
  return unary<T>("tanh", a, [](T x) { return std::tanh(x); },
                  [](T, T y) { return T{1} - y * y; });
}

template <std::floating_point T>
Var<T> sigmoid(Var<T> a) {
  return unary<T>("sigmoid", a, [](T x) { return T{1} / (T{1} + std::exp(-x)); },
                  [](T, T y) { return y * (T{1} - y); });
}

template <std::floating_point T>
Var<T> square(Var<T> a) {
  return unary<T>("square", a, [](T x) { return x * x; }, [](T x, T) { return T{2} * x; });
}

template <std::floating_point T>
Var<T> scale(Var<T> a, T factor) {
  return unary<T>("scale", a, [factor](T x) { return factor * x; },
                  [factor](T, T) { return factor; });
}

template <std::floating_point T>
Var<T> one_minus(Var<T> a) {
  return unary<T>("one_minus", a, [](T x) { return T{1} - x; }, [](T, T) { return T{-1}; });
}

template <std::floating_point T>
Var<T> softmax_rows(Var<T> x) {
  const Tensor<T>& xv = x.value();
  if (xv.rank() != 2 && xv.rank() != 1) {
    throw DimensionError("softmax_rows: bad shape " + shape_string(xv.shape()));
  }
  Tensor<T> out(xv.shape());
  for (std::size_t r = 0; r < xv.rows(); ++r) kernel::softmax_row<T>(xv.row(r), out.row(r));
  const std::size_t ix = x.id();
  return x.graph().emit("softmax_rows", std::move(out), {ix}, [ix](Graph<T>& g, std::size_t self) {
    const Tensor<T>& go = g.grad(self);
    const Tensor<T>& y = g.value(self);
    Tensor<T>& gx = g.grad(ix);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      T dot = 0;
      for (std::size_t c = 0; c < y.cols(); ++c) dot += go(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols(); ++c) gx(r, c) += y(r, c) * (go(r, c) - dot);
    }
  });
}

template <std::floating_point T>
Var<T> add_row(Var<T> x, Var<T> row) { return row_op(RowKind::kAdd, "add_row", x, row); }
template <std::floating_point T>
Var<T> sub_row(Var<T> x, Var<T> row) { return row_op(RowKind::kSub, "sub_row", x, row); }
template <std::floating_point T>
Var<T> div_row(Var<T> x, Var<T> row) { return row_op(RowKind::kDiv, "div_row", x, row); }

template <std::floating_point T>
Var<T> sum(Var<T> a) {
  T total = 0;
  for (T v : a.value().values()) total += v;
  const std::size_t ia = a.id();
  return a.graph().emit("sum", Tensor<T>::scalar(total), {ia}, [ia](Graph<T>& g, std::size_t self) {
    const T go = g.grad(self)[0];
    Tensor<T>& ga = g.grad(ia);
    for (auto& v : ga.values()) v += go;
  });
}

template <std::floating_point T>
Var<T> mean(Var<T> a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw DimensionError("mean of empty tensor");
  T total = 0;
  for (T v : a.value().values()) total += v;
  const std::size_t ia = a.id();
  return a.graph().emit("mean", Tensor<T>::scalar(total / static_cast<T>(n)), {ia},
                        [ia, n](Graph<T>& g, std::size_t self) {
    const T go = g.grad(self)[0] / static_cast<T>(n);
    Tensor<T>& ga = g.grad(ia);
    for (auto& v : ga.values()) v += go;
  });
}

template <std::floating_point T>
Var<T> col_mean(Var<T> x) {
  const Tensor<T>& xv = x.value();
  require_matrix(xv, "col_mean");
  const std::size_t rows = xv.rows(), cols = xv.cols();
  if (rows == 0) throw DimensionError("col_mean of empty matrix");
  Tensor<T> out(Shape{cols});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c] += xv(r, c);
  }
  for (auto& v : out.values()) v /= static_cast<T>(rows);
  const std::size_t ix = x.id();
  return x.graph().emit("col_mean", std::move(out), {ix}, [ix, rows, cols](Graph<T>& g, std::size_t self) {
    const Tensor<T>& go = g.grad(self);
    Tensor<T>& gx = g.grad(ix);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) gx(r, c) += go[c] / static_cast<T>(rows);
    }
  });
}

template <std::floating_point T>
Var<T> col_std(Var<T> x, Var<T> mu, T floor) {
  require_same_graph(x, mu);
  const Tensor<T>& xv = x.value();
  const Tensor<T>& mv = mu.value();
  require_matrix(xv, "col_std");
  const std::size_t rows = xv.rows(), cols = xv.cols();
  if (rows == 0) throw DimensionError("col_std of empty matrix");
  if (mv.size() != cols) throw DimensionError("col_std: mean does not match columns");
  Tensor<T> out(Shape{cols});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const T d = xv(r, c) - mv[c];
      out[c] += d * d;
    }
  }
  std::vector<bool> floored(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const T s = std::sqrt(out[c] / static_cast<T>(rows));
    floored[c] = !(s > floor);
    out[c] = floored[c] ? floor : s;
  }
  const std::size_t ix = x.id(), im = mu.id();
  return x.graph().emit("col_std", std::move(out), {ix, im},
                        [ix, im, rows, cols, floored](Graph<T>& g, std::size_t self) {
    const Tensor<T>& go = g.grad(self);
    const Tensor<T>& s = g.value(self);
    const Tensor<T>& xv = g.value(ix);
    const Tensor<T>& mv = g.value(im);
    const bool want_x = g.needs_grad(ix), want_mu = g.needs_grad(im);
    for (std::size_t c = 0; c < cols; ++c) {
      if (floored[c]) continue;
      // s = sqrt(mean((x - mu)^2))  =>  ds/dx_r = (x_r - mu) / (rows * s)
      const T k = go[c] / (static_cast<T>(rows) * s[c]);
      for (std::size_t r = 0; r < rows; ++r) {
        const T d = (xv(r, c) - mv[c]) * k;
        if (want_x) g.grad(ix)(r, c) += d;
        if (want_mu) g.grad(im)[c] -= d;
      }
    }
  });
}

template <std::floating_point T>
Var<T> pick(Var<T> a, std::size_t index) {
  if (index >= a.value().size()) {
    throw DimensionError("pick: index " + std::to_string(index) + " outside " +
                         shape_string(a.shape()));
  }
  const std::size_t ia = a.id();
  return a.graph().emit("pick", Tensor<T>::scalar(a.value()[index]), {ia},
                        [ia, index](Graph<T>& g, std::size_t self) {
    g.grad(ia)[index] += g.grad(self)[0];
  });
}

template <std::floating_point T>
Var<T> slice_rows(Var<T> a, std::size_t begin, std::size_t count) {
  const Tensor<T>& av = a.value();
  require_matrix(av, "slice_rows");
  if (begin + count > av.rows()) throw DimensionError("slice_rows out of range");
  const std::size_t cols = av.cols();
  Tensor<T> out(Shape{count, cols},
                std::vector<T>(av.data() + begin * cols, av.data() + (begin + count) * cols));
  const std::size_t ia = a.id();
  return a.graph().emit("slice_rows", std::move(out), {ia},
                        [ia, begin, count, cols](Graph<T>& g, std::size_t self) {
    const Tensor<T>& go = g.grad(self);
    T* dst = g.grad(ia).data() + begin * cols;
    for (std::size_t i = 0; i < count * cols; ++i) dst[i] += go[i];
  });
}

template <std::floating_point T>
Var<T> gather_rows(const std::vector<Var<T>>& sources,
                   const std::vector<std::pair<std::size_t, std::size_t>>& rows) {
  if (sources.empty()) throw DimensionError("gather_rows: no sources");
  const std::size_t cols = sources.front().value().cols();
  std::vector<std::size_t> ids;
  ids.reserve(sources.size());
  for (const auto& s : sources) {
    require_same_graph(s, sources.front());
    require_matrix(s.value(), "gather_rows");
    if (s.value().cols() != cols) throw DimensionError("gather_rows: width mismatch");
    ids.push_back(s.id());
  }
  Tensor<T> out(Shape{rows.size(), cols});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto [src, r] = rows[i];
    if (src >= sources.size() || r >= sources[src].value().rows()) {
      throw DimensionError("gather_rows: row reference out of range");
    }
    std::copy_n(sources[src].value().row(r).data(), cols, out.row(i).data());
  }
  return sources.front().graph().emit("gather_rows", std::move(out), ids,
                                       [ids, rows, cols](Graph<T>& g, std::size_t self) {
    const Tensor<T>& go = g.grad(self);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::size_t id = ids[rows[i].first];
      if (!g.needs_grad(id)) continue;
      auto dst = g.grad(id).row(rows[i].second);
      for (std::size_t c = 0; c < cols; ++c) dst[c] += go(i, c);
    }
  });
}

#define RLN_INSTANTIATE(T)                                                        \
  template class ParameterStore<T>;                                               \
  template class Graph<T>;                                                        \
  template Var<T> matmul(Var<T>, Var<T>);                                         \
  template Var<T> matmul_transposed(Var<T>, Var<T>);                              \
  template Var<T> add(Var<T>, Var<T>);                                            \
  template Var<T> sub(Var<T>, Var<T>);                                            \
  template Var<T> mul(Var<T>, Var<T>);                                            \
  template Var<T> tanh(Var<T>);                                                   \
  template Var<T> sigmoid(Var<T>);                                                \
  template Var<T> square(Var<T>);                                                 \
  template Var<T> scale(Var<T>, T);                                               \
  template Var<T> one_minus(Var<T>);                                              \
  template Var<T> softmax_rows(Var<T>);                                           \
  template Var<T> add_row(Var<T>, Var<T>);                                        \
  template Var<T> sub_row(Var<T>, Var<T>);                                        \
  template Var<T> div_row(Var<T>, Var<T>);                                        \
  template Var<T> sum(Var<T>);                                                    \
  template Var<T> mean(Var<T>);                                                   \
  template Var<T> col_mean(Var<T>);                                               \
  template Var<T> col_std(Var<T>, Var<T>, T);                                     \
  template Var<T> pick(Var<T>, std::size_t);                                      \
  template Var<T> slice_rows(Var<T>, std::size_t, std::size_t);                   \
  template Var<T> gather_rows(const std::vector<Var<T>>&,                         \
                              const std::vector<std::pair<std::size_t, std::size_t>>&); \
  template void kernel::gemm(const Tensor<T>&, bool, const Tensor<T>&, bool, Tensor<T>&, bool); \
  template void kernel::softmax_row(std::span<const T>, std::span<T>);

RLN_INSTANTIATE(float)
RLN_INSTANTIATE(double)

#undef RLN_INSTANTIATE

}  // namespace rln
