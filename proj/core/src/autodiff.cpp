/* Copyright 2026 The vclass Authors. All Rights Reserved.

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

#include "vclass/autodiff.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>

#include "vclass/errors.hpp"

namespace vc::ad {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

std::atomic<std::uint64_t> next_node_id{1};

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

void require_defined(const Tensor& t, std::string_view op) {
  if (!t.defined()) throw ContractError(std::string(op) + ": undefined tensor");
}

std::shared_ptr<Node> new_node(std::string_view op, Shape shape, std::vector<double> value) {
  auto n = std::make_shared<Node>();
  n->id = next_node_id.fetch_add(1, std::memory_order_relaxed);
  n->op = op;
  n->shape = std::move(shape);
  n->value = std::move(value);
  return n;
}

// Builds an interior node. The adjoint rule and input links are dropped when
// no input needs a gradient, so constant subexpressions never form a graph.
Tensor make_result(std::string_view op, Shape shape, std::vector<double> value,
                   std::vector<Tensor> inputs, std::function<void(Node&)> rule) {
  auto n = new_node(op, std::move(shape), std::move(value));
  bool rg = false;
  for (const auto& t : inputs) rg = rg || t.requires_grad();
  if (rg) {
    n->requires_grad = true;
    n->inputs.reserve(inputs.size());
    for (const auto& t : inputs) n->inputs.push_back(t.node());
    n->backward = std::move(rule);
  }
  return Tensor::from_node(std::move(n));
}

Node& in(Node& self, std::size_t i) { return *self.inputs[i]; }

void require_rank(const Tensor& t, std::size_t rank, std::string_view op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_str(t.shape()));
  }
}

template <typename F, typename D>
Tensor unary(std::string_view op, const Tensor& a, F forward, D derivative) {
  require_defined(a, op);
  const auto av = a.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = forward(av[i]);
  // derivative(x, y) gives dy/dx from the input and the saved output.
  return make_result(op, a.shape(), std::move(out), {a}, [derivative](Node& self) {
    Node& x = in(self, 0);
    double* gx = x.grad_buffer();
    if (!gx) return;
    for (std::size_t i = 0; i < self.value.size(); ++i) {
      gx[i] += self.grad[i] * derivative(x.value[i], self.value[i]);
    }
  });
}

enum class Bcast { same, left_scalar, right_scalar };

Bcast broadcast_kind(const Tensor& a, const Tensor& b, std::string_view op) {
  require_defined(a, op);
  require_defined(b, op);
  if (a.shape() == b.shape()) return Bcast::same;
  if (b.size() == 1) return Bcast::right_scalar;
  if (a.size() == 1) return Bcast::left_scalar;
  throw DimensionError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                       shape_str(b.shape()) + " do not match");
}

// Elementwise binary op with scalar broadcasting. da/db give the partials
// with respect to each operand at (x, y).
template <typename F, typename DA, typename DB>
Tensor binary(std::string_view op, const Tensor& a, const Tensor& b, F f, DA da, DB db) {
  const Bcast kind = broadcast_kind(a, b, op);
  const Shape shape = kind == Bcast::left_scalar ? b.shape() : a.shape();
  const std::size_t n = shape_size(shape);
  const auto av = a.values();
  const auto bv = b.values();
  auto ai = [kind](std::size_t i) { return kind == Bcast::left_scalar ? 0 : i; };
  auto bi = [kind](std::size_t i) { return kind == Bcast::right_scalar ? 0 : i; };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(av[ai(i)], bv[bi(i)]);
  return make_result(op, shape, std::move(out), {a, b}, [=](Node& self) {
    Node& x = in(self, 0);
    Node& y = in(self, 1);
    double* gx = x.grad_buffer();
    double* gy = y.grad_buffer();
    for (std::size_t i = 0; i < self.value.size(); ++i) {
      const double xv = x.value[ai(i)];
      const double yv = y.value[bi(i)];
      if (gx) gx[ai(i)] += self.grad[i] * da(xv, yv);
      if (gy) gy[bi(i)] += self.grad[i] * db(xv, yv);
    }
  });
}

// Rows and width of the last axis; a rank-1 tensor is a single row.
std::pair<std::size_t, std::size_t> rows_last(const Tensor& a, std::string_view op) {
  if (a.rank() == 1) return {1, a.dim(0)};
  if (a.rank() == 2) return {a.dim(0), a.dim(1)};
  throw DimensionError(std::string(op) + ": expected rank 1 or 2, got " + shape_str(a.shape()));
}

Shape reduced_shape(const Tensor& a) {
  return a.rank() == 1 ? Shape{} : Shape{a.dim(0)};
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

double* Node::grad_buffer() {
  if (!requires_grad) return nullptr;
  if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
  return grad.data();
}

// --- Tensor ---------------------------------------------------------------

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_size(shape) != values.size()) {
    throw DimensionError("Tensor: shape " + shape_str(shape) + " holds " +
                         std::to_string(shape_size(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  node_ = new_node("leaf", std::move(shape), std::move(values));
  node_->requires_grad = requires_grad;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({}, {value}, requires_grad);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return filled(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::vector(std::vector<double> values, bool requires_grad) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values), requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                      bool requires_grad) {
  return Tensor({rows, cols}, std::move(values), requires_grad);
}

Tensor Tensor::from_node(std::shared_ptr<Node> node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

const Shape& Tensor::shape() const {
  require_defined(*this, "shape");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) throw DimensionError("dim: axis out of range for " + shape_str(shape()));
  return shape()[axis];
}

std::span<const double> Tensor::values() const {
  require_defined(*this, "values");
  return node_->value;
}

std::span<double> Tensor::mutable_values() {
  require_defined(*this, "mutable_values");
  if (!node_->is_leaf()) throw ContractError("mutable_values: only leaf tensors can be written");
  return node_->value;
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item: tensor " + shape_str(shape()) + " is not a scalar");
  return node_->value[0];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  if (rank() != 2) throw DimensionError("at: expected a matrix, got " + shape_str(shape()));
  return node_->value[row * node_->shape[1] + col];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
bool Tensor::is_leaf() const { return node_ && node_->is_leaf(); }
bool Tensor::has_grad() const { return node_ && node_->grad.size() == node_->value.size(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) throw ContractError("grad: no gradient has been accumulated");
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_) node_->grad.clear();
}

Tensor Tensor::detach() const {
  require_defined(*this, "detach");
  return Tensor(node_->shape, node_->value, false);
}

Tensor Tensor::clone() const {
  require_defined(*this, "clone");
  return Tensor(node_->shape, node_->value, node_->requires_grad);
}

std::uint64_t Tensor::id() const {
  require_defined(*this, "id");
  return node_->id;
}

std::string_view Tensor::op() const {
  require_defined(*this, "op");
  return node_->op;
}

// --- Graph / backward -----------------------------------------------------

Graph Graph::trace(const Tensor& root) {
  require_defined(root, "trace");
  Graph g;
  if (!root.requires_grad()) return g;
  std::unordered_set<const Node*> seen;
  std::vector<Node*> stack{root.node().get()};
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    g.order_.push_back(n);
    for (const auto& p : n->inputs) {
      if (p->requires_grad) stack.push_back(p.get());
    }
  }
  std::sort(g.order_.begin(), g.order_.end(),
            [](const Node* a, const Node* b) { return a->id < b->id; });
  return g;
}

void backward(const Tensor& loss) {
  require_defined(loss, "backward");
  if (loss.size() != 1) {
    throw ContractError("backward: loss must be a scalar, got " + shape_str(loss.shape()));
  }
  Node& root = *loss.node();
  if (root.consumed) throw ContractError("backward: graph was already differentiated");
  if (!root.requires_grad) return;
  const Graph graph = Graph::trace(loss);
  for (Node* n : graph.nodes()) {
    if (!n->is_leaf()) n->grad.assign(n->value.size(), 0.0);
  }
  root.grad_buffer()[0] += 1.0;
  const auto nodes = graph.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    Node* n = *it;
    if (n->is_leaf()) continue;
    n->backward(*n);
  }
  root.consumed = true;
  // Interior adjoints are only needed during the sweep.
  for (Node* n : nodes) {
    if (!n->is_leaf()) std::vector<double>().swap(n->grad);
  }
}

// --- primitives -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  std::vector<double> out(m * n);
  MatMap(out.data(), m, n).noalias() =
      ConstMatMap(a.values().data(), m, k) * ConstMatMap(b.values().data(), k, n);
  return make_result("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    ConstMatMap g(self.grad.data(), m, n);
    Node& x = in(self, 0);
    Node& y = in(self, 1);
    if (double* gx = x.grad_buffer()) {
      MatMap(gx, m, k).noalias() += g * ConstMatMap(y.value.data(), k, n).transpose();
    }
    if (double* gy = y.grad_buffer()) {
      MatMap(gy, k, n).noalias() += ConstMatMap(x.value.data(), m, k).transpose() * g;
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_defined(a, "transpose");
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  MatMap(out.data(), n, m) = ConstMatMap(a.values().data(), m, n).transpose();
  return make_result("transpose", {n, m}, std::move(out), {a}, [m, n](Node& self) {
    if (double* gx = in(self, 0).grad_buffer()) {
      MatMap(gx, m, n) += ConstMatMap(self.grad.data(), n, m).transpose();
    }
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  require_defined(a, "reshape");
  if (shape_size(shape) != a.size()) {
    throw DimensionError("reshape: cannot view " + shape_str(a.shape()) + " as " + shape_str(shape));
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  return make_result("reshape", std::move(shape), std::move(out), {a}, [](Node& self) {
    if (double* gx = in(self, 0).grad_buffer()) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i];
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      "add", a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      "sub", a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      "mul", a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
  require_defined(a, "add_rowvec");
  require_defined(v, "add_rowvec");
  require_rank(a, 2, "add_rowvec");
  require_rank(v, 1, "add_rowvec");
  const std::size_t m = a.dim(0), n = a.dim(1);
  if (v.dim(0) != n) {
    throw DimensionError("add_rowvec: row width " + std::to_string(n) + " vs vector " +
                         shape_str(v.shape()));
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto vv = v.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += vv[j];
  return make_result("add_rowvec", a.shape(), std::move(out), {a, v}, [m, n](Node& self) {
    if (double* ga = in(self, 0).grad_buffer()) {
      for (std::size_t i = 0; i < m * n; ++i) ga[i] += self.grad[i];
    }
    if (double* gv = in(self, 1).grad_buffer()) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gv[j] += self.grad[i * n + j];
    }
  });
}

Tensor negate(const Tensor& a) {
  return unary("negate", a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(
      "scale", a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double offset) {
  return unary(
      "add_scalar", a, [offset](double x) { return x + offset; },
      [](double, double) { return 1.0; });
}

Tensor exp(const Tensor& a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
  require_defined(a, "log");
  const auto av = a.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (!(av[i] > 0.0)) {
      throw DomainError("log: non-positive input " + std::to_string(av[i]) + " at index " +
                        std::to_string(i));
    }
  }
  return unary("log", a, [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Tensor tanh(const Tensor& a) {
  return unary("tanh", a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  // NaN passes through so a corrupted parameter cannot be silently masked.
  return unary("relu", a, [](double x) { return x > 0.0 || std::isnan(x) ? x : 0.0; },
               [](double x, double) { return std::isnan(x) ? x : (x > 0.0 ? 1.0 : 0.0); });
}

namespace {
double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Tensor sigmoid(const Tensor& a) {
  return unary("sigmoid", a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor log_sigmoid(const Tensor& a) {
  // log sigma(x) = -softplus(-x); derivative is sigma(-x).
  return unary(
      "log_sigmoid", a,
      [](double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); },
      [](double x, double) { return stable_sigmoid(-x); });
}

Tensor square(const Tensor& a) {
  return unary("square", a, [](double x) { return x * x; },
               [](double x, double) { return 2.0 * x; });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  if (lo > hi) throw ContractError("clamp: lo > hi");
  return unary(
      "clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& a) {
  require_defined(a, "sum");
  const auto av = a.values();
  double s = 0.0;
  for (double v : av) s += v;
  return make_result("sum", {}, {s}, {a}, [](Node& self) {
    Node& x = in(self, 0);
    if (double* gx = x.grad_buffer()) {
      for (std::size_t i = 0; i < x.value.size(); ++i) gx[i] += self.grad[0];
    }
  });
}

Tensor mean(const Tensor& a) {
  require_defined(a, "mean");
  if (a.size() == 0) throw DimensionError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor sum_last(const Tensor& a) {
  require_defined(a, "sum_last");
  const auto [m, n] = rows_last(a, "sum_last");
  const auto av = a.values();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i] += av[i * n + j];
  return make_result("sum_last", reduced_shape(a), std::move(out), {a}, [m, n](Node& self) {
    if (double* gx = in(self, 0).grad_buffer()) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += self.grad[i];
    }
  });
}

Tensor logsumexp(const Tensor& a) {
  require_defined(a, "logsumexp");
  const auto [m, n] = rows_last(a, "logsumexp");
  if (n == 0) throw DimensionError("logsumexp: empty axis");
  const auto av = a.values();
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = av.data() + i * n;
    const double mx = *std::max_element(row, row + n);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::exp(row[j] - mx);
    out[i] = mx + std::log(s);
  }
  return make_result("logsumexp", reduced_shape(a), std::move(out), {a}, [m, n](Node& self) {
    Node& x = in(self, 0);
    if (double* gx = x.grad_buffer()) {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
          gx[i * n + j] += self.grad[i] * std::exp(x.value[i * n + j] - self.value[i]);
    }
  });
}

Tensor log_softmax(const Tensor& a) {
  require_defined(a, "log_softmax");
  const auto [m, n] = rows_last(a, "log_softmax");
  const Tensor lse = logsumexp(a.detach());
  std::vector<double> out(a.values().begin(), a.values().end());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] -= lse.values()[i];
  return make_result("log_softmax", a.shape(), std::move(out), {a}, [m, n](Node& self) {
    if (double* gx = in(self, 0).grad_buffer()) {
      for (std::size_t i = 0; i < m; ++i) {
        double gsum = 0.0;
        for (std::size_t j = 0; j < n; ++j) gsum += self.grad[i * n + j];
        for (std::size_t j = 0; j < n; ++j)
          gx[i * n + j] += self.grad[i * n + j] - std::exp(self.value[i * n + j]) * gsum;
      }
    }
  });
}

Tensor pick(const Tensor& a, std::span<const std::size_t> index) {
  require_defined(a, "pick");
  require_rank(a, 2, "pick");
  const std::size_t m = a.dim(0), k = a.dim(1);
  if (index.size() != m) {
    throw DimensionError("pick: " + std::to_string(index.size()) + " indices for " +
                         std::to_string(m) + " rows");
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  std::vector<double> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (idx[i] >= k) throw DimensionError("pick: index " + std::to_string(idx[i]) + " out of range");
    out[i] = a.values()[i * k + idx[i]];
  }
  return make_result("pick", {m}, std::move(out), {a}, [idx = std::move(idx), k](Node& self) {
    if (double* gx = in(self, 0).grad_buffer()) {
      for (std::size_t i = 0; i < idx.size(); ++i) gx[i * k + idx[i]] += self.grad[i];
    }
  });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index) {
  require_defined(a, "gather_rows");
  const auto [rows, width] = a.rank() == 1 ? std::pair{a.dim(0), std::size_t{1}}
                                           : rows_last(a, "gather_rows");
  std::vector<std::size_t> idx(index.begin(), index.end());
  const std::size_t m = idx.size();
  std::vector<double> out(m * width);
  const auto av = a.values();
  for (std::size_t i = 0; i < m; ++i) {
    if (idx[i] >= rows) {
      throw DimensionError("gather_rows: index " + std::to_string(idx[i]) + " out of range for " +
                           shape_str(a.shape()));
    }
    std::copy_n(av.begin() + static_cast<std::ptrdiff_t>(idx[i] * width), width,
                out.begin() + static_cast<std::ptrdiff_t>(i * width));
  }
  Shape shape = a.rank() == 1 ? Shape{m} : Shape{m, width};
  return make_result("gather_rows", std::move(shape), std::move(out), {a},
                     [idx = std::move(idx), width](Node& self) {
                       if (double* gx = in(self, 0).grad_buffer()) {
                         for (std::size_t i = 0; i < idx.size(); ++i)
                           for (std::size_t j = 0; j < width; ++j)
                             gx[idx[i] * width + j] += self.grad[i * width + j];
                       }
                     });
}

// --- gradient checking ----------------------------------------------------

namespace {
double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}
}  // namespace

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double eps) {
  Tensor leaf(x.shape(), std::vector<double>(x.values().begin(), x.values().end()), true);
  const std::vector<Tensor> params{leaf};
  return grad_check([&] { return f(leaf); }, params, eps);
}

double grad_check(const std::function<Tensor()>& f, std::span<const Tensor> params, double eps) {
  for (const auto& p : params) {
    if (!p.is_leaf() || !p.requires_grad()) {
      throw ContractError("grad_check: parameters must be requires_grad leaves");
    }
    Tensor(p).zero_grad();
  }
  backward(f());
  double worst = 0.0;
  for (const auto& p : params) {
    Tensor param = p;
    std::vector<double> analytic = param.has_grad()
                                       ? std::vector<double>(param.grad().begin(), param.grad().end())
                                       : std::vector<double>(param.size(), 0.0);
    auto vals = param.mutable_values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double orig = vals[i];
      vals[i] = orig + eps;
      const double up = f().item();
      vals[i] = orig - eps;
      const double down = f().item();
      vals[i] = orig;
      worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * eps)));
    }
  }
  return worst;
}

}  // namespace vc::ad
