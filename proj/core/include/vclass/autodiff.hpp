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

// Reverse-mode automatic differentiation over dense row-major tensors.
//
// A Tensor is a cheap handle onto a graph node. Primitives record their
// inputs and an adjoint rule whenever any input requires a gradient; the
// graph is rebuilt on every forward pass. Node ids increase monotonically,
// so ordering nodes by id is a valid topological order.

#ifndef VCLASS_AUTODIFF_HPP_
#define VCLASS_AUTODIFF_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace vc::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);

struct Node {
  std::uint64_t id = 0;
  std::string_view op;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until a backward pass touches the node
  bool requires_grad = false;
  bool consumed = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads self.grad and accumulates into the inputs' grad buffers.
  std::function<void(Node& self)> backward;

  bool is_leaf() const { return !backward; }
  // Grad buffer of a node that takes part in differentiation, allocating on
  // first use; nullptr when the node does not require a gradient.
  double* grad_buffer();
};

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor vector(std::vector<double> values, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                       bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const { return values().size(); }
  std::size_t dim(std::size_t axis) const;

  std::span<const double> values() const;
  // Only leaves may be written (parameter updates, finite differences).
  std::span<double> mutable_values();
  double item() const;
  double operator[](std::size_t i) const { return values()[i]; }
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  bool is_leaf() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  void zero_grad();

  // New leaf holding a copy of the values; never requires a gradient.
  Tensor detach() const;
  // New leaf holding a copy of the values with the same requires_grad flag.
  Tensor clone() const;

  std::uint64_t id() const;
  std::string_view op() const;
  const std::shared_ptr<Node>& node() const { return node_; }

  static Tensor from_node(std::shared_ptr<Node> node);

 private:
  std::shared_ptr<Node> node_;
};

// Nodes that require a gradient and are reachable from a root, in
// topological (ascending id) order.
class Graph {
 public:
  static Graph trace(const Tensor& root);

  std::span<Node* const> nodes() const { return order_; }
  std::size_t size() const { return order_.size(); }

 private:
  std::vector<Node*> order_;
};

// Accumulates d(loss)/d(leaf) into every requires_grad leaf. The loss must
// hold exactly one value, and a graph may only be replayed once.
void backward(const Tensor& loss);

// --- primitives -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

// Binary elementwise ops. Shapes must match, or one side holds one value.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// a[m x n] + v[n] for every row.
Tensor add_rowvec(const Tensor& a, const Tensor& v);

Tensor negate(const Tensor& a);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);  // DomainError on non-positive input
Tensor tanh(const Tensor& a);
Tensor relu(const Tensor& a);  // subgradient 0 at the kink
Tensor sigmoid(const Tensor& a);
Tensor log_sigmoid(const Tensor& a);
Tensor square(const Tensor& a);
// Values outside [lo, hi] are clamped and pass no gradient.
Tensor clamp(const Tensor& a, double lo, double hi);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Reductions over the last axis: [m x n] -> [m], [n] -> scalar.
Tensor sum_last(const Tensor& a);
Tensor logsumexp(const Tensor& a);
// Same shape as a; normalizes along the last axis.
Tensor log_softmax(const Tensor& a);

// out[i] = a[i, index[i]] for a of shape [m x k].
Tensor pick(const Tensor& a, std::span<const std::size_t> index);
// Rows of a[k x d] (or entries of a[k]) selected by index, with repetition.
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator-(const Tensor& a) { return negate(a); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

// --- gradient checking ----------------------------------------------------

// Worst relative error |analytic - numeric| / max(|analytic|, |numeric|, 1e-6)
// over every coordinate, using central differences with step eps.
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                  double eps = 1e-5);

// Same, over every coordinate of every parameter leaf. f is re-evaluated with
// each parameter perturbed in place; parameters are restored afterwards.
double grad_check(const std::function<Tensor()>& f, std::span<const Tensor> params,
                  double eps = 1e-5);

}  // namespace vc::ad

#endif  // VCLASS_AUTODIFF_HPP_
