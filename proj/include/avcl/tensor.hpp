#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace avcl {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

namespace detail {

// One vertex of the dynamic tape. Nodes are created by ops in construction
// order (`seq`) and hold strong references to their inputs, so a graph lives
// as long as its output tensor does.
struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  std::uint64_t seq = 0;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into inputs' grads.
  std::function<void(Node&)> backward_fn;

  bool is_leaf() const { return inputs.empty(); }
};

}  // namespace detail

// Dense row-major array of doubles with reverse-mode autodiff.
//
// A Tensor is a cheap handle; copies share the same node. Values are fixed
// after construction, except through mutable_data(), which the optimizer uses
// on leaf parameters between forward passes.
class Tensor {
 public:
  Tensor();

  static Tensor from_data(Shape shape, std::vector<double> data,
                          bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor ones(Shape shape) { return full(std::move(shape), 1.0); }
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor identity(std::size_t n);

  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const;
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t i) const { return data()[i]; }
  double at(std::size_t r, std::size_t c) const;

  bool requires_grad() const;
  bool is_leaf() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Reverse pass from a scalar. Leaves accumulate across repeated calls;
  // intermediate buffers are rebuilt on every call.
  void backward() const;

  // Leaf copy of the values, outside any graph.
  Tensor detach(bool requires_grad = false) const;

  bool defined() const { return node_ != nullptr; }
  const detail::Node* node() const { return node_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node);
  friend Tensor make_op_result(Shape, std::vector<double>, const char*,
                               std::vector<Tensor>,
                               std::function<void(detail::Node&)>);

  std::shared_ptr<detail::Node> node_;
};

// --- Linear algebra --------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);
Tensor reshape(const Tensor& x, Shape shape);

// --- Elementwise ------------------------------------------------------------
// Binary ops need equal shapes, or one operand with a single element.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double s);
Tensor add_scalar(const Tensor& x, double s);
Tensor relu(const Tensor& x);  // relu'(0) = 0
Tensor sigmoid(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor square(const Tensor& x);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return div(a, b); }

// --- Structural -------------------------------------------------------------

// Rank-2 concatenation along `axis` (0 = rows, 1 = columns).
Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis = 1);
// Half-open range [begin, end) of rank-2 `x` along `axis`.
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin,
             std::size_t end);

// --- Reductions -------------------------------------------------------------
// Axis reductions keep the reduced axis with extent 1, so a 2x3 input reduced
// over axis 0 has shape [1, 3].

Tensor sum(const Tensor& x);
Tensor sum(const Tensor& x, std::size_t axis);
Tensor l2_norm(const Tensor& x);
Tensor l2_norm(const Tensor& x, std::size_t axis);

// Mean over rows of -log softmax(logits)[label]; logits are [batch x classes].
Tensor softmax_cross_entropy(const Tensor& logits,
                             std::span<const int> labels);

}  // namespace avcl
