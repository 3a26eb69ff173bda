#include "avcl/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "avcl/error.hpp"

namespace avcl {

namespace {

std::atomic<std::uint64_t> g_next_seq{1};

using NodePtr = std::shared_ptr<detail::Node>;

bool needs_grad(const detail::Node& n) { return n.requires_grad; }

}  // namespace

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

// Builds the output node of an op. When no input requires a gradient the
// node is created as a detached leaf so inference never retains a graph.
Tensor make_op_result(Shape shape, std::vector<double> data, const char* op,
                      std::vector<Tensor> inputs,
                      std::function<void(detail::Node&)> backward_fn) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->seq = g_next_seq.fetch_add(1, std::memory_order_relaxed);
  node->op = op;
  bool any = false;
  for (const auto& t : inputs) any = any || t.requires_grad();
  if (any) {
    node->requires_grad = true;
    for (auto& t : inputs) node->inputs.push_back(t.node_);
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

// ---------------------------------------------------------------------------
// Tensor

Tensor::Tensor() = default;

Tensor::Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

Tensor Tensor::from_data(Shape shape, std::vector<double> data,
                         bool requires_grad) {
  for (auto d : shape) {
    if (d == 0) throw DimensionError("zero-sized dimension in " + shape_str(shape));
  }
  if (shape_numel(shape) != data.size()) {
    throw DimensionError("shape " + shape_str(shape) + " does not hold " +
                         std::to_string(data.size()) + " values");
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  node->seq = g_next_seq.fetch_add(1, std::memory_order_relaxed);
  return Tensor(std::move(node));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const auto n = shape_numel(shape);
  return from_data(std::move(shape), std::vector<double>(n, value),
                   requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data({}, {value}, requires_grad);
}

Tensor Tensor::identity(std::size_t n) {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
  return from_data({n, n}, std::move(d));
}

namespace {
const detail::Node& checked(const std::shared_ptr<detail::Node>& n) {
  if (!n) throw ContractError("use of an undefined tensor");
  return *n;
}
}  // namespace

const Shape& Tensor::shape() const { return checked(node_).shape; }
std::size_t Tensor::numel() const { return checked(node_).data.size(); }

std::size_t Tensor::rows() const {
  if (rank() != 2) throw DimensionError("rows() on rank-" + std::to_string(rank()) + " tensor");
  return shape()[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw DimensionError("cols() on rank-" + std::to_string(rank()) + " tensor");
  return shape()[1];
}

std::span<const double> Tensor::data() const { return checked(node_).data; }

std::span<double> Tensor::mutable_data() {
  checked(node_);
  return node_->data;
}

double Tensor::item() const {
  if (numel() != 1) {
    throw ContractError("item() on tensor of shape " + shape_str(shape()));
  }
  return node_->data[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  return data()[r * cols() + c];
}

bool Tensor::requires_grad() const { return checked(node_).requires_grad; }
bool Tensor::is_leaf() const { return checked(node_).is_leaf(); }
bool Tensor::has_grad() const { return !checked(node_).grad.empty(); }
std::span<const double> Tensor::grad() const { return checked(node_).grad; }

std::span<double> Tensor::mutable_grad() {
  checked(node_);
  if (node_->grad.empty()) node_->grad.assign(node_->data.size(), 0.0);
  return node_->grad;
}

void Tensor::zero_grad() {
  checked(node_);
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::detach(bool requires_grad) const {
  return from_data(shape(), std::vector<double>(data().begin(), data().end()),
                   requires_grad);
}

void Tensor::backward() const {
  const auto& root = checked(node_);
  if (root.data.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        shape_str(root.shape));
  }
  if (!root.requires_grad) return;

  // Collect every node on a path to a grad-requiring leaf.
  std::vector<detail::Node*> order;
  std::vector<detail::Node*> stack{node_.get()};
  std::unordered_set<const detail::Node*> seen{node_.get()};
  while (!stack.empty()) {
    auto* n = stack.back();
    stack.pop_back();
    order.push_back(n);
    for (auto& in : n->inputs) {
      if (in->requires_grad && seen.insert(in.get()).second) {
        stack.push_back(in.get());
      }
    }
  }
  std::sort(order.begin(), order.end(),
            [](auto* a, auto* b) { return a->seq > b->seq; });

  for (auto* n : order) {
    if (!n->is_leaf()) {
      n->grad.assign(n->data.size(), 0.0);
    } else if (n->grad.empty()) {
      n->grad.assign(n->data.size(), 0.0);
    }
  }
  node_->grad[0] += 1.0;
  for (auto* n : order) {
    if (!n->is_leaf() && n->backward_fn) n->backward_fn(*n);
  }
  for (auto* n : order) {
    if (!n->is_leaf()) {
      n->grad.clear();
      n->grad.shrink_to_fit();
    }
  }
}

// ---------------------------------------------------------------------------
// Ops

namespace {

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + " expects a rank-2 tensor, got " +
                         shape_str(t.shape()));
  }
}

// Gradient buffer of input `i` if it participates in backprop, else null.
double* in_grad(detail::Node& n, std::size_t i) {
  auto& in = *n.inputs[i];
  return needs_grad(in) ? in.grad.data() : nullptr;
}

const double* in_data(const detail::Node& n, std::size_t i) {
  return n.inputs[i]->data.data();
}

enum class Bcast { kNone, kLeftScalar, kRightScalar };

Bcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() == b.shape()) return Bcast::kNone;
  if (a.numel() == 1 && b.numel() == 1) {
    return a.rank() >= b.rank() ? Bcast::kRightScalar : Bcast::kLeftScalar;
  }
  if (b.numel() == 1) return Bcast::kRightScalar;
  if (a.numel() == 1) return Bcast::kLeftScalar;
  throw DimensionError(std::string(op) + ": shapes " + shape_str(a.shape()) +
                       " and " + shape_str(b.shape()) + " do not match");
}

// Elementwise binary op with optional scalar broadcast. `dx`/`dy` return the
// partial derivatives of f at (x, y) with output value z.
template <class F, class DX, class DY>
Tensor binary(const Tensor& a, const Tensor& b, const char* op, F f, DX dx,
              DY dy) {
  const auto kind = broadcast_kind(a, b, op);
  const Shape out_shape = kind == Bcast::kLeftScalar ? b.shape() : a.shape();
  const std::size_t n = shape_numel(out_shape);
  const auto ad = a.data();
  const auto bd = b.data();
  auto ai = [kind](std::size_t i) { return kind == Bcast::kLeftScalar ? 0 : i; };
  auto bi = [kind](std::size_t i) { return kind == Bcast::kRightScalar ? 0 : i; };
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(ad[ai(i)], bd[bi(i)]);
  return make_op_result(
      out_shape, std::move(out), op, {a, b},
      [n, ai, bi, dx, dy](detail::Node& self) {
        const double* x = in_data(self, 0);
        const double* y = in_data(self, 1);
        double* gx = in_grad(self, 0);
        double* gy = in_grad(self, 1);
        for (std::size_t i = 0; i < n; ++i) {
          const double g = self.grad[i];
          const double xv = x[ai(i)], yv = y[bi(i)], zv = self.data[i];
          if (gx) gx[ai(i)] += g * dx(xv, yv, zv);
          if (gy) gy[bi(i)] += g * dy(xv, yv, zv);
        }
      });
}

template <class F, class DF>
Tensor unary(const Tensor& x, const char* op, F f, DF df) {
  const auto xd = x.data();
  std::vector<double> out(xd.size());
  for (std::size_t i = 0; i < xd.size(); ++i) out[i] = f(xd[i]);
  return make_op_result(x.shape(), std::move(out), op, {x},
                        [df](detail::Node& self) {
                          const double* xv = in_data(self, 0);
                          double* gx = in_grad(self, 0);
                          for (std::size_t i = 0; i < self.data.size(); ++i) {
                            gx[i] += self.grad[i] * df(xv[i], self.data[i]);
                          }
                        });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ, " +
                         shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  const auto ad = a.data();
  const auto bd = b.data();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ad[i * k + p];
      const double* brow = &bd[p * n];
      double* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
    }
  }
  return make_op_result({m, n}, std::move(out), "matmul", {a, b},
                        [m, k, n](detail::Node& self) {
                          const double* A = in_data(self, 0);
                          const double* B = in_data(self, 1);
                          double* gA = in_grad(self, 0);
                          double* gB = in_grad(self, 1);
                          const double* G = self.grad.data();
                          if (gA) {
                            for (std::size_t i = 0; i < m; ++i)
                              for (std::size_t p = 0; p < k; ++p) {
                                double s = 0.0;
                                for (std::size_t j = 0; j < n; ++j)
                                  s += G[i * n + j] * B[p * n + j];
                                gA[i * k + p] += s;
                              }
                          }
                          if (gB) {
                            for (std::size_t i = 0; i < m; ++i)
                              for (std::size_t p = 0; p < k; ++p) {
                                const double av = A[i * k + p];
                                for (std::size_t j = 0; j < n; ++j)
                                  gB[p * n + j] += av * G[i * n + j];
                              }
                          }
                        });
}

Tensor transpose(const Tensor& x) {
  require_rank2(x, "transpose");
  const std::size_t r = x.rows(), c = x.cols();
  const auto xd = x.data();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = xd[i * c + j];
  return make_op_result({c, r}, std::move(out), "transpose", {x},
                        [r, c](detail::Node& self) {
                          double* g = in_grad(self, 0);
                          for (std::size_t i = 0; i < r; ++i)
                            for (std::size_t j = 0; j < c; ++j)
                              g[i * c + j] += self.grad[j * r + i];
                        });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: " + shape_str(x.shape()) + " -> " +
                         shape_str(shape) + " changes the element count");
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return make_op_result(std::move(shape), std::move(out), "reshape", {x},
                        [](detail::Node& self) {
                          double* g = in_grad(self, 0);
                          for (std::size_t i = 0; i < self.grad.size(); ++i)
                            g[i] += self.grad[i];
                        });
}

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double, double) { return 1.0; },
      [](double, double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double, double) { return 1.0; },
      [](double, double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y, double) { return y; },
      [](double x, double, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  for (double v : b.data()) {
    if (v == 0.0) throw DomainError("div: division by zero");
  }
  return binary(
      a, b, "div", [](double x, double y) { return x / y; },
      [](double, double y, double) { return 1.0 / y; },
      [](double, double y, double z) { return -z / y; });
}

Tensor scale(const Tensor& x, double s) {
  return unary(
      x, "scale", [s](double v) { return s * v; },
      [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& x, double s) {
  return unary(
      x, "add_scalar", [s](double v) { return v + s; },
      [](double, double) { return 1.0; });
}

Tensor relu(const Tensor& x) {
  return unary(
      x, "relu", [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, "sigmoid",
      [](double v) {
        return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                        : std::exp(v) / (1.0 + std::exp(v));
      },
      [](double, double z) { return z * (1.0 - z); });
}

Tensor exp(const Tensor& x) {
  return unary(
      x, "exp", [](double v) { return std::exp(v); },
      [](double, double z) { return z; });
}

Tensor log(const Tensor& x) {
  for (double v : x.data()) {
    if (!(v > 0.0)) {
      throw DomainError("log: non-positive input " + std::to_string(v));
    }
  }
  return unary(
      x, "log", [](double v) { return std::log(v); },
      [](double v, double) { return 1.0 / v; });
}

Tensor square(const Tensor& x) {
  return unary(
      x, "square", [](double v) { return v * v; },
      [](double v, double) { return 2.0 * v; });
}

Tensor concat(const Tensor& a, const Tensor& b, std::size_t axis) {
  require_rank2(a, "concat");
  require_rank2(b, "concat");
  if (axis > 1) throw DimensionError("concat: axis must be 0 or 1");
  const std::size_t other = 1 - axis;
  if (a.shape()[other] != b.shape()[other]) {
    throw DimensionError("concat: shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ off axis " +
                         std::to_string(axis));
  }
  const std::size_t ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
  Shape shape = axis == 1 ? Shape{ra, ca + cb} : Shape{ra + rb, ca};
  const std::size_t oc = shape[1];
  std::vector<double> out(shape_numel(shape));
  const auto ad = a.data();
  const auto bd = b.data();
  // Block offsets of b inside the output.
  const std::size_t b_row0 = axis == 0 ? ra : 0;
  const std::size_t b_col0 = axis == 1 ? ca : 0;
  for (std::size_t i = 0; i < ra; ++i)
    for (std::size_t j = 0; j < ca; ++j) out[i * oc + j] = ad[i * ca + j];
  for (std::size_t i = 0; i < rb; ++i)
    for (std::size_t j = 0; j < cb; ++j)
      out[(b_row0 + i) * oc + b_col0 + j] = bd[i * cb + j];
  return make_op_result(
      std::move(shape), std::move(out), "concat", {a, b},
      [=](detail::Node& self) {
        double* ga = in_grad(self, 0);
        double* gb = in_grad(self, 1);
        const double* g = self.grad.data();
        if (ga)
          for (std::size_t i = 0; i < ra; ++i)
            for (std::size_t j = 0; j < ca; ++j) ga[i * ca + j] += g[i * oc + j];
        if (gb)
          for (std::size_t i = 0; i < rb; ++i)
            for (std::size_t j = 0; j < cb; ++j)
              gb[i * cb + j] += g[(b_row0 + i) * oc + b_col0 + j];
      });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin,
             std::size_t end) {
  require_rank2(x, "slice");
  if (axis > 1) throw DimensionError("slice: axis must be 0 or 1");
  if (begin >= end || end > x.shape()[axis]) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") invalid for " +
                         shape_str(x.shape()) + " axis " + std::to_string(axis));
  }
  const std::size_t r = x.rows(), c = x.cols();
  const std::size_t r0 = axis == 0 ? begin : 0, r1 = axis == 0 ? end : r;
  const std::size_t c0 = axis == 1 ? begin : 0, c1 = axis == 1 ? end : c;
  const std::size_t orows = r1 - r0, ocols = c1 - c0;
  const auto xd = x.data();
  std::vector<double> out(orows * ocols);
  for (std::size_t i = 0; i < orows; ++i)
    for (std::size_t j = 0; j < ocols; ++j)
      out[i * ocols + j] = xd[(r0 + i) * c + c0 + j];
  return make_op_result({orows, ocols}, std::move(out), "slice", {x},
                        [=](detail::Node& self) {
                          double* g = in_grad(self, 0);
                          for (std::size_t i = 0; i < orows; ++i)
                            for (std::size_t j = 0; j < ocols; ++j)
                              g[(r0 + i) * c + c0 + j] += self.grad[i * ocols + j];
                        });
}

namespace {

struct AxisLayout {
  std::size_t outer, extent, inner;
};

AxisLayout axis_layout(const Tensor& x, std::size_t axis, const char* op) {
  if (axis >= x.rank()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                         " out of range for " + shape_str(x.shape()));
  }
  const auto& s = x.shape();
  AxisLayout l{1, s[axis], 1};
  for (std::size_t i = 0; i < axis; ++i) l.outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) l.inner *= s[i];
  return l;
}

Shape reduced_shape(const Shape& s, std::size_t axis) {
  Shape r = s;
  r[axis] = 1;
  return r;
}

}  // namespace

Tensor sum(const Tensor& x) {
  const auto xd = x.data();
  double s = 0.0;
  for (double v : xd) s += v;
  return make_op_result({}, {s}, "sum", {x}, [](detail::Node& self) {
    double* g = in_grad(self, 0);
    const double go = self.grad[0];
    const std::size_t n = self.inputs[0]->data.size();
    for (std::size_t i = 0; i < n; ++i) g[i] += go;
  });
}

Tensor sum(const Tensor& x, std::size_t axis) {
  const auto l = axis_layout(x, axis, "sum");
  const auto xd = x.data();
  std::vector<double> out(l.outer * l.inner, 0.0);
  for (std::size_t o = 0; o < l.outer; ++o)
    for (std::size_t e = 0; e < l.extent; ++e)
      for (std::size_t i = 0; i < l.inner; ++i)
        out[o * l.inner + i] += xd[(o * l.extent + e) * l.inner + i];
  return make_op_result(reduced_shape(x.shape(), axis), std::move(out), "sum_axis",
                        {x}, [l](detail::Node& self) {
                          double* g = in_grad(self, 0);
                          for (std::size_t o = 0; o < l.outer; ++o)
                            for (std::size_t e = 0; e < l.extent; ++e)
                              for (std::size_t i = 0; i < l.inner; ++i)
                                g[(o * l.extent + e) * l.inner + i] +=
                                    self.grad[o * l.inner + i];
                        });
}

Tensor l2_norm(const Tensor& x) {
  const auto xd = x.data();
  double s = 0.0;
  for (double v : xd) s += v * v;
  const double norm = std::sqrt(s);
  if (norm == 0.0 && x.requires_grad()) {
    throw DegenerateError("l2_norm: gradient undefined for an all-zero input");
  }
  return make_op_result({}, {norm}, "l2_norm", {x}, [](detail::Node& self) {
    double* g = in_grad(self, 0);
    const double* xv = in_data(self, 0);
    const double go = self.grad[0] / self.data[0];
    const std::size_t n = self.inputs[0]->data.size();
    for (std::size_t i = 0; i < n; ++i) g[i] += go * xv[i];
  });
}

Tensor l2_norm(const Tensor& x, std::size_t axis) {
  const auto l = axis_layout(x, axis, "l2_norm");
  const auto xd = x.data();
  std::vector<double> out(l.outer * l.inner, 0.0);
  for (std::size_t o = 0; o < l.outer; ++o)
    for (std::size_t e = 0; e < l.extent; ++e)
      for (std::size_t i = 0; i < l.inner; ++i) {
        const double v = xd[(o * l.extent + e) * l.inner + i];
        out[o * l.inner + i] += v * v;
      }
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = std::sqrt(out[k]);
    if (out[k] == 0.0 && x.requires_grad()) {
      throw DegenerateError("l2_norm: slice " + std::to_string(k) +
                            " along axis " + std::to_string(axis) +
                            " is all-zero; gradient undefined");
    }
  }
  return make_op_result(reduced_shape(x.shape(), axis), std::move(out),
                        "l2_norm_axis", {x}, [l](detail::Node& self) {
                          double* g = in_grad(self, 0);
                          const double* xv = in_data(self, 0);
                          for (std::size_t o = 0; o < l.outer; ++o)
                            for (std::size_t i = 0; i < l.inner; ++i) {
                              const std::size_t k = o * l.inner + i;
                              const double go = self.grad[k] / self.data[k];
                              for (std::size_t e = 0; e < l.extent; ++e) {
                                const std::size_t idx = (o * l.extent + e) * l.inner + i;
                                g[idx] += go * xv[idx];
                              }
                            }
                        });
}

Tensor softmax_cross_entropy(const Tensor& logits,
                             std::span<const int> labels) {
  require_rank2(logits, "softmax_cross_entropy");
  const std::size_t b = logits.rows(), c = logits.cols();
  if (labels.size() != b) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(b) + " rows");
  }
  const auto z = logits.data();
  std::vector<double> probs(b * c);
  double loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= c) {
      throw ContractError("softmax_cross_entropy: label " + std::to_string(y) +
                          " outside [0, " + std::to_string(c) + ")");
    }
    const double* row = &z[i * c];
    const double mx = *std::max_element(row, row + c);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      probs[i * c + j] = std::exp(row[j] - mx);
      s += probs[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] /= s;
    loss += std::log(s) + mx - row[y];
  }
  loss /= static_cast<double>(b);
  std::vector<int> ys(labels.begin(), labels.end());
  return make_op_result(
      {}, {loss}, "softmax_cross_entropy", {logits},
      [b, c, probs = std::move(probs), ys = std::move(ys)](detail::Node& self) {
        double* g = in_grad(self, 0);
        const double go = self.grad[0] / static_cast<double>(b);
        for (std::size_t i = 0; i < b; ++i)
          for (std::size_t j = 0; j < c; ++j) {
            const double t = static_cast<std::size_t>(ys[i]) == j ? 1.0 : 0.0;
            g[i * c + j] += go * (probs[i * c + j] - t);
          }
      });
}

}  // namespace avcl
