#ifndef JSSP_AUTODIFF_HPP
#define JSSP_AUTODIFF_HPP

// Reverse-mode automatic differentiation over dense row-major matrices.
//
// A Tensor is a shared handle to a graph node holding its forward value and,
// once backward() has run, its gradient. Every tensor is two-dimensional;
// scalars are 1x1 and per-row quantities are r x 1. Binary elementwise ops
// broadcast their second operand when it is 1x1, 1 x cols or rows x 1.
//
// Masked ops take a boolean matrix of the operand's shape. Masked entries are
// skipped entirely: they produce exactly zero probability (softmax), exactly
// zero output (log-softmax), do not enter the log-sum-exp and receive zero
// gradient. Every row needs at least one unmasked entry.

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "jssp/error.hpp"
#include "jssp/rng.hpp"

namespace jssp::ad {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

namespace detail {

template <typename Scalar>
struct Node {
  Matrix<Scalar> value;
  Matrix<Scalar> grad;  // empty until a gradient arrives
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  template <typename Expr>
  void accumulate(const Expr& g) {
    if (grad.size() == 0) grad = Matrix<Scalar>::Zero(value.rows(), value.cols());
    grad += g;
  }
};

inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}

inline std::string shape_str(Index r, Index c) { return "(" + std::to_string(r) + "x" + std::to_string(c) + ")"; }

}  // namespace detail

// Disables graph recording on this thread, e.g. for evaluation rollouts.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_mode()) { detail::grad_mode() = false; }
  ~NoGradGuard() { detail::grad_mode() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <typename Scalar>
class Tensor {
 public:
  using Node = detail::Node<Scalar>;
  using Mat = Matrix<Scalar>;

  Tensor() = default;

  static Tensor constant(Mat value) {
    Tensor t;
    t.node_ = std::make_shared<Node>();
    t.node_->value = std::move(value);
    return t;
  }
  static Tensor parameter(Mat value) {
    Tensor t = constant(std::move(value));
    t.node_->requires_grad = true;
    return t;
  }
  static Tensor scalar(Scalar v) { return constant(Mat::Constant(1, 1, v)); }

  bool defined() const { return node_ != nullptr; }
  const Mat& value() const { return node_->value; }
  Mat& mutable_value() { return node_->value; }
  // Zero-sized until backward() reaches this tensor.
  const Mat& grad() const { return node_->grad; }
  bool has_grad() const { return node_->grad.size() != 0; }
  void zero_grad() { node_->grad.resize(0, 0); }
  bool requires_grad() const { return node_->requires_grad; }
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  Scalar item() const {
    if (rows() != 1 || cols() != 1) throw ShapeError("item() needs a 1x1 tensor");
    return node_->value(0, 0);
  }
  // Same value, cut from the graph.
  Tensor detach() const { return constant(value()); }

  const std::shared_ptr<Node>& node() const { return node_; }

  // Builds a result node; the backward closure is kept only when gradients
  // are enabled and some parent needs them.
  static Tensor make(Mat value, std::vector<std::shared_ptr<Node>> parents, std::function<void(Node&)> backward) {
    Tensor t = constant(std::move(value));
    bool needs = false;
    if (detail::grad_mode())
      for (const auto& p : parents) needs = needs || p->requires_grad;
    if (needs) {
      t.node_->requires_grad = true;
      t.node_->parents = std::move(parents);
      t.node_->backward = std::move(backward);
    }
    return t;
  }

 private:
  std::shared_ptr<Node> node_;
};

// Populates gradients of every tensor reachable from a 1x1 loss. Parameter
// (leaf) gradients accumulate across calls until zero_grad().
template <typename Scalar>
void backward(const Tensor<Scalar>& loss) {
  using Node = detail::Node<Scalar>;
  if (loss.rows() != 1 || loss.cols() != 1)
    throw ShapeError("backward needs a scalar loss, got " + detail::shape_str(loss.rows(), loss.cols()));
  if (!loss.requires_grad()) return;

  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node().get(), 0}};
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : order)
    if (n->backward) n->grad.resize(0, 0);
  loss.node()->accumulate(Matrix<Scalar>::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward && n->grad.size() != 0) n->backward(*n);
  }
}

namespace detail {

enum class Broadcast { Same, Scalar, Row, Col };

template <typename Scalar>
Broadcast broadcast_kind(const Matrix<Scalar>& a, const Matrix<Scalar>& b, const char* op) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::Same;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::Scalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::Row;
  if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::Col;
  throw ShapeError(std::string(op) + ": cannot broadcast " + shape_str(b.rows(), b.cols()) + " onto " +
                   shape_str(a.rows(), a.cols()));
}

// a (op) b with b broadcast according to `kind`; op is '+', '-' or '*'.
template <typename Scalar>
Matrix<Scalar> broadcast(const Matrix<Scalar>& a, const Matrix<Scalar>& b, Broadcast kind, char op) {
  Matrix<Scalar> out = a;
  auto arr = out.array();
  switch (kind) {
    case Broadcast::Same:
      if (op == '+') arr += b.array();
      else if (op == '-') arr -= b.array();
      else arr *= b.array();
      break;
    case Broadcast::Scalar:
      if (op == '+') arr += b(0, 0);
      else if (op == '-') arr -= b(0, 0);
      else arr *= b(0, 0);
      break;
    case Broadcast::Row:
      if (op == '+') arr.rowwise() += b.row(0).array();
      else if (op == '-') arr.rowwise() -= b.row(0).array();
      else arr.rowwise() *= b.row(0).array();
      break;
    case Broadcast::Col:
      if (op == '+') arr.colwise() += b.col(0).array();
      else if (op == '-') arr.colwise() -= b.col(0).array();
      else arr.colwise() *= b.col(0).array();
      break;
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> reduce(const Matrix<Scalar>& g, Broadcast kind) {
  switch (kind) {
    case Broadcast::Same: return g;
    case Broadcast::Scalar: return Matrix<Scalar>::Constant(1, 1, g.sum());
    case Broadcast::Row: return g.colwise().sum();
    case Broadcast::Col: return g.rowwise().sum();
  }
  return g;
}

inline void check_mask(const Mask& mask, Index rows, Index cols, const char* op) {
  if (mask.rows() != rows || mask.cols() != cols)
    throw ShapeError(std::string(op) + ": mask shape " + shape_str(mask.rows(), mask.cols()) + " does not match " +
                     shape_str(rows, cols));
  for (Index r = 0; r < rows; ++r)
    if (!mask.row(r).any()) throw MaskError(std::string(op) + ": row " + std::to_string(r) + " is fully masked");
}

// Row-wise masked softmax; masked entries are exactly zero.
template <typename Scalar>
Matrix<Scalar> masked_softmax_value(const Matrix<Scalar>& x, const Mask& mask) {
  Matrix<Scalar> out = Matrix<Scalar>::Zero(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    Scalar mx = -std::numeric_limits<Scalar>::infinity();
    for (Index c = 0; c < x.cols(); ++c)
      if (mask(r, c)) mx = std::max(mx, x(r, c));
    Scalar total = 0;
    for (Index c = 0; c < x.cols(); ++c)
      if (mask(r, c)) total += (out(r, c) = std::exp(x(r, c) - mx));
    out.row(r) /= total;
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> masked_logsumexp_value(const Matrix<Scalar>& x, const Mask& mask) {
  Matrix<Scalar> out(x.rows(), 1);
  for (Index r = 0; r < x.rows(); ++r) {
    Scalar mx = -std::numeric_limits<Scalar>::infinity();
    for (Index c = 0; c < x.cols(); ++c)
      if (mask(r, c)) mx = std::max(mx, x(r, c));
    Scalar total = 0;
    for (Index c = 0; c < x.cols(); ++c)
      if (mask(r, c)) total += std::exp(x(r, c) - mx);
    out(r, 0) = mx + std::log(total);
  }
  return out;
}

}  // namespace detail

template <typename Scalar>
Tensor<Scalar> add(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  const auto kind = detail::broadcast_kind(a.value(), b.value(), "add");
  Matrix<Scalar> out = detail::broadcast(a.value(), b.value(), kind, '+');
  return Tensor<Scalar>::make(std::move(out), {a.node(), b.node()}, [kind](auto& n) {
    if (n.parents[0]->requires_grad) n.parents[0]->accumulate(n.grad);
    if (n.parents[1]->requires_grad) n.parents[1]->accumulate(detail::reduce(n.grad, kind));
  });
}

template <typename Scalar>
Tensor<Scalar> sub(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  const auto kind = detail::broadcast_kind(a.value(), b.value(), "sub");
  Matrix<Scalar> out = detail::broadcast(a.value(), b.value(), kind, '-');
  return Tensor<Scalar>::make(std::move(out), {a.node(), b.node()}, [kind](auto& n) {
    if (n.parents[0]->requires_grad) n.parents[0]->accumulate(n.grad);
    if (n.parents[1]->requires_grad) n.parents[1]->accumulate(-detail::reduce(n.grad, kind));
  });
}

// Elementwise product.
template <typename Scalar>
Tensor<Scalar> mul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  const auto kind = detail::broadcast_kind(a.value(), b.value(), "mul");
  Matrix<Scalar> out = detail::broadcast(a.value(), b.value(), kind, '*');
  return Tensor<Scalar>::make(std::move(out), {a.node(), b.node()}, [kind](auto& n) {
    if (n.parents[0]->requires_grad)
      n.parents[0]->accumulate(detail::broadcast(n.grad, n.parents[1]->value, kind, '*'));
    if (n.parents[1]->requires_grad)
      n.parents[1]->accumulate(detail::reduce<Scalar>(n.grad.cwiseProduct(n.parents[0]->value), kind));
  });
}

template <typename Scalar>
Tensor<Scalar> scale(const Tensor<Scalar>& a, Scalar s) {
  return Tensor<Scalar>::make(a.value() * s, {a.node()}, [s](auto& n) { n.parents[0]->accumulate(n.grad * s); });
}

template <typename Scalar>
Tensor<Scalar> add_scalar(const Tensor<Scalar>& a, Scalar s) {
  Matrix<Scalar> out = a.value().array() + s;
  return Tensor<Scalar>::make(std::move(out), {a.node()}, [](auto& n) { n.parents[0]->accumulate(n.grad); });
}

template <typename Scalar>
Tensor<Scalar> matmul(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: " + detail::shape_str(a.rows(), a.cols()) + " x " + detail::shape_str(b.rows(), b.cols()));
  Matrix<Scalar> out = a.value() * b.value();
  return Tensor<Scalar>::make(std::move(out), {a.node(), b.node()}, [](auto& n) {
    auto& a = *n.parents[0];
    auto& b = *n.parents[1];
    if (a.requires_grad) a.accumulate(n.grad * b.value.transpose());
    if (b.requires_grad) b.accumulate(a.value.transpose() * n.grad);
  });
}

template <typename Scalar>
Tensor<Scalar> relu(const Tensor<Scalar>& a) {
  Matrix<Scalar> out = a.value().cwiseMax(Scalar(0));
  return Tensor<Scalar>::make(std::move(out), {a.node()}, [](auto& n) {
    n.parents[0]->accumulate((n.parents[0]->value.array() > Scalar(0)).select(n.grad, Scalar(0)));
  });
}

template <typename Scalar>
Tensor<Scalar> exp(const Tensor<Scalar>& a) {
  Matrix<Scalar> out = a.value().array().exp();
  return Tensor<Scalar>::make(out, {a.node()}, [out](auto& n) { n.parents[0]->accumulate(n.grad.cwiseProduct(out)); });
}

// Inverted dropout: kept entries are scaled by 1/(1-p) during training, so
// evaluation (train == false) is the identity.
template <typename Scalar>
Tensor<Scalar> dropout(const Tensor<Scalar>& a, double p, bool train, Rng& rng) {
  if (!train || p <= 0.0) return a;
  if (p >= 1.0) return scale(a, Scalar(0));
  const Scalar keep_scale = Scalar(1.0 / (1.0 - p));
  Matrix<Scalar> factor(a.rows(), a.cols());
  for (Index i = 0; i < factor.size(); ++i) factor.data()[i] = rng.uniform() < p ? Scalar(0) : keep_scale;
  Matrix<Scalar> out = a.value().cwiseProduct(factor);
  return Tensor<Scalar>::make(std::move(out), {a.node()}, [factor = std::move(factor)](auto& n) {
    n.parents[0]->accumulate(n.grad.cwiseProduct(factor));
  });
}

template <typename Scalar>
Tensor<Scalar> sum(const Tensor<Scalar>& a) {
  return Tensor<Scalar>::make(Matrix<Scalar>::Constant(1, 1, a.value().sum()), {a.node()}, [](auto& n) {
    const auto& v = n.parents[0]->value;
    n.parents[0]->accumulate(Matrix<Scalar>::Constant(v.rows(), v.cols(), n.grad(0, 0)));
  });
}

template <typename Scalar>
Tensor<Scalar> mean(const Tensor<Scalar>& a) {
  if (a.value().size() == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(a), Scalar(1) / static_cast<Scalar>(a.value().size()));
}

template <typename Scalar>
Tensor<Scalar> row_sum(const Tensor<Scalar>& a) {
  Matrix<Scalar> out = a.value().rowwise().sum();
  return Tensor<Scalar>::make(std::move(out), {a.node()},
                              [](auto& n) { n.parents[0]->accumulate(n.grad.replicate(1, n.parents[0]->value.cols())); });
}

template <typename Scalar>
Tensor<Scalar> row_mean(const Tensor<Scalar>& a) {
  return scale(row_sum(a), Scalar(1) / static_cast<Scalar>(a.cols()));
}

// out.row(s) = sum of a.row(i) over i with segment_ids[i] == s.
template <typename Scalar>
Tensor<Scalar> sum_segments(const Tensor<Scalar>& a, std::span<const Index> segment_ids, Index num_segments) {
  if (static_cast<Index>(segment_ids.size()) != a.rows())
    throw ShapeError("sum_segments: " + std::to_string(segment_ids.size()) + " ids for " + std::to_string(a.rows()) +
                     " rows");
  Matrix<Scalar> out = Matrix<Scalar>::Zero(num_segments, a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    const Index s = segment_ids[i];
    if (s < 0 || s >= num_segments) throw ShapeError("sum_segments: segment id out of range");
    out.row(s) += a.value().row(i);
  }
  std::vector<Index> ids(segment_ids.begin(), segment_ids.end());
  return Tensor<Scalar>::make(std::move(out), {a.node()}, [ids = std::move(ids)](auto& n) {
    auto& p = *n.parents[0];
    if (p.grad.size() == 0) p.grad = Matrix<Scalar>::Zero(p.value.rows(), p.value.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) p.grad.row(static_cast<Index>(i)) += n.grad.row(ids[i]);
  });
}

template <typename Scalar>
Tensor<Scalar> gather_rows(const Tensor<Scalar>& a, std::span<const Index> rows) {
  Matrix<Scalar> out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows()) throw ShapeError("gather_rows: row index out of range");
    out.row(static_cast<Index>(i)) = a.value().row(rows[i]);
  }
  std::vector<Index> idx(rows.begin(), rows.end());
  return Tensor<Scalar>::make(std::move(out), {a.node()}, [idx = std::move(idx)](auto& n) {
    auto& p = *n.parents[0];
    if (p.grad.size() == 0) p.grad = Matrix<Scalar>::Zero(p.value.rows(), p.value.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) p.grad.row(idx[i]) += n.grad.row(static_cast<Index>(i));
  });
}

// out(r, 0) = a(r, cols[r]).
template <typename Scalar>
Tensor<Scalar> pick(const Tensor<Scalar>& a, std::span<const Index> cols) {
  if (static_cast<Index>(cols.size()) != a.rows()) throw ShapeError("pick: one column index per row required");
  Matrix<Scalar> out(a.rows(), 1);
  for (Index r = 0; r < a.rows(); ++r) {
    if (cols[r] < 0 || cols[r] >= a.cols()) throw ShapeError("pick: column index out of range");
    out(r, 0) = a.value()(r, cols[r]);
  }
  std::vector<Index> idx(cols.begin(), cols.end());
  return Tensor<Scalar>::make(std::move(out), {a.node()}, [idx = std::move(idx)](auto& n) {
    auto& p = *n.parents[0];
    if (p.grad.size() == 0) p.grad = Matrix<Scalar>::Zero(p.value.rows(), p.value.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) p.grad(static_cast<Index>(r), idx[r]) += n.grad(static_cast<Index>(r), 0);
  });
}

template <typename Scalar>
Tensor<Scalar> concat_cols(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.rows() != b.rows()) throw ShapeError("concat_cols: row counts differ");
  Matrix<Scalar> out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  const Index split = a.cols();
  return Tensor<Scalar>::make(std::move(out), {a.node(), b.node()}, [split](auto& n) {
    if (n.parents[0]->requires_grad) n.parents[0]->accumulate(n.grad.leftCols(split));
    if (n.parents[1]->requires_grad) n.parents[1]->accumulate(n.grad.rightCols(n.grad.cols() - split));
  });
}

// Row-major reinterpretation.
template <typename Scalar>
Tensor<Scalar> reshape(const Tensor<Scalar>& a, Index rows, Index cols) {
  if (rows * cols != a.value().size())
    throw ShapeError("reshape: " + detail::shape_str(a.rows(), a.cols()) + " to " + detail::shape_str(rows, cols));
  Matrix<Scalar> out = Eigen::Map<const Matrix<Scalar>>(a.value().data(), rows, cols);
  return Tensor<Scalar>::make(std::move(out), {a.node()}, [](auto& n) {
    auto& p = *n.parents[0];
    p.accumulate(Eigen::Map<const Matrix<Scalar>>(n.grad.data(), p.value.rows(), p.value.cols()));
  });
}

// Elementwise Huber: u^2/2 for |u| <= kappa, kappa (|u| - kappa/2) beyond.
template <typename Scalar>
Tensor<Scalar> huber(const Tensor<Scalar>& a, Scalar kappa) {
  Matrix<Scalar> out(a.rows(), a.cols());
  Matrix<Scalar> slope(a.rows(), a.cols());
  for (Index i = 0; i < out.size(); ++i) {
    const Scalar u = a.value().data()[i];
    if (std::abs(u) <= kappa) {
      out.data()[i] = Scalar(0.5) * u * u;
      slope.data()[i] = u;
    } else {
      out.data()[i] = kappa * (std::abs(u) - Scalar(0.5) * kappa);
      slope.data()[i] = u > 0 ? kappa : -kappa;
    }
  }
  return Tensor<Scalar>::make(std::move(out), {a.node()}, [slope = std::move(slope)](auto& n) {
    n.parents[0]->accumulate(n.grad.cwiseProduct(slope));
  });
}

template <typename Scalar>
Tensor<Scalar> softmax_masked(const Tensor<Scalar>& a, const Mask& mask) {
  detail::check_mask(mask, a.rows(), a.cols(), "softmax_masked");
  Matrix<Scalar> y = detail::masked_softmax_value(a.value(), mask);
  return Tensor<Scalar>::make(y, {a.node()}, [y](auto& n) {
    // dx = y * (g - <y, g>) per row; y is zero at masked entries.
    Matrix<Scalar> dot = n.grad.cwiseProduct(y).rowwise().sum();
    n.parents[0]->accumulate(y.cwiseProduct(n.grad - dot.replicate(1, y.cols())));
  });
}

template <typename Scalar>
Tensor<Scalar> log_softmax_masked(const Tensor<Scalar>& a, const Mask& mask) {
  detail::check_mask(mask, a.rows(), a.cols(), "log_softmax_masked");
  const Matrix<Scalar> lse = detail::masked_logsumexp_value(a.value(), mask);
  Matrix<Scalar> out = Matrix<Scalar>::Zero(a.rows(), a.cols());
  for (Index r = 0; r < a.rows(); ++r)
    for (Index c = 0; c < a.cols(); ++c)
      if (mask(r, c)) out(r, c) = a.value()(r, c) - lse(r, 0);
  Matrix<Scalar> y = detail::masked_softmax_value(a.value(), mask);
  return Tensor<Scalar>::make(std::move(out), {a.node()}, [y = std::move(y), mask](auto& n) {
    Matrix<Scalar> g = mask.select(n.grad, Scalar(0));
    Matrix<Scalar> total = g.rowwise().sum();
    n.parents[0]->accumulate(g - y.cwiseProduct(total.replicate(1, y.cols())));
  });
}

// Row-wise log-sum-exp over unmasked entries; result is rows x 1.
template <typename Scalar>
Tensor<Scalar> logsumexp_masked(const Tensor<Scalar>& a, const Mask& mask) {
  detail::check_mask(mask, a.rows(), a.cols(), "logsumexp_masked");
  Matrix<Scalar> out = detail::masked_logsumexp_value(a.value(), mask);
  Matrix<Scalar> y = detail::masked_softmax_value(a.value(), mask);
  return Tensor<Scalar>::make(std::move(out), {a.node()}, [y = std::move(y)](auto& n) {
    n.parents[0]->accumulate(y.cwiseProduct(n.grad.replicate(1, y.cols())));
  });
}

// Adam with bias correction; `step` counts from 1.
template <typename Scalar>
void adam_update(Matrix<Scalar>& param, const Matrix<Scalar>& grad, Matrix<Scalar>& m, Matrix<Scalar>& v, double lr,
                 double beta1, double beta2, double eps, long step) {
  m = Scalar(beta1) * m + Scalar(1 - beta1) * grad;
  v = Scalar(beta2) * v + Scalar(1 - beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  const Scalar step_size = Scalar(lr / c1);
  const Scalar root_c2 = Scalar(std::sqrt(c2));
  param.array() -= step_size * m.array() / ((v.array().sqrt() / root_c2) + Scalar(eps));
}

struct AdamConfig {
  double lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Optimizer over a fixed parameter group. Parameters that received no
// gradient in a step are left untouched.
template <typename Scalar>
class Adam {
 public:
  Adam(std::vector<Tensor<Scalar>> params, AdamConfig config) : params_(std::move(params)), config_(config) {
    for (const auto& p : params_) {
      m_.push_back(Matrix<Scalar>::Zero(p.rows(), p.cols()));
      v_.push_back(Matrix<Scalar>::Zero(p.rows(), p.cols()));
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  void step() {
    ++step_;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (!params_[i].has_grad()) continue;
      adam_update(params_[i].mutable_value(), params_[i].grad(), m_[i], v_[i], config_.lr, config_.beta1, config_.beta2,
                  config_.eps, step_);
    }
  }

  long steps() const { return step_; }
  const AdamConfig& config() const { return config_; }

 private:
  std::vector<Tensor<Scalar>> params_;
  AdamConfig config_;
  std::vector<Matrix<Scalar>> m_, v_;
  long step_ = 0;
};

}  // namespace jssp::ad

#endif  // JSSP_AUTODIFF_HPP
