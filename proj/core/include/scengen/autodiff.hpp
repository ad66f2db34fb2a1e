#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace scengen::ad {

/// A named trainable matrix. The gradient buffer persists across steps and
/// is accumulated into by Tape::backward; the optimizer zeroes it.
struct Parameter {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)),
        value(Eigen::MatrixXd::Zero(rows, cols)),
        grad(Eigen::MatrixXd::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

/// Handle to a node on a Tape. Valid until the owning tape is cleared.
struct Var {
  int node = -1;

  bool valid() const { return node >= 0; }
};

/// Reverse-mode automatic differentiation over dense double matrices.
/// Operations record their backward rule as a closure; backward() replays
/// them in reverse and accumulates gradients into Parameter::grad for
/// parameter leaves. Build one expression per tape use, call backward once,
/// then clear(). Not thread-safe; use one tape per thread.
class Tape {
 public:
  /// Constant leaf; never receives a gradient.
  Var constant(Eigen::MatrixXd value);
  /// Trainable leaf bound to p; backward adds into p.grad. The parameter
  /// must outlive the tape's current expression.
  Var param(Parameter& p);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  /// a + row broadcast down / a * row broadcast down. r is 1 x cols(a).
  Var add_rowvec(Var a, Var r);
  Var mul_rowvec(Var a, Var r);
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);

  Var sigmoid(Var a);
  Var tanh(Var a);
  Var gelu(Var a);  // exact erf form
  Var exp(Var a);
  Var square(Var a);
  Var clamp(Var a, double lo, double hi);

  Var transpose(Var a);
  /// Row-wise softmax of (a * factor). factor folds in attention scaling.
  Var softmax_rows(Var a, double factor = 1.0);
  /// Row-wise standardization (zero mean, unit variance per row), no affine.
  Var layer_norm(Var a, double eps = 1e-5);

  Var concat_cols(const std::vector<Var>& parts);
  Var concat_rows(const std::vector<Var>& parts);
  Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
  Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
  /// out.row(i) = a.row(index[i]); duplicate indices accumulate on backward.
  Var gather_rows(Var a, std::vector<int> index);
  /// Mean over each contiguous group of group_size rows; rows(a) must divide.
  Var mean_pool_rows(Var a, Eigen::Index group_size);

  Var sum_all(Var a);   // 1x1
  Var mean_all(Var a);  // 1x1

  const Eigen::MatrixXd& value(Var v) const;
  const Eigen::MatrixXd& grad(Var v) const;
  Eigen::Index rows(Var v) const { return value(v).rows(); }
  Eigen::Index cols(Var v) const { return value(v).cols(); }

  /// Seeds d(root)/d(root) = 1 (root must be 1x1) and propagates backward.
  void backward(Var root);

  /// Drops all nodes, keeping buffer capacity for reuse.
  void clear();
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;  // empty until first accumulation
    bool needs_grad = false;
    std::function<void()> back;  // set only when needs_grad
  };

  Var push(Eigen::MatrixXd value, bool needs_grad, std::function<void()> back);
  Eigen::MatrixXd& grad_buf(int node);  // allocates zeros on demand
  const Node& at(Var v) const;

  std::vector<Node> nodes_;
};

}  // namespace scengen::ad
