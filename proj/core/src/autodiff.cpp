#include "scengen/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace scengen::ad {
namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

void check_same_shape(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string("autodiff: shape mismatch in ") + op);
}

}  // namespace

Var Tape::push(Eigen::MatrixXd value, bool needs_grad, std::function<void()> back) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Eigen::MatrixXd& Tape::grad_buf(int node) {
  Node& n = nodes_[static_cast<std::size_t>(node)];
  if (n.grad.size() == 0) n.grad = Eigen::MatrixXd::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

const Tape::Node& Tape::at(Var v) const {
  if (v.node < 0 || v.node >= static_cast<int>(nodes_.size()))
    throw std::out_of_range("autodiff: invalid Var");
  return nodes_[static_cast<std::size_t>(v.node)];
}

const Eigen::MatrixXd& Tape::value(Var v) const { return at(v).value; }

const Eigen::MatrixXd& Tape::grad(Var v) const {
  const Node& n = at(v);
  if (n.grad.size() == 0)
    throw std::logic_error("autodiff: gradient not populated; run backward first");
  return n.grad;
}

Var Tape::constant(Eigen::MatrixXd value) { return push(std::move(value), false, {}); }

Var Tape::param(Parameter& p) {
  if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols())
    p.grad = Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols());
  Var out = push(p.value, true, {});
  Parameter* pp = &p;
  const int self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, pp, self] {
    pp->grad += nodes_[static_cast<std::size_t>(self)].grad;
  };
  return out;
}

Var Tape::matmul(Var a, Var b) {
  const Eigen::MatrixXd& va = value(a);
  const Eigen::MatrixXd& vb = value(b);
  if (va.cols() != vb.rows()) throw std::invalid_argument("autodiff: matmul inner dims");
  const bool ng = at(a).needs_grad || at(b).needs_grad;
  Var out = push(va * vb, ng, {});
  if (!ng) return out;
  const int ia = a.node, ib = b.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, ib, self] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    if (nodes_[static_cast<std::size_t>(ia)].needs_grad)
      grad_buf(ia) += g * nodes_[static_cast<std::size_t>(ib)].value.transpose();
    if (nodes_[static_cast<std::size_t>(ib)].needs_grad)
      grad_buf(ib) += nodes_[static_cast<std::size_t>(ia)].value.transpose() * g;
  };
  return out;
}

Var Tape::add(Var a, Var b) {
  check_same_shape(value(a), value(b), "add");
  const bool ng = at(a).needs_grad || at(b).needs_grad;
  Var out = push(value(a) + value(b), ng, {});
  if (!ng) return out;
  const int ia = a.node, ib = b.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, ib, self] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    if (nodes_[static_cast<std::size_t>(ia)].needs_grad) grad_buf(ia) += g;
    if (nodes_[static_cast<std::size_t>(ib)].needs_grad) grad_buf(ib) += g;
  };
  return out;
}

Var Tape::sub(Var a, Var b) {
  check_same_shape(value(a), value(b), "sub");
  const bool ng = at(a).needs_grad || at(b).needs_grad;
  Var out = push(value(a) - value(b), ng, {});
  if (!ng) return out;
  const int ia = a.node, ib = b.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, ib, self] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    if (nodes_[static_cast<std::size_t>(ia)].needs_grad) grad_buf(ia) += g;
    if (nodes_[static_cast<std::size_t>(ib)].needs_grad) grad_buf(ib) -= g;
  };
  return out;
}

Var Tape::mul(Var a, Var b) {
  check_same_shape(value(a), value(b), "mul");
  const bool ng = at(a).needs_grad || at(b).needs_grad;
  Var out = push(value(a).cwiseProduct(value(b)), ng, {});
  if (!ng) return out;
  const int ia = a.node, ib = b.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, ib, self] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    if (nodes_[static_cast<std::size_t>(ia)].needs_grad)
      grad_buf(ia) += g.cwiseProduct(nodes_[static_cast<std::size_t>(ib)].value);
    if (nodes_[static_cast<std::size_t>(ib)].needs_grad)
      grad_buf(ib) += g.cwiseProduct(nodes_[static_cast<std::size_t>(ia)].value);
  };
  return out;
}

Var Tape::add_rowvec(Var a, Var r) {
  const Eigen::MatrixXd& va = value(a);
  const Eigen::MatrixXd& vr = value(r);
  if (vr.rows() != 1 || vr.cols() != va.cols())
    throw std::invalid_argument("autodiff: add_rowvec shape");
  const bool ng = at(a).needs_grad || at(r).needs_grad;
  Eigen::MatrixXd v = va;
  v.rowwise() += vr.row(0);
  Var out = push(std::move(v), ng, {});
  if (!ng) return out;
  const int ia = a.node, ir = r.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, ir, self] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    if (nodes_[static_cast<std::size_t>(ia)].needs_grad) grad_buf(ia) += g;
    if (nodes_[static_cast<std::size_t>(ir)].needs_grad)
      grad_buf(ir) += g.colwise().sum();
  };
  return out;
}

Var Tape::mul_rowvec(Var a, Var r) {
  const Eigen::MatrixXd& va = value(a);
  const Eigen::MatrixXd& vr = value(r);
  if (vr.rows() != 1 || vr.cols() != va.cols())
    throw std::invalid_argument("autodiff: mul_rowvec shape");
  const bool ng = at(a).needs_grad || at(r).needs_grad;
  Eigen::MatrixXd v = va.array().rowwise() * vr.row(0).array();
  Var out = push(std::move(v), ng, {});
  if (!ng) return out;
  const int ia = a.node, ir = r.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, ir, self] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    const Eigen::MatrixXd& xa = nodes_[static_cast<std::size_t>(ia)].value;
    const Eigen::MatrixXd& xr = nodes_[static_cast<std::size_t>(ir)].value;
    if (nodes_[static_cast<std::size_t>(ia)].needs_grad)
      grad_buf(ia) += (g.array().rowwise() * xr.row(0).array()).matrix();
    if (nodes_[static_cast<std::size_t>(ir)].needs_grad)
      grad_buf(ir) += g.cwiseProduct(xa).colwise().sum();
  };
  return out;
}

Var Tape::scale(Var a, double c) {
  const bool ng = at(a).needs_grad;
  Var out = push(value(a) * c, ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self, c] {
    grad_buf(ia) += nodes_[static_cast<std::size_t>(self)].grad * c;
  };
  return out;
}

Var Tape::add_scalar(Var a, double c) {
  const bool ng = at(a).needs_grad;
  Var out = push(value(a).array() + c, ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self] {
    grad_buf(ia) += nodes_[static_cast<std::size_t>(self)].grad;
  };
  return out;
}

Var Tape::sigmoid(Var a) {
  const bool ng = at(a).needs_grad;
  Eigen::MatrixXd y = (1.0 / (1.0 + (-value(a).array()).exp())).matrix();
  Var out = push(std::move(y), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    const auto y = nodes_[static_cast<std::size_t>(self)].value.array();
    grad_buf(ia) += (g.array() * y * (1.0 - y)).matrix();
  };
  return out;
}

Var Tape::tanh(Var a) {
  const bool ng = at(a).needs_grad;
  Var out = push(value(a).array().tanh().matrix(), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    const auto y = nodes_[static_cast<std::size_t>(self)].value.array();
    grad_buf(ia) += (g.array() * (1.0 - y * y)).matrix();
  };
  return out;
}

Var Tape::gelu(Var a) {
  const bool ng = at(a).needs_grad;
  const auto gauss_cdf = [](double x) {
    return 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  };
  Eigen::MatrixXd y = value(a).unaryExpr(
      [&](double x) { return x * gauss_cdf(x); });
  Var out = push(std::move(y), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self, gauss_cdf] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    const auto x = nodes_[static_cast<std::size_t>(ia)].value.array();
    const auto cdf = nodes_[static_cast<std::size_t>(ia)].value.unaryExpr(gauss_cdf).array();
    const auto pdf = kInvSqrt2Pi * (-0.5 * x * x).exp();
    grad_buf(ia) += (g.array() * (cdf + x * pdf)).matrix();
  };
  return out;
}

Var Tape::exp(Var a) {
  const bool ng = at(a).needs_grad;
  Var out = push(value(a).array().exp().matrix(), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    grad_buf(ia) += g.cwiseProduct(nodes_[static_cast<std::size_t>(self)].value);
  };
  return out;
}

Var Tape::square(Var a) {
  const bool ng = at(a).needs_grad;
  Var out = push(value(a).array().square().matrix(), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    grad_buf(ia) += 2.0 * g.cwiseProduct(nodes_[static_cast<std::size_t>(ia)].value);
  };
  return out;
}

Var Tape::clamp(Var a, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("autodiff: clamp bounds");
  const bool ng = at(a).needs_grad;
  Var out = push(value(a).array().max(lo).min(hi).matrix(), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self, lo, hi] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    const auto x = nodes_[static_cast<std::size_t>(ia)].value.array();
    const auto pass = (x > lo && x < hi).cast<double>();
    grad_buf(ia) += (g.array() * pass).matrix();
  };
  return out;
}

Var Tape::transpose(Var a) {
  const bool ng = at(a).needs_grad;
  Var out = push(value(a).transpose(), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self] {
    grad_buf(ia) += nodes_[static_cast<std::size_t>(self)].grad.transpose();
  };
  return out;
}

Var Tape::softmax_rows(Var a, double factor) {
  const bool ng = at(a).needs_grad;
  Eigen::MatrixXd y = value(a) * factor;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double m = y.row(i).maxCoeff();
    y.row(i) = (y.row(i).array() - m).exp();
    y.row(i) /= y.row(i).sum();
  }
  Var out = push(std::move(y), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self, factor] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    const Eigen::MatrixXd& y = nodes_[static_cast<std::size_t>(self)].value;
    Eigen::MatrixXd& ga = grad_buf(ia);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double dot = g.row(i).dot(y.row(i));
      ga.row(i) += factor * (y.row(i).array() * (g.row(i).array() - dot)).matrix();
    }
  };
  return out;
}

Var Tape::layer_norm(Var a, double eps) {
  const Eigen::MatrixXd& x = value(a);
  const bool ng = at(a).needs_grad;
  Eigen::MatrixXd y(x.rows(), x.cols());
  Eigen::VectorXd inv_std(x.rows());
  const double n = static_cast<double>(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).mean();
    const double var = (x.row(i).array() - m).square().sum() / n;
    inv_std(i) = 1.0 / std::sqrt(var + eps);
    y.row(i) = (x.row(i).array() - m) * inv_std(i);
  }
  Var out = push(std::move(y), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self, inv_std, n] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    const Eigen::MatrixXd& y = nodes_[static_cast<std::size_t>(self)].value;
    Eigen::MatrixXd& ga = grad_buf(ia);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double gm = g.row(i).mean();
      const double gy = g.row(i).cwiseProduct(y.row(i)).sum() / n;
      ga.row(i) += inv_std(i) * (g.row(i).array() - gm - y.row(i).array() * gy).matrix();
    }
  };
  return out;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("autodiff: concat of nothing");
  const Eigen::Index r = value(parts[0]).rows();
  Eigen::Index total = 0;
  bool ng = false;
  for (Var p : parts) {
    if (value(p).rows() != r) throw std::invalid_argument("autodiff: concat_cols rows");
    total += value(p).cols();
    ng = ng || at(p).needs_grad;
  }
  Eigen::MatrixXd v(r, total);
  Eigen::Index off = 0;
  for (Var p : parts) {
    v.middleCols(off, value(p).cols()) = value(p);
    off += value(p).cols();
  }
  Var out = push(std::move(v), ng, {});
  if (!ng) return out;
  std::vector<int> idx;
  for (Var p : parts) idx.push_back(p.node);
  const int self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, idx, self] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    Eigen::Index off = 0;
    for (int i : idx) {
      const Eigen::Index c = nodes_[static_cast<std::size_t>(i)].value.cols();
      if (nodes_[static_cast<std::size_t>(i)].needs_grad)
        grad_buf(i) += g.middleCols(off, c);
      off += c;
    }
  };
  return out;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("autodiff: concat of nothing");
  const Eigen::Index c = value(parts[0]).cols();
  Eigen::Index total = 0;
  bool ng = false;
  for (Var p : parts) {
    if (value(p).cols() != c) throw std::invalid_argument("autodiff: concat_rows cols");
    total += value(p).rows();
    ng = ng || at(p).needs_grad;
  }
  Eigen::MatrixXd v(total, c);
  Eigen::Index off = 0;
  for (Var p : parts) {
    v.middleRows(off, value(p).rows()) = value(p);
    off += value(p).rows();
  }
  Var out = push(std::move(v), ng, {});
  if (!ng) return out;
  std::vector<int> idx;
  for (Var p : parts) idx.push_back(p.node);
  const int self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, idx, self] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    Eigen::Index off = 0;
    for (int i : idx) {
      const Eigen::Index r = nodes_[static_cast<std::size_t>(i)].value.rows();
      if (nodes_[static_cast<std::size_t>(i)].needs_grad)
        grad_buf(i) += g.middleRows(off, r);
      off += r;
    }
  };
  return out;
}

Var Tape::slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  const Eigen::MatrixXd& v = value(a);
  if (start < 0 || count < 0 || start + count > v.rows())
    throw std::out_of_range("autodiff: slice_rows range");
  const bool ng = at(a).needs_grad;
  Var out = push(v.middleRows(start, count), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self, start, count] {
    grad_buf(ia).middleRows(start, count) += nodes_[static_cast<std::size_t>(self)].grad;
  };
  return out;
}

Var Tape::slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  const Eigen::MatrixXd& v = value(a);
  if (start < 0 || count < 0 || start + count > v.cols())
    throw std::out_of_range("autodiff: slice_cols range");
  const bool ng = at(a).needs_grad;
  Var out = push(v.middleCols(start, count), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self, start, count] {
    grad_buf(ia).middleCols(start, count) += nodes_[static_cast<std::size_t>(self)].grad;
  };
  return out;
}

Var Tape::gather_rows(Var a, std::vector<int> index) {
  const Eigen::MatrixXd& v = value(a);
  Eigen::MatrixXd out_v(static_cast<Eigen::Index>(index.size()), v.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const int r = index[i];
    if (r < 0 || r >= v.rows()) throw std::out_of_range("autodiff: gather_rows index");
    out_v.row(static_cast<Eigen::Index>(i)) = v.row(r);
  }
  const bool ng = at(a).needs_grad;
  Var out = push(std::move(out_v), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self, index = std::move(index)] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    Eigen::MatrixXd& ga = grad_buf(ia);
    for (std::size_t i = 0; i < index.size(); ++i)
      ga.row(index[i]) += g.row(static_cast<Eigen::Index>(i));
  };
  return out;
}

Var Tape::mean_pool_rows(Var a, Eigen::Index group_size) {
  const Eigen::MatrixXd& v = value(a);
  if (group_size <= 0 || v.rows() % group_size != 0)
    throw std::invalid_argument("autodiff: mean_pool_rows group size");
  const Eigen::Index groups = v.rows() / group_size;
  Eigen::MatrixXd out_v(groups, v.cols());
  for (Eigen::Index gidx = 0; gidx < groups; ++gidx)
    out_v.row(gidx) = v.middleRows(gidx * group_size, group_size).colwise().mean();
  const bool ng = at(a).needs_grad;
  Var out = push(std::move(out_v), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self, group_size, groups] {
    const Eigen::MatrixXd& g = nodes_[static_cast<std::size_t>(self)].grad;
    Eigen::MatrixXd& ga = grad_buf(ia);
    const double inv = 1.0 / static_cast<double>(group_size);
    for (Eigen::Index gidx = 0; gidx < groups; ++gidx)
      ga.middleRows(gidx * group_size, group_size).rowwise() += g.row(gidx) * inv;
  };
  return out;
}

Var Tape::sum_all(Var a) {
  const bool ng = at(a).needs_grad;
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = value(a).sum();
  Var out = push(std::move(v), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self] {
    grad_buf(ia).array() += nodes_[static_cast<std::size_t>(self)].grad(0, 0);
  };
  return out;
}

Var Tape::mean_all(Var a) {
  const bool ng = at(a).needs_grad;
  const double count = static_cast<double>(value(a).size());
  Eigen::MatrixXd v(1, 1);
  v(0, 0) = value(a).mean();
  Var out = push(std::move(v), ng, {});
  if (!ng) return out;
  const int ia = a.node, self = out.node;
  nodes_[static_cast<std::size_t>(self)].back = [this, ia, self, count] {
    grad_buf(ia).array() += nodes_[static_cast<std::size_t>(self)].grad(0, 0) / count;
  };
  return out;
}

void Tape::backward(Var root) {
  const Node& r = at(root);
  if (r.value.rows() != 1 || r.value.cols() != 1)
    throw std::invalid_argument("autodiff: backward root must be scalar");
  if (!r.needs_grad)
    throw std::logic_error("autodiff: root does not depend on any parameter");
  grad_buf(root.node)(0, 0) += 1.0;
  for (int i = root.node; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.needs_grad && n.grad.size() != 0 && n.back) n.back();
  }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace scengen::ad
