#include "ooda/tape.hpp"

#include <cmath>

#include "ooda/errors.hpp"

namespace ooda::ad {

const Mat& Var::value() const { return tape_->value(idx_); }
const Mat& Var::grad() const { return tape_->grad(idx_); }

Tape::Node& Tape::push() {
  if (live_ < nodes_.size()) {
    Node& n = nodes_[live_++];
    n.backward = nullptr;
    n.needs_grad = false;
    n.grad_init = false;
    return n;
  }
  nodes_.emplace_back();
  ++live_;
  return nodes_.back();
}

Var Tape::leaf(const Mat& v, bool requires_grad) {
  Node& n = push();
  n.value = v;
  n.needs_grad = requires_grad && grad_enabled_;
  return Var(this, int(live_) - 1);
}

Var Tape::record(Mat value, bool needs_grad, std::function<void(Tape&)> backward_fn) {
  Node& n = push();
  n.value = std::move(value);
  if (grad_enabled_ && needs_grad) {
    n.needs_grad = true;
    n.backward = std::move(backward_fn);
  }
  return Var(this, int(live_) - 1);
}

void Tape::add_grad(int idx, const Mat& g) {
  Node& n = nodes_[std::size_t(idx)];
  if (!n.needs_grad) return;
  if (!n.grad_init) {
    n.grad = g;
    n.grad_init = true;
  } else {
    n.grad += g;
  }
}

void Tape::backward(const Var& loss) {
  if (!grad_enabled_) throw NumericError("backward() on a no-grad tape");
  if (loss.rows() != 1 || loss.cols() != 1)
    throw ShapeError("backward() expects a 1x1 loss");
  // zero-fill gradients lazily: mark all uninitialized, seed the loss
  for (std::size_t i = 0; i < live_; ++i) {
    nodes_[i].grad_init = false;
    if (nodes_[i].needs_grad) {
      nodes_[i].grad.resize(nodes_[i].value.rows(), nodes_[i].value.cols());
      nodes_[i].grad.setZero();
      nodes_[i].grad_init = true;
    }
  }
  if (!nodes_[std::size_t(loss.index())].needs_grad)
    throw NumericError("loss does not depend on any differentiable leaf");
  nodes_[std::size_t(loss.index())].grad(0, 0) = 1.0;
  for (std::size_t i = live_; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.needs_grad && n.backward) n.backward(*this);
  }
}

void Tape::reset() { live_ = 0; }

namespace {

bool any_grad(std::initializer_list<Var> vars) {
  for (const Var& v : vars)
    if (v.tape()->needs_grad(v.index())) return true;
  return false;
}

Tape& tape_of(Var a) { return *a.tape(); }

}  // namespace

Var add(Var a, Var b) {
  Tape& t = tape_of(a);
  Mat out = a.value() + b.value();
  int ia = a.index(), ib = b.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a, b}), [ia, ib, self](Tape& tp) {
    const Mat& g = tp.grad(self);
    tp.add_grad(ia, g);
    tp.add_grad(ib, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a);
  Mat out = a.value() - b.value();
  int ia = a.index(), ib = b.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a, b}), [ia, ib, self](Tape& tp) {
    const Mat& g = tp.grad(self);
    tp.add_grad(ia, g);
    tp.add_grad(ib, -g);
  });
}

Var mul(Var a, Var b) {
  Tape& t = tape_of(a);
  Mat out = a.value().cwiseProduct(b.value());
  int ia = a.index(), ib = b.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a, b}), [ia, ib, self](Tape& tp) {
    const Mat& g = tp.grad(self);
    tp.add_grad(ia, g.cwiseProduct(tp.value(ib)));
    tp.add_grad(ib, g.cwiseProduct(tp.value(ia)));
  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  Mat out = s * a.value();
  int ia = a.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a}), [ia, s, self](Tape& tp) {
    tp.add_grad(ia, (s * tp.grad(self)).eval());
  });
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a);
  if (a.cols() != b.rows()) throw ShapeError("matmul inner dimensions disagree");
  Mat out = a.value() * b.value();
  int ia = a.index(), ib = b.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a, b}), [ia, ib, self](Tape& tp) {
    const Mat& g = tp.grad(self);
    if (tp.needs_grad(ia)) tp.add_grad(ia, (g * tp.value(ib).transpose()).eval());
    if (tp.needs_grad(ib)) tp.add_grad(ib, (tp.value(ia).transpose() * g).eval());
  });
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  Mat out = a.value().transpose();
  int ia = a.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a}), [ia, self](Tape& tp) {
    tp.add_grad(ia, tp.grad(self).transpose().eval());
  });
}

Var add_rowvec(Var a, Var v) {
  Tape& t = tape_of(a);
  if (v.rows() != 1 || v.cols() != a.cols())
    throw ShapeError("add_rowvec expects a 1 x cols(a) vector");
  Mat out = a.value().rowwise() + v.value().row(0);
  int ia = a.index(), iv = v.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a, v}), [ia, iv, self](Tape& tp) {
    const Mat& g = tp.grad(self);
    tp.add_grad(ia, g);
    tp.add_grad(iv, g.colwise().sum().eval());
  });
}

Var silu(Var a) {
  Tape& t = tape_of(a);
  Mat sig = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  Mat out = a.value().cwiseProduct(sig);
  int ia = a.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a}), [ia, self, sig](Tape& tp) {
    const Mat& g = tp.grad(self);
    const Mat& x = tp.value(ia);
    // d silu = sig * (1 + x * (1 - sig))
    Mat d = sig.array() * (1.0 + x.array() * (1.0 - sig.array()));
    tp.add_grad(ia, g.cwiseProduct(d));
  });
}

Var relu(Var a) {
  Tape& t = tape_of(a);
  Mat out = a.value().cwiseMax(0.0);
  int ia = a.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a}), [ia, self](Tape& tp) {
    const Mat& g = tp.grad(self);
    Mat d = (tp.value(ia).array() > 0.0).cast<double>();
    tp.add_grad(ia, g.cwiseProduct(d));
  });
}

Var mul_const(Var a, const Mat& c) {
  Tape& t = tape_of(a);
  Mat out = a.value().cwiseProduct(c);
  int ia = a.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a}), [ia, self, c](Tape& tp) {
    tp.add_grad(ia, tp.grad(self).cwiseProduct(c));
  });
}

Var softmax_rows_masked(Var logits, const Mask& mask) {
  Tape& t = tape_of(logits);
  const Mat& l = logits.value();
  const int n = int(l.rows());
  const int m = int(l.cols());
  if (int(mask.size()) != m) throw ShapeError("softmax mask length mismatch");
  Mat out(n, m);
  for (int i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m; ++j)
      if (mask[std::size_t(j)]) mx = std::max(mx, l(i, j));
    double denom = 0.0;
    if (std::isfinite(mx)) {
      for (int j = 0; j < m; ++j) {
        double e = mask[std::size_t(j)] ? std::exp(l(i, j) - mx) : 0.0;
        out(i, j) = e;
        denom += e;
      }
    }
    if (denom > 0.0)
      out.row(i) /= denom;
    else
      out.row(i).setZero();
  }
  int il = logits.index();
  int self = int(t.live_nodes());
  bool ng = t.needs_grad(il);
  return t.record(std::move(out), ng, [il, self](Tape& tp) {
    const Mat& g = tp.grad(self);
    const Mat& s = tp.value(self);
    Mat gl(s.rows(), s.cols());
    for (int i = 0; i < s.rows(); ++i) {
      double dot = g.row(i).dot(s.row(i));
      gl.row(i) = s.row(i).cwiseProduct(g.row(i) - Eigen::RowVectorXd::Constant(s.cols(), dot));
    }
    tp.add_grad(il, gl);
  });
}

Var layernorm_rows(Var x, Var gain, Var bias, double eps) {
  Tape& t = tape_of(x);
  const Mat& v = x.value();
  const int n = int(v.rows());
  const int c = int(v.cols());
  Mat xhat(n, c);
  Eigen::VectorXd inv_sd(n);
  for (int i = 0; i < n; ++i) {
    double mu = v.row(i).mean();
    double var = (v.row(i).array() - mu).square().mean();
    double is = 1.0 / std::sqrt(var + eps);
    inv_sd(i) = is;
    xhat.row(i) = (v.row(i).array() - mu) * is;
  }
  Mat out = (xhat.array().rowwise() * gain.value().row(0).array()).matrix();
  out.rowwise() += bias.value().row(0);
  int ix = x.index(), ig = gain.index(), ib = bias.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({x, gain, bias}),
                  [ix, ig, ib, self, xhat, inv_sd](Tape& tp) {
                    const Mat& g = tp.grad(self);
                    const Mat& gn = tp.value(ig);
                    const int n = int(g.rows());
                    const int c = int(g.cols());
                    Mat dxhat = g.array().rowwise() * gn.row(0).array();
                    Mat dx(n, c);
                    for (int i = 0; i < n; ++i) {
                      double sum_d = dxhat.row(i).sum();
                      double sum_dx = dxhat.row(i).dot(xhat.row(i));
                      dx.row(i) = inv_sd(i) / c *
                                  (c * dxhat.row(i).array() - sum_d -
                                   xhat.row(i).array() * sum_dx)
                                      .matrix();
                    }
                    tp.add_grad(ix, dx);
                    tp.add_grad(ig, g.cwiseProduct(xhat).colwise().sum().eval());
                    tp.add_grad(ib, g.colwise().sum().eval());
                  });
}

Var mask_rows(Var a, const Mask& mask) {
  Tape& t = tape_of(a);
  Mat out = a.value();
  for (int i = 0; i < out.rows(); ++i)
    if (!mask[std::size_t(i)]) out.row(i).setZero();
  int ia = a.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a}), [ia, self, mask](Tape& tp) {
    Mat g = tp.grad(self);
    for (int i = 0; i < g.rows(); ++i)
      if (!mask[std::size_t(i)]) g.row(i).setZero();
    tp.add_grad(ia, g);
  });
}

Var masked_sum_rows(Var a, const Mask& mask) {
  Tape& t = tape_of(a);
  Mat out = Mat::Zero(1, a.cols());
  for (int i = 0; i < a.rows(); ++i)
    if (mask[std::size_t(i)]) out.row(0) += a.value().row(i);
  int ia = a.index();
  int rows = a.rows();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a}), [ia, self, mask, rows](Tape& tp) {
    const Mat& g = tp.grad(self);
    Mat ga = Mat::Zero(rows, g.cols());
    for (int i = 0; i < rows; ++i)
      if (mask[std::size_t(i)]) ga.row(i) = g.row(0);
    tp.add_grad(ia, ga);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  Tape& t = tape_of(parts.front());
  int rows = parts.front().rows();
  int cols = 0;
  bool ng = false;
  for (const Var& p : parts) {
    cols += p.cols();
    ng = ng || p.tape()->needs_grad(p.index());
  }
  Mat out(rows, cols);
  int off = 0;
  std::vector<std::pair<int, int>> spans;  // (index, width)
  for (const Var& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    spans.emplace_back(p.index(), p.cols());
    off += p.cols();
  }
  int self = int(t.live_nodes());
  return t.record(std::move(out), ng, [self, spans](Tape& tp) {
    const Mat& g = tp.grad(self);
    int off = 0;
    for (auto [idx, width] : spans) {
      tp.add_grad(idx, g.middleCols(off, width).eval());
      off += width;
    }
  });
}

Var expand_pairs_i(Var a, int n) {
  Tape& t = tape_of(a);
  if (a.rows() != n) throw ShapeError("expand_pairs_i expects n rows");
  const int c = a.cols();
  Mat out(n * n, c);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.row(i * n + j) = a.value().row(i);
  int ia = a.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a}), [ia, self, n, c](Tape& tp) {
    const Mat& g = tp.grad(self);
    Mat ga = Mat::Zero(n, c);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ga.row(i) += g.row(i * n + j);
    tp.add_grad(ia, ga);
  });
}

Var expand_pairs_j(Var a, int n) {
  Tape& t = tape_of(a);
  if (a.rows() != n) throw ShapeError("expand_pairs_j expects n rows");
  const int c = a.cols();
  Mat out(n * n, c);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.row(i * n + j) = a.value().row(j);
  int ia = a.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a}), [ia, self, n, c](Tape& tp) {
    const Mat& g = tp.grad(self);
    Mat ga = Mat::Zero(n, c);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) ga.row(j) += g.row(i * n + j);
    tp.add_grad(ia, ga);
  });
}

Var pairs_to_square(Var v, int n) {
  Tape& t = tape_of(v);
  if (v.rows() != n * n || v.cols() != 1)
    throw ShapeError("pairs_to_square expects an n^2 x 1 column");
  Mat out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = v.value()(i * n + j, 0);
  int iv = v.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({v}), [iv, self, n](Tape& tp) {
    const Mat& g = tp.grad(self);
    Mat gv(n * n, 1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gv(i * n + j, 0) = g(i, j);
    tp.add_grad(iv, gv);
  });
}

Var square_to_pairs(Var m) {
  Tape& t = tape_of(m);
  const int n = m.rows();
  if (m.cols() != n) throw ShapeError("square_to_pairs expects a square matrix");
  Mat out(n * n, 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i * n + j, 0) = m.value()(i, j);
  int im = m.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({m}), [im, self, n](Tape& tp) {
    const Mat& g = tp.grad(self);
    Mat gm(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gm(i, j) = g(i * n + j, 0);
    tp.add_grad(im, gm);
  });
}

Var mask_pairs(Var e, const Mask& mask) {
  Tape& t = tape_of(e);
  const int n = int(mask.size());
  if (e.rows() != n * n) throw ShapeError("mask_pairs expects n^2 rows");
  Mat out = e.value();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i == j || !mask[std::size_t(i)] || !mask[std::size_t(j)])
        out.row(i * n + j).setZero();
  int ie = e.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({e}), [ie, self, mask, n](Tape& tp) {
    Mat g = tp.grad(self);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i == j || !mask[std::size_t(i)] || !mask[std::size_t(j)])
          g.row(i * n + j).setZero();
    tp.add_grad(ie, g);
  });
}

namespace {

Mat sym_project(const Mat& m, const Mask& mask) {
  Mat out = 0.5 * (m + m.transpose());
  out.diagonal().setZero();
  for (int i = 0; i < out.rows(); ++i) {
    if (mask[std::size_t(i)]) continue;
    out.row(i).setZero();
    out.col(i).setZero();
  }
  return out;
}

}  // namespace

Var sym_zero_diag(Var m, const Mask& mask) {
  Tape& t = tape_of(m);
  Mat out = sym_project(m.value(), mask);
  int im = m.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({m}), [im, self, mask](Tape& tp) {
    tp.add_grad(im, sym_project(tp.grad(self), mask));
  });
}

Var sq_norm(Var a) {
  Tape& t = tape_of(a);
  Mat out(1, 1);
  out(0, 0) = a.value().squaredNorm();
  int ia = a.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a}), [ia, self](Tape& tp) {
    double g = tp.grad(self)(0, 0);
    tp.add_grad(ia, (2.0 * g * tp.value(ia)).eval());
  });
}

Var sum_all(Var a) {
  Tape& t = tape_of(a);
  Mat out(1, 1);
  out(0, 0) = a.value().sum();
  int ia = a.index();
  int rows = a.rows(), cols = a.cols();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({a}), [ia, self, rows, cols](Tape& tp) {
    double g = tp.grad(self)(0, 0);
    tp.add_grad(ia, Mat::Constant(rows, cols, g));
  });
}

Var log_softmax_pick(Var logits, int y) {
  Tape& t = tape_of(logits);
  const Mat& l = logits.value();
  if (l.rows() != 1) throw ShapeError("log_softmax_pick expects a 1 x M row");
  if (y < 0 || y >= l.cols()) throw ShapeError("class index out of range");
  double mx = l.row(0).maxCoeff();
  double lse = std::log((l.row(0).array() - mx).exp().sum()) + mx;
  Mat out(1, 1);
  out(0, 0) = l(0, y) - lse;
  int il = logits.index();
  int self = int(t.live_nodes());
  return t.record(std::move(out), any_grad({logits}), [il, self, y, lse](Tape& tp) {
    double g = tp.grad(self)(0, 0);
    const Mat& l = tp.value(il);
    Mat gl = (-(l.row(0).array() - lse).exp()).matrix() * g;
    gl(0, y) += g;
    tp.add_grad(il, gl);
  });
}

}  // namespace ooda::ad
