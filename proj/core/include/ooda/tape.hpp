#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

namespace ooda::ad {

using Mat = Eigen::MatrixXd;
using Mask = std::vector<std::uint8_t>;

class Tape;

/// Handle to a tape node. Cheap to copy; values live on the tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int idx) : tape_(tape), idx_(idx) {}

  const Mat& value() const;
  const Mat& grad() const;
  int rows() const { return int(value().rows()); }
  int cols() const { return int(value().cols()); }
  Tape* tape() const { return tape_; }
  int index() const { return idx_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int idx_ = -1;
};

/// Reverse-mode autodiff over matrix values. Nodes are recorded in forward
/// order; backward() walks them in reverse. reset() keeps node storage so
/// repeated evaluations of the same computation reuse heap buffers.
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}

  bool grad_enabled() const { return grad_enabled_; }

  /// New leaf holding a copy of v.
  Var leaf(const Mat& v, bool requires_grad = false);

  /// Record a computed node. backward_fn may be empty for leaves.
  Var record(Mat value, bool needs_grad, std::function<void(Tape&)> backward_fn);

  /// Seed d(loss)/d(loss) = 1 and propagate. loss must be 1x1.
  void backward(const Var& loss);

  /// Drop all nodes but keep their allocated storage for reuse.
  void reset();

  const Mat& value(int idx) const { return nodes_[std::size_t(idx)].value; }
  Mat& grad(int idx) { return nodes_[std::size_t(idx)].grad; }
  const Mat& grad(int idx) const { return nodes_[std::size_t(idx)].grad; }
  bool needs_grad(int idx) const { return nodes_[std::size_t(idx)].needs_grad; }

  /// Accumulate g into the node's gradient buffer.
  void add_grad(int idx, const Mat& g);

  std::size_t live_nodes() const { return live_; }

 private:
  struct Node {
    Mat value;
    Mat grad;
    std::function<void(Tape&)> backward;
    bool needs_grad = false;
    bool grad_init = false;
  };
  std::vector<Node> nodes_;
  std::size_t live_ = 0;
  bool grad_enabled_ = true;

  Node& push();
};

// ---- ops ----------------------------------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double s);
Var matmul(Var a, Var b);
Var transpose(Var a);

/// Broadcast-add a 1 x c row vector to every row of a.
Var add_rowvec(Var a, Var v);

/// x * sigmoid(x), smooth activation.
Var silu(Var a);

Var relu(Var a);

/// Elementwise multiply by a constant matrix (e.g. dropout mask).
Var mul_const(Var a, const Mat& c);

/// Per-row softmax over unmasked columns; masked columns get 0, fully
/// masked rows become zero rows.
Var softmax_rows_masked(Var logits, const Mask& mask);

/// Per-row layer normalization with affine gain/bias (1 x c Vars).
Var layernorm_rows(Var x, Var gain, Var bias, double eps = 1e-6);

/// Zero rows whose mask entry is 0.
Var mask_rows(Var a, const Mask& mask);

/// Sum unmasked rows -> 1 x c.
Var masked_sum_rows(Var a, const Mask& mask);

/// Horizontal concatenation.
Var concat_cols(const std::vector<Var>& parts);

/// n x c -> n^2 x c, out(i*n+j) = a(i) (resp. a(j)).
Var expand_pairs_i(Var a, int n);
Var expand_pairs_j(Var a, int n);

/// n^2 x 1 column -> n x n square, out(i, j) = v(i*n + j).
Var pairs_to_square(Var v, int n);

/// n x n square -> n^2 x 1 column.
Var square_to_pairs(Var m);

/// Zero pair rows p = i*n+j where i == j or either endpoint is masked.
Var mask_pairs(Var e, const Mask& mask);

/// Symmetrize a square matrix, zero its diagonal and masked rows/columns.
/// Self-adjoint, so the backward pass applies the same projection.
Var sym_zero_diag(Var m, const Mask& mask);

/// Sum of squared entries -> 1 x 1.
Var sq_norm(Var a);

/// Sum of all entries -> 1 x 1.
Var sum_all(Var a);

/// log softmax of a 1 x M row picked at class y -> 1 x 1.
Var log_softmax_pick(Var logits, int y);

}  // namespace ooda::ad
