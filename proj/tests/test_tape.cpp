#include <cmath>
#include <functional>

#include "doctest.h"
#include "ooda/rng.hpp"
#include "ooda/tape.hpp"

using namespace ooda;
using ad::Mat;
using ad::Tape;
using ad::Var;

namespace {

Mat randn(int r, int c, Rng& rng) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

// Checks d(scalar fn)/d(input) against central finite differences along
// random directions.
void check_gradient(const std::function<Var(Tape&, Var)>& fn, const Mat& x0,
                    Rng& rng, double tol = 1e-6, int directions = 4) {
  Tape tape(true);
  Var x = tape.leaf(x0, true);
  Var loss = fn(tape, x);
  tape.backward(loss);
  Mat grad = x.grad();

  const double h = 1e-5;
  for (int d = 0; d < directions; ++d) {
    Mat dir = randn(int(x0.rows()), int(x0.cols()), rng);
    dir /= dir.norm();
    auto eval = [&](double step) {
      Tape t2(false);
      Var xx = t2.leaf(x0 + step * dir, false);
      return fn(t2, xx).value()(0, 0);
    };
    double fd = (eval(h) - eval(-h)) / (2.0 * h);
    double an = grad.cwiseProduct(dir).sum();
    CHECK(std::abs(fd - an) < tol * std::max(1.0, std::abs(fd)));
  }
}

}  // namespace

TEST_CASE("matmul chain gradient") {
  Rng rng(1);
  Mat w = randn(4, 3, rng);
  check_gradient(
      [&](Tape& t, Var x) {
        Var wv = t.leaf(w, false);
        return ad::sq_norm(ad::matmul(x, wv));
      },
      randn(5, 4, rng), rng);
}

TEST_CASE("silu, relu and elementwise ops gradient") {
  Rng rng(2);
  Mat b = randn(5, 4, rng);
  check_gradient(
      [&](Tape& t, Var x) {
        Var bv = t.leaf(b, false);
        Var y = ad::mul(ad::silu(x), bv);
        return ad::sum_all(ad::sub(y, ad::scale(x, 0.3)));
      },
      randn(5, 4, rng), rng);
  // relu check away from the kink
  Mat x0 = randn(6, 3, rng);
  for (int i = 0; i < x0.size(); ++i)
    if (std::abs(x0.data()[i]) < 0.05) x0.data()[i] = 0.2;
  check_gradient([](Tape& t, Var x) { return ad::sum_all(ad::relu(x)); }, x0, rng);
}

TEST_CASE("add_rowvec broadcasts and accumulates") {
  Rng rng(3);
  Mat v0 = randn(1, 4, rng);
  check_gradient(
      [&](Tape& t, Var x) {
        Var v = t.leaf(v0, false);
        return ad::sq_norm(ad::add_rowvec(x, v));
      },
      randn(6, 4, rng), rng);
  // gradient w.r.t. the vector itself
  Mat x0 = randn(6, 4, rng);
  check_gradient(
      [&](Tape& t, Var v) {
        Var x = t.leaf(x0, false);
        return ad::sq_norm(ad::add_rowvec(x, v));
      },
      v0, rng);
}

TEST_CASE("masked softmax rows: values and gradient") {
  Rng rng(4);
  ad::Mask mask = {1, 1, 0, 1};
  Mat l0 = randn(4, 4, rng);

  Tape t(false);
  Var s = ad::softmax_rows_masked(t.leaf(l0, false), mask);
  for (int i = 0; i < 4; ++i) {
    CHECK(s.value()(i, 2) == 0.0);  // masked column
    CHECK(s.value().row(i).sum() == doctest::Approx(1.0));
  }

  check_gradient(
      [&](Tape& tp, Var x) {
        Var sm = ad::softmax_rows_masked(x, mask);
        Mat w = Mat::Zero(4, 4);
        w(0, 1) = 1.0;
        w(1, 0) = -2.0;
        w(3, 3) = 0.5;
        return ad::sum_all(ad::mul_const(sm, w));
      },
      l0, rng);
}

TEST_CASE("fully masked softmax rows become zero") {
  Tape t(false);
  ad::Mask none = {0, 0, 0};
  Var s = ad::softmax_rows_masked(t.leaf(Mat::Random(3, 3), false), none);
  CHECK(s.value().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("layernorm rows gradient for input, gain and bias") {
  Rng rng(5);
  Mat g0 = randn(1, 6, rng);
  Mat b0 = randn(1, 6, rng);
  Mat x0 = randn(4, 6, rng);
  Mat w = randn(4, 6, rng);

  check_gradient(
      [&](Tape& t, Var x) {
        Var g = t.leaf(g0, false), b = t.leaf(b0, false);
        return ad::sum_all(ad::mul_const(ad::layernorm_rows(x, g, b), w));
      },
      x0, rng, 1e-5);
  check_gradient(
      [&](Tape& t, Var g) {
        Var x = t.leaf(x0, false), b = t.leaf(b0, false);
        return ad::sum_all(ad::mul_const(ad::layernorm_rows(x, g, b), w));
      },
      g0, rng, 1e-5);
  check_gradient(
      [&](Tape& t, Var b) {
        Var x = t.leaf(x0, false), g = t.leaf(g0, false);
        return ad::sum_all(ad::mul_const(ad::layernorm_rows(x, g, b), w));
      },
      b0, rng, 1e-5);
}

TEST_CASE("pair expansion and square reshapes invert each other") {
  Rng rng(6);
  const int n = 4;
  Tape t(false);
  Mat m0 = randn(n, n, rng);
  Var m = t.leaf(m0, false);
  Var back = ad::pairs_to_square(ad::square_to_pairs(m), n);
  CHECK((back.value() - m0).cwiseAbs().maxCoeff() == 0.0);

  Mat h0 = randn(n, 3, rng);
  Var h = t.leaf(h0, false);
  Var ei = ad::expand_pairs_i(h, n);
  Var ej = ad::expand_pairs_j(h, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      CHECK(ei.value().row(i * n + j) == h0.row(i));
      CHECK(ej.value().row(i * n + j) == h0.row(j));
    }

  check_gradient(
      [&](Tape& tp, Var x) {
        Var a = ad::expand_pairs_i(x, n);
        Var b = ad::expand_pairs_j(x, n);
        return ad::sq_norm(ad::add(a, ad::scale(b, 0.5)));
      },
      h0, rng);
}

TEST_CASE("sym_zero_diag projects and back-propagates the projection") {
  Rng rng(7);
  const int n = 5;
  ad::Mask mask = {1, 1, 1, 0, 1};
  Mat m0 = randn(n, n, rng);

  Tape t(false);
  Var out = ad::sym_zero_diag(t.leaf(m0, false), mask);
  const Mat& v = out.value();
  for (int i = 0; i < n; ++i) {
    CHECK(v(i, i) == 0.0);
    for (int j = 0; j < n; ++j) {
      CHECK(v(i, j) == v(j, i));
      if (!mask[std::size_t(i)] || !mask[std::size_t(j)]) CHECK(v(i, j) == 0.0);
    }
  }
  check_gradient(
      [&](Tape& tp, Var x) { return ad::sq_norm(ad::sym_zero_diag(x, mask)); }, m0,
      rng);
}

TEST_CASE("masked row ops gradient") {
  Rng rng(8);
  ad::Mask mask = {1, 0, 1, 1};
  Mat x0 = randn(4, 3, rng);
  check_gradient(
      [&](Tape& t, Var x) {
        return ad::sq_norm(ad::masked_sum_rows(ad::mask_rows(x, mask), mask));
      },
      x0, rng);
}

TEST_CASE("concat_cols splits gradients per span") {
  Rng rng(9);
  Mat a0 = randn(3, 2, rng), b0 = randn(3, 4, rng);
  check_gradient(
      [&](Tape& t, Var a) {
        Var b = t.leaf(b0, false);
        return ad::sq_norm(ad::concat_cols({a, b}));
      },
      a0, rng);
}

TEST_CASE("log_softmax_pick gradient and shift invariance") {
  Rng rng(10);
  Mat l0 = randn(1, 5, rng);
  check_gradient([&](Tape& t, Var x) { return ad::log_softmax_pick(x, 2); }, l0, rng);

  // adding a constant to all logits leaves the gradient unchanged
  Tape t1(true), t2(true);
  Var a = t1.leaf(l0, true);
  t1.backward(ad::log_softmax_pick(a, 3));
  Var b = t2.leaf((l0.array() + 5.0).matrix(), true);
  t2.backward(ad::log_softmax_pick(b, 3));
  CHECK((a.grad() - b.grad()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("transpose and scale compose") {
  Rng rng(11);
  check_gradient(
      [](Tape& t, Var x) { return ad::sq_norm(ad::scale(ad::transpose(x), -1.7)); },
      randn(3, 5, rng), rng);
}

TEST_CASE("tape reuse after reset produces identical values") {
  Rng rng(12);
  Mat x0 = randn(4, 4, rng);
  Tape t(true);
  auto run = [&]() {
    t.reset();
    Var x = t.leaf(x0, true);
    Var y = ad::sq_norm(ad::silu(ad::matmul(x, x)));
    t.backward(y);
    return std::make_pair(y.value()(0, 0), Mat(x.grad()));
  };
  auto [v1, g1] = run();
  auto [v2, g2] = run();
  CHECK(v1 == v2);
  CHECK(g1 == g2);
}
