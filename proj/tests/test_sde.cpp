#include <cmath>

#include "doctest.h"
#include "ooda/errors.hpp"
#include "ooda/sde.hpp"

using namespace ooda;

namespace {

DiffusionSde vp(double bmin = 0.1, double bmax = 1.0) {
  DiffusionSde s;
  s.kind = SdeKind::VP;
  s.beta_min = bmin;
  s.beta_max = bmax;
  return s;
}

DiffusionSde ve(double smin, double smax) {
  DiffusionSde s;
  s.kind = SdeKind::VE;
  s.beta_min = smin;
  s.beta_max = smax;
  return s;
}

// composite-Simpson quadrature of the VP beta schedule, the independent
// oracle for the closed-form kernel
double beta_integral_quadrature(const DiffusionSde& s, double t, int panels = 4096) {
  auto beta = [&s](double u) { return s.beta_min + u * (s.beta_max - s.beta_min); };
  double h = t / (2.0 * panels);
  double acc = beta(0.0) + beta(t);
  for (int i = 1; i < 2 * panels; ++i) acc += beta(i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

Mask ones(int n) { return Mask(std::size_t(n), 1); }

}  // namespace

TEST_CASE("VP drift and diffusion at t = 0") {
  auto s = vp();
  Eigen::MatrixXd v(2, 2);
  v << 1.0, -2.0, 0.5, 3.0;
  auto [f, g] = drift_diffusion(s, v, 0.0);
  CHECK((f - (-0.05 * v)).norm() == doctest::Approx(0.0));
  CHECK(g == doctest::Approx(std::sqrt(0.1)));

  auto [f0, g0] = drift_diffusion(s, Eigen::MatrixXd::Zero(3, 3), 0.3);
  CHECK(f0.norm() == 0.0);
  (void)g0;
}

TEST_CASE("VE coefficients at t = 0") {
  auto s = ve(0.2, 1.0);
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(2, 2, 1.5);
  auto [f, g] = drift_diffusion(s, v, 0.0);
  CHECK(f.norm() == 0.0);
  CHECK(g == doctest::Approx(0.2 * std::sqrt(2.0 * std::log(5.0))).epsilon(1e-12));
}

TEST_CASE("time outside [0, T] is a domain error") {
  auto s = vp();
  CHECK_THROWS_AS(drift_diffusion_coeffs(s, -0.01), DomainError);
  CHECK_THROWS_AS(drift_diffusion_coeffs(s, 1.01), DomainError);
  CHECK_THROWS_AS(marginal_params(s, 2.0), DomainError);
}

TEST_CASE("VP kernel against numerical quadrature") {
  auto s = vp();
  auto [m0, s0] = marginal_params(s, 0.0);
  CHECK(m0 == doctest::Approx(1.0));
  CHECK(s0 == doctest::Approx(0.0));

  for (double t : {0.25, 0.5, 0.75, 1.0}) {
    double integral = beta_integral_quadrature(s, t);
    auto [mc, sd] = marginal_params(s, t);
    CHECK(mc == doctest::Approx(std::exp(-0.5 * integral)).epsilon(1e-10));
    CHECK(sd == doctest::Approx(std::sqrt(1.0 - std::exp(-integral))).epsilon(1e-10));
  }
  // frozen oracle values at t = 1 (quadrature of the linear schedule)
  auto [mc, sd] = marginal_params(s, 1.0);
  CHECK(mc == doctest::Approx(0.7595721232249685).epsilon(1e-9));
  CHECK(sd == doctest::Approx(0.6504230850911684).epsilon(1e-9));
}

TEST_CASE("VE kernel endpoints") {
  auto s = ve(0.2, 1.0);
  auto [m0, s0] = marginal_params(s, 0.0);
  CHECK(m0 == 1.0);
  CHECK(s0 == doctest::Approx(0.0));
  auto [mT, sT] = marginal_params(s, 1.0);
  CHECK(mT == 1.0);
  CHECK(sT == doctest::Approx(std::sqrt(1.0 - 0.04)).epsilon(1e-12));
}

TEST_CASE("kernel monotonicity in t") {
  for (auto s : {vp(), ve(0.2, 1.0)}) {
    double prev_mc = 2.0, prev_sd = -1.0;
    for (int k = 0; k <= 50; ++k) {
      double t = k / 50.0;
      auto [mc, sd] = marginal_params(s, t);
      CHECK(mc <= prev_mc + 1e-15);
      CHECK(sd >= prev_sd - 1e-15);
      prev_mc = mc;
      prev_sd = sd;
    }
  }
}

TEST_CASE("signal is preserved near t = 0") {
  auto s = vp();
  auto [mc, sd] = marginal_params(s, s.eps_time);
  CHECK(mc > 0.999);
  CHECK(sd < 0.02);
}

TEST_CASE("Monte-Carlo perturbation moments match the closed form") {
  auto s = vp();
  const double t = 0.5;
  auto [mc, sd] = marginal_params(s, t);
  const int K = 100000;
  Eigen::MatrixXd clean = Eigen::MatrixXd::Constant(1, 1, 1.0);
  Rng rng(20240);
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < K; ++k) {
    auto [noisy, z] = perturb_nodes(s, clean, t, ones(1), rng);
    sum += noisy(0, 0);
    sum2 += noisy(0, 0) * noisy(0, 0);
  }
  double mean = sum / K;
  double var = sum2 / K - mean * mean;
  double sdev = std::sqrt(var);
  // 3 standard errors of the mean and of the std estimate
  CHECK(std::abs(mean - mc) < 3.0 * sd / std::sqrt(double(K)));
  CHECK(std::abs(sdev - sd) < 3.0 * sd / std::sqrt(2.0 * double(K)));
}

TEST_CASE("perturbation at t = T matches the terminal mean coefficient") {
  auto s = vp();
  auto [mc, sd] = marginal_params(s, 1.0);
  const int K = 100000;
  Eigen::MatrixXd clean = Eigen::MatrixXd::Constant(1, 1, 2.0);
  Rng rng(7);
  double sum = 0.0;
  for (int k = 0; k < K; ++k)
    sum += perturb_nodes(s, clean, 1.0, ones(1), rng).first(0, 0);
  CHECK(std::abs(sum / K - mc * 2.0) < 3.0 * sd / std::sqrt(double(K)));
}

TEST_CASE("perturbation at t = 0 is the identity") {
  auto s = vp();
  Eigen::MatrixXd clean(2, 3);
  clean << 1, 2, 3, 4, 5, 6;
  Rng rng(1);
  auto [noisy, z] = perturb_nodes(s, clean, 0.0, ones(2), rng);
  CHECK(noisy == clean);
}

TEST_CASE("adjacency perturbation keeps symmetry, zero diagonal and masks") {
  auto s = vp();
  const int n = 6;
  Mask mask(n, 1);
  mask[4] = mask[5] = 0;
  AdjChannels clean(1, Eigen::MatrixXd::Zero(n, n));
  clean[0](0, 1) = clean[0](1, 0) = 1.0;
  clean[0](2, 3) = clean[0](3, 2) = 1.0;
  Rng rng(9);
  auto [noisy, z] = perturb_adj(s, clean, 0.7, mask, rng);
  for (const auto& ch : {noisy[0], z[0]}) {
    for (int i = 0; i < n; ++i) {
      CHECK(ch(i, i) == 0.0);
      for (int j = 0; j < n; ++j) {
        CHECK(ch(i, j) == ch(j, i));
        if (!mask[std::size_t(i)] || !mask[std::size_t(j)]) CHECK(ch(i, j) == 0.0);
      }
    }
  }
}

TEST_CASE("symmetrized adjacency noise has unit per-entry variance") {
  auto s = vp();
  Rng rng(33);
  const int K = 100000;
  double sum2 = 0.0;
  for (int k = 0; k < K; ++k) {
    AdjChannels z = adj_noise(2, 1, ones(2), rng);
    sum2 += z[0](0, 1) * z[0](0, 1);
  }
  CHECK(std::sqrt(sum2 / K) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("kernel consistency: analytic Gaussian score equals -z/std") {
  auto s = vp();
  Rng rng(4);
  Eigen::MatrixXd clean(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) clean(i, j) = rng.normal();
  double t = 0.6;
  auto [mc, sd] = marginal_params(s, t);
  auto [noisy, z] = perturb_nodes(s, clean, t, ones(3), rng);
  Eigen::MatrixXd analytic = -(noisy - mc * clean) / (sd * sd);
  Eigen::MatrixXd target = -z / sd;
  CHECK((analytic - target).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("VP prior is standard normal; VE prior has the terminal std") {
  const int K = 100000;
  Rng rng(100);
  double sum2 = 0.0;
  auto s = vp();
  for (int k = 0; k < K; ++k) {
    Eigen::MatrixXd z = prior_sample_nodes(s, 1, 1, ones(1), rng);
    sum2 += z(0, 0) * z(0, 0);
  }
  CHECK(std::sqrt(sum2 / K) == doctest::Approx(1.0).epsilon(0.01));

  auto s2 = ve(0.2, 1.0);
  sum2 = 0.0;
  for (int k = 0; k < K; ++k) {
    Eigen::MatrixXd z = prior_sample_nodes(s2, 1, 1, ones(1), rng);
    sum2 += z(0, 0) * z(0, 0);
  }
  CHECK(std::sqrt(sum2 / K) ==
        doctest::Approx(std::sqrt(1.0 - 0.04)).epsilon(0.01));
}

TEST_CASE("prior adjacency draws are masked and symmetric") {
  auto s = vp();
  Mask mask(5, 1);
  mask[3] = mask[4] = 0;
  Rng rng(8);
  AdjChannels z = prior_sample_adj(s, 5, 2, mask, rng);
  for (const auto& ch : z)
    for (int i = 0; i < 5; ++i) {
      CHECK(ch(i, i) == 0.0);
      for (int j = 0; j < 5; ++j) {
        CHECK(ch(i, j) == ch(j, i));
        if (!mask[std::size_t(i)] || !mask[std::size_t(j)]) CHECK(ch(i, j) == 0.0);
      }
    }
}

TEST_CASE("invalid schedules are rejected") {
  DiffusionSde s = vp();
  s.beta_min = 0.0;
  CHECK_THROWS_AS(s.check(), ConfigError);
  s = vp();
  s.beta_min = 2.0;  // > beta_max
  CHECK_THROWS_AS(s.check(), ConfigError);
  s = vp();
  s.num_steps = 0;
  CHECK_THROWS_AS(s.check(), ConfigError);
  s = vp();
  s.eps_time = 0.0;
  CHECK_THROWS_AS(s.check(), ConfigError);
}
