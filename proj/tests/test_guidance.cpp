#include <cmath>

#include "doctest.h"
#include "ooda/errors.hpp"
#include "ooda/guidance.hpp"
#include "ooda/sde.hpp"

using namespace ooda;

namespace {

struct Fixture {
  ScoreEstimate se;
  Eigen::MatrixXd gx;
  AdjChannels ga;
  Mask mask;
};

Fixture random_fixture(Rng& rng, int n = 6, int a = 3, int active = 5) {
  Fixture f;
  f.mask.assign(std::size_t(n), 0);
  for (int i = 0; i < active; ++i) f.mask[std::size_t(i)] = 1;
  f.se.score_x = node_noise(n, a, f.mask, rng);
  f.se.score_a = adj_noise(n, 1, f.mask, rng);
  f.gx = node_noise(n, a, f.mask, rng);
  f.ga = adj_noise(n, 1, f.mask, rng);
  return f;
}

double total_norm(const ScoreEstimate& se) {
  double s = se.score_x.squaredNorm();
  for (const auto& ch : se.score_a) s += ch.squaredNorm();
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("ood_tilt evaluates 1 - sqrt(lambda)") {
  CHECK(ood_tilt(0.0) == 1.0);
  CHECK(ood_tilt(0.25) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ood_tilt(0.81) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK_THROWS_AS(ood_tilt(1.0), DomainError);
  CHECK_THROWS_AS(ood_tilt(-0.1), DomainError);
}

TEST_CASE("alpha weights: norms cancel, time decay, degenerate cap") {
  Rng rng(1);
  Fixture f = random_fixture(rng);
  // make the gradient share the score's masked norm
  double sn = masked_norm_x(f.se.score_x, f.mask);
  double gn = masked_norm_x(f.gx, f.mask);
  Eigen::MatrixXd gx_scaled = f.gx * (sn / gn);

  auto [a1_t0, a2_t0] = alpha_weights(f.se, gx_scaled, f.ga, 1.0, 1.0, 0.0, 10.0, f.mask);
  CHECK(a1_t0 == doctest::Approx(1.0).epsilon(1e-12));
  auto [a1_t1, a2_t1] = alpha_weights(f.se, gx_scaled, f.ga, 1.0, 1.0, 1.0, 10.0, f.mask);
  CHECK(a1_t1 == doctest::Approx(0.1).epsilon(1e-12));

  AdjChannels zero_ga(1, Eigen::MatrixXd::Zero(6, 6));
  auto [a1, a2] = alpha_weights(f.se, gx_scaled, zero_ga, 1.0, 1.0, 0.3, 10.0, f.mask);
  CHECK(a2 == 10.0);  // vanished gradient takes the cap
  (void)a1;
  (void)a2_t0;
  (void)a2_t1;
}

TEST_CASE("alpha weights ignore masked entries") {
  Rng rng(7);
  Fixture f = random_fixture(rng);
  // contaminating a masked row must not change the weights
  Fixture g = f;
  g.gx(5, 0) = 1e6;
  auto [a1, a2] = alpha_weights(f.se, f.gx, f.ga, 0.7, 0.7, 0.4, 10.0, f.mask);
  auto [b1, b2] = alpha_weights(g.se, g.gx, g.ga, 0.7, 0.7, 0.4, 10.0, g.mask);
  CHECK(a1 == b1);
  CHECK(a2 == b2);
}

TEST_CASE("guided score at lambda 0 with unit alpha is score plus gradient") {
  Rng rng(2);
  Fixture f = random_fixture(rng);
  ScoreEstimate out = guided_score_with_alpha(f.se, f.gx, f.ga, 0.0, 1.0, 1.0);
  CHECK((out.score_x - (f.se.score_x + f.gx)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((out.score_a[0] - (f.se.score_a[0] + f.ga[0])).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tilt limit: norm shrinks to zero as lambda approaches 1") {
  Rng rng(3);
  Fixture f = random_fixture(rng);
  ScoreEstimate out = guided_score_with_alpha(f.se, f.gx, f.ga, 0.999999, 1.0, 1.0);
  CHECK(total_norm(out) < 1e-3 * total_norm(f.se));
}

TEST_CASE("three-term and closed-form routes agree to 1e-12") {
  Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    Fixture f = random_fixture(rng);
    for (double lambda : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
      double a1 = 0.3 + rng.uniform(), a2 = 0.3 + rng.uniform();
      ScoreEstimate closed = guided_score_with_alpha(f.se, f.gx, f.ga, lambda, a1, a2);
      ScoreEstimate summed = guided_score_three_term(f.se, f.gx, f.ga, lambda, a1, a2);
      CHECK((closed.score_x - summed.score_x).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((closed.score_a[0] - summed.score_a[0]).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("monotone tilt: guided norm decreases in lambda") {
  Rng rng(5);
  Fixture f = random_fixture(rng);
  GuidanceConfig cfg;
  cfg.r1 = 0.5;
  cfg.r2 = 0.5;
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    cfg.lambda = lambda;
    double norm = total_norm(guided_score(f.se, f.gx, f.ga, cfg, 0.5, f.mask));
    CHECK(norm <= prev + 1e-12);
    prev = norm;
  }
}

TEST_CASE("r1 = r2 = 0 reduces to the tilted unconditional score") {
  Rng rng(6);
  Fixture f = random_fixture(rng);
  GuidanceConfig cfg;
  cfg.lambda = 0.36;
  cfg.r1 = 0.0;
  cfg.r2 = 0.0;
  ScoreEstimate out = guided_score(f.se, f.gx, f.ga, cfg, 0.5, f.mask);
  double tilt = 1.0 - std::sqrt(0.36);
  CHECK((out.score_x - tilt * f.se.score_x).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((out.score_a[0] - tilt * f.se.score_a[0]).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("invalid guidance configs are rejected") {
  GuidanceConfig cfg;
  cfg.lambda = 1.0;
  CHECK_THROWS_AS(cfg.check(), ConfigError);
  cfg.lambda = 0.5;
  cfg.r1 = -0.1;
  CHECK_THROWS_AS(cfg.check(), ConfigError);
  cfg.r1 = 0.5;
  cfg.alpha_cap = 0.0;
  CHECK_THROWS_AS(cfg.check(), ConfigError);
}

TEST_CASE("non-finite inputs raise a numeric error") {
  Rng rng(8);
  Fixture f = random_fixture(rng);
  f.gx(0, 0) = std::numeric_limits<double>::quiet_NaN();
  GuidanceConfig cfg;
  CHECK_THROWS_AS(guided_score(f.se, f.gx, f.ga, cfg, 0.5, f.mask), NumericError);
}
