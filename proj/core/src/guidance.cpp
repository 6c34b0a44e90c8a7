#include "ooda/guidance.hpp"

#include <cmath>

#include "ooda/errors.hpp"

namespace ooda {

void GuidanceConfig::check() const {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw ConfigError("exploration level lambda must lie in [0, 1)");
  if (r1 < 0.0 || r2 < 0.0) throw ConfigError("r1, r2 must be >= 0");
  if (!(alpha_cap > 0.0)) throw ConfigError("alpha_cap must be positive");
  if (target_class < 0) throw ConfigError("target class must be >= 0");
}

double ood_tilt(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw DomainError("lambda outside [0, 1)");
  return 1.0 - std::sqrt(lambda);
}

double masked_norm_x(const Eigen::MatrixXd& x, const Mask& mask) {
  double s = 0.0;
  for (int i = 0; i < x.rows(); ++i) {
    if (!mask[std::size_t(i)]) continue;
    s += x.row(i).squaredNorm();
  }
  return std::sqrt(s);
}

double masked_norm_a(const AdjChannels& a, const Mask& mask) {
  double s = 0.0;
  for (const auto& ch : a) {
    for (int i = 0; i < ch.rows(); ++i) {
      if (!mask[std::size_t(i)]) continue;
      for (int j = 0; j < ch.cols(); ++j) {
        if (i == j || !mask[std::size_t(j)]) continue;
        s += ch(i, j) * ch(i, j);
      }
    }
  }
  return std::sqrt(s);
}

std::pair<double, double> alpha_weights(const ScoreEstimate& se,
                                        const Eigen::MatrixXd& grad_x,
                                        const AdjChannels& grad_a, double r1,
                                        double r2, double t, double alpha_cap,
                                        const Mask& mask) {
  const double decay = std::pow(0.1, t);
  auto one = [&](double score_norm, double grad_norm, double r) {
    if (grad_norm < 1e-12) return alpha_cap;
    return std::min(alpha_cap, decay * r * score_norm / grad_norm);
  };
  double a1 = one(masked_norm_x(se.score_x, mask), masked_norm_x(grad_x, mask), r1);
  double a2 = one(masked_norm_a(se.score_a, mask), masked_norm_a(grad_a, mask), r2);
  return {a1, a2};
}

ScoreEstimate guided_score_with_alpha(const ScoreEstimate& se,
                                      const Eigen::MatrixXd& grad_x,
                                      const AdjChannels& grad_a, double lambda,
                                      double alpha1, double alpha2) {
  const double tilt = ood_tilt(lambda);
  ScoreEstimate out;
  out.score_x = tilt * (se.score_x + alpha1 * grad_x);
  out.score_a.reserve(se.score_a.size());
  for (std::size_t c = 0; c < se.score_a.size(); ++c)
    out.score_a.push_back(tilt * (se.score_a[c] + alpha2 * grad_a[c]));
  return out;
}

ScoreEstimate guided_score_three_term(const ScoreEstimate& se,
                                      const Eigen::MatrixXd& grad_x,
                                      const AdjChannels& grad_a, double lambda,
                                      double alpha1, double alpha2) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw DomainError("lambda outside [0, 1)");
  const double root = std::sqrt(lambda);
  ScoreEstimate out;
  // joint term = score + alpha * grad; third component tilts it by -sqrt(lambda)
  Eigen::MatrixXd joint_x = se.score_x + alpha1 * grad_x;
  out.score_x = joint_x - root * joint_x;
  out.score_a.reserve(se.score_a.size());
  for (std::size_t c = 0; c < se.score_a.size(); ++c) {
    Eigen::MatrixXd joint_a = se.score_a[c] + alpha2 * grad_a[c];
    out.score_a.push_back(joint_a - root * joint_a);
  }
  return out;
}

ScoreEstimate guided_score(const ScoreEstimate& se, const Eigen::MatrixXd& grad_x,
                           const AdjChannels& grad_a, const GuidanceConfig& cfg,
                           double t, const Mask& mask) {
  cfg.check();
  if (!se.score_x.allFinite()) throw NumericError("non-finite score input");
  for (const auto& ch : se.score_a)
    if (!ch.allFinite()) throw NumericError("non-finite score input");
  if (!grad_x.allFinite()) throw NumericError("non-finite gradient input");
  for (const auto& ch : grad_a)
    if (!ch.allFinite()) throw NumericError("non-finite gradient input");
  auto [a1, a2] = alpha_weights(se, grad_x, grad_a, cfg.r1, cfg.r2, t,
                                cfg.alpha_cap, mask);
  return guided_score_with_alpha(se, grad_x, grad_a, cfg.lambda, a1, a2);
}

}  // namespace ooda
