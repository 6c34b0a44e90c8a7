#pragma once

#include "ooda/nets.hpp"
#include "ooda/sde.hpp"

namespace ooda {

/// Knobs of the conditional score composition: exploration level lambda,
/// target class, and the r1/r2 multipliers of the time-decayed alpha weights
/// that balance classifier gradients against the score magnitude.
struct GuidanceConfig {
  double lambda = 0.0;  // in [0, 1)
  int target_class = 0;
  double r1 = 0.5;
  double r2 = 0.5;
  double alpha_cap = 10.0;

  void check() const;
};

/// Exploration tilt coefficient 1 - sqrt(lambda). Domain lambda in [0, 1).
double ood_tilt(double lambda);

/// alpha_c = 0.1^t * r_c * ||score_c|| / ||grad_c|| with Frobenius norms over
/// unmasked entries, capped at alpha_cap; a vanishing gradient norm
/// (< 1e-12) yields alpha_cap.
std::pair<double, double> alpha_weights(const ScoreEstimate& se,
                                        const Eigen::MatrixXd& grad_x,
                                        const AdjChannels& grad_a, double r1,
                                        double r2, double t, double alpha_cap,
                                        const Mask& mask);

/// Conditional score, closed form: out_c = (1 - sqrt(lambda)) *
/// (score_c + alpha_c * grad_c), alphas from alpha_weights.
ScoreEstimate guided_score(const ScoreEstimate& se, const Eigen::MatrixXd& grad_x,
                           const AdjChannels& grad_a, const GuidanceConfig& cfg,
                           double t, const Mask& mask);

/// guided_score with explicitly supplied alpha weights.
ScoreEstimate guided_score_with_alpha(const ScoreEstimate& se,
                                      const Eigen::MatrixXd& grad_x,
                                      const AdjChannels& grad_a, double lambda,
                                      double alpha1, double alpha2);

/// Same composition built as the three-term sum (unconditional score +
/// weighted class gradient + the -sqrt(lambda)-tilted joint term). Agrees
/// with guided_score_with_alpha identically for all lambda in [0, 1); kept
/// as the second construction route of that algebraic identity.
ScoreEstimate guided_score_three_term(const ScoreEstimate& se,
                                      const Eigen::MatrixXd& grad_x,
                                      const AdjChannels& grad_a, double lambda,
                                      double alpha1, double alpha2);

/// Frobenius norm over unmasked node-tensor entries.
double masked_norm_x(const Eigen::MatrixXd& x, const Mask& mask);

/// Frobenius norm over unmasked off-diagonal adjacency entries, all channels.
double masked_norm_a(const AdjChannels& a, const Mask& mask);

}  // namespace ooda
