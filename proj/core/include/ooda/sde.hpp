#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "ooda/rng.hpp"

namespace ooda {

enum class SdeKind { VP, VE };

SdeKind sde_kind_from_string(const std::string& s);
std::string to_string(SdeKind k);

/// Forward diffusion process dG = f_t(G) dt + g_t dW on [0, T] with a
/// closed-form Gaussian perturbation kernel. For VE the (beta_min, beta_max)
/// fields hold (sigma_min, sigma_max).
struct DiffusionSde {
  SdeKind kind = SdeKind::VP;
  double beta_min = 0.1;
  double beta_max = 1.0;
  int num_steps = 1000;
  double terminal_time = 1.0;
  double eps_time = 1e-3;

  void check() const;  // throws ConfigError on invalid parameters
};

/// Drift is linear, f_t(state) = drift_coef * state; returns
/// (drift_coef, diffusion g_t). Throws DomainError for t outside [0, T].
std::pair<double, double> drift_diffusion_coeffs(const DiffusionSde& sde, double t);

/// f_t(state) as a tensor together with the scalar g_t.
std::pair<Eigen::MatrixXd, double> drift_diffusion(const DiffusionSde& sde,
                                                   const Eigen::MatrixXd& state,
                                                   double t);

/// Perturbation kernel p(G_t | G_0) = N(mean_coef * G_0, std^2):
/// VP: mean_coef = exp(-1/2 int_0^t beta), std = sqrt(1 - exp(-int_0^t beta));
/// VE: mean_coef = 1, std = sigma_min * sqrt((sigma_max/sigma_min)^(2t) - 1).
std::pair<double, double> marginal_params(const DiffusionSde& sde, double t);

using Mask = std::vector<std::uint8_t>;
using AdjChannels = std::vector<Eigen::MatrixXd>;

/// Standard-normal node noise with masked rows zeroed.
Eigen::MatrixXd node_noise(int n, int a, const Mask& mask, Rng& rng);

/// Symmetric adjacency noise: (G + G^T)/sqrt(2) per channel keeps unit
/// per-entry variance off the diagonal; diagonal and masked entries zeroed.
AdjChannels adj_noise(int n, int b, const Mask& mask, Rng& rng);

/// noisy = mean_coef * clean + std * z; returns (noisy, z). The z is the
/// score-matching target carrier: analytic score = -z / std.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> perturb_nodes(
    const DiffusionSde& sde, const Eigen::MatrixXd& clean, double t,
    const Mask& mask, Rng& rng);

std::pair<AdjChannels, AdjChannels> perturb_adj(const DiffusionSde& sde,
                                                const AdjChannels& clean, double t,
                                                const Mask& mask, Rng& rng);

/// Terminal prior: VP is standard normal, VE is N(0, sigma_max^2 - sigma_min^2).
Eigen::MatrixXd prior_sample_nodes(const DiffusionSde& sde, int n, int a,
                                   const Mask& mask, Rng& rng);

AdjChannels prior_sample_adj(const DiffusionSde& sde, int n, int b,
                             const Mask& mask, Rng& rng);

/// Zero masked rows of a node tensor in place.
void apply_node_mask(Eigen::MatrixXd& x, const Mask& mask);

/// Zero diagonal and masked rows/columns of adjacency channels in place.
void apply_adj_mask(AdjChannels& a, const Mask& mask);

}  // namespace ooda
