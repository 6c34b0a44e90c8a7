#include "ooda/sde.hpp"

#include <cmath>

#include "ooda/errors.hpp"

namespace ooda {
namespace {

void check_time(const DiffusionSde& sde, double t) {
  if (!(t >= 0.0 && t <= sde.terminal_time))
    throw DomainError("diffusion time " + std::to_string(t) + " outside [0, " +
                      std::to_string(sde.terminal_time) + "]");
}

double beta_at(const DiffusionSde& sde, double t) {
  return sde.beta_min + t * (sde.beta_max - sde.beta_min);
}

double sigma_at(const DiffusionSde& sde, double t) {
  return sde.beta_min * std::pow(sde.beta_max / sde.beta_min, t);
}

}  // namespace

SdeKind sde_kind_from_string(const std::string& s) {
  if (s == "VP" || s == "vp") return SdeKind::VP;
  if (s == "VE" || s == "ve") return SdeKind::VE;
  throw ConfigError("unknown SDE kind: " + s);
}

std::string to_string(SdeKind k) { return k == SdeKind::VP ? "VP" : "VE"; }

void DiffusionSde::check() const {
  if (!(beta_min > 0.0) || !(beta_min <= beta_max))
    throw ConfigError("SDE schedule requires 0 < beta_min <= beta_max");
  if (num_steps < 1) throw ConfigError("SDE num_steps must be >= 1");
  if (!(eps_time > 0.0 && eps_time < terminal_time))
    throw ConfigError("SDE eps_time must lie in (0, T)");
}

std::pair<double, double> drift_diffusion_coeffs(const DiffusionSde& sde, double t) {
  check_time(sde, t);
  if (sde.kind == SdeKind::VP) {
    double b = beta_at(sde, t);
    return {-0.5 * b, std::sqrt(b)};
  }
  double g = sigma_at(sde, t) * std::sqrt(2.0 * std::log(sde.beta_max / sde.beta_min));
  return {0.0, g};
}

std::pair<Eigen::MatrixXd, double> drift_diffusion(const DiffusionSde& sde,
                                                   const Eigen::MatrixXd& state,
                                                   double t) {
  auto [coef, g] = drift_diffusion_coeffs(sde, t);
  return {coef * state, g};
}

std::pair<double, double> marginal_params(const DiffusionSde& sde, double t) {
  check_time(sde, t);
  if (sde.kind == SdeKind::VP) {
    double integral = sde.beta_min * t + 0.5 * (sde.beta_max - sde.beta_min) * t * t;
    double mean_coef = std::exp(-0.5 * integral);
    double std_dev = std::sqrt(std::max(0.0, 1.0 - std::exp(-integral)));
    return {mean_coef, std_dev};
  }
  double ratio = sde.beta_max / sde.beta_min;
  double std_dev = sde.beta_min * std::sqrt(std::max(0.0, std::pow(ratio, 2.0 * t) - 1.0));
  return {1.0, std_dev};
}

void apply_node_mask(Eigen::MatrixXd& x, const Mask& mask) {
  for (int i = 0; i < x.rows(); ++i)
    if (!mask[std::size_t(i)]) x.row(i).setZero();
}

void apply_adj_mask(AdjChannels& a, const Mask& mask) {
  for (auto& ch : a) {
    ch.diagonal().setZero();
    for (int i = 0; i < ch.rows(); ++i) {
      if (mask[std::size_t(i)]) continue;
      ch.row(i).setZero();
      ch.col(i).setZero();
    }
  }
}

Eigen::MatrixXd node_noise(int n, int a, const Mask& mask, Rng& rng) {
  Eigen::MatrixXd z(n, a);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < a; ++k) z(i, k) = rng.normal();
  apply_node_mask(z, mask);
  return z;
}

AdjChannels adj_noise(int n, int b, const Mask& mask, Rng& rng) {
  AdjChannels out;
  out.reserve(std::size_t(b));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int c = 0; c < b; ++c) {
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    Eigen::MatrixXd z = inv_sqrt2 * (g + g.transpose());
    out.push_back(std::move(z));
  }
  apply_adj_mask(out, mask);
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> perturb_nodes(
    const DiffusionSde& sde, const Eigen::MatrixXd& clean, double t,
    const Mask& mask, Rng& rng) {
  auto [mc, sd] = marginal_params(sde, t);
  Eigen::MatrixXd z = node_noise(int(clean.rows()), int(clean.cols()), mask, rng);
  Eigen::MatrixXd noisy = mc * clean + sd * z;
  return {std::move(noisy), std::move(z)};
}

std::pair<AdjChannels, AdjChannels> perturb_adj(const DiffusionSde& sde,
                                                const AdjChannels& clean, double t,
                                                const Mask& mask, Rng& rng) {
  auto [mc, sd] = marginal_params(sde, t);
  const int n = int(clean.front().rows());
  AdjChannels z = adj_noise(n, int(clean.size()), mask, rng);
  AdjChannels noisy;
  noisy.reserve(clean.size());
  for (std::size_t c = 0; c < clean.size(); ++c)
    noisy.push_back(mc * clean[c] + sd * z[c]);
  return {std::move(noisy), std::move(z)};
}

Eigen::MatrixXd prior_sample_nodes(const DiffusionSde& sde, int n, int a,
                                   const Mask& mask, Rng& rng) {
  double scale = 1.0;
  if (sde.kind == SdeKind::VE)
    scale = std::sqrt(sde.beta_max * sde.beta_max - sde.beta_min * sde.beta_min);
  Eigen::MatrixXd z = node_noise(n, a, mask, rng);
  return scale * z;
}

AdjChannels prior_sample_adj(const DiffusionSde& sde, int n, int b,
                             const Mask& mask, Rng& rng) {
  double scale = 1.0;
  if (sde.kind == SdeKind::VE)
    scale = std::sqrt(sde.beta_max * sde.beta_max - sde.beta_min * sde.beta_min);
  AdjChannels z = adj_noise(n, b, mask, rng);
  for (auto& ch : z) ch *= scale;
  return z;
}

}  // namespace ooda
