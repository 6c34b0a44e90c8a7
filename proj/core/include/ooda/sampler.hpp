#pragma once

#include <functional>
#include <optional>

#include "ooda/graph.hpp"
#include "ooda/guidance.hpp"
#include "ooda/nets.hpp"

namespace ooda {

enum class SolverKind { euler_maruyama, em_langevin, reverse_diffusion };

SolverKind solver_kind_from_string(const std::string& s);
std::string to_string(SolverKind k);

struct SamplerConfig {
  SolverKind solver = SolverKind::em_langevin;
  double snr = 0.2;
  double scale_coeff = 0.7;
  int corrector_steps = 1;  // Langevin steps per predictor step
  int num_steps = 1000;
  std::uint64_t seed = 0;
  bool debug_validate = false;  // check adjacency invariants every step
  int threads = 0;

  void check() const;
};

/// Lambda grid and per-class sample counts for dataset augmentation.
struct AugmentRequest {
  std::vector<double> lambda_grid;
  int per_class_count = 0;
  /// Override for the node-count rule: uniform in [lo, hi] instead of
  /// resampling the training node-count distribution.
  std::optional<std::pair<int, int>> node_range;

  void check() const;
};

/// Unconditional score provider; tests substitute analytic scores here.
using ScoreFn = std::function<ScoreEstimate(const Eigen::MatrixXd& x,
                                            const AdjChannels& a, const Mask& mask,
                                            double t)>;

/// Class log-probability input gradient provider.
using ClassGradFn = std::function<std::pair<Eigen::MatrixXd, AdjChannels>(
    const Eigen::MatrixXd& x, const AdjChannels& a, const Mask& mask, double t,
    int y)>;

struct GraphState {
  Eigen::MatrixXd x;
  AdjChannels a;
};

/// Integrates the coupled reverse-time SDE pair from the prior at t = T down
/// to eps_time using the guided conditional score. grad_fn may be null
/// (guidance off). Throws NumericError naming the step index on divergence.
GraphState reverse_integrate(const ScoreFn& score_fn, const ClassGradFn* grad_fn,
                             const DiffusionSde& sde_x, const DiffusionSde& sde_a,
                             const GuidanceConfig& gcfg, const SamplerConfig& scfg,
                             int n_max, int feat_dim, int edge_dim, int n_nodes,
                             Rng& rng);

/// Network-backed reverse sampling; returns the continuous graph at eps_time
/// with label = gcfg.target_class.
DenseGraph reverse_sample(const GraphAttentionNet& score_net,
                          const GraphAttentionNet* phi, const DiffusionSde& sde_x,
                          const DiffusionSde& sde_a, const GuidanceConfig& gcfg,
                          const SamplerConfig& scfg, int n_nodes, Rng& rng);

/// Continuous -> discrete: adjacency thresholded at 0.5 and OR-symmetrized
/// with a cleared diagonal; features argmaxed to one-hot within each block
/// (one block spanning all of a when blocks is empty); masked entries zeroed.
DenseGraph quantize(const DenseGraph& g, const std::vector<int>& feature_blocks = {});

/// Draws per_class_count graphs per (lambda, class) pair, quantizes them and
/// tags each with lambda/class/seed provenance plus extra_meta (e.g. the
/// checkpoint hash). Node counts follow the empirical distribution of train
/// unless the request overrides it.
GraphDataset augment_dataset(const GraphDataset& train,
                             const GraphAttentionNet& score_net,
                             const GraphAttentionNet* phi, const DiffusionSde& sde_x,
                             const DiffusionSde& sde_a, const GuidanceConfig& gcfg,
                             const AugmentRequest& req, const SamplerConfig& scfg,
                             const std::map<std::string, std::string>& extra_meta = {});

}  // namespace ooda
