#pragma once

#include <cstdint>
#include <vector>

#include "ooda/graph.hpp"
#include "ooda/nets.hpp"
#include "ooda/sde.hpp"

namespace ooda {

struct TrainConfig {
  double lr = 4e-4;
  double weight_decay = 1e-12;
  int batch_size = 32;
  int epochs = 100;
  double ema_decay = 0.999;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = one worker per hardware thread

  void check() const;
};

struct TrainStats {
  std::vector<double> step_losses;
};

/// Denoising score matching on unlabeled graphs: t uniform in [eps_time, T],
/// loss E[|| net(noisy, t) + z ||^2] summed over the X and A components
/// (equivalently std^2-weighted regression onto the analytic score -z/std).
/// Returns the EMA parameters. Deterministic given (cfg.seed, ds order).
GraphAttentionNet train_score(const GraphDataset& ds, const DiffusionSde& sde_x,
                              const DiffusionSde& sde_a, const NetConfig& arch,
                              const TrainConfig& cfg, TrainStats* stats = nullptr);

/// Cross-entropy training of the noisy-graph classifier on perturbed labeled
/// graphs, t uniform in [eps_time, T]. Returns the EMA parameters.
GraphAttentionNet train_classifier(const GraphDataset& ds, const DiffusionSde& sde_x,
                                   const DiffusionSde& sde_a, const NetConfig& arch,
                                   const TrainConfig& cfg, TrainStats* stats = nullptr);

/// AdamW with decoupled weight decay over a flat list of matrices.
class AdamW {
 public:
  AdamW(std::size_t num_params, double lr, double weight_decay);
  void step(std::vector<ad::Mat>& params, const std::vector<ad::Mat>& grads);

 private:
  double lr_, wd_;
  int t_ = 0;
  std::vector<ad::Mat> m_, v_;
};

}  // namespace ooda
