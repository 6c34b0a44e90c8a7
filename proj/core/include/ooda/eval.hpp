#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ooda/graph.hpp"
#include "ooda/nets.hpp"

namespace ooda {

/// Untrained random GIN used as a fixed embedding extractor. One embedding
/// per (graph, seed index); metrics average over num_seeds seeds.
struct RandomGinConfig {
  int layers = 3;
  int hidden = 64;
  int num_seeds = 10;
  std::uint64_t seed = 0;

  void check() const;
};

/// Sum-pooled layer outputs concatenated: one row per graph, dimension
/// layers * hidden. Deterministic given (cfg.seed, seed_index); permutation
/// invariant; all-masked graphs embed to zero.
Eigen::MatrixXd random_gin_embed(const std::vector<DenseGraph>& graphs,
                                 const RandomGinConfig& cfg, int seed_index);

/// 1-D earth mover's distance over the coordinate axis: both vectors are
/// shifted by their joint minimum, normalized to sum 1 (zero-sum maps to
/// uniform) and compared via the L1 distance of cumulative sums.
double emd_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct MmdResult {
  double mean = 0.0;
  double stderr_ = 0.0;
  bool biased = false;  // singleton sets fall back to the biased estimator
  std::vector<double> per_seed;
};

/// MMD with RBF kernel k = exp(-d / 2 sigma^2), d = emd_distance, over
/// random-GIN embeddings; the unbiased MMD^2 estimator is clamped at zero
/// before the square root and averaged over cfg.num_seeds GIN seeds. sigma
/// defaults to the median of all pairwise distances (per seed).
MmdResult mmd_rbf(const std::vector<DenseGraph>& p_graphs,
                  const std::vector<DenseGraph>& q_graphs, const RandomGinConfig& cfg,
                  std::optional<double> sigma = std::nullopt);

/// E[p(y_G | G)] under the noisy classifier evaluated at t = eps_time on the
/// (discrete, {0,1}-valued) graphs. Labels are required.
double preservation_score(const GraphAttentionNet& phi,
                          const GraphDataset& augmented, double eps_time = 1e-3);

using GraphPredicate = std::function<bool(const DenseGraph&)>;

/// Mean of the predicate; an empty set is vacuously 1.0 (with a warning).
double validity_fraction(const std::vector<DenseGraph>& graphs,
                         const GraphPredicate& predicate);

GraphPredicate predicate_valid();           // structural validate() passes
GraphPredicate predicate_valid_discrete();  // discrete validate passes
GraphPredicate predicate_connected();
/// Connectivity after dropping isolated nodes (the reported metric for
/// sampled graphs).
GraphPredicate predicate_connected_ignoring_isolated();
GraphPredicate predicate_max_degree(int bound);

// ---- report ---------------------------------------------------------------

struct LambdaRow {
  double lambda = 0.0;
  double mmd_mean = 0.0;
  double mmd_stderr = 0.0;
  double preservation = 0.0;
  double validity = 0.0;
  double connected = 0.0;
};

struct DownstreamRow {
  std::string mode;
  std::uint64_t seed = 0;
  double val_acc = 0.0;
  double test_acc = 0.0;
};

struct MetricReport {
  std::vector<LambdaRow> rows;
  std::vector<DownstreamRow> downstream;
  bool mmd_biased = false;
};

/// CSV with the lambda table (lambda, mmd_mean, mmd_stderr, preservation,
/// validity, connected) followed by appended downstream rows
/// (mode, seed, val_acc, test_acc).
void write_metric_csv(const MetricReport& report, const std::string& path);

/// Line plot of MMD vs lambda with stderr bars.
void write_mmd_svg(const MetricReport& report, const std::string& path);

}  // namespace ooda
