#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ooda/sde.hpp"
#include "ooda/tape.hpp"

namespace ooda {

/// Architecture of the graph attention network used for both the score
/// model s_theta and the noisy-graph classifier phi (num_classes > 0).
/// The forward pass is permutation-equivariant and padding-independent:
/// attention and pooling see only unmasked nodes.
struct NetConfig {
  int layers = 3;
  int heads = 4;
  int hidden_x = 64;
  int hidden_a = 16;
  int time_dim = 32;
  int feat_dim = 0;   // a
  int edge_dim = 1;   // b
  int n_max = 0;
  int num_classes = 0;  // 0 = score net, > 0 = classifier

  bool is_classifier() const { return num_classes > 0; }
  int head_dim() const { return hidden_x / heads; }
  void check() const;
};

/// Named parameter layout in declaration (= checkpoint) order.
std::vector<std::pair<std::string, std::pair<int, int>>> param_layout(const NetConfig& cfg);

class GraphAttentionNet {
 public:
  GraphAttentionNet() = default;
  GraphAttentionNet(NetConfig cfg, std::uint64_t seed);

  const NetConfig& config() const { return cfg_; }
  const std::vector<ad::Mat>& params() const { return params_; }
  std::vector<ad::Mat>& params() { return params_; }

 private:
  NetConfig cfg_;
  std::vector<ad::Mat> params_;
};

/// Pair of tensors shaped like X and A: the score network output or a
/// guidance composition. score_a channels are symmetric with zero diagonal
/// and zeroed masked entries; score_x has zeroed masked rows.
struct ScoreEstimate {
  Eigen::MatrixXd score_x;
  AdjChannels score_a;
};

/// Leafs for all parameters on the tape, in declaration order.
std::vector<ad::Var> bind_params(const GraphAttentionNet& net, ad::Tape& tape,
                                 bool requires_grad);

/// Raw network outputs. For the score net out_x/out_a predict the negated
/// noise -z (the score times std); logits is only set for classifiers.
struct RawOutputs {
  ad::Var out_x;
  std::vector<ad::Var> out_a;
  ad::Var logits;
};

RawOutputs net_forward(const GraphAttentionNet& net, ad::Tape& tape,
                       const std::vector<ad::Var>& params, ad::Var x,
                       const std::vector<ad::Var>& a_channels, const Mask& mask,
                       double t);

/// Score estimate at time t: the raw noise prediction rescaled by the
/// perturbation std of each component's SDE.
ScoreEstimate score_forward(const GraphAttentionNet& net, const DiffusionSde& sde_x,
                            const DiffusionSde& sde_a, const Eigen::MatrixXd& x_t,
                            const AdjChannels& a_t, const Mask& mask, double t);

/// Classifier logits (length M row vector).
Eigen::RowVectorXd classifier_forward(const GraphAttentionNet& phi,
                                      const Eigen::MatrixXd& x_t,
                                      const AdjChannels& a_t, const Mask& mask,
                                      double t);

/// p(y = j | G_t) = exp(logit_j) / sum_k exp(logit_k).
Eigen::RowVectorXd class_probabilities(const Eigen::RowVectorXd& logits);

/// Gradient of log p(y | X_t, A_t) with respect to the inputs; the adjacency
/// gradient is symmetrized with diagonal and masked entries zeroed.
std::pair<Eigen::MatrixXd, AdjChannels> class_logprob_grad(
    const GraphAttentionNet& phi, const Eigen::MatrixXd& x_t, const AdjChannels& a_t,
    const Mask& mask, double t, int y);

}  // namespace ooda
