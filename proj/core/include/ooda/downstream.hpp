#pragma once

#include <cstdint>
#include <vector>

#include "ooda/eval.hpp"
#include "ooda/graph.hpp"
#include "ooda/tape.hpp"

namespace ooda {

/// GIN graph classifier configuration (desk-scale defaults; the full-scale
/// width of 300 is reachable through the same knobs).
struct ClassifierConfig {
  int layers = 3;
  int hidden = 64;
  double dropout = 0.5;
  int epochs = 60;
  double lr = 1e-3;
  double weight_decay = 0.0;
  int batch_size = 32;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int threads = 0;

  void check() const;
};

/// Sum-aggregation GIN with mean pooling over unmasked nodes.
class GinClassifier {
 public:
  GinClassifier() = default;
  GinClassifier(int feat_dim, int num_classes, int layers, int hidden,
                std::uint64_t seed);

  int feat_dim() const { return feat_dim_; }
  int num_classes() const { return num_classes_; }
  int layers() const { return layers_; }
  int hidden() const { return hidden_; }
  const std::vector<ad::Mat>& params() const { return params_; }
  std::vector<ad::Mat>& params() { return params_; }

  /// Logits for one graph; dropout_rng non-null enables inverted dropout.
  ad::Var forward(ad::Tape& tape, const std::vector<ad::Var>& params,
                  const DenseGraph& g, double dropout, Rng* dropout_rng) const;

 private:
  int feat_dim_ = 0, num_classes_ = 0, layers_ = 0, hidden_ = 0;
  std::vector<ad::Mat> params_;
};

/// Cross-entropy ERM fit; when val is given the best-validation-accuracy
/// checkpoint is returned. Deterministic for a fixed seed.
GinClassifier train_gnn(const GraphDataset& train, const ClassifierConfig& cfg,
                        std::uint64_t seed, const GraphDataset* val = nullptr);

/// Fraction of argmax-correct predictions. Throws DataError on empty input.
double evaluate(const GinClassifier& clf, const GraphDataset& ds);

/// Table-2 style modes: what augmentation (if any) joins the train split.
enum class CompareMode { erm, ooda, lambda_only, alpha_only, unconditional };

std::string to_string(CompareMode m);
CompareMode compare_mode_from_string(const std::string& s);

/// Trains one classifier per seed on train (erm) or train + augmented
/// (other modes), validating the augmentation provenance against the mode,
/// and reports per-seed val/test accuracies.
std::vector<DownstreamRow> run_comparison(const GraphDataset& train,
                                          const GraphDataset& val,
                                          const GraphDataset& test,
                                          const GraphDataset* augmented,
                                          const ClassifierConfig& cfg,
                                          CompareMode mode);

}  // namespace ooda
