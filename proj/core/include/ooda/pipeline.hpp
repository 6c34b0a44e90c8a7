#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ooda/datasets.hpp"
#include "ooda/downstream.hpp"
#include "ooda/eval.hpp"
#include "ooda/nets.hpp"
#include "ooda/sampler.hpp"
#include "ooda/train.hpp"

namespace ooda {

/// Everything one experiment needs, loaded from a single JSON config file.
/// All randomness derives from the global seed; OODA_OUT overrides out_dir.
struct PipelineConfig {
  std::uint64_t seed = 7;
  std::string out_dir = "out/run";

  SplitConfig dataset;
  DiffusionSde sde_x;
  DiffusionSde sde_a;

  // architecture (input schema filled in from the dataset at training time)
  int model_layers = 3;
  int model_heads = 4;
  int model_hidden_x = 64;
  int model_hidden_a = 16;
  int model_time_dim = 32;

  TrainConfig score_train;
  TrainConfig classifier_train;

  std::vector<double> lambda_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double r1 = 0.5;
  double r2 = 0.5;
  double alpha_cap = 10.0;

  SamplerConfig sampler;
  int eval_per_class = 30;
  int downstream_per_class = 25;
  double downstream_lambda = 0.05;

  RandomGinConfig eval_gin;
  ClassifierConfig downstream;

  std::string config_hash;  // sha256 of the config file bytes

  void check() const;
};

/// Parses and validates the JSON config; schema violations raise ConfigError
/// carrying the offending key path.
PipelineConfig load_pipeline_config(const std::string& path);

/// Artifact locations under the configured output directory.
struct ArtifactPaths {
  std::string root;

  std::string manifest() const { return root + "/manifest.json"; }
  std::string dataset(SplitTag tag) const {
    return root + "/datasets/" + to_string(tag) + ".graphs.jsonl";
  }
  std::string score_ckpt() const { return root + "/checkpoints/score.ckpt"; }
  std::string classifier_ckpt() const { return root + "/checkpoints/classifier.ckpt"; }
  std::string eval_set(double lambda) const;
  std::string mode_set(CompareMode mode) const;
  std::string single_sample(double lambda, std::optional<int> target_class) const;
  std::string metrics_csv() const { return root + "/report/metrics.csv"; }
  std::string mmd_svg() const { return root + "/report/mmd_vs_lambda.svg"; }
};

// ---- stages ---------------------------------------------------------------

void cmd_gen_data(const PipelineConfig& cfg);
void cmd_train_score(const PipelineConfig& cfg);
void cmd_train_classifier(const PipelineConfig& cfg);

/// Single sampling shot: one lambda, optionally one class, count graphs per
/// targeted class. Writes one augmented dataset file.
void cmd_sample(const PipelineConfig& cfg, double lambda,
                std::optional<int> target_class, int count);

/// The pipeline's sampling stage: one augmented set per grid lambda plus the
/// four downstream mode sets (ooda / lambda_only / alpha_only / unconditional).
void cmd_sample_stage(const PipelineConfig& cfg);

/// MMD, preservation and validity per lambda plus the downstream mode
/// comparison; writes metrics.csv and the MMD-vs-lambda SVG.
MetricReport cmd_evaluate(const PipelineConfig& cfg);

/// All stages in order. Stages whose outputs already exist under a matching
/// config hash are reused, so deleting only downstream artifacts and
/// rerunning keeps upstream checkpoints byte-identical.
void cmd_pipeline(const PipelineConfig& cfg);

}  // namespace ooda
