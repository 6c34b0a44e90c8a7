#include "ooda/downstream.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "ooda/errors.hpp"
#include "ooda/rng.hpp"
#include "ooda/tensorize.hpp"
#include "ooda/train.hpp"

namespace ooda {

using ad::Mat;
using ad::Tape;
using ad::Var;

void ClassifierConfig::check() const {
  if (layers < 1 || hidden < 1) throw ConfigError("classifier dims must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch_size < 1 || epochs < 0) throw ConfigError("bad epochs/batch size");
  if (seeds.empty()) throw ConfigError("at least one seed required");
}

GinClassifier::GinClassifier(int feat_dim, int num_classes, int layers, int hidden,
                             std::uint64_t seed)
    : feat_dim_(feat_dim), num_classes_(num_classes), layers_(layers), hidden_(hidden) {
  Rng rng(seed);
  auto init = [&rng](int r, int c) {
    Mat m(r, c);
    double sd = std::sqrt(2.0 / double(r + c));
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = sd * rng.normal();
    return m;
  };
  int din = feat_dim;
  for (int l = 0; l < layers; ++l) {
    params_.push_back(init(din, hidden));          // w1
    params_.push_back(Mat::Zero(1, hidden));       // b1
    params_.push_back(init(hidden, hidden));       // w2
    params_.push_back(Mat::Zero(1, hidden));       // b2
    din = hidden;
  }
  params_.push_back(init(hidden, num_classes));    // readout w
  params_.push_back(Mat::Zero(1, num_classes));    // readout b
}

Var GinClassifier::forward(Tape& tape, const std::vector<Var>& params,
                           const DenseGraph& g, double dropout,
                           Rng* dropout_rng) const {
  const int n = g.n_max();
  Mask mask = mask_of(g);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& ch : g.adjacency) w += ch.cast<double>();
  Var adj = tape.leaf(w, false);
  Var h = tape.leaf(node_tensor(g), false);

  std::size_t p = 0;
  for (int l = 0; l < layers_; ++l) {
    Var w1 = params[p++], b1 = params[p++], w2 = params[p++], b2 = params[p++];
    // (1 + eps) h + sum over neighbors, eps = 0
    Var agg = ad::add(h, ad::matmul(adj, h));
    Var z = ad::relu(ad::add_rowvec(ad::matmul(agg, w1), b1));
    h = ad::relu(ad::add_rowvec(ad::matmul(z, w2), b2));
    if (dropout > 0.0 && dropout_rng) {
      Mat keep(h.rows(), h.cols());
      const double scale = 1.0 / (1.0 - dropout);
      for (int i = 0; i < keep.rows(); ++i)
        for (int j = 0; j < keep.cols(); ++j)
          keep(i, j) = dropout_rng->uniform() < dropout ? 0.0 : scale;
      h = ad::mul_const(h, keep);
    }
  }
  Var pooled = ad::masked_sum_rows(ad::mask_rows(h, mask), mask);
  int active = g.active_nodes();
  if (active > 0) pooled = ad::scale(pooled, 1.0 / double(active));  // mean pooling
  Var wr = params[p++], br = params[p++];
  return ad::add_rowvec(ad::matmul(pooled, wr), br);
}

namespace {

int predict(const GinClassifier& clf, const DenseGraph& g) {
  Tape tape(false);
  std::vector<Var> params;
  params.reserve(clf.params().size());
  for (const auto& m : clf.params()) params.push_back(tape.leaf(m, false));
  Var logits = clf.forward(tape, params, g, 0.0, nullptr);
  int best = 0;
  logits.value().row(0).maxCoeff(&best);
  return best;
}

}  // namespace

GinClassifier train_gnn(const GraphDataset& train, const ClassifierConfig& cfg,
                        std::uint64_t seed, const GraphDataset* val) {
  cfg.check();
  if (train.graphs.empty()) throw DataError("train_gnn on an empty dataset");
  train.check_consistent();
  for (std::size_t i = 0; i < train.graphs.size(); ++i)
    if (!train.graphs[i].label)
      throw DataError("unlabeled graph at index " + std::to_string(i));

  GinClassifier clf(train.feat_dim(), train.num_classes, cfg.layers, cfg.hidden,
                    child_seed(seed, 0x91));
  AdamW opt(clf.params().size(), cfg.lr, cfg.weight_decay);
  Rng shuffle_rng(child_seed(seed, 0x5E));
  Rng dropout_rng(child_seed(seed, 0xD0));

  const int n = int(train.graphs.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  std::vector<Mat> best_params = clf.params();
  double best_val = -1.0;
  Tape tape(true);
  std::vector<Mat> grads(clf.params().size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    for (int bstart = 0; bstart < n; bstart += cfg.batch_size) {
      const int bsize = std::min(cfg.batch_size, n - bstart);
      for (auto& gmat : grads) gmat.resize(0, 0);
      double loss = 0.0;
      for (int e = 0; e < bsize; ++e) {
        const DenseGraph& g = train.graphs[std::size_t(order[std::size_t(bstart + e)])];
        tape.reset();
        std::vector<Var> params;
        params.reserve(clf.params().size());
        for (const auto& m : clf.params()) params.push_back(tape.leaf(m, true));
        Var logits = clf.forward(tape, params, g, cfg.dropout, &dropout_rng);
        Var nll = ad::scale(ad::log_softmax_pick(logits, *g.label), -1.0 / bsize);
        tape.backward(nll);
        loss += nll.value()(0, 0);
        for (std::size_t i = 0; i < grads.size(); ++i) {
          if (grads[i].size() == 0)
            grads[i] = params[i].grad();
          else
            grads[i] += params[i].grad();
        }
      }
      if (!std::isfinite(loss)) throw NumericError("downstream training diverged");
      opt.step(clf.params(), grads);
    }
    if (val && !val->graphs.empty()) {
      double acc = evaluate(clf, *val);
      if (acc > best_val) {
        best_val = acc;
        best_params = clf.params();
      }
    }
  }
  if (val && !val->graphs.empty() && best_val >= 0.0) clf.params() = best_params;
  return clf;
}

double evaluate(const GinClassifier& clf, const GraphDataset& ds) {
  if (ds.graphs.empty()) throw DataError("evaluate on an empty dataset");
  std::size_t correct = 0;
  for (const auto& g : ds.graphs) {
    if (!g.label) throw DataError("evaluate requires labeled graphs");
    correct += predict(clf, g) == *g.label ? 1 : 0;
  }
  return double(correct) / double(ds.graphs.size());
}

std::string to_string(CompareMode m) {
  switch (m) {
    case CompareMode::erm: return "erm";
    case CompareMode::ooda: return "ooda";
    case CompareMode::lambda_only: return "lambda_only";
    case CompareMode::alpha_only: return "alpha_only";
    case CompareMode::unconditional: return "unconditional";
  }
  return "erm";
}

CompareMode compare_mode_from_string(const std::string& s) {
  if (s == "erm") return CompareMode::erm;
  if (s == "ooda") return CompareMode::ooda;
  if (s == "lambda_only") return CompareMode::lambda_only;
  if (s == "alpha_only") return CompareMode::alpha_only;
  if (s == "unconditional") return CompareMode::unconditional;
  throw ConfigError("unknown comparison mode: " + s);
}

namespace {

// Augmentation provenance must match the requested mode (auditable from the
// per-graph metadata written by the sampler).
void audit_augmentation(const GraphDataset& aug, CompareMode mode) {
  auto meta_num = [](const DenseGraph& g, const std::string& key) {
    auto it = g.meta.find(key);
    if (it == g.meta.end())
      throw ConfigError("augmented graph lacks provenance key: " + key);
    return std::stod(it->second);
  };
  for (const auto& g : aug.graphs) {
    double lambda = meta_num(g, "lambda");
    double r1 = meta_num(g, "r1");
    double r2 = meta_num(g, "r2");
    bool guided = r1 > 0.0 || r2 > 0.0;
    switch (mode) {
      case CompareMode::ooda:
        if (!(lambda > 0.0) || !guided)
          throw ConfigError("ooda mode expects lambda > 0 with guidance on");
        break;
      case CompareMode::lambda_only:
        if (!(lambda > 0.0) || guided)
          throw ConfigError("lambda_only mode expects lambda > 0 with r1 = r2 = 0");
        break;
      case CompareMode::alpha_only:
        if (lambda != 0.0 || !guided)
          throw ConfigError("alpha_only mode expects lambda = 0 with guidance on");
        break;
      case CompareMode::unconditional:
        if (lambda != 0.0 || guided)
          throw ConfigError("unconditional mode expects lambda = 0 and r1 = r2 = 0");
        break;
      case CompareMode::erm:
        break;
    }
  }
}

}  // namespace

std::vector<DownstreamRow> run_comparison(const GraphDataset& train,
                                          const GraphDataset& val,
                                          const GraphDataset& test,
                                          const GraphDataset* augmented,
                                          const ClassifierConfig& cfg,
                                          CompareMode mode) {
  cfg.check();
  GraphDataset training = train;
  if (mode != CompareMode::erm) {
    if (!augmented || augmented->graphs.empty())
      throw ConfigError("mode " + to_string(mode) + " requires an augmented dataset");
    audit_augmentation(*augmented, mode);
    if (augmented->feat_dim() != train.feat_dim() ||
        augmented->edge_dim() != train.edge_dim() ||
        augmented->n_max() != train.n_max())
      throw ConfigError("augmented dataset schema disagrees with train");
    training.graphs.insert(training.graphs.end(), augmented->graphs.begin(),
                           augmented->graphs.end());
  }

  std::vector<DownstreamRow> rows(cfg.seeds.size());
  int num_workers = cfg.threads > 0 ? cfg.threads
                                    : int(std::thread::hardware_concurrency());
  num_workers = std::max(1, std::min<int>(num_workers, int(cfg.seeds.size())));

  auto run_seed = [&](std::size_t si) {
    GinClassifier clf = train_gnn(training, cfg, cfg.seeds[si], &val);
    rows[si] = {to_string(mode), cfg.seeds[si], evaluate(clf, val), evaluate(clf, test)};
  };
  if (num_workers == 1) {
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si) run_seed(si);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < num_workers; ++w)
      pool.emplace_back([&, w]() {
        for (std::size_t si = std::size_t(w); si < cfg.seeds.size();
             si += std::size_t(num_workers))
          run_seed(si);
      });
    for (auto& th : pool) th.join();
  }
  return rows;
}

}  // namespace ooda
