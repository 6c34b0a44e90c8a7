#include "ooda/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "ooda/errors.hpp"
#include "ooda/rng.hpp"
#include "ooda/tensorize.hpp"

namespace ooda {

using ad::Mat;
using ad::Tape;
using ad::Var;

void TrainConfig::check() const {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(ema_decay > 0.0 && ema_decay < 1.0))
    throw ConfigError("EMA decay must lie in (0, 1)");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (epochs < 0) throw ConfigError("epoch count must be >= 0");
  if (weight_decay < 0.0) throw ConfigError("weight decay must be >= 0");
}

AdamW::AdamW(std::size_t num_params, double lr, double weight_decay)
    : lr_(lr), wd_(weight_decay), m_(num_params), v_(num_params) {}

void AdamW::step(std::vector<Mat>& params, const std::vector<Mat>& grads) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++t_;
  double c1 = 1.0 - std::pow(b1, t_);
  double c2 = 1.0 - std::pow(b2, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (m_[i].size() == 0) {
      m_[i] = Mat::Zero(params[i].rows(), params[i].cols());
      v_[i] = Mat::Zero(params[i].rows(), params[i].cols());
    }
    m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i].cwiseProduct(grads[i]);
    Mat update = (m_[i] / c1).array() / ((v_[i] / c2).array().sqrt() + eps);
    params[i] -= lr_ * (update + wd_ * params[i]);
  }
}

namespace {

struct ElementGrads {
  std::vector<Mat> grads;
  double loss = 0.0;
};

// One DSM element: perturb at a fresh uniform t, regress the raw net output
// onto -z.
ElementGrads score_element(const GraphAttentionNet& net, const DiffusionSde& sde_x,
                           const DiffusionSde& sde_a, const DenseGraph& g,
                           std::uint64_t seed, double inv_batch, Tape& tape) {
  Rng rng(seed);
  double t = sde_x.eps_time + rng.uniform() * (sde_x.terminal_time - sde_x.eps_time);
  Mask mask = mask_of(g);
  auto [nx, zx] = perturb_nodes(sde_x, node_tensor(g), t, mask, rng);
  auto [na, za] = perturb_adj(sde_a, adj_tensor(g), t, mask, rng);

  tape.reset();
  auto params = bind_params(net, tape, true);
  Var x = tape.leaf(nx, false);
  std::vector<Var> a;
  a.reserve(na.size());
  for (const auto& ch : na) a.push_back(tape.leaf(ch, false));
  RawOutputs raw = net_forward(net, tape, params, x, a, mask, t);

  Var loss = ad::sq_norm(ad::add(raw.out_x, tape.leaf(zx, false)));
  for (std::size_t c = 0; c < raw.out_a.size(); ++c)
    loss = ad::add(loss, ad::sq_norm(ad::add(raw.out_a[c], tape.leaf(za[c], false))));
  loss = ad::scale(loss, inv_batch);
  tape.backward(loss);

  ElementGrads out;
  out.loss = loss.value()(0, 0);
  out.grads.reserve(params.size());
  for (const Var& p : params) out.grads.push_back(p.grad());
  return out;
}

ElementGrads classifier_element(const GraphAttentionNet& net, const DiffusionSde& sde_x,
                                const DiffusionSde& sde_a, const DenseGraph& g,
                                std::uint64_t seed, double inv_batch, Tape& tape) {
  Rng rng(seed);
  double t = sde_x.eps_time + rng.uniform() * (sde_x.terminal_time - sde_x.eps_time);
  Mask mask = mask_of(g);
  auto [nx, zx] = perturb_nodes(sde_x, node_tensor(g), t, mask, rng);
  auto [na, za] = perturb_adj(sde_a, adj_tensor(g), t, mask, rng);

  tape.reset();
  auto params = bind_params(net, tape, true);
  Var x = tape.leaf(nx, false);
  std::vector<Var> a;
  a.reserve(na.size());
  for (const auto& ch : na) a.push_back(tape.leaf(ch, false));
  RawOutputs raw = net_forward(net, tape, params, x, a, mask, t);
  Var loss = ad::scale(ad::log_softmax_pick(raw.logits, *g.label), -inv_batch);
  tape.backward(loss);

  ElementGrads out;
  out.loss = loss.value()(0, 0);
  out.grads.reserve(params.size());
  for (const Var& p : params) out.grads.push_back(p.grad());
  return out;
}

template <typename ElementFn>
GraphAttentionNet train_loop(const GraphDataset& ds, const DiffusionSde& sde_x,
                             const DiffusionSde& sde_a, const NetConfig& arch,
                             const TrainConfig& cfg, TrainStats* stats,
                             ElementFn element) {
  cfg.check();
  sde_x.check();
  sde_a.check();
  if (ds.graphs.empty()) throw DataError("training dataset is empty");
  ds.check_consistent();

  GraphAttentionNet net(arch, child_seed(cfg.seed, 0xA11C));
  std::vector<Mat> ema = net.params();
  AdamW opt(net.params().size(), cfg.lr, cfg.weight_decay);

  const int n = int(ds.graphs.size());
  const int batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  int num_workers = cfg.threads > 0 ? cfg.threads
                                    : int(std::thread::hardware_concurrency());
  num_workers = std::max(1, std::min(num_workers, cfg.batch_size));

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(child_seed(cfg.seed, 0x5FFE));

  std::vector<Mat> grads(net.params().size());
  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng.engine());
    for (int bstart = 0; bstart < n; bstart += cfg.batch_size) {
      const int bsize = std::min(cfg.batch_size, n - bstart);
      const double inv_batch = 1.0 / double(bsize);

      // per-element gradients, reduced in element order so results do not
      // depend on the worker count
      std::vector<ElementGrads> parts(static_cast<std::size_t>(bsize));
      auto work = [&](int worker) {
        thread_local Tape tape(true);
        for (int e = worker; e < bsize; e += num_workers) {
          const DenseGraph& g = ds.graphs[std::size_t(order[std::size_t(bstart + e)])];
          parts[std::size_t(e)] = element(net, sde_x, sde_a, g,
                                          child_seed(cfg.seed, std::uint64_t(step),
                                                     std::uint64_t(e)),
                                          inv_batch, tape);
        }
      };
      if (num_workers == 1) {
        work(0);
      } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(num_workers));
        pool.reserve(std::size_t(num_workers));
        for (int w = 0; w < num_workers; ++w)
          pool.emplace_back([&, w]() {
            try {
              work(w);
            } catch (...) {
              errors[std::size_t(w)] = std::current_exception();
            }
          });
        for (auto& th : pool) th.join();
        for (const auto& e : errors)
          if (e) std::rethrow_exception(e);
      }

      double loss = 0.0;
      for (std::size_t i = 0; i < grads.size(); ++i) {
        grads[i] = parts[0].grads[i];
        for (int e = 1; e < bsize; ++e) grads[i] += parts[std::size_t(e)].grads[i];
      }
      for (int e = 0; e < bsize; ++e) loss += parts[std::size_t(e)].loss;

      if (!std::isfinite(loss))
        throw NumericError("training loss diverged at step " + std::to_string(step));
      opt.step(net.params(), grads);
      for (std::size_t i = 0; i < ema.size(); ++i)
        ema[i] = cfg.ema_decay * ema[i] + (1.0 - cfg.ema_decay) * net.params()[i];
      if (stats) stats->step_losses.push_back(loss);
      ++step;
      (void)batches_per_epoch;
    }
  }

  if (step > 0) net.params() = ema;
  return net;
}

}  // namespace

GraphAttentionNet train_score(const GraphDataset& ds, const DiffusionSde& sde_x,
                              const DiffusionSde& sde_a, const NetConfig& arch,
                              const TrainConfig& cfg, TrainStats* stats) {
  if (arch.is_classifier())
    throw ConfigError("train_score requires a score architecture (num_classes = 0)");
  return train_loop(ds, sde_x, sde_a, arch, cfg, stats, score_element);
}

GraphAttentionNet train_classifier(const GraphDataset& ds, const DiffusionSde& sde_x,
                                   const DiffusionSde& sde_a, const NetConfig& arch,
                                   const TrainConfig& cfg, TrainStats* stats) {
  if (!arch.is_classifier())
    throw ConfigError("train_classifier requires num_classes > 0");
  for (std::size_t i = 0; i < ds.graphs.size(); ++i)
    if (!ds.graphs[i].label)
      throw DataError("unlabeled graph at index " + std::to_string(i));
  return train_loop(ds, sde_x, sde_a, arch, cfg, stats, classifier_element);
}

}  // namespace ooda
