#include "ooda/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "ooda/errors.hpp"
#include "ooda/tensorize.hpp"

namespace ooda {

SolverKind solver_kind_from_string(const std::string& s) {
  if (s == "euler_maruyama" || s == "em") return SolverKind::euler_maruyama;
  if (s == "em_langevin") return SolverKind::em_langevin;
  if (s == "reverse_diffusion" || s == "reverse") return SolverKind::reverse_diffusion;
  throw ConfigError("unknown solver: " + s);
}

std::string to_string(SolverKind k) {
  switch (k) {
    case SolverKind::euler_maruyama: return "euler_maruyama";
    case SolverKind::em_langevin: return "em_langevin";
    case SolverKind::reverse_diffusion: return "reverse_diffusion";
  }
  return "em_langevin";
}

void SamplerConfig::check() const {
  if (snr < 0.0) throw ConfigError("snr must be >= 0");
  if (!(scale_coeff >= 0.0 && scale_coeff <= 1.0))
    throw ConfigError("scale_coeff must lie in [0, 1]");
  if (num_steps < 1) throw ConfigError("num_steps must be >= 1");
  if (corrector_steps < 0) throw ConfigError("corrector_steps must be >= 0");
}

void AugmentRequest::check() const {
  if (per_class_count < 0) throw ConfigError("per-class sample count must be >= 0");
  for (double l : lambda_grid)
    if (!(l >= 0.0 && l < 1.0))
      throw ConfigError("lambda grid values must lie in [0, 1)");
  if (node_range && (node_range->first < 1 || node_range->second < node_range->first))
    throw ConfigError("node range invalid");
}

namespace {

void check_state_finite(const GraphState& s, int step) {
  bool ok = s.x.allFinite();
  for (const auto& ch : s.a) ok = ok && ch.allFinite();
  if (!ok)
    throw NumericError("sampler diverged (non-finite state) at step " +
                       std::to_string(step));
}

void check_adj_invariants(const GraphState& s, const Mask& mask, int step) {
  for (const auto& ch : s.a) {
    for (int i = 0; i < ch.rows(); ++i) {
      if (ch(i, i) != 0.0)
        throw NumericError("nonzero adjacency diagonal at step " + std::to_string(step));
      for (int j = i + 1; j < ch.cols(); ++j)
        if (ch(i, j) != ch(j, i))
          throw NumericError("adjacency asymmetry at step " + std::to_string(step));
    }
    for (int i = 0; i < ch.rows(); ++i) {
      if (mask[std::size_t(i)]) continue;
      if (ch.row(i).cwiseAbs().sum() != 0.0 || ch.col(i).cwiseAbs().sum() != 0.0)
        throw NumericError("masked adjacency nonzero at step " + std::to_string(step));
    }
  }
  for (int i = 0; i < s.x.rows(); ++i)
    if (!mask[std::size_t(i)] && s.x.row(i).cwiseAbs().sum() != 0.0)
      throw NumericError("masked node row nonzero at step " + std::to_string(step));
}

ScoreEstimate eval_guided(const ScoreFn& score_fn, const ClassGradFn* grad_fn,
                          const GraphState& s, const Mask& mask, double t,
                          const GuidanceConfig& gcfg) {
  ScoreEstimate se = score_fn(s.x, s.a, mask, t);
  Eigen::MatrixXd gx = Eigen::MatrixXd::Zero(s.x.rows(), s.x.cols());
  AdjChannels ga;
  ga.reserve(s.a.size());
  for (const auto& ch : s.a) ga.push_back(Eigen::MatrixXd::Zero(ch.rows(), ch.cols()));
  const bool want_grads = grad_fn && (gcfg.r1 > 0.0 || gcfg.r2 > 0.0);
  if (want_grads) {
    auto [g1, g2] = (*grad_fn)(s.x, s.a, mask, t, gcfg.target_class);
    gx = std::move(g1);
    ga = std::move(g2);
  }
  return guided_score(se, gx, ga, gcfg, t, mask);
}

// VP integral of beta over [0, t]; used by the ancestral discretization.
double beta_integral(const DiffusionSde& sde, double t) {
  return sde.beta_min * t + 0.5 * (sde.beta_max - sde.beta_min) * t * t;
}

struct ComponentStep {
  const DiffusionSde* sde;
  bool is_adj;
};

}  // namespace

GraphState reverse_integrate(const ScoreFn& score_fn, const ClassGradFn* grad_fn,
                             const DiffusionSde& sde_x, const DiffusionSde& sde_a,
                             const GuidanceConfig& gcfg, const SamplerConfig& scfg,
                             int n_max, int feat_dim, int edge_dim, int n_nodes,
                             Rng& rng) {
  scfg.check();
  gcfg.check();
  sde_x.check();
  sde_a.check();
  if (n_nodes < 0 || n_nodes > n_max)
    throw ConfigError("n_nodes must lie in [0, n_max]");

  Mask mask(std::size_t(n_max), 0);
  for (int i = 0; i < n_nodes; ++i) mask[std::size_t(i)] = 1;

  GraphState state;
  state.x = prior_sample_nodes(sde_x, n_max, feat_dim, mask, rng);
  state.a = prior_sample_adj(sde_a, n_max, edge_dim, mask, rng);

  const double T = sde_x.terminal_time;
  const double eps = sde_x.eps_time;
  const int N = scfg.num_steps;
  const double dt = (T - eps) / double(N);

  auto guided_at = [&](const GraphState& s, double t, int step) {
    try {
      return eval_guided(score_fn, grad_fn, s, mask, t, gcfg);
    } catch (const NumericError& e) {
      throw NumericError("sampler diverged at step " + std::to_string(step) + ": " +
                         e.what());
    }
  };

  for (int k = 0; k < N; ++k) {
    const double t = std::max(eps, T - k * dt);
    const double t_next = std::max(eps, T - (k + 1) * dt);
    ScoreEstimate guided = guided_at(state, t, k);

    Eigen::MatrixXd zx = node_noise(n_max, feat_dim, mask, rng);
    AdjChannels za = adj_noise(n_max, edge_dim, mask, rng);

    if (scfg.solver == SolverKind::reverse_diffusion) {
      // ancestral-style predictor with discrete posterior coefficients
      if (sde_x.kind == SdeKind::VP) {
        double bd = beta_integral(sde_x, t) - beta_integral(sde_x, t_next);
        state.x = (2.0 - std::sqrt(1.0 - bd)) * state.x + bd * guided.score_x +
                  std::sqrt(bd) * zx;
      } else {
        double s2 = marginal_params(sde_x, t).second, s1 = marginal_params(sde_x, t_next).second;
        double var = std::max(0.0, s2 * s2 - s1 * s1);
        state.x += var * guided.score_x + std::sqrt(var) * zx;
      }
      if (sde_a.kind == SdeKind::VP) {
        double bd = beta_integral(sde_a, t) - beta_integral(sde_a, t_next);
        for (std::size_t c = 0; c < state.a.size(); ++c)
          state.a[c] = (2.0 - std::sqrt(1.0 - bd)) * state.a[c] +
                       bd * guided.score_a[c] + std::sqrt(bd) * za[c];
      } else {
        double s2 = marginal_params(sde_a, t).second, s1 = marginal_params(sde_a, t_next).second;
        double var = std::max(0.0, s2 * s2 - s1 * s1);
        for (std::size_t c = 0; c < state.a.size(); ++c)
          state.a[c] += var * guided.score_a[c] + std::sqrt(var) * za[c];
      }
    } else {
      // Euler-Maruyama predictor on the reverse SDE
      auto [fx, gx] = drift_diffusion_coeffs(sde_x, t);
      auto [fa, ga] = drift_diffusion_coeffs(sde_a, t);
      state.x -= (fx * state.x - gx * gx * guided.score_x) * dt;
      state.x += gx * std::sqrt(dt) * zx;
      for (std::size_t c = 0; c < state.a.size(); ++c) {
        state.a[c] -= (fa * state.a[c] - ga * ga * guided.score_a[c]) * dt;
        state.a[c] += ga * std::sqrt(dt) * za[c];
      }
    }
    check_state_finite(state, k);
    if (scfg.debug_validate) check_adj_invariants(state, mask, k);

    if (scfg.solver == SolverKind::em_langevin) {
      for (int c = 0; c < scfg.corrector_steps; ++c) {
        ScoreEstimate corr = guided_at(state, t_next, k);
        Eigen::MatrixXd cx = node_noise(n_max, feat_dim, mask, rng);
        AdjChannels ca = adj_noise(n_max, edge_dim, mask, rng);
        // per-component Langevin step sizes
        double gnorm_x = masked_norm_x(corr.score_x, mask);
        double znorm_x = masked_norm_x(cx, mask);
        if (gnorm_x > 1e-12) {
          double ex = 2.0 * scfg.scale_coeff * std::pow(scfg.snr * znorm_x / gnorm_x, 2.0);
          state.x += ex * corr.score_x + std::sqrt(2.0 * ex) * cx;
        }
        double gnorm_a = masked_norm_a(corr.score_a, mask);
        double znorm_a = masked_norm_a(ca, mask);
        if (gnorm_a > 1e-12) {
          double ea = 2.0 * scfg.scale_coeff * std::pow(scfg.snr * znorm_a / gnorm_a, 2.0);
          for (std::size_t ch = 0; ch < state.a.size(); ++ch)
            state.a[ch] += ea * corr.score_a[ch] + std::sqrt(2.0 * ea) * ca[ch];
        }
        check_state_finite(state, k);
        if (scfg.debug_validate) check_adj_invariants(state, mask, k);
      }
    }
  }
  return state;
}

DenseGraph reverse_sample(const GraphAttentionNet& score_net,
                          const GraphAttentionNet* phi, const DiffusionSde& sde_x,
                          const DiffusionSde& sde_a, const GuidanceConfig& gcfg,
                          const SamplerConfig& scfg, int n_nodes, Rng& rng) {
  const NetConfig& nc = score_net.config();
  if (phi) {
    const NetConfig& pc = phi->config();
    if (pc.feat_dim != nc.feat_dim || pc.edge_dim != nc.edge_dim)
      throw ConfigError("classifier schema disagrees with the score network");
    if (gcfg.target_class >= pc.num_classes)
      throw ConfigError("target class out of range for the classifier");
  }
  ScoreFn score_fn = [&](const Eigen::MatrixXd& x, const AdjChannels& a,
                         const Mask& mask, double t) {
    return score_forward(score_net, sde_x, sde_a, x, a, mask, t);
  };
  ClassGradFn grad_fn = [&](const Eigen::MatrixXd& x, const AdjChannels& a,
                            const Mask& mask, double t, int y) {
    return class_logprob_grad(*phi, x, a, mask, t, y);
  };
  GraphState s = reverse_integrate(score_fn, phi ? &grad_fn : nullptr, sde_x, sde_a,
                                   gcfg, scfg, nc.n_max, nc.feat_dim, nc.edge_dim,
                                   n_nodes, rng);
  DenseGraph g;
  g.node_features = s.x.cast<float>();
  g.adjacency.reserve(s.a.size());
  for (const auto& ch : s.a) g.adjacency.push_back(ch.cast<float>());
  g.node_mask.assign(std::size_t(nc.n_max), 0);
  for (int i = 0; i < n_nodes; ++i) g.node_mask[std::size_t(i)] = 1;
  g.label = gcfg.target_class;
  return g;
}

DenseGraph quantize(const DenseGraph& g, const std::vector<int>& feature_blocks) {
  const int n = g.n_max();
  const int a = g.feat_dim();
  DenseGraph out = g;
  for (auto& ch : out.adjacency) {
    Eigen::MatrixXf bin(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) bin(i, j) = ch(i, j) > 0.5f ? 1.0f : 0.0f;
    // logical-OR symmetrization, cleared diagonal
    for (int i = 0; i < n; ++i) {
      bin(i, i) = 0.0f;
      for (int j = i + 1; j < n; ++j) {
        float v = (bin(i, j) > 0.5f || bin(j, i) > 0.5f) ? 1.0f : 0.0f;
        bin(i, j) = v;
        bin(j, i) = v;
      }
    }
    ch = std::move(bin);
  }

  std::vector<int> blocks = feature_blocks;
  if (blocks.empty()) blocks = {a};
  out.node_features.setZero();
  for (int i = 0; i < n; ++i) {
    if (!g.node_mask[std::size_t(i)]) continue;
    int off = 0;
    for (int width : blocks) {
      int best = 0;
      float best_v = g.node_features(i, off);
      for (int k = 1; k < width; ++k)
        if (g.node_features(i, off + k) > best_v) {
          best_v = g.node_features(i, off + k);
          best = k;
        }
      out.node_features(i, off + best) = 1.0f;
      off += width;
    }
  }
  Mask mask = g.node_mask;
  for (auto& ch : out.adjacency)
    for (int i = 0; i < n; ++i) {
      if (mask[std::size_t(i)]) continue;
      ch.row(i).setZero();
      ch.col(i).setZero();
    }
  return out;
}

GraphDataset augment_dataset(const GraphDataset& train,
                             const GraphAttentionNet& score_net,
                             const GraphAttentionNet* phi, const DiffusionSde& sde_x,
                             const DiffusionSde& sde_a, const GuidanceConfig& gcfg,
                             const AugmentRequest& req, const SamplerConfig& scfg,
                             const std::map<std::string, std::string>& extra_meta) {
  req.check();
  scfg.check();
  if (train.graphs.empty()) throw DataError("augment_dataset needs a nonempty train set");
  const int M = train.num_classes;

  std::vector<int> node_counts;
  node_counts.reserve(train.graphs.size());
  for (const auto& g : train.graphs) node_counts.push_back(g.active_nodes());

  struct Job {
    double lambda;
    int target_class;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t li = 0; li < req.lambda_grid.size(); ++li)
    for (int y = 0; y < M; ++y)
      for (int k = 0; k < req.per_class_count; ++k)
        jobs.push_back({req.lambda_grid[li],
                        y,
                        child_seed(scfg.seed, li, std::uint64_t(y), std::uint64_t(k))});

  std::vector<DenseGraph> results(jobs.size());
  int num_workers = scfg.threads > 0 ? scfg.threads
                                     : int(std::thread::hardware_concurrency());
  num_workers = std::max(1, std::min<int>(num_workers, int(jobs.size() ? jobs.size() : 1)));

  auto run_job = [&](std::size_t ji) {
    const Job& job = jobs[ji];
    Rng rng(job.seed);
    int n_nodes;
    if (req.node_range) {
      n_nodes = rng.uniform_int(req.node_range->first, req.node_range->second);
      n_nodes = std::min(n_nodes, score_net.config().n_max);
    } else {
      n_nodes = node_counts[std::size_t(rng.uniform_int(0, int(node_counts.size()) - 1))];
    }
    GuidanceConfig g = gcfg;
    g.lambda = job.lambda;
    g.target_class = job.target_class;
    DenseGraph sample = reverse_sample(score_net, phi, sde_x, sde_a, g, scfg, n_nodes, rng);
    DenseGraph q = quantize(sample, train.feature_blocks);
    q.label = job.target_class;
    char lam[32];
    std::snprintf(lam, sizeof(lam), "%.9g", job.lambda);
    q.meta["lambda"] = lam;
    q.meta["target_class"] = std::to_string(job.target_class);
    q.meta["seed"] = std::to_string(job.seed);
    std::snprintf(lam, sizeof(lam), "%.9g", gcfg.r1);
    q.meta["r1"] = lam;
    std::snprintf(lam, sizeof(lam), "%.9g", gcfg.r2);
    q.meta["r2"] = lam;
    for (const auto& [k, v] : extra_meta) q.meta[k] = v;
    results[ji] = std::move(q);
  };

  if (num_workers == 1 || jobs.size() <= 1) {
    for (std::size_t ji = 0; ji < jobs.size(); ++ji) run_job(ji);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(num_workers));
    pool.reserve(std::size_t(num_workers));
    for (int w = 0; w < num_workers; ++w)
      pool.emplace_back([&, w]() {
        try {
          for (std::size_t ji = std::size_t(w); ji < jobs.size();
               ji += std::size_t(num_workers))
            run_job(ji);
        } catch (...) {
          errors[std::size_t(w)] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  GraphDataset out;
  out.graphs = std::move(results);
  out.num_classes = M;
  out.split_tag = SplitTag::augmented;
  out.feature_blocks = train.feature_blocks;
  out.check_consistent();
  return out;
}

}  // namespace ooda
