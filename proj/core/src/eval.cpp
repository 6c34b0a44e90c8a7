#include "ooda/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "ooda/errors.hpp"
#include "ooda/rng.hpp"
#include "ooda/tensorize.hpp"

namespace ooda {

void RandomGinConfig::check() const {
  if (layers < 1) throw ConfigError("GIN layers must be >= 1");
  if (hidden < 1) throw ConfigError("GIN hidden width must be >= 1");
  if (num_seeds < 1) throw ConfigError("GIN seed count must be >= 1");
}

namespace {

struct GinParams {
  // per layer: W1 (din x hidden), b1, W2 (hidden x hidden), b2
  std::vector<Eigen::MatrixXd> w1, w2;
  std::vector<Eigen::RowVectorXd> b1, b2;
};

GinParams make_gin(const RandomGinConfig& cfg, int feat_dim, int seed_index) {
  Rng rng(child_seed(cfg.seed, std::uint64_t(seed_index)));
  GinParams p;
  int din = feat_dim;
  for (int l = 0; l < cfg.layers; ++l) {
    double s1 = std::sqrt(2.0 / double(din + cfg.hidden));
    double s2 = std::sqrt(2.0 / double(2 * cfg.hidden));
    Eigen::MatrixXd w1(din, cfg.hidden), w2(cfg.hidden, cfg.hidden);
    for (int i = 0; i < w1.rows(); ++i)
      for (int j = 0; j < w1.cols(); ++j) w1(i, j) = s1 * rng.normal();
    for (int i = 0; i < w2.rows(); ++i)
      for (int j = 0; j < w2.cols(); ++j) w2(i, j) = s2 * rng.normal();
    p.w1.push_back(std::move(w1));
    p.w2.push_back(std::move(w2));
    p.b1.push_back(Eigen::RowVectorXd::Zero(cfg.hidden));
    p.b2.push_back(Eigen::RowVectorXd::Zero(cfg.hidden));
    din = cfg.hidden;
  }
  return p;
}

Eigen::VectorXd embed_one(const DenseGraph& g, const GinParams& p,
                          const RandomGinConfig& cfg) {
  const int n = g.n_max();
  Eigen::MatrixXd h = node_tensor(g);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& ch : g.adjacency) w += ch.cast<double>();

  Eigen::VectorXd mask(n);
  for (int i = 0; i < n; ++i) mask(i) = g.node_mask[std::size_t(i)] ? 1.0 : 0.0;

  Eigen::VectorXd out(cfg.layers * cfg.hidden);
  for (int l = 0; l < cfg.layers; ++l) {
    // (1 + eps) h + sum_neighbors h, eps = 0
    Eigen::MatrixXd agg = h + w * h;
    Eigen::MatrixXd z = (agg * p.w1[std::size_t(l)]).rowwise() + p.b1[std::size_t(l)];
    z = z.cwiseMax(0.0);
    h = (z * p.w2[std::size_t(l)]).rowwise() + p.b2[std::size_t(l)];
    h = h.cwiseMax(0.0);
    h = mask.asDiagonal() * h;  // padded rows stay silent
    out.segment(l * cfg.hidden, cfg.hidden) = h.colwise().sum().transpose();
  }
  return out;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 1.0;
  std::sort(v.begin(), v.end());
  std::size_t mid = v.size() / 2;
  if (v.size() % 2 == 1) return v[mid];
  return 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

Eigen::MatrixXd random_gin_embed(const std::vector<DenseGraph>& graphs,
                                 const RandomGinConfig& cfg, int seed_index) {
  cfg.check();
  if (graphs.empty()) return Eigen::MatrixXd(0, cfg.layers * cfg.hidden);
  GinParams p = make_gin(cfg, graphs.front().feat_dim(), seed_index);
  Eigen::MatrixXd out(graphs.size(), cfg.layers * cfg.hidden);
  for (std::size_t i = 0; i < graphs.size(); ++i)
    out.row(int(i)) = embed_one(graphs[i], p, cfg).transpose();
  return out;
}

double emd_distance(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw ShapeError("emd_distance dimension mismatch");
  const double lo = std::min(u.minCoeff(), v.minCoeff());
  Eigen::VectorXd a = u.array() - lo;
  Eigen::VectorXd b = v.array() - lo;
  auto normalize = [](Eigen::VectorXd& x) {
    double s = x.sum();
    if (s > 0.0)
      x /= s;
    else
      x.setConstant(1.0 / double(x.size()));
  };
  normalize(a);
  normalize(b);
  double cum_a = 0.0, cum_b = 0.0, d = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    cum_a += a(i);
    cum_b += b(i);
    d += std::abs(cum_a - cum_b);
  }
  return d;
}

MmdResult mmd_rbf(const std::vector<DenseGraph>& p_graphs,
                  const std::vector<DenseGraph>& q_graphs, const RandomGinConfig& cfg,
                  std::optional<double> sigma) {
  cfg.check();
  if (p_graphs.empty() || q_graphs.empty())
    throw DataError("mmd_rbf requires nonempty graph sets");
  const int m = int(p_graphs.size());
  const int n = int(q_graphs.size());
  const bool biased = m < 2 || n < 2;

  MmdResult res;
  res.biased = biased;
  for (int s = 0; s < cfg.num_seeds; ++s) {
    Eigen::MatrixXd ep = random_gin_embed(p_graphs, cfg, s);
    Eigen::MatrixXd eq = random_gin_embed(q_graphs, cfg, s);

    std::vector<double> d_pp, d_qq, d_pq;
    d_pp.reserve(std::size_t(m) * std::size_t(m - 1) / 2);
    d_qq.reserve(std::size_t(n) * std::size_t(n - 1) / 2);
    d_pq.reserve(std::size_t(m) * std::size_t(n));
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j)
        d_pp.push_back(emd_distance(ep.row(i).transpose(), ep.row(j).transpose()));
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        d_qq.push_back(emd_distance(eq.row(i).transpose(), eq.row(j).transpose()));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        d_pq.push_back(emd_distance(ep.row(i).transpose(), eq.row(j).transpose()));

    double sig = sigma.value_or(0.0);
    if (!sigma) {
      std::vector<double> all;
      all.reserve(d_pp.size() + d_qq.size() + d_pq.size());
      all.insert(all.end(), d_pp.begin(), d_pp.end());
      all.insert(all.end(), d_qq.begin(), d_qq.end());
      all.insert(all.end(), d_pq.begin(), d_pq.end());
      sig = median_of(std::move(all));
      if (sig <= 0.0) sig = 1.0;
    }
    const double denom = 2.0 * sig * sig;
    auto k = [denom](double d) { return std::exp(-d / denom); };

    double mmd2;
    if (biased) {
      double kpp = double(m), kqq = double(n), kpq = 0.0;  // diagonal k(x,x)=1
      for (double d : d_pp) kpp += 2.0 * k(d);
      for (double d : d_qq) kqq += 2.0 * k(d);
      for (double d : d_pq) kpq += k(d);
      mmd2 = kpp / double(m) / double(m) + kqq / double(n) / double(n) -
             2.0 * kpq / double(m) / double(n);
    } else {
      double kpp = 0.0, kqq = 0.0, kpq = 0.0;
      for (double d : d_pp) kpp += k(d);
      for (double d : d_qq) kqq += k(d);
      for (double d : d_pq) kpq += k(d);
      mmd2 = 2.0 * kpp / (double(m) * double(m - 1)) +
             2.0 * kqq / (double(n) * double(n - 1)) -
             2.0 * kpq / (double(m) * double(n));
    }
    res.per_seed.push_back(std::sqrt(std::max(0.0, mmd2)));
  }

  double sum = 0.0;
  for (double v : res.per_seed) sum += v;
  res.mean = sum / double(res.per_seed.size());
  if (res.per_seed.size() > 1) {
    double ss = 0.0;
    for (double v : res.per_seed) ss += (v - res.mean) * (v - res.mean);
    double sd = std::sqrt(ss / double(res.per_seed.size() - 1));
    res.stderr_ = sd / std::sqrt(double(res.per_seed.size()));
  }
  return res;
}

double preservation_score(const GraphAttentionNet& phi, const GraphDataset& augmented,
                          double eps_time) {
  if (augmented.graphs.empty())
    throw DataError("preservation_score on an empty dataset");
  double sum = 0.0;
  for (std::size_t i = 0; i < augmented.graphs.size(); ++i) {
    const DenseGraph& g = augmented.graphs[i];
    if (!g.label)
      throw DataError("preservation_score: unlabeled graph at index " + std::to_string(i));
    auto logits = classifier_forward(phi, node_tensor(g), adj_tensor(g), mask_of(g),
                                     eps_time);
    sum += class_probabilities(logits)(*g.label);
  }
  return sum / double(augmented.graphs.size());
}

double validity_fraction(const std::vector<DenseGraph>& graphs,
                         const GraphPredicate& predicate) {
  if (graphs.empty()) {
    std::cerr << "[ooda] warning: validity_fraction over an empty set is vacuously 1\n";
    return 1.0;
  }
  std::size_t good = 0;
  for (const auto& g : graphs) good += predicate(g) ? 1 : 0;
  return double(good) / double(graphs.size());
}

GraphPredicate predicate_valid() {
  return [](const DenseGraph& g) { return validate(g).empty(); };
}

GraphPredicate predicate_valid_discrete() {
  return [](const DenseGraph& g) { return validate_discrete(g).empty(); };
}

GraphPredicate predicate_connected() {
  return [](const DenseGraph& g) { return is_connected(g); };
}

GraphPredicate predicate_connected_ignoring_isolated() {
  return [](const DenseGraph& g) { return is_connected_ignoring_isolated(g); };
}

GraphPredicate predicate_max_degree(int bound) {
  return [bound](const DenseGraph& g) {
    for (int i = 0; i < g.n_max(); ++i)
      if (g.node_mask[std::size_t(i)] && g.degree(i) > bound) return false;
    return true;
  };
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void write_metric_csv(const MetricReport& report, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "lambda,mmd_mean,mmd_stderr,preservation,validity,connected\n";
  for (const auto& r : report.rows)
    os << num(r.lambda) << "," << num(r.mmd_mean) << "," << num(r.mmd_stderr) << ","
       << num(r.preservation) << "," << num(r.validity) << "," << num(r.connected)
       << "\n";
  if (!report.downstream.empty()) {
    os << "mode,seed,val_acc,test_acc\n";
    for (const auto& r : report.downstream)
      os << r.mode << "," << r.seed << "," << num(r.val_acc) << "," << num(r.test_acc)
         << "\n";
  }
  if (!os) throw IoError("write failed: " + path);
}

void write_mmd_svg(const MetricReport& report, const std::string& path) {
  const int w = 640, h = 420, ml = 70, mr = 20, mt = 30, mb = 50;
  const double pw = w - ml - mr, ph = h - mt - mb;
  double lmin = 0.0, lmax = 1.0, vmax = 1e-9;
  if (!report.rows.empty()) {
    lmin = report.rows.front().lambda;
    lmax = report.rows.back().lambda;
    if (lmax <= lmin) lmax = lmin + 1.0;
    for (const auto& r : report.rows)
      vmax = std::max(vmax, r.mmd_mean + r.mmd_stderr);
  }
  vmax *= 1.1;
  auto sx = [&](double l) { return ml + (l - lmin) / (lmax - lmin) * pw; };
  auto sy = [&](double v) { return mt + ph - v / vmax * ph; };

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
     << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  os << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
     << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
     << mt + ph << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double v = vmax * i / 5.0;
    os << "<text x=\"" << ml - 8 << "\" y=\"" << sy(v) + 4
       << "\" font-size=\"11\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  for (const auto& r : report.rows)
    os << "<text x=\"" << sx(r.lambda) << "\" y=\"" << mt + ph + 18
       << "\" font-size=\"11\" text-anchor=\"middle\">" << num(r.lambda) << "</text>\n";
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 12
     << "\" font-size=\"13\" text-anchor=\"middle\">lambda</text>\n";
  os << "<text x=\"18\" y=\"" << mt + ph / 2
     << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << mt + ph / 2 << ")\">MMD RBF</text>\n";

  if (!report.rows.empty()) {
    os << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" points=\"";
    for (const auto& r : report.rows) os << sx(r.lambda) << "," << sy(r.mmd_mean) << " ";
    os << "\"/>\n";
    for (const auto& r : report.rows) {
      os << "<line x1=\"" << sx(r.lambda) << "\" y1=\"" << sy(r.mmd_mean - r.mmd_stderr)
         << "\" x2=\"" << sx(r.lambda) << "\" y2=\"" << sy(r.mmd_mean + r.mmd_stderr)
         << "\" stroke=\"#1f6fb2\"/>\n";
      os << "<circle cx=\"" << sx(r.lambda) << "\" cy=\"" << sy(r.mmd_mean)
         << "\" r=\"3\" fill=\"#1f6fb2\"/>\n";
    }
  }
  os << "</svg>\n";
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace ooda
