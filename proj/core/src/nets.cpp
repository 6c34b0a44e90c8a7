#include "ooda/nets.hpp"

#include <cmath>

#include "ooda/errors.hpp"
#include "ooda/rng.hpp"

namespace ooda {

using ad::Mat;
using ad::Tape;
using ad::Var;

void NetConfig::check() const {
  if (layers < 1 || heads < 1 || hidden_x < 1 || hidden_a < 1 || time_dim < 2)
    throw ConfigError("network dimensions must be positive (time_dim >= 2)");
  if (hidden_x % heads != 0)
    throw ConfigError("hidden_x must be divisible by the head count");
  if (time_dim % 2 != 0) throw ConfigError("time_dim must be even");
  if (feat_dim < 1 || edge_dim < 1 || n_max < 1)
    throw ConfigError("network input schema (a, b, n_max) must be set");
  if (num_classes < 0) throw ConfigError("num_classes must be >= 0");
}

std::vector<std::pair<std::string, std::pair<int, int>>> param_layout(const NetConfig& cfg) {
  std::vector<std::pair<std::string, std::pair<int, int>>> out;
  auto add = [&out](const std::string& name, int r, int c) {
    out.emplace_back(name, std::make_pair(r, c));
  };
  const int hx = cfg.hidden_x, ha = cfg.hidden_a, dh = cfg.head_dim();
  const int fx = 2 * hx, fe = 2 * ha;
  add("in_x_w", cfg.feat_dim, hx);
  add("in_x_b", 1, hx);
  add("in_e_w", cfg.edge_dim, ha);
  add("in_e_b", 1, ha);
  add("t_w1", cfg.time_dim, hx);
  add("t_b1", 1, hx);
  add("t_w2", hx, hx);
  add("t_b2", 1, hx);
  add("t_e_w", hx, ha);
  add("t_e_b", 1, ha);
  for (int l = 0; l < cfg.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    add(p + "t_w", hx, hx);
    add(p + "t_b", 1, hx);
    add(p + "te_w", hx, ha);
    add(p + "te_b", 1, ha);
    for (int h = 0; h < cfg.heads; ++h) {
      const std::string hp = p + "head" + std::to_string(h) + ".";
      add(hp + "wq", hx, dh);
      add(hp + "wk", hx, dh);
      add(hp + "wv", hx, dh);
      add(hp + "wb", ha, 1);
    }
    add(p + "wo", hx, hx);
    add(p + "bo", 1, hx);
    add(p + "ln1_g", 1, hx);
    add(p + "ln1_b", 1, hx);
    add(p + "ff_w1", hx, fx);
    add(p + "ff_b1", 1, fx);
    add(p + "ff_w2", fx, hx);
    add(p + "ff_b2", 1, hx);
    add(p + "ln2_g", 1, hx);
    add(p + "ln2_b", 1, hx);
    add(p + "wpi", hx, ha);
    add(p + "wpj", hx, ha);
    add(p + "we1", ha, fe);
    add(p + "be1", 1, fe);
    add(p + "we2", fe, ha);
    add(p + "be2", 1, ha);
    add(p + "lne_g", 1, ha);
    add(p + "lne_b", 1, ha);
  }
  if (cfg.is_classifier()) {
    add("cls_w1", hx, hx);
    add("cls_b1", 1, hx);
    add("cls_w2", hx, cfg.num_classes);
    add("cls_b2", 1, cfg.num_classes);
  } else {
    add("out_x_w", hx, cfg.feat_dim);
    add("out_x_b", 1, cfg.feat_dim);
    add("out_e_w", ha, cfg.edge_dim);
    add("out_e_b", 1, cfg.edge_dim);
  }
  return out;
}

GraphAttentionNet::GraphAttentionNet(NetConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.check();
  Rng rng(seed);
  for (const auto& [name, shape] : param_layout(cfg_)) {
    auto [r, c] = shape;
    Mat m(r, c);
    bool is_gain = name.size() >= 2 && name.compare(name.size() - 2, 2, "_g") == 0;
    if (is_gain) {
      m.setOnes();
    } else if (r == 1) {
      m.setZero();  // biases
    } else {
      double sd = std::sqrt(2.0 / double(r + c));
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = sd * rng.normal();
    }
    params_.push_back(std::move(m));
  }
}

std::vector<Var> bind_params(const GraphAttentionNet& net, Tape& tape,
                             bool requires_grad) {
  std::vector<Var> out;
  out.reserve(net.params().size());
  for (const auto& p : net.params()) out.push_back(tape.leaf(p, requires_grad));
  return out;
}

namespace {

Mat time_features(double t, int dim) {
  Mat f(1, dim);
  const int half = dim / 2;
  for (int k = 0; k < half; ++k) {
    double freq = half > 1 ? std::pow(1000.0, double(k) / double(half - 1)) : 1.0;
    f(0, 2 * k) = std::sin(freq * t);
    f(0, 2 * k + 1) = std::cos(freq * t);
  }
  return f;
}

/// Resolves parameters by declaration order using a cursor.
struct ParamCursor {
  const std::vector<Var>* vars;
  std::size_t pos = 0;
  Var next() { return (*vars)[pos++]; }
};

}  // namespace

RawOutputs net_forward(const GraphAttentionNet& net, Tape& tape,
                       const std::vector<Var>& params, Var x,
                       const std::vector<Var>& a_channels, const Mask& mask,
                       double t) {
  const NetConfig& cfg = net.config();
  const int n = x.rows();
  if (x.cols() != cfg.feat_dim) throw ShapeError("node feature width mismatch");
  if (int(a_channels.size()) != cfg.edge_dim)
    throw ShapeError("adjacency channel count mismatch");
  for (const Var& ch : a_channels)
    if (ch.rows() != n || ch.cols() != n) throw ShapeError("adjacency shape mismatch");
  if (int(mask.size()) != n) throw ShapeError("mask length mismatch");

  ParamCursor pc{&params};
  auto in_x_w = pc.next(), in_x_b = pc.next();
  auto in_e_w = pc.next(), in_e_b = pc.next();
  auto t_w1 = pc.next(), t_b1 = pc.next(), t_w2 = pc.next(), t_b2 = pc.next();
  auto t_e_w = pc.next(), t_e_b = pc.next();

  // node embedding + time conditioning (t is a global graph feature)
  Var h = add_rowvec(matmul(x, in_x_w), in_x_b);
  Var tf = tape.leaf(time_features(t, cfg.time_dim), false);
  Var temb = add_rowvec(matmul(silu(add_rowvec(matmul(tf, t_w1), t_b1)), t_w2), t_b2);
  h = add_rowvec(h, temb);

  // edge embedding from channel columns
  std::vector<Var> cols;
  cols.reserve(a_channels.size());
  for (const Var& ch : a_channels) cols.push_back(ad::square_to_pairs(ch));
  Var e = add_rowvec(matmul(concat_cols(cols), in_e_w), in_e_b);
  e = add_rowvec(e, add_rowvec(matmul(temb, t_e_w), t_e_b));

  const double inv_sqrt_dh = 1.0 / std::sqrt(double(cfg.head_dim()));
  for (int l = 0; l < cfg.layers; ++l) {
    // per-layer noise-level conditioning
    auto lt_w = pc.next(), lt_b = pc.next();
    auto lte_w = pc.next(), lte_b = pc.next();
    h = add_rowvec(h, add_rowvec(matmul(temb, lt_w), lt_b));
    e = add_rowvec(e, add_rowvec(matmul(temb, lte_w), lte_b));

    std::vector<Var> head_outs;
    head_outs.reserve(std::size_t(cfg.heads));
    std::vector<Var> wq(std::size_t(cfg.heads)), wk(std::size_t(cfg.heads)),
        wv(std::size_t(cfg.heads)), wb(std::size_t(cfg.heads));
    for (int hd = 0; hd < cfg.heads; ++hd) {
      wq[std::size_t(hd)] = pc.next();
      wk[std::size_t(hd)] = pc.next();
      wv[std::size_t(hd)] = pc.next();
      wb[std::size_t(hd)] = pc.next();
    }
    auto wo = pc.next(), bo = pc.next();
    auto ln1_g = pc.next(), ln1_b = pc.next();
    auto ff_w1 = pc.next(), ff_b1 = pc.next(), ff_w2 = pc.next(), ff_b2 = pc.next();
    auto ln2_g = pc.next(), ln2_b = pc.next();
    auto wpi = pc.next(), wpj = pc.next();
    auto we1 = pc.next(), be1 = pc.next(), we2 = pc.next(), be2 = pc.next();
    auto lne_g = pc.next(), lne_b = pc.next();

    for (int hd = 0; hd < cfg.heads; ++hd) {
      Var q = matmul(h, wq[std::size_t(hd)]);
      Var k = matmul(h, wk[std::size_t(hd)]);
      Var v = matmul(h, wv[std::size_t(hd)]);
      Var bias = ad::pairs_to_square(matmul(e, wb[std::size_t(hd)]), n);
      Var logits = add(scale(matmul(q, transpose(k)), inv_sqrt_dh), bias);
      Var att = ad::softmax_rows_masked(logits, mask);
      head_outs.push_back(matmul(att, v));
    }
    Var attn = add_rowvec(matmul(concat_cols(head_outs), wo), bo);
    Var h1 = ad::layernorm_rows(add(h, attn), ln1_g, ln1_b);
    Var ff = add_rowvec(
        matmul(silu(add_rowvec(matmul(h1, ff_w1), ff_b1)), ff_w2), ff_b2);
    h = ad::layernorm_rows(add(h1, ff), ln2_g, ln2_b);

    // pairwise edge update from endpoint node states
    Var p = add(ad::expand_pairs_i(matmul(h, wpi), n),
                ad::expand_pairs_j(matmul(h, wpj), n));
    Var eu = add_rowvec(
        matmul(silu(add_rowvec(matmul(add(e, p), we1), be1)), we2), be2);
    e = ad::layernorm_rows(add(e, eu), lne_g, lne_b);
  }

  RawOutputs out;
  if (net.config().is_classifier()) {
    auto cls_w1 = pc.next(), cls_b1 = pc.next(), cls_w2 = pc.next(), cls_b2 = pc.next();
    Var pooled = ad::masked_sum_rows(h, mask);
    Var hidden = silu(add_rowvec(matmul(pooled, cls_w1), cls_b1));
    out.logits = add_rowvec(matmul(hidden, cls_w2), cls_b2);
  } else {
    auto out_x_w = pc.next(), out_x_b = pc.next();
    auto out_e_w = pc.next(), out_e_b = pc.next();
    out.out_x = ad::mask_rows(add_rowvec(matmul(h, out_x_w), out_x_b), mask);
    Var eo = add_rowvec(matmul(e, out_e_w), out_e_b);
    for (int c = 0; c < cfg.edge_dim; ++c) {
      Var col = eo;
      if (cfg.edge_dim > 1) {
        Mat sel = Mat::Zero(cfg.edge_dim, 1);
        sel(c, 0) = 1.0;
        col = matmul(eo, tape.leaf(sel, false));
      }
      out.out_a.push_back(ad::sym_zero_diag(ad::pairs_to_square(col, n), mask));
    }
  }
  return out;
}

ScoreEstimate score_forward(const GraphAttentionNet& net, const DiffusionSde& sde_x,
                            const DiffusionSde& sde_a, const Eigen::MatrixXd& x_t,
                            const AdjChannels& a_t, const Mask& mask, double t) {
  if (net.config().is_classifier())
    throw ConfigError("score_forward called on a classifier network");
  if (!(t >= sde_x.eps_time && t <= sde_x.terminal_time))
    throw DomainError("score time outside [eps_time, T]");
  Tape tape(false);
  auto params = bind_params(net, tape, false);
  Var x = tape.leaf(x_t, false);
  std::vector<Var> a;
  a.reserve(a_t.size());
  for (const auto& ch : a_t) a.push_back(tape.leaf(ch, false));
  RawOutputs raw = net_forward(net, tape, params, x, a, mask, t);

  // raw outputs predict -z; score = -z / std
  double sx = marginal_params(sde_x, t).second;
  double sa = marginal_params(sde_a, t).second;
  ScoreEstimate se;
  se.score_x = raw.out_x.value() / sx;
  se.score_a.reserve(raw.out_a.size());
  for (const Var& ch : raw.out_a) se.score_a.push_back(ch.value() / sa);
  return se;
}

Eigen::RowVectorXd classifier_forward(const GraphAttentionNet& phi,
                                      const Eigen::MatrixXd& x_t,
                                      const AdjChannels& a_t, const Mask& mask,
                                      double t) {
  if (!phi.config().is_classifier())
    throw ConfigError("classifier_forward called on a score network");
  Tape tape(false);
  auto params = bind_params(phi, tape, false);
  Var x = tape.leaf(x_t, false);
  std::vector<Var> a;
  a.reserve(a_t.size());
  for (const auto& ch : a_t) a.push_back(tape.leaf(ch, false));
  RawOutputs raw = net_forward(phi, tape, params, x, a, mask, t);
  return raw.logits.value().row(0);
}

Eigen::RowVectorXd class_probabilities(const Eigen::RowVectorXd& logits) {
  double mx = logits.maxCoeff();
  Eigen::RowVectorXd e = (logits.array() - mx).exp();
  return e / e.sum();
}

std::pair<Eigen::MatrixXd, AdjChannels> class_logprob_grad(
    const GraphAttentionNet& phi, const Eigen::MatrixXd& x_t, const AdjChannels& a_t,
    const Mask& mask, double t, int y) {
  if (y < 0 || y >= phi.config().num_classes)
    throw ConfigError("target class out of range");
  Tape tape(true);
  auto params = bind_params(phi, tape, false);
  Var x = tape.leaf(x_t, true);
  std::vector<Var> a;
  a.reserve(a_t.size());
  for (const auto& ch : a_t) a.push_back(tape.leaf(ch, true));
  RawOutputs raw = net_forward(phi, tape, params, x, a, mask, t);
  Var logp = ad::log_softmax_pick(raw.logits, y);
  tape.backward(logp);

  Eigen::MatrixXd gx = x.grad();
  for (int i = 0; i < gx.rows(); ++i)
    if (!mask[std::size_t(i)]) gx.row(i).setZero();

  AdjChannels ga;
  ga.reserve(a.size());
  for (const Var& ch : a) {
    Eigen::MatrixXd g = 0.5 * (ch.grad() + ch.grad().transpose());
    g.diagonal().setZero();
    for (int i = 0; i < g.rows(); ++i) {
      if (mask[std::size_t(i)]) continue;
      g.row(i).setZero();
      g.col(i).setZero();
    }
    ga.push_back(std::move(g));
  }
  if (!gx.allFinite()) throw NumericError("non-finite classifier input gradient");
  for (const auto& g : ga)
    if (!g.allFinite()) throw NumericError("non-finite classifier input gradient");
  return {std::move(gx), std::move(ga)};
}

}  // namespace ooda
