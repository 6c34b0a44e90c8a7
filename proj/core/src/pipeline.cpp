#include "ooda/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ooda/checkpoint.hpp"
#include "ooda/errors.hpp"
#include "ooda/graph_io.hpp"
#include "ooda/sha256.hpp"
#include "ooda/tensorize.hpp"

namespace ooda {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_lambda(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", lambda);
  return buf;
}

// ---- config parsing -------------------------------------------------------

[[noreturn]] void bad_key(const std::string& path, const std::string& what) {
  throw ConfigError("config key " + path + ": " + what);
}

class Section {
 public:
  Section(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) bad_key(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_->contains(key); }

  double num(const std::string& key, double fallback) {
    mark(key);
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_number()) bad_key(path_ + "." + key, "expected a number");
    return v.get<double>();
  }

  int integer(const std::string& key, int fallback) {
    mark(key);
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_number_integer()) bad_key(path_ + "." + key, "expected an integer");
    return v.get<int>();
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    mark(key);
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_number_unsigned() && !v.is_number_integer())
      bad_key(path_ + "." + key, "expected an integer");
    return v.get<std::uint64_t>();
  }

  std::string str(const std::string& key, const std::string& fallback) {
    mark(key);
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_string()) bad_key(path_ + "." + key, "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> num_list(const std::string& key, std::vector<double> fallback) {
    mark(key);
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_array()) bad_key(path_ + "." + key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) bad_key(path_ + "." + key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::uint64_t> u64_list(const std::string& key,
                                      std::vector<std::uint64_t> fallback) {
    mark(key);
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_array()) bad_key(path_ + "." + key, "expected an array of integers");
    std::vector<std::uint64_t> out;
    for (const auto& e : v) out.push_back(e.get<std::uint64_t>());
    return out;
  }

  std::array<int, 2> range(const std::string& key, std::array<int, 2> fallback) {
    mark(key);
    if (!has(key)) return fallback;
    const auto& v = j_->at(key);
    if (!v.is_array() || v.size() != 2)
      bad_key(path_ + "." + key, "expected [lo, hi]");
    return {v.at(0).get<int>(), v.at(1).get<int>()};
  }

  Section object(const std::string& key) {
    mark(key);
    static const json empty = json::object();
    if (!has(key)) return Section(empty, path_ + "." + key);
    return Section(j_->at(key), path_ + "." + key);
  }

  /// Unknown keys are schema violations (typo guard).
  void finish() const {
    for (const auto& [key, _] : j_->items())
      if (!seen_.count(key)) bad_key(path_ + "." + key, "unknown key");
  }

 private:
  void mark(const std::string& key) { seen_.insert(key); }
  const json* j_;
  std::string path_;
  std::set<std::string> seen_;
};

DiffusionSde parse_sde(Section s) {
  DiffusionSde sde;
  sde.kind = sde_kind_from_string(s.str("kind", "VP"));
  sde.beta_min = s.num("beta_min", 0.1);
  sde.beta_max = s.num("beta_max", 1.0);
  sde.num_steps = s.integer("num_steps", 1000);
  sde.eps_time = s.num("eps_time", 1e-3);
  s.finish();
  sde.check();
  return sde;
}

TrainConfig parse_train(Section s, std::uint64_t seed) {
  TrainConfig t;
  t.lr = s.num("lr", 4e-4);
  t.weight_decay = s.num("weight_decay", 1e-12);
  t.batch_size = s.integer("batch_size", 32);
  t.epochs = s.integer("epochs", 100);
  t.ema_decay = s.num("ema_decay", 0.999);
  t.threads = s.integer("threads", 0);
  t.seed = seed;
  s.finish();
  t.check();
  return t;
}

// ---- manifest --------------------------------------------------------------

struct Manifest {
  std::string config_hash;
  std::map<std::string, std::string> files;
};

Manifest read_manifest(const std::string& path) {
  Manifest m;
  std::ifstream in(path);
  if (!in) return m;
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) return m;
  if (j.contains("config_hash")) m.config_hash = j.at("config_hash").get<std::string>();
  if (j.contains("files"))
    for (const auto& [k, v] : j.at("files").items())
      m.files[k] = v.get<std::string>();
  return m;
}

void write_manifest(const Manifest& m, const std::string& path) {
  json files = json::object();
  for (const auto& [k, v] : m.files) files[k] = v;  // nlohmann sorts keys
  json j;
  j["config_hash"] = m.config_hash;
  j["files"] = files;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

class StageContext {
 public:
  StageContext(const PipelineConfig& cfg)
      : cfg_(cfg), paths_{cfg.out_dir}, manifest_(read_manifest(paths_.manifest())) {
    if (!manifest_.config_hash.empty() && manifest_.config_hash != cfg.config_hash)
      throw ConfigError(
          "output directory " + cfg.out_dir +
          " was produced by a different config; clean it or pick a new out_dir");
    manifest_.config_hash = cfg.config_hash;
  }

  const ArtifactPaths& paths() const { return paths_; }

  bool have(const std::string& path) const { return fs::exists(path); }

  bool have_all(const std::vector<std::string>& ps) const {
    for (const auto& p : ps)
      if (!have(p)) return false;
    return true;
  }

  void record(const std::string& path) {
    std::string rel = fs::relative(path, cfg_.out_dir).string();
    manifest_.files[rel] = sha256_file(path);
  }

  void commit() {
    fs::create_directories(cfg_.out_dir);
    write_manifest(manifest_, paths_.manifest());
  }

  void ensure_dir_for(const std::string& file) {
    fs::create_directories(fs::path(file).parent_path());
  }

 private:
  const PipelineConfig& cfg_;
  ArtifactPaths paths_;
  Manifest manifest_;
};

GraphDataset require_dataset(const StageContext& ctx, SplitTag tag,
                             const std::string& needed_by) {
  std::string path = ctx.paths().dataset(tag);
  if (!fs::exists(path))
    throw ConfigError("missing dataset artifact " + path + " required by " +
                      needed_by + "; run gen-data first");
  return read_dataset(path);
}

NetConfig arch_from(const PipelineConfig& cfg, const GraphDataset& ds, bool classifier) {
  NetConfig nc;
  nc.layers = cfg.model_layers;
  nc.heads = cfg.model_heads;
  nc.hidden_x = cfg.model_hidden_x;
  nc.hidden_a = cfg.model_hidden_a;
  nc.time_dim = cfg.model_time_dim;
  nc.feat_dim = ds.feat_dim();
  nc.edge_dim = ds.edge_dim();
  nc.n_max = ds.n_max();
  nc.num_classes = classifier ? ds.num_classes : 0;
  nc.check();
  return nc;
}

GraphAttentionNet require_score_net(const StageContext& ctx, const PipelineConfig& cfg,
                                    const GraphDataset& train,
                                    const std::string& needed_by) {
  std::string path = ctx.paths().score_ckpt();
  if (!fs::exists(path))
    throw ConfigError("missing checkpoint " + path + " required by " + needed_by +
                      "; run train-score first");
  return load_checkpoint_expecting(path, arch_from(cfg, train, false));
}

GraphAttentionNet require_classifier(const StageContext& ctx, const PipelineConfig& cfg,
                                     const GraphDataset& train,
                                     const std::string& needed_by) {
  std::string path = ctx.paths().classifier_ckpt();
  if (!fs::exists(path))
    throw ConfigError("missing checkpoint " + path + " required by " + needed_by +
                      "; run train-classifier first");
  return load_checkpoint_expecting(path, arch_from(cfg, train, true));
}

GraphDataset sample_set(const PipelineConfig& cfg, const GraphDataset& train,
                        const GraphAttentionNet& score_net,
                        const GraphAttentionNet* phi, double lambda, double r1,
                        double r2, int per_class, std::uint64_t stream,
                        const std::map<std::string, std::string>& extra_meta) {
  GuidanceConfig g;
  g.lambda = lambda;
  g.r1 = r1;
  g.r2 = r2;
  g.alpha_cap = cfg.alpha_cap;
  AugmentRequest req;
  req.lambda_grid = {lambda};
  req.per_class_count = per_class;
  if (cfg.dataset.shift_kind == ShiftKind::size)
    req.node_range = std::make_pair(cfg.dataset.train_sizes[0], cfg.dataset.train_sizes[1]);
  SamplerConfig sc = cfg.sampler;
  sc.seed = child_seed(cfg.seed, 0x5A17, stream);
  return augment_dataset(train, score_net, phi, cfg.sde_x, cfg.sde_a, g, req, sc,
                         extra_meta);
}

double mean_of(const std::vector<DownstreamRow>& rows) {
  double s = 0.0;
  for (const auto& r : rows) s += r.test_acc;
  return rows.empty() ? 0.0 : s / double(rows.size());
}

}  // namespace

void PipelineConfig::check() const {
  sde_x.check();
  sde_a.check();
  sampler.check();
  eval_gin.check();
  downstream.check();
  if (out_dir.empty()) throw ConfigError("config key out_dir: must not be empty");
  for (double l : lambda_grid)
    if (!(l >= 0.0 && l < 1.0))
      throw ConfigError("config key guidance.lambda_grid: values must lie in [0, 1)");
  if (!(downstream_lambda >= 0.0 && downstream_lambda < 1.0))
    throw ConfigError("config key sampling.downstream_lambda: must lie in [0, 1)");
  if (r1 < 0.0 || r2 < 0.0) throw ConfigError("config key guidance.r1/r2: must be >= 0");
  if (eval_per_class < 0 || downstream_per_class < 0)
    throw ConfigError("config key sampling.*_per_class: must be >= 0");
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
  }

  PipelineConfig cfg;
  Section root(j, "config");
  cfg.seed = root.u64("seed", 7);
  cfg.out_dir = root.str("out_dir", "out/run");

  {
    Section d = root.object("dataset");
    cfg.dataset.shift_kind = shift_kind_from_string(d.str("shift_kind", "base"));
    cfg.dataset.train_count = d.integer("train_count", 300);
    cfg.dataset.val_count = d.integer("val_count", 120);
    cfg.dataset.test_count = d.integer("test_count", 120);
    cfg.dataset.max_degree = d.integer("max_degree", 10);
    cfg.dataset.base_size_min = d.integer("base_size_min", 6);
    cfg.dataset.base_size_max = d.integer("base_size_max", 9);
    cfg.dataset.train_sizes = d.range("train_sizes", {6, 45});
    cfg.dataset.val_sizes = d.range("val_sizes", {20, 75});
    cfg.dataset.test_sizes = d.range("test_sizes", {68, 155});
    cfg.dataset.seed = child_seed(cfg.seed, 0xDA7A);
    d.finish();
  }
  cfg.sde_x = parse_sde(root.object("sde_x"));
  cfg.sde_a = parse_sde(root.object("sde_a"));
  {
    Section m = root.object("model");
    cfg.model_layers = m.integer("layers", 3);
    cfg.model_heads = m.integer("heads", 4);
    cfg.model_hidden_x = m.integer("hidden_x", 64);
    cfg.model_hidden_a = m.integer("hidden_a", 16);
    cfg.model_time_dim = m.integer("time_dim", 32);
    m.finish();
  }
  cfg.score_train = parse_train(root.object("score_train"), child_seed(cfg.seed, 0x5C0));
  cfg.classifier_train =
      parse_train(root.object("classifier_train"), child_seed(cfg.seed, 0xC1F));
  {
    Section g = root.object("guidance");
    cfg.lambda_grid = g.num_list("lambda_grid", cfg.lambda_grid);
    cfg.r1 = g.num("r1", 0.5);
    cfg.r2 = g.num("r2", 0.5);
    cfg.alpha_cap = g.num("alpha_cap", 10.0);
    g.finish();
  }
  {
    Section s = root.object("sampler");
    cfg.sampler.solver = solver_kind_from_string(s.str("solver", "em_langevin"));
    cfg.sampler.snr = s.num("snr", 0.2);
    cfg.sampler.scale_coeff = s.num("scale_coeff", 0.7);
    cfg.sampler.corrector_steps = s.integer("corrector_steps", 1);
    cfg.sampler.num_steps = s.integer("num_steps", 150);
    cfg.sampler.threads = s.integer("threads", 0);
    cfg.sampler.debug_validate = s.integer("debug_validate", 0) != 0;
    s.finish();
  }
  {
    Section s = root.object("sampling");
    cfg.eval_per_class = s.integer("eval_per_class", 30);
    cfg.downstream_per_class = s.integer("downstream_per_class", 25);
    cfg.downstream_lambda = s.num("downstream_lambda", 0.05);
    s.finish();
  }
  {
    Section e = root.object("eval");
    cfg.eval_gin.layers = e.integer("gin_layers", 3);
    cfg.eval_gin.hidden = e.integer("gin_hidden", 64);
    cfg.eval_gin.num_seeds = e.integer("gin_seeds", 10);
    cfg.eval_gin.seed = child_seed(cfg.seed, 0x61);
    e.finish();
  }
  {
    Section d = root.object("downstream");
    cfg.downstream.layers = d.integer("layers", 3);
    cfg.downstream.hidden = d.integer("hidden", 64);
    cfg.downstream.dropout = d.num("dropout", 0.5);
    cfg.downstream.epochs = d.integer("epochs", 60);
    cfg.downstream.lr = d.num("lr", 1e-3);
    cfg.downstream.weight_decay = d.num("weight_decay", 0.0);
    cfg.downstream.batch_size = d.integer("batch_size", 32);
    cfg.downstream.seeds = d.u64_list("seeds", {1, 2, 3, 4, 5});
    cfg.downstream.threads = d.integer("threads", 0);
    d.finish();
  }
  root.finish();

  if (const char* env = std::getenv("OODA_OUT"); env && *env) cfg.out_dir = env;
  cfg.config_hash = sha256_hex(text);
  cfg.check();
  return cfg;
}

std::string ArtifactPaths::eval_set(double lambda) const {
  return root + "/augmented/eval_lambda_" + fmt_lambda(lambda) + ".graphs.jsonl";
}

std::string ArtifactPaths::mode_set(CompareMode mode) const {
  return root + "/augmented/mode_" + to_string(mode) + ".graphs.jsonl";
}

std::string ArtifactPaths::single_sample(double lambda,
                                         std::optional<int> target_class) const {
  std::string name = root + "/augmented/sample_lambda_" + fmt_lambda(lambda);
  if (target_class) name += "_class" + std::to_string(*target_class);
  return name + ".graphs.jsonl";
}

void cmd_gen_data(const PipelineConfig& cfg) {
  StageContext ctx(cfg);
  std::vector<std::string> outs = {ctx.paths().dataset(SplitTag::train),
                                   ctx.paths().dataset(SplitTag::val),
                                   ctx.paths().dataset(SplitTag::test)};
  if (ctx.have_all(outs)) {
    std::cout << "[gen-data] outputs exist, skipping\n";
    return;
  }
  auto [train, val, test] = cfg.dataset.shift_kind == ShiftKind::color
                                ? make_color_splits(cfg.dataset)
                                : make_motif_splits(cfg.dataset);
  ctx.ensure_dir_for(outs[0]);
  write_dataset(train, outs[0]);
  write_dataset(val, outs[1]);
  write_dataset(test, outs[2]);
  for (const auto& p : outs) ctx.record(p);
  ctx.commit();
  std::cout << "[gen-data] wrote " << train.size() << "/" << val.size() << "/"
            << test.size() << " graphs\n";
}

void cmd_train_score(const PipelineConfig& cfg) {
  StageContext ctx(cfg);
  std::string out = ctx.paths().score_ckpt();
  if (ctx.have(out)) {
    std::cout << "[train-score] checkpoint exists, skipping\n";
    return;
  }
  GraphDataset train = require_dataset(ctx, SplitTag::train, "train-score");
  TrainStats stats;
  GraphAttentionNet net =
      train_score(train, cfg.sde_x, cfg.sde_a, arch_from(cfg, train, false),
                  cfg.score_train, &stats);
  ctx.ensure_dir_for(out);
  save_checkpoint(net, out);
  ctx.record(out);
  ctx.commit();
  double last = stats.step_losses.empty() ? 0.0 : stats.step_losses.back();
  std::cout << "[train-score] " << stats.step_losses.size()
            << " steps, final loss " << last << "\n";
}

void cmd_train_classifier(const PipelineConfig& cfg) {
  StageContext ctx(cfg);
  std::string out = ctx.paths().classifier_ckpt();
  if (ctx.have(out)) {
    std::cout << "[train-classifier] checkpoint exists, skipping\n";
    return;
  }
  GraphDataset train = require_dataset(ctx, SplitTag::train, "train-classifier");
  TrainStats stats;
  GraphAttentionNet phi =
      train_classifier(train, cfg.sde_x, cfg.sde_a, arch_from(cfg, train, true),
                       cfg.classifier_train, &stats);
  ctx.ensure_dir_for(out);
  save_checkpoint(phi, out);
  ctx.record(out);
  ctx.commit();
  double last = stats.step_losses.empty() ? 0.0 : stats.step_losses.back();
  std::cout << "[train-classifier] " << stats.step_losses.size()
            << " steps, final loss " << last << "\n";
}

void cmd_sample(const PipelineConfig& cfg, double lambda,
                std::optional<int> target_class, int count) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw ConfigError("lambda must lie in [0, 1)");
  if (count < 0) throw ConfigError("count must be >= 0");
  StageContext ctx(cfg);
  GraphDataset train = require_dataset(ctx, SplitTag::train, "sample");
  GraphAttentionNet score_net = require_score_net(ctx, cfg, train, "sample");
  GraphAttentionNet phi = require_classifier(ctx, cfg, train, "sample");
  if (target_class && (*target_class < 0 || *target_class >= train.num_classes))
    throw ConfigError("class must lie in [0, M)");

  std::map<std::string, std::string> meta = {
      {"checkpoint_hash", sha256_file(ctx.paths().score_ckpt())}};
  GraphDataset aug = sample_set(cfg, train, score_net, &phi, lambda, cfg.r1, cfg.r2,
                                count, 0x10AD, meta);
  if (target_class) {
    GraphDataset filtered = aug;
    filtered.graphs.clear();
    for (auto& g : aug.graphs)
      if (g.label == *target_class) filtered.graphs.push_back(std::move(g));
    aug = std::move(filtered);
  }
  std::string out = ctx.paths().single_sample(lambda, target_class);
  ctx.ensure_dir_for(out);
  write_dataset(aug, out);
  ctx.record(out);
  ctx.commit();
  std::cout << "[sample] wrote " << aug.size() << " graphs to " << out << "\n";
}

void cmd_sample_stage(const PipelineConfig& cfg) {
  StageContext ctx(cfg);
  std::vector<std::string> outs;
  for (double l : cfg.lambda_grid) outs.push_back(ctx.paths().eval_set(l));
  for (auto m : {CompareMode::ooda, CompareMode::lambda_only, CompareMode::alpha_only,
                 CompareMode::unconditional})
    outs.push_back(ctx.paths().mode_set(m));
  if (ctx.have_all(outs)) {
    std::cout << "[sample] all augmented sets exist, skipping\n";
    return;
  }

  GraphDataset train = require_dataset(ctx, SplitTag::train, "sample");
  GraphAttentionNet score_net = require_score_net(ctx, cfg, train, "sample");
  GraphAttentionNet phi = require_classifier(ctx, cfg, train, "sample");
  std::map<std::string, std::string> meta = {
      {"checkpoint_hash", sha256_file(ctx.paths().score_ckpt())}};

  for (std::size_t li = 0; li < cfg.lambda_grid.size(); ++li) {
    std::string out = ctx.paths().eval_set(cfg.lambda_grid[li]);
    if (ctx.have(out)) continue;
    GraphDataset aug = sample_set(cfg, train, score_net, &phi, cfg.lambda_grid[li],
                                  cfg.r1, cfg.r2, cfg.eval_per_class, li, meta);
    ctx.ensure_dir_for(out);
    write_dataset(aug, out);
    ctx.record(out);
    ctx.commit();
    std::cout << "[sample] eval grid lambda=" << fmt_lambda(cfg.lambda_grid[li])
              << " done (" << aug.size() << " graphs)\n";
  }

  struct ModeSpec {
    CompareMode mode;
    double lambda, r1, r2;
    std::uint64_t stream;
  };
  const std::vector<ModeSpec> modes = {
      {CompareMode::ooda, cfg.downstream_lambda, cfg.r1, cfg.r2, 0x200},
      {CompareMode::lambda_only, cfg.downstream_lambda, 0.0, 0.0, 0x201},
      {CompareMode::alpha_only, 0.0, cfg.r1, cfg.r2, 0x202},
      {CompareMode::unconditional, 0.0, 0.0, 0.0, 0x203},
  };
  for (const auto& m : modes) {
    std::string out = ctx.paths().mode_set(m.mode);
    if (ctx.have(out)) continue;
    GraphDataset aug = sample_set(cfg, train, score_net, &phi, m.lambda, m.r1, m.r2,
                                  cfg.downstream_per_class, m.stream, meta);
    ctx.ensure_dir_for(out);
    write_dataset(aug, out);
    ctx.record(out);
    ctx.commit();
    std::cout << "[sample] mode set " << to_string(m.mode) << " done (" << aug.size()
              << " graphs)\n";
  }
}

MetricReport cmd_evaluate(const PipelineConfig& cfg) {
  StageContext ctx(cfg);
  GraphDataset train = require_dataset(ctx, SplitTag::train, "evaluate");
  GraphDataset val = require_dataset(ctx, SplitTag::val, "evaluate");
  GraphDataset test = require_dataset(ctx, SplitTag::test, "evaluate");
  GraphAttentionNet phi = require_classifier(ctx, cfg, train, "evaluate");

  MetricReport report;
  for (double l : cfg.lambda_grid) {
    std::string path = ctx.paths().eval_set(l);
    if (!fs::exists(path))
      throw ConfigError("missing augmented set " + path +
                        " required by evaluate; run sample first");
    GraphDataset aug = read_dataset(path);
    LambdaRow row;
    row.lambda = l;
    MmdResult mmd = mmd_rbf(train.graphs, aug.graphs, cfg.eval_gin);
    row.mmd_mean = mmd.mean;
    row.mmd_stderr = mmd.stderr_;
    report.mmd_biased = report.mmd_biased || mmd.biased;
    row.preservation = preservation_score(phi, aug, cfg.sde_x.eps_time);
    row.validity = validity_fraction(aug.graphs, predicate_valid_discrete());
    row.connected = validity_fraction(aug.graphs, predicate_connected_ignoring_isolated());
    report.rows.push_back(row);
    std::cout << "[evaluate] lambda=" << fmt_lambda(l) << " mmd=" << row.mmd_mean
              << " preservation=" << row.preservation << " validity=" << row.validity
              << " connected=" << row.connected << "\n";
  }

  struct ModeIn {
    CompareMode mode;
    bool needs_aug;
  };
  for (auto [mode, needs_aug] : std::initializer_list<ModeIn>{
           {CompareMode::erm, false},
           {CompareMode::unconditional, true},
           {CompareMode::lambda_only, true},
           {CompareMode::alpha_only, true},
           {CompareMode::ooda, true}}) {
    GraphDataset aug;
    if (needs_aug) {
      std::string path = ctx.paths().mode_set(mode);
      if (!fs::exists(path))
        throw ConfigError("missing augmented set " + path +
                          " required by evaluate; run sample first");
      aug = read_dataset(path);
    }
    auto rows = run_comparison(train, val, test, needs_aug ? &aug : nullptr,
                               cfg.downstream, mode);
    report.downstream.insert(report.downstream.end(), rows.begin(), rows.end());
    std::cout << "[evaluate] mode " << to_string(mode) << " mean test acc "
              << mean_of(rows) << "\n";
  }

  std::string csv = ctx.paths().metrics_csv();
  std::string svg = ctx.paths().mmd_svg();
  ctx.ensure_dir_for(csv);
  write_metric_csv(report, csv);
  write_mmd_svg(report, svg);
  ctx.record(csv);
  ctx.record(svg);
  ctx.commit();
  return report;
}

void cmd_pipeline(const PipelineConfig& cfg) {
  cmd_gen_data(cfg);
  cmd_train_score(cfg);
  cmd_train_classifier(cfg);
  cmd_sample_stage(cfg);
  cmd_evaluate(cfg);
  std::cout << "[pipeline] complete; artifacts under " << cfg.out_dir << "\n";
}

}  // namespace ooda
