#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "ooda/datasets.hpp"
#include "ooda/downstream.hpp"
#include "ooda/errors.hpp"

using namespace ooda;

namespace {

ClassifierConfig small_cfg() {
  ClassifierConfig c;
  c.layers = 2;
  c.hidden = 24;
  c.dropout = 0.2;
  c.epochs = 30;
  c.lr = 3e-3;
  c.batch_size = 16;
  c.seeds = {1, 2};
  c.threads = 1;
  return c;
}

GraphDataset motif_split(int count, std::uint64_t seed, SplitTag tag = SplitTag::train) {
  SplitConfig cfg;
  cfg.shift_kind = ShiftKind::base;
  cfg.train_count = tag == SplitTag::train ? count : 0;
  cfg.val_count = tag == SplitTag::val ? count : 0;
  cfg.test_count = tag == SplitTag::test ? count : 0;
  cfg.base_size_min = 5;
  cfg.base_size_max = 7;
  cfg.seed = seed;
  auto [train, val, test] = make_motif_splits(cfg);
  if (tag == SplitTag::train) return train;
  return tag == SplitTag::val ? val : test;
}

}  // namespace

TEST_CASE("a repeated single graph is memorized to zero loss") {
  GraphDataset ds = motif_split(1, 3);
  for (int k = 0; k < 7; ++k) ds.graphs.push_back(ds.graphs.front());
  ClassifierConfig cfg = small_cfg();
  cfg.dropout = 0.0;
  cfg.epochs = 40;
  GinClassifier clf = train_gnn(ds, cfg, 5);
  CHECK(evaluate(clf, ds) == 1.0);
}

TEST_CASE("fit oracle: train accuracy exceeds 0.95 on the train split") {
  GraphDataset train = motif_split(90, 11);
  ClassifierConfig cfg = small_cfg();
  cfg.epochs = 40;
  GinClassifier clf = train_gnn(train, cfg, 1);
  CHECK(evaluate(clf, train) > 0.95);
}

TEST_CASE("untrained models score chance on a balanced set, in expectation") {
  // a single random init can align with the class clusters by luck, so the
  // chance oracle averages over inits (the expectation is exactly 1/M by
  // symmetry of the random readout)
  GraphDataset ds = motif_split(300, 17);
  double acc = 0.0;
  const int inits = 12;
  for (int s = 0; s < inits; ++s) {
    GinClassifier clf(ds.feat_dim(), ds.num_classes, 2, 16, 100 + std::uint64_t(s));
    acc += evaluate(clf, ds);
  }
  acc /= inits;
  CHECK(acc > 1.0 / 3.0 - 0.1);
  CHECK(acc < 1.0 / 3.0 + 0.1);
}

TEST_CASE("label-shuffled training collapses test accuracy to chance") {
  GraphDataset train = motif_split(90, 23);
  Rng rng(5);
  for (auto& g : train.graphs) g.label = rng.uniform_int(0, 2);
  GraphDataset test = motif_split(150, 29);
  ClassifierConfig cfg = small_cfg();
  GinClassifier clf = train_gnn(train, cfg, 2);
  double acc = evaluate(clf, test);
  CHECK(acc > 1.0 / 3.0 - 0.16);
  CHECK(acc < 1.0 / 3.0 + 0.16);
}

TEST_CASE("training is deterministic given the seed") {
  GraphDataset train = motif_split(30, 31);
  ClassifierConfig cfg = small_cfg();
  cfg.epochs = 6;
  GinClassifier a = train_gnn(train, cfg, 7);
  GinClassifier b = train_gnn(train, cfg, 7);
  for (std::size_t i = 0; i < a.params().size(); ++i)
    CHECK(a.params()[i] == b.params()[i]);
}

TEST_CASE("evaluate rejects empty and unlabeled input") {
  GraphDataset empty;
  empty.num_classes = 3;
  GinClassifier clf(4, 3, 1, 8, 1);
  CHECK_THROWS_AS(evaluate(clf, empty), DataError);
  CHECK_THROWS_AS(train_gnn(empty, small_cfg(), 1), DataError);
}

TEST_CASE("validation selects the best checkpoint") {
  GraphDataset train = motif_split(60, 37);
  GraphDataset val = motif_split(30, 41, SplitTag::val);
  ClassifierConfig cfg = small_cfg();
  GinClassifier clf = train_gnn(train, cfg, 3, &val);
  // selection cannot be worse on val than the no-validation run's last epoch
  GinClassifier last = train_gnn(train, cfg, 3);
  CHECK(evaluate(clf, val) >= evaluate(last, val) - 1e-12);
}

namespace {

GraphDataset fake_augmented(const GraphDataset& like, double lambda, double r1,
                            double r2) {
  GraphDataset aug = like;
  aug.split_tag = SplitTag::augmented;
  char buf[32];
  for (auto& g : aug.graphs) {
    std::snprintf(buf, sizeof(buf), "%.9g", lambda);
    g.meta["lambda"] = buf;
    std::snprintf(buf, sizeof(buf), "%.9g", r1);
    g.meta["r1"] = buf;
    std::snprintf(buf, sizeof(buf), "%.9g", r2);
    g.meta["r2"] = buf;
  }
  return aug;
}

}  // namespace

TEST_CASE("mode wiring is audited from augmentation provenance") {
  GraphDataset train = motif_split(24, 43);
  GraphDataset val = motif_split(12, 47, SplitTag::val);
  GraphDataset test = motif_split(12, 53, SplitTag::test);
  ClassifierConfig cfg = small_cfg();
  cfg.epochs = 2;

  GraphDataset lam_only = fake_augmented(train, 0.05, 0.0, 0.0);
  GraphDataset ooda_set = fake_augmented(train, 0.05, 0.5, 0.5);
  GraphDataset alpha_set = fake_augmented(train, 0.0, 0.5, 0.5);
  GraphDataset uncond = fake_augmented(train, 0.0, 0.0, 0.0);

  CHECK_NOTHROW(run_comparison(train, val, test, &lam_only, cfg, CompareMode::lambda_only));
  CHECK_NOTHROW(run_comparison(train, val, test, &ooda_set, cfg, CompareMode::ooda));
  CHECK_NOTHROW(run_comparison(train, val, test, &alpha_set, cfg, CompareMode::alpha_only));
  CHECK_NOTHROW(run_comparison(train, val, test, &uncond, cfg, CompareMode::unconditional));

  CHECK_THROWS_AS(run_comparison(train, val, test, &lam_only, cfg, CompareMode::ooda),
                  ConfigError);
  CHECK_THROWS_AS(run_comparison(train, val, test, &ooda_set, cfg, CompareMode::alpha_only),
                  ConfigError);
  CHECK_THROWS_AS(run_comparison(train, val, test, &uncond, cfg, CompareMode::lambda_only),
                  ConfigError);
  CHECK_THROWS_AS(run_comparison(train, val, test, nullptr, cfg, CompareMode::ooda),
                  ConfigError);
}

TEST_CASE("erm ignores augmentation and reports one row per seed") {
  GraphDataset train = motif_split(24, 59);
  GraphDataset val = motif_split(12, 61, SplitTag::val);
  GraphDataset test = motif_split(12, 67, SplitTag::test);
  ClassifierConfig cfg = small_cfg();
  cfg.epochs = 4;
  cfg.seeds = {4, 5, 6};

  auto rows = run_comparison(train, val, test, nullptr, cfg, CompareMode::erm);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.mode == "erm");
    CHECK(r.test_acc >= 0.0);
    CHECK(r.test_acc <= 1.0);
  }
  GraphDataset aug = fake_augmented(train, 0.05, 0.5, 0.5);
  auto rows2 = run_comparison(train, val, test, &aug, cfg, CompareMode::erm);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].val_acc == rows2[i].val_acc);
    CHECK(rows[i].test_acc == rows2[i].test_acc);
  }
}

TEST_CASE("ooda mode trains on the union and stays deterministic per seed") {
  GraphDataset train = motif_split(24, 71);
  GraphDataset val = motif_split(12, 73, SplitTag::val);
  GraphDataset test = motif_split(12, 79, SplitTag::test);
  GraphDataset aug = fake_augmented(motif_split(24, 83), 0.05, 0.5, 0.5);
  ClassifierConfig cfg = small_cfg();
  cfg.epochs = 4;
  cfg.seeds = {9, 10};
  cfg.threads = 2;  // parallel seeds must not perturb results
  auto rows1 = run_comparison(train, val, test, &aug, cfg, CompareMode::ooda);
  cfg.threads = 1;
  auto rows2 = run_comparison(train, val, test, &aug, cfg, CompareMode::ooda);
  REQUIRE(rows1.size() == rows2.size());
  for (std::size_t i = 0; i < rows1.size(); ++i) {
    CHECK(rows1[i].val_acc == rows2[i].val_acc);
    CHECK(rows1[i].test_acc == rows2[i].test_acc);
  }
}
