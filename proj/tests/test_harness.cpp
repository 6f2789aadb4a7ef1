#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "affect/harness.hpp"

using namespace affect;

namespace {

TrainConfig quick_config(Regime r = Regime::Combined) {
  TrainConfig c;
  c.regime = r;
  c.hidden_dims = {32};
  c.lr = 1e-3;
  c.batch_size = 64;
  c.epochs = 2;
  c.seed = 4;
  return c;
}

const Manifest& small_train() {
  static const Manifest m = gen_synthetic(default_synthetic_spec(1), Split::Train, 700);
  return m;
}

const Manifest& small_test() {
  static const Manifest m = gen_synthetic(default_synthetic_spec(1), Split::Test, 400);
  return m;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const AffectError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an AffectError";
  return ErrorKind::Io;
}

Tensor truth_continuous(const Manifest& m, const Tensor& x) {
  // row lookup by feature identity; stubs only see features
  Tensor out(x.rows(), m.space.num_dims());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (const auto& s : m.records) {
      if (std::equal(s.features.begin(), s.features.end(), x.row_span(i).begin())) {
        for (std::size_t d = 0; d < m.space.num_dims(); ++d)
          out(i, d) = scale_to_unit(*s.value(m.space.continuous_dims[d]), m.space.value_range);
        break;
      }
    }
  }
  return out;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("affect_test_harness_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Train, ZeroEpochsReturnsInitialization) {
  TrainConfig c = quick_config();
  c.epochs = 0;
  const auto r = train(c, small_train());
  ModelConfig mc;
  mc.input_dim = 32;
  mc.hidden_dims = {32};
  mc.seed = 4;
  EXPECT_TRUE(r.checkpoint.model == Model::init(mc));
  EXPECT_TRUE(r.log.epochs.empty());
  EXPECT_TRUE(r.log.lr_trace.empty());
}

TEST(Train, DeterministicPerSeed) {
  const auto a = train(quick_config(), small_train(), &small_test());
  const auto b = train(quick_config(), small_train(), &small_test());
  ASSERT_EQ(a.log.epochs.size(), 2u);
  for (std::size_t e = 0; e < 2; ++e) {
    EXPECT_NEAR(a.log.epochs[e].loss, b.log.epochs[e].loss, 1e-12);
    EXPECT_EQ(a.log.epochs[e].val_f1, b.log.epochs[e].val_f1);
  }
  EXPECT_TRUE(a.checkpoint.model == b.checkpoint.model);
  TrainConfig other = quick_config();
  other.seed = 5;
  EXPECT_NE(train(other, small_train()).log.epochs[0].loss, a.log.epochs[0].loss);
}

TEST(Train, LrTraceFollowsCosine) {
  TrainConfig c = quick_config();
  c.lr_min = 1e-5;
  const auto r = train(c, small_train());
  // 700 rows in batches of 64: 11 steps per epoch, last batch kept
  ASSERT_EQ(r.log.total_steps, 22);
  ASSERT_EQ(r.log.lr_trace.size(), 22u);
  for (std::int64_t s = 0; s < 22; ++s) {
    EXPECT_EQ(r.log.lr_trace[static_cast<std::size_t>(s)], diff::cosine_lr(s, 22, c.lr, c.lr_min));
  }
  EXPECT_EQ(r.log.epochs[0].samples, 700u);
}

TEST(Train, LossDecreases) {
  TrainConfig c = quick_config();
  c.epochs = 8;
  c.lr = 3e-3;
  const auto r = train(c, small_train(), &small_test());
  EXPECT_LT(r.log.epochs.back().loss, r.log.epochs.front().loss);
  EXPECT_GT(*r.log.epochs.back().val_f1, 0.5);
}

TEST(Train, BalancedEpochsHaveEqualClassCounts) {
  SyntheticSpec spec = default_synthetic_spec(2);
  const std::vector<double> priors{0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05};
  for (std::size_t c = 0; c < 8; ++c) spec.classes[c].prior = priors[c];
  const Manifest m = gen_synthetic(spec, Split::Train, 1200);
  TrainConfig c = quick_config();
  c.balance_by_class = true;
  const auto r = train(c, m);
  const auto counts = count_labels(m.records, 8);
  const auto minority = *std::min_element(counts.begin(), counts.end());
  for (const auto& e : r.log.epochs) {
    for (auto n : e.class_counts) EXPECT_EQ(n, minority);
    EXPECT_EQ(e.samples, static_cast<std::size_t>(minority) * 8);
  }
}

TEST(Train, AlphaZeroMatchesDiscreteGradients) {
  std::vector<std::vector<Tensor>> combined, discrete;
  auto recorder = [](std::vector<std::vector<Tensor>>& out) {
    return [&out](const StepInfo& info, const Model& m) {
      if (info.step >= 3) return;
      std::vector<Tensor> g;
      for (const auto& p : m.parameters()) {
        if (p.name.rfind("reg", 0) != 0) {
          g.push_back(p.grad);
        } else {
          for (double v : p.grad.values()) EXPECT_EQ(v, 0.0) << p.name;
        }
      }
      out.push_back(g);
    };
  };
  TrainConfig a = quick_config(Regime::Combined);
  a.alpha = 0.0;
  a.epochs = 1;
  TrainConfig d = quick_config(Regime::Discrete);
  d.epochs = 1;
  train(a, small_train(), nullptr, recorder(combined));
  train(d, small_train(), nullptr, recorder(discrete));
  ASSERT_EQ(combined.size(), 3u);
  ASSERT_EQ(discrete.size(), 3u);
  for (std::size_t s = 0; s < 3; ++s) {
    ASSERT_EQ(combined[s].size(), discrete[s].size());
    for (std::size_t p = 0; p < combined[s].size(); ++p)
      for (std::size_t i = 0; i < combined[s][p].size(); ++i) EXPECT_NEAR(combined[s][p][i], discrete[s][p][i], 1e-12);
  }
}

TEST(Train, WarmStartReproducesDonor) {
  const auto dir = temp_dir("warm");
  TrainConfig c = quick_config();
  c.out_dir = dir;
  const auto donor = train(c, small_train());
  ASSERT_TRUE(std::filesystem::exists(dir / "checkpoint.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "checkpoint_epoch2.json"));
  TrainConfig w = quick_config(Regime::ValenceArousal);
  w.epochs = 0;
  w.warm_start = dir / "checkpoint.json";
  const auto warm = train(w, small_train());
  const Tensor x = feature_matrix(small_test().records, std::vector<std::size_t>{0, 1, 2, 3});
  EXPECT_TRUE(*warm.checkpoint.model.forward_values(x).continuous == *donor.checkpoint.model.forward_values(x).continuous);
}

TEST(Train, ConfigErrors) {
  const Manifest e = gen_synthetic([] {
    SyntheticSpec s;
    s.space = "emotic26";
    for (int c = 0; c < 26; ++c) s.classes.push_back({1.0 / 26, {0, 0, 0}, {{0.01, 0, 0}, {0, 0.01, 0}, {0, 0, 0.01}}});
    s.label_counts = {{1, 0.6}, {2, 0.4}};
    return s;
  }(), Split::Train, 800);
  EXPECT_EQ(kind_of([&] { train(quick_config(Regime::Discrete), e); }), ErrorKind::Config);
  TrainConfig bal = quick_config();
  bal.balance_by_class = true;
  EXPECT_EQ(kind_of([&] { train(bal, e); }), ErrorKind::Config);
  TrainConfig bad = quick_config();
  bad.batch_size = 0;
  EXPECT_EQ(kind_of([&] { train(bad, small_train()); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([&] { train(quick_config(), Manifest{affectnet8_space(), Split::Train, {}}); }), ErrorKind::EmptyDataset);
  // multi-label combined training runs with the BCE head
  TrainConfig ml = quick_config();
  ml.epochs = 1;
  EXPECT_NO_THROW(train(ml, e));
}

TEST(Train, NonFiniteLossIsNumericError) {
  TrainConfig c = quick_config();
  c.lr = 1e300;
  c.epochs = 3;
  EXPECT_EQ(kind_of([&] { train(c, small_train()); }), ErrorKind::Numeric);
}

TEST(Evaluate, OracleStubIsPerfect) {
  const Manifest& m = small_test();
  const PredictFn oracle = [&](const Tensor& x) {
    Prediction p;
    Tensor logits(x.rows(), 8);
    const Tensor va = truth_continuous(m, x);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (const auto& s : m.records)
        if (std::equal(s.features.begin(), s.features.end(), x.row_span(i).begin())) logits(i, s.labels[0]) = 1.0;
    }
    p.logits = logits;
    p.continuous = va;
    return p;
  };
  const auto r = evaluate_predictions(oracle, m);
  EXPECT_EQ(r.classification->prf.macro.f1, 1.0);
  EXPECT_EQ(r.classification->prf.macro.precision, 1.0);
  EXPECT_EQ(r.classification->accuracy, 1.0);
  EXPECT_EQ(r.regression->errors.pooled.rmse, 0.0);
  for (const auto& c : r.regression->ccc) EXPECT_NEAR(*c, 1.0, 1e-12);
  EXPECT_EQ(r.regression->cdf_pooled.front(), 1.0);
  EXPECT_EQ(r.samples, m.size());
}

TEST(Evaluate, ConstantStubHasZeroCcc) {
  const PredictFn constant = [](const Tensor& x) {
    Prediction p;
    p.logits = Tensor(x.rows(), 8);
    p.continuous = Tensor(x.rows(), 2, 0.1);
    return p;
  };
  const auto r = evaluate_predictions(constant, small_test());
  for (const auto& c : r.regression->ccc) EXPECT_EQ(*c, 0.0);
  // all-tied logits predict class 0
  EXPECT_EQ(r.classification->confusion->col_sum(0), static_cast<std::int64_t>(small_test().size()));
}

TEST(Evaluate, RandomModelAtChance) {
  const Manifest m = gen_synthetic(default_synthetic_spec(3), Split::Test, 10000);
  std::mt19937_64 rng(8);
  const PredictFn random = [&](const Tensor& x) {
    std::normal_distribution<double> n(0, 1);
    Prediction p;
    Tensor l(x.rows(), 8);
    for (double& v : l.values()) v = n(rng);
    p.logits = l;
    return p;
  };
  EvalOptions opt;
  const auto r = evaluate_predictions(random, m, opt);
  EXPECT_NEAR(r.classification->accuracy, 0.125, 0.02);
  EXPECT_FALSE(r.regression.has_value());
}

TEST(Evaluate, CheckpointIsReadOnlyAndSpaceChecked) {
  const auto t = train(quick_config(), small_train());
  const ModelCheckpoint before = t.checkpoint;
  const auto a = to_json(evaluate(t.checkpoint, small_test()), small_test().space).dump();
  const auto b = to_json(evaluate(t.checkpoint, small_test()), small_test().space).dump();
  EXPECT_EQ(a, b);
  EXPECT_TRUE(before.model == t.checkpoint.model);
  Manifest seven = small_test();
  seven.space = affectnet7_space();
  EXPECT_EQ(kind_of([&] { evaluate(t.checkpoint, seven); }), ErrorKind::Space);
  const auto rep = evaluate(t.checkpoint, small_test());
  const std::string cm = confusion_csv(*rep.classification->confusion, small_test().space);
  EXPECT_EQ(std::count(cm.begin(), cm.end(), '\n'), 9);
  const std::string cdf = cdf_csv(*rep.regression);
  EXPECT_EQ(cdf.substr(0, cdf.find('\n')), "threshold,valence,arousal,pooled");
  EXPECT_EQ(std::count(cdf.begin(), cdf.end(), '\n'), 42);
}

TEST(CrossValidate, SameSpaceMatchesEvaluate) {
  const auto t = train(quick_config(), small_train());
  const auto e = evaluate(t.checkpoint, small_test());
  const auto x = cross_validate(t.checkpoint, small_test());
  EXPECT_EQ(x.regression->errors.pooled.rmse, e.regression->errors.pooled.rmse);
  EXPECT_EQ(x.regression->cdf_pooled, e.regression->cdf_pooled);
  ASSERT_TRUE(x.classification.has_value());
  EXPECT_EQ(x.classification->prf.macro.f1, e.classification->prf.macro.f1);
}

TEST(CrossValidate, TenIntTargetsRescaledToUnit) {
  ModelConfig mc;
  mc.input_dim = 4;
  mc.hidden_dims = {3};
  mc.regime = Regime::ValenceArousal;
  Model m = Model::init(mc);
  for (auto& p : m.parameters()) p.value.fill(0.0);  // predicts 0 everywhere
  const ModelCheckpoint ck{m, {0, {}, "affectnet8"}};
  Manifest em{emotic26_space(), Split::Test, {}};
  em.records.push_back({"lo", {0, 0, 0, 0}, {0}, {{Dim::Valence, 1}, {Dim::Arousal, 10}, {Dim::Dominance, 5}}});
  em.records.push_back({"hi", {0, 0, 0, 0}, {1}, {{Dim::Valence, 10}, {Dim::Arousal, 1}, {Dim::Dominance, 5}}});
  const auto r = cross_validate(ck, em);
  EXPECT_FALSE(r.classification.has_value());
  ASSERT_EQ(r.regression->dims.size(), 2u);
  // |0 - (+-1)| = 1 on every entry
  EXPECT_DOUBLE_EQ(r.regression->errors.pooled.rmse, 1.0);
  EXPECT_DOUBLE_EQ(r.regression->errors.pooled.mae, 1.0);
}

TEST(CrossValidate, DomainShiftLowersCdf) {
  TrainConfig c = quick_config();
  c.epochs = 6;
  const auto t = train(c, small_train());
  SyntheticSpec shifted = default_synthetic_spec(1);
  for (auto& cls : shifted.classes) {
    cls.mean[0] = std::clamp(-cls.mean[0], -0.9, 0.9);
    cls.mean[1] = std::clamp(cls.mean[1] - 0.4, -0.9, 0.9);
  }
  const Manifest b = gen_synthetic(shifted, Split::Test, 400);
  const auto in = cross_validate(t.checkpoint, small_test());
  const auto out = cross_validate(t.checkpoint, b);
  const std::size_t at03 = 6;
  ASSERT_DOUBLE_EQ(in.regression->cdf_grid[at03], 0.3);
  EXPECT_LT(out.regression->cdf_pooled[at03], in.regression->cdf_pooled[at03]);
}

TEST(CrossValidate, MissingSharedDimsIsSpaceError) {
  LabelSpace vonly{"vonly", {"a", "b"}, false, {Dim::Valence}, ValueRange::UnitReal};
  Manifest m{vonly, Split::Test, {{"x", {0, 0}, {0}, {{Dim::Valence, 0.0}}}}};
  ModelConfig mc;
  mc.input_dim = 2;
  mc.hidden_dims = {2};
  const ModelCheckpoint ck{Model::init(mc), {0, {}, "affectnet8"}};
  EXPECT_EQ(kind_of([&] { cross_validate(ck, m); }), ErrorKind::Space);
  mc.regime = Regime::Discrete;
  const ModelCheckpoint disc{Model::init(mc), {0, {}, "affectnet8"}};
  EXPECT_EQ(kind_of([&] { cross_validate(disc, small_test()); }), ErrorKind::Space);
}

TEST(TrainJob, ParsesAndValidates) {
  const auto j = nlohmann::json::parse(R"({"regime":"combined","epochs":3,"hidden":[16],"train":"train.csv",
                                          "validation":"/abs/val.csv","out_dir":"out"})");
  const TrainJob job = train_job_from_json(j, "/cfg");
  EXPECT_EQ(job.config.epochs, 3);
  EXPECT_EQ(job.config.batch_size, 128u);
  EXPECT_EQ(job.config.lr, 5e-5);
  EXPECT_EQ(job.config.alpha, 5.0);
  EXPECT_EQ(job.config.beta, 3.0);
  EXPECT_EQ(job.train_manifest, std::filesystem::path("/cfg/train.csv"));
  EXPECT_EQ(*job.validation_manifest, std::filesystem::path("/abs/val.csv"));
  EXPECT_EQ(kind_of([] { train_job_from_json(nlohmann::json{{"train", "a"}, {"learning_rate", 1}}); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { train_job_from_json(nlohmann::json{{"epochs", 1}}); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { train_job_from_json(nlohmann::json{{"train", "a"}, {"lr", -1}}); }), ErrorKind::Config);
  EXPECT_EQ(kind_of([] { train_job_from_json(nlohmann::json{{"train", "a"}, {"epochs", "x"}}); }), ErrorKind::Config);
}

TEST(RunLog, JsonShape) {
  const auto r = train(quick_config(), small_train(), &small_test());
  const auto j = to_json(r.log);
  EXPECT_EQ(j.at("epochs").size(), 2u);
  EXPECT_EQ(j.at("lr_trace").size(), 22u);
  EXPECT_TRUE(j.at("epochs")[0].at("val_f1").is_number());
  const auto bare = to_json(train(quick_config(), small_train()).log);
  EXPECT_TRUE(bare.at("epochs")[0].at("val_f1").is_null());
}
