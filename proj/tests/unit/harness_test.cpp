#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ssan/ablation.hpp"
#include "ssan/error.hpp"
#include "ssan/synthetic.hpp"
#include "ssan/trainer.hpp"
#include "test_support.hpp"

namespace ssan {
namespace {

std::vector<Document> corpus(std::size_t n, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.documents = n;
  spec.seed = seed;
  spec.entities_per_doc = 4;
  spec.sentences_per_doc = 2;
  return generate_synthetic(spec);
}

ModelConfig quick_config() {
  auto c = testing::tiny_config();
  c.epochs = 2;
  c.batch_size = 2;
  c.lr = 5e-3;
  return c;
}

void expect_same_report(const EvalReport& a, const EvalReport& b) {
  std::ostringstream x, y;
  write_report(x, a);
  write_report(y, b);
  EXPECT_EQ(x.str(), y.str());
}

TEST(ModelConfig, TextRoundTripAndOverrides) {
  ModelConfig c;
  c.set("d-model", "16");
  c.set("exclude", "inter+coref,intraNE");
  c.set("terms", "biaffine");
  c.set("lr", "0.0025");
  const auto back = ModelConfig::from_text(c.to_text());
  EXPECT_EQ(back, c);
  EXPECT_EQ(back.d_model, 16u);
  EXPECT_TRUE(back.exclude.contains(DependencyType::InterCoref));
  EXPECT_EQ(back.lr, 0.0025);
  EXPECT_EQ(back.get("terms"), "biaffine");
  EXPECT_THROW(c.set("no_such_key", "1"), ConfigError);
  EXPECT_THROW(c.set("layers", "two"), ConfigError);
  EXPECT_THROW(ModelConfig::from_text("layers 2"), ConfigError);
  EXPECT_EQ(ModelConfig::from_text("# comment\n\nheads = 4 # trailing\n").heads, 4u);
}

TEST(ModelConfig, Validation) {
  ModelConfig c;
  c.heads = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.structured_layers = "top:3";
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.mode = TransformationMode::None;
  c.terms = BiasTerms{false, false, true, false};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.threshold = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Train, ZeroLearningRateKeepsParameters) {
  const auto train_docs = corpus(4, 1), dev_docs = corpus(2, 2);
  auto c = quick_config();
  c.lr = 0.0;
  c.epochs = 3;
  const auto r = train(c, train_docs, dev_docs);
  const auto fresh = initialize_model(c, train_docs, dev_docs);
  const auto model = RelationModel::from_checkpoint(r.best);
  for (std::size_t i = 0; i < fresh.store().size(); ++i)
    EXPECT_EQ(fresh.store().all()[i].tensor.values()[0], model.store().all()[i].tensor.values()[0]);
  ASSERT_EQ(r.log.size(), 3u);
  EXPECT_EQ(r.log[0].dev_f1, r.log[2].dev_f1);
  EXPECT_DOUBLE_EQ(r.log[0].loss, r.log[2].loss);
}

TEST(Train, SameSeedIsBitwiseReproducible) {
  const auto train_docs = corpus(4, 3), dev_docs = corpus(2, 4);
  const auto c = quick_config();
  const auto a = train(c, train_docs, dev_docs);
  const auto b = train(c, train_docs, dev_docs);
  std::ostringstream x, y;
  a.best.write(x);
  b.best.write(y);
  EXPECT_EQ(x.str(), y.str());
  auto other = c;
  other.seed = 2;
  std::ostringstream z;
  train(other, train_docs, dev_docs).best.write(z);
  EXPECT_NE(x.str(), z.str());
}

TEST(Train, DivergenceGuardReportsStep) {
  const auto train_docs = corpus(4, 5);
  auto c = quick_config();
  c.lr = 1e200;
  c.epochs = 5;
  try {
    train(c, train_docs, {});
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.step(), 1u);
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(Train, LearnsAndTracksBestEpoch) {
  const auto train_docs = corpus(6, 6), dev_docs = corpus(3, 7);
  auto c = quick_config();
  c.epochs = 6;
  TrainOptions options;
  options.eval_train = true;
  const auto r = train(c, train_docs, dev_docs, options);
  ASSERT_EQ(r.log.size(), 6u);
  EXPECT_LT(r.log.back().loss, r.log.front().loss);
  EXPECT_GE(r.best_epoch, 1u);
  for (const auto& e : r.log) EXPECT_LE(*e.dev_f1, r.best_dev_f1);
  EXPECT_TRUE(r.log.back().train_f1.has_value());
}

TEST(RunDirectory, HoldsEverythingNeededToRerun) {
  const auto train_docs = corpus(4, 8), dev_docs = corpus(2, 9);
  const auto c = quick_config();
  const auto r = train(c, train_docs, dev_docs);
  const auto dir = testing::temp_dir("rundir");
  write_run_directory(dir, c, r, train_docs, dev_docs);
  for (const char* f : {"config.txt", "checkpoint.bin", "train_log.tsv", "dev_report.tsv",
                        "dev_predictions.jsonl"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  EXPECT_EQ(ModelConfig::load(dir / "config.txt"), c);
  const auto again = train(ModelConfig::load(dir / "config.txt"), train_docs, dev_docs);
  std::ostringstream x, y;
  r.best.write(x);
  again.best.write(y);
  EXPECT_EQ(x.str(), y.str());
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, ModelRoundTrip) {
  const auto train_docs = corpus(3, 10);
  const auto c = quick_config();
  const auto r = train(c, train_docs, {});
  const auto model = RelationModel::from_checkpoint(r.best);
  EXPECT_EQ(model.config(), c);
  EXPECT_EQ(checkpoint_threshold(r.best), c.threshold);
  const auto s1 = score_corpus(model, train_docs);
  const auto s2 = score_corpus(RelationModel::from_checkpoint(r.best), train_docs);
  EXPECT_EQ(s1[0].pairs[0].probabilities, s2[0].pairs[0].probabilities);
}

TEST(Sweep, PicksBestAndParsesSpecs) {
  const std::vector<std::string> specs{"lr=0,0.01"};
  const auto grid = parse_sweep(specs);
  ASSERT_EQ(grid.at("lr").size(), 2u);
  EXPECT_THROW(parse_sweep(std::vector<std::string>{"lr"}), ConfigError);
  EXPECT_THROW(parse_sweep(std::vector<std::string>{"bogus=1"}), ConfigError);
  const auto train_docs = corpus(4, 11), dev_docs = corpus(2, 12);
  auto c = quick_config();
  c.epochs = 1;
  const auto result = sweep(c, grid, train_docs, dev_docs);
  ASSERT_EQ(result.runs.size(), 2u);
  for (const auto& run : result.runs) EXPECT_LE(run.dev_f1, result.runs[result.best].dev_f1);
}

TEST(ExportBias, ZeroBeforeTrainingFiniteAfter) {
  const auto train_docs = corpus(4, 13);
  auto c = quick_config();
  c.epochs = 3;
  const auto fresh = initialize_model(c, train_docs, {});
  const auto before = export_bias(fresh, train_docs);
  EXPECT_EQ(before.cells.size(), c.layers);
  for (const auto& row : before.cells)
    for (const auto& cell : row) EXPECT_EQ(cell.mean_bias, 0.0);
  const auto trained = RelationModel::from_checkpoint(train(c, train_docs, {}).best);
  const auto after = export_bias(trained, train_docs);
  bool moved = false;
  for (const auto& row : after.cells)
    for (const auto& cell : row) {
      EXPECT_TRUE(std::isfinite(cell.mean_bias));
      moved = moved || std::abs(cell.mean_bias) > 0.0;
    }
  EXPECT_TRUE(moved);
}

TEST(Ablation, AllExcludedEqualsBaseline) {
  const auto train_docs = corpus(4, 14), dev_docs = corpus(2, 15);
  auto c = quick_config();
  auto none = c;
  none.mode = TransformationMode::None;
  auto all = c;
  all.exclude = DependencySet::all_structured();
  expect_same_report(run_row("-all", all, train_docs, dev_docs).report,
                     run_row("baseline", none, train_docs, dev_docs).report);
}

TEST(Ablation, AbsentDependencyChangesNothing) {
  // Single-sentence documents have no inter-sentential cells.
  SyntheticSpec spec;
  spec.documents = 4;
  spec.sentences_per_doc = 1;
  spec.bridges_per_doc = 0;
  spec.entities_per_doc = 3;
  const auto docs = generate_synthetic(spec);
  const std::vector<Document> train_docs(docs.begin(), docs.begin() + 3),
      dev_docs(docs.begin() + 3, docs.end());
  auto c = quick_config();
  auto without = c;
  without.exclude = {DependencyType::InterCoref};
  expect_same_report(run_row("full", c, train_docs, dev_docs).report,
                     run_row("-inter+coref", without, train_docs, dev_docs).report);
}

TEST(Ablation, TermConfigurationsAndLayers) {
  const auto configs = bias_term_configs(quick_config());
  ASSERT_EQ(configs.size(), 7u);
  EXPECT_EQ(configs[0].second.mode, TransformationMode::None);
  EXPECT_EQ(configs[4].second.transformation().terms, (BiasTerms{true, true, true, false}));
  for (const auto& [label, config] : configs) EXPECT_NO_THROW(config.validate()) << label;

  const auto train_docs = corpus(4, 16), dev_docs = corpus(2, 17);
  auto c = quick_config();
  c.epochs = 1;
  const std::vector<std::size_t> ks{0, 2};
  const auto table = ablate_layers(c, ks, train_docs, dev_docs);
  auto none = c;
  none.mode = TransformationMode::None;
  expect_same_report(table.rows[0].report, run_row("b", none, train_docs, dev_docs).report);
  expect_same_report(table.rows[1].report, run_row("f", c, train_docs, dev_docs).report);
  std::ostringstream out;
  write_ablation_table(out, table);
  EXPECT_NE(out.str().find("recall:r1"), std::string::npos) << out.str();
}

TEST(Ablation, DependencyTableShape) {
  const auto train_docs = corpus(3, 18), dev_docs = corpus(2, 19);
  auto c = quick_config();
  c.epochs = 1;
  const auto table = ablate_dependencies(c, train_docs, dev_docs);
  ASSERT_EQ(table.rows.size(), 7u);
  EXPECT_EQ(table.rows.front().label, "full");
  EXPECT_EQ(table.rows.back().label, "-all");
  EXPECT_NE(table.row("-inter+coref"), nullptr);
  c.mode = TransformationMode::None;
  EXPECT_THROW(ablate_dependencies(c, train_docs, dev_docs), ConfigError);
}

}  // namespace
}  // namespace ssan
