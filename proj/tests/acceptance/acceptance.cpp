// One PASS/FAIL line per acceptance criterion; exits nonzero on any failure.
// Criterion numbers given as arguments restrict the run to those criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ssan/ablation.hpp"
#include "ssan/encoder.hpp"
#include "ssan/grad_check.hpp"
#include "ssan/metrics.hpp"
#include "ssan/ops.hpp"
#include "ssan/structure.hpp"
#include "ssan/synthetic.hpp"
#include "ssan/trainer.hpp"
#include "test_support.hpp"

namespace {

using namespace ssan;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

Tensor random_tensor(Shape shape, Rng& rng) {
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::from(std::move(shape), std::move(v));
}

void randomize(const std::vector<Tensor>& tensors, Rng& rng, double scale) {
  for (auto t : tensors)
    if (t.defined())
      for (auto& x : t.mutable_values()) x = rng.uniform(-scale, scale);
}

std::vector<Tensor> transform_tensors(const Encoder& enc) {
  std::vector<Tensor> out;
  for (const auto& layer : enc.layers())
    for (const auto& head : layer.heads)
      for (auto s : kStructuredDependencies) {
        const auto& t = head.transform(s);
        out.insert(out.end(), {t.core, t.query_vec, t.key_vec, t.prior});
      }
  return out;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  const auto x = a.values(), y = b.values();
  return std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

bool is_transform(const std::string& name) {
  return name.ends_with(".A") || name.ends_with(".Q") || name.ends_with(".K") ||
         name.ends_with(".b");
}

EncoderConfig encoder_config(TransformationMode mode) {
  EncoderConfig c;
  c.layers = 2;
  c.heads = 2;
  c.d_model = 8;
  c.ffn_multiplier = 2;
  c.transform = Transformation::make(mode);
  return c;
}

Outcome structure_oracle() {
  const auto start = Clock::now();
  Rng rng(101);
  std::size_t mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const auto doc = testing::random_document(rng, "doc" + std::to_string(i));
    if (!(build_structure_matrix(doc) == testing::brute_force_structure(doc))) ++mismatches;
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed < 5.0,
          std::to_string(mismatches) + " mismatches in 100 docs, " + fmt(elapsed) + " s"};
}

Outcome figure_grid() {
  const auto built = build_structure_matrix(testing::fig2_document());
  const auto expected = testing::read_char_grid(testing::fixture_path("fig2_grid.txt"), "fig2");
  std::size_t diff = 0;
  for (std::size_t i = 0; i < built.cells().size(); ++i)
    diff += built.cells()[i] != expected.cells()[i];
  return {built == expected, std::to_string(diff) + " differing cells of " +
                                 std::to_string(expected.cells().size())};
}

Outcome baseline_degeneration() {
  Rng data(202);
  std::size_t equal = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto doc = testing::random_document(data, "b" + std::to_string(trial));
    const auto n = doc.token_count();
    const auto structure = build_structure_matrix(doc);
    const auto x = random_tensor({n, 8}, data);
    const auto mode = trial % 2 ? TransformationMode::Decomp : TransformationMode::Biaffine;
    ParameterStore s1, s2, s3;
    Rng r1(7), r2(7), r3(7);
    Encoder none(encoder_config(TransformationMode::None), s1, r1);
    Encoder zero(encoder_config(mode), s2, r2);
    Encoder trained(encoder_config(mode), s3, r3);
    randomize(transform_tensors(trained), data, 0.5);
    const auto a = none.forward(x, structure);
    const auto b = zero.forward(x, structure);
    const auto c = trained.forward(x, StructureMatrix("na", n));
    equal += bitwise_equal(a, b) && bitwise_equal(b, c) && bitwise_equal(a, c);
  }
  return {equal == 20, std::to_string(equal) + "/20 inputs bitwise identical"};
}

struct GradModel {
  Document doc = testing::fig2_document();
  RelationModel model;
  EncodedDocument encoded;

  explicit GradModel(ModelConfig config)
      : model(config, Vocabulary::build(std::vector<Document>{doc}, 1),
              TypeInventory::build(std::vector<Document>{doc}),
              RelationSchema({"founder_of", "left"})) {
    Rng rng(303);
    for (auto& p : model.store().all())
      if (is_transform(p.name)) randomize({p.tensor}, rng, 0.3);
    encoded = model.encode(doc);
  }

  GradCheckResult check(const std::function<bool(const Parameter&)>& select) {
    std::vector<Parameter*> params;
    for (auto& p : model.store().all())
      if (p.trainable && select(p)) params.push_back(&p);
    GradCheckOptions options;
    options.step = 1e-5;
    return grad_check([&] { return model.loss(encoded, model.forward(encoded)); }, params,
                      options);
  }
};

Outcome gradient_suite() {
  const auto start = Clock::now();
  double worst_full = 0.0, worst_isolated = 0.0;
  std::string where;
  for (auto mode : {TransformationMode::Biaffine, TransformationMode::Decomp}) {
    auto config = testing::tiny_config();
    config.mode = mode;
    GradModel g(config);
    const auto r = g.check([](const Parameter&) { return true; });
    if (r.max_relative_error >= worst_full) {
      worst_full = r.max_relative_error;
      where = r.worst_parameter;
    }
  }
  const std::vector<std::pair<TransformationMode, BiasTerms>> isolated{
      {TransformationMode::Decomp, {true, false, false, false}},
      {TransformationMode::Decomp, {false, true, false, false}},
      {TransformationMode::Decomp, {false, false, true, false}},
      {TransformationMode::Biaffine, {false, false, false, true}},
      {TransformationMode::Biaffine, {false, false, true, false}},
  };
  for (const auto& [mode, terms] : isolated) {
    auto config = testing::tiny_config();
    config.mode = mode;
    config.terms = terms;
    GradModel g(config);
    const auto r = g.check([](const Parameter& p) { return is_transform(p.name); });
    worst_isolated = std::max(worst_isolated, r.max_relative_error);
  }
  const double elapsed = seconds_since(start);
  return {worst_full < 1e-4 && worst_isolated < 1e-5 && elapsed < 60.0,
          "max rel err " + fmt(worst_full) + " (" + where + "), isolated terms " +
              fmt(worst_isolated) + ", " + fmt(elapsed) + " s"};
}

std::vector<Document> bridge_corpus(std::size_t documents, std::uint64_t seed,
                                    std::size_t entities = 6, std::size_t sentences = 3,
                                    std::size_t bridges = 2) {
  SyntheticSpec spec;
  spec.documents = documents;
  spec.entities_per_doc = entities;
  spec.sentences_per_doc = sentences;
  spec.bridges_per_doc = bridges;
  spec.seed = seed;
  return generate_synthetic(spec);
}

Outcome overfit() {
  const auto start = Clock::now();
  const auto docs = bridge_corpus(30, 404);
  ModelConfig config;
  config.mode = TransformationMode::Biaffine;
  config.epochs = 300;
  config.lr = 2e-3;
  TrainOptions options;
  options.eval_train = true;
  options.stop_at_train_f1 = 0.95;
  const auto result = train(config, docs, {}, options);
  const double f1 = result.log.back().train_f1.value_or(0.0);
  const double elapsed = seconds_since(start);
  return {f1 >= 0.95 && elapsed < 600.0, "train F1 " + fmt(f1) + " after " +
                                             std::to_string(result.log.size()) + " epochs, " +
                                             fmt(elapsed) + " s"};
}

Outcome structure_benefit() {
  const auto start = Clock::now();
  std::size_t wins = 0, drops = 0;
  std::ostringstream per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    // One bridge among four sentences: only the bridged sentence pair carries r1.
    const auto train_docs = bridge_corpus(200, 500 + seed, 8, 4, 1);
    const auto dev_docs = bridge_corpus(50, 600 + seed, 8, 4, 1);
    ModelConfig full;
    full.mode = TransformationMode::Biaffine;
    full.seed = seed;
    full.epochs = 40;
    full.lr = 5e-3;
    full.auto_threshold = true;
    full.coref_embedding = false;
    full.min_count = 1000;  // every token maps to UNK
    auto baseline = full;
    baseline.mode = TransformationMode::None;
    auto no_bridge = full;
    no_bridge.exclude = {DependencyType::InterCoref};
    const auto a = run_row("full", full, train_docs, dev_docs).report;
    const auto b = run_row("baseline", baseline, train_docs, dev_docs).report;
    const auto c = run_row("-inter+coref", no_bridge, train_docs, dev_docs).report;
    const double r1_full = a.relation("r1") ? a.relation("r1")->recall : 0.0;
    const double r1_cut = c.relation("r1") ? c.relation("r1")->recall : 0.0;
    wins += a.overall.f1 > b.overall.f1;
    drops += r1_cut < r1_full;
    per_seed << " [" << seed << ": " << fmt(a.overall.f1) << " vs " << fmt(b.overall.f1)
             << ", r1 " << fmt(r1_full) << " vs " << fmt(r1_cut) << "]";
  }
  return {wins >= 4 && drops >= 4, "SSAN>baseline " + std::to_string(wins) +
                                       "/5, r1 recall drop " + std::to_string(drops) + "/5, " +
                                       fmt(seconds_since(start)) + " s" + per_seed.str()};
}

Outcome bias_linearity() {
  ParameterStore store;
  Rng rng(707);
  Encoder enc(encoder_config(TransformationMode::Decomp), store, rng);
  randomize(transform_tensors(enc), rng, 0.5);
  std::size_t cells = 0, exact = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto doc = testing::random_document(rng, "lin");
    const auto masks = StructureMasks::from(build_structure_matrix(doc));
    if (!std::any_of(masks.present.begin() + 1, masks.present.end(), [](bool b) { return b; }))
      continue;
    const auto n = doc.token_count();
    const auto q = random_tensor({n, 4}, rng), k = random_tensor({n, 4}, rng);
    const auto& head = enc.layers()[trial % 2].heads[trial % 2];
    const auto bias = [&](BiasTerms terms) {
      return structured_bias(q, k, masks, head, {TransformationMode::Decomp, terms});
    };
    const auto full = bias({true, true, true, false});
    const auto qc = bias({true, false, false, false});
    const auto kc = bias({false, true, false, false});
    const auto pr = bias({false, false, true, false});
    for (std::size_t i = 0; i < full.size(); ++i, ++cells)
      exact += full.values()[i] == qc.values()[i] + kc.values()[i] + pr.values()[i];
  }
  return {cells > 0 && exact == cells,
          std::to_string(exact) + "/" + std::to_string(cells) + " cells exact"};
}

Outcome metrics_examples() {
  const FactKey a{"d", 0, 1, "r"}, b{"d", 1, 2, "r"}, c{"d", 2, 0, "r"};
  std::vector<std::string> failures;
  const auto partial = score_facts({a}, {a, b}).overall;
  if (partial.precision != 1.0 || partial.recall != 0.5 || partial.f1 != 2.0 / 3.0)
    failures.push_back("partial");
  const auto ign = score_facts({a, c}, {a, b}, std::set<FactKey>{a}).overall;
  if (ign.precision != 0.5 || ign.recall != 0.5 || ign.ign_precision != 0.0 ||
      ign.ign_recall != 0.5 || ign.ign_f1 != 0.0)
    failures.push_back("ign");
  const auto perfect = score_facts({a, b}, {a, b}).overall;
  if (perfect.f1 != 1.0 || perfect.ign_f1 != 1.0) failures.push_back("perfect");
  const auto empty = score_facts({a}, {}).overall;
  if (!empty.recall_undefined || empty.f1 != 0.0) failures.push_back("empty gold");
  Rng rng(808);
  for (int trial = 0; trial < 100; ++trial) {
    std::set<FactKey> pred, gold;
    for (std::size_t i = 0; i < 12; ++i) {
      const FactKey k{"d", i, i + 1, rng.bernoulli(0.5) ? "x" : "y"};
      if (rng.bernoulli(0.5)) pred.insert(k);
      if (rng.bernoulli(0.5)) gold.insert(k);
    }
    const auto m = score_facts(pred, gold).overall;
    if (m.ign_f1 != m.f1) {
      failures.push_back("ign==f1");
      break;
    }
  }
  std::string detail = failures.empty() ? "all examples exact" : "failed:";
  for (const auto& f : failures) detail += " " + f;
  return {failures.empty(), detail};
}

Outcome heatmap_pipeline() {
  const auto docs = bridge_corpus(6, 909);
  ModelConfig config;
  config.epochs = 3;
  config.lr = 5e-3;
  const auto fresh = initialize_model(config, docs, {});
  const auto before = export_bias(fresh, docs);
  bool shape = before.layers == config.layers && before.cells.size() == config.layers;
  bool zero = true;
  for (const auto& row : before.cells)
    for (const auto& cell : row) zero = zero && cell.mean_bias == 0.0;
  const auto trained = RelationModel::from_checkpoint(train(config, docs, {}).best);
  const auto after = export_bias(trained, docs);
  shape = shape && after.cells.size() == config.layers;
  bool finite = true, moved = false;
  for (const auto& row : after.cells)
    for (const auto& cell : row) {
      finite = finite && std::isfinite(cell.mean_bias);
      moved = moved || cell.mean_bias != 0.0;
    }
  std::ostringstream grid;
  write_bias_heatmap(grid, after);
  const auto text = grid.str();
  const auto lines = std::count(text.begin(), text.end(), '\n');
  const bool rows = static_cast<std::size_t>(lines) == 1 + config.layers * kDependencyCount;
  return {shape && rows && zero && finite && moved,
          std::to_string(config.layers) + "x" + std::to_string(kDependencyCount) +
              " grid, zero at init " + (zero ? "yes" : "no") + ", finite after training " +
              (finite ? "yes" : "no")};
}

Outcome determinism() {
  const auto train_docs = bridge_corpus(12, 1001), dev_docs = bridge_corpus(4, 1002);
  ModelConfig config;
  config.epochs = 3;
  config.auto_threshold = true;
  const auto once = [&] {
    const auto r = train(config, train_docs, dev_docs);
    std::ostringstream out;
    r.best.write(out);
    write_train_log(out, r.log);
    const auto model = RelationModel::from_checkpoint(r.best);
    write_report(out, evaluate(model, dev_docs, TrainFactIndex(train_docs), r.threshold));
    return out.str();
  };
  const auto a = once(), b = once();
  return {a == b, "checkpoint+log+report " + std::to_string(a.size()) + " bytes, " +
                      (a == b ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"structure oracle equivalence", structure_oracle},
      {"two-sentence example grid", figure_grid},
      {"baseline degeneration", baseline_degeneration},
      {"gradient suite", gradient_suite},
      {"overfit 30 documents", overfit},
      {"structure benefit on bridge corpus", structure_benefit},
      {"bias-term linearity", bias_linearity},
      {"metrics examples", metrics_examples},
      {"bias heatmap pipeline", heatmap_pipeline},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.contains(i + 1)) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failed += !outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << ' ' << (i + 1) << ' ' << criteria[i].first
              << ": " << outcome.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
