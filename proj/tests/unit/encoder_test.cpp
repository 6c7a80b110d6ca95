#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <numeric>

#include "ssan/encoder.hpp"
#include "ssan/error.hpp"
#include "ssan/grad_check.hpp"
#include "ssan/ops.hpp"
#include "ssan/random.hpp"
#include "ssan/structure.hpp"
#include "test_support.hpp"

namespace ssan {
namespace {

using D = DependencyType;

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Tensor::from(std::move(shape), std::move(v));
}

void fill(Tensor t, Rng& rng, double lo = -0.5, double hi = 0.5) {
  for (auto& x : t.mutable_values()) x = rng.uniform(lo, hi);
}

/// Gives every transformation tensor of the encoder random values.
void randomize_transforms(const Encoder& enc, Rng& rng) {
  for (const auto& layer : enc.layers())
    for (const auto& head : layer.heads)
      for (auto s : kStructuredDependencies) {
        const auto& t = head.transform(s);
        for (auto tensor : {t.core, t.query_vec, t.key_vec, t.prior})
          if (tensor.defined()) fill(tensor, rng);
      }
}

EncoderConfig small_config(TransformationMode mode, std::size_t d = 8) {
  EncoderConfig c;
  c.layers = 2;
  c.heads = 2;
  c.d_model = d;
  c.ffn_multiplier = 2;
  c.transform = Transformation::make(mode);
  return c;
}

StructureMatrix random_structure(Rng& rng, std::size_t* n_out = nullptr) {
  const auto doc = testing::random_document(rng, "enc");
  if (n_out) *n_out = doc.token_count();
  return build_structure_matrix(doc);
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) return false;
  const auto x = a.values(), y = b.values();
  return std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0;
}

TEST(ProjectQkv, IdentitySliceAndZeros) {
  AttentionHead head;
  head.wq = Tensor::from({4, 2}, {1, 0, 0, 1, 0, 0, 0, 0});
  head.wk = Tensor::zeros({4, 2});
  head.wv = Tensor::zeros({4, 2});
  const auto x = Tensor::from({1, 4}, {3, 5, 7, 9});
  const auto [q, k, v] = project_qkv(x, head);
  EXPECT_EQ(q.at(0, 0), 3.0);
  EXPECT_EQ(q.at(0, 1), 5.0);
  EXPECT_EQ(k.shape(), (Shape{1, 2}));
  const auto z = project_qkv(Tensor::zeros({3, 4}), head);
  for (double val : z.q.values()) EXPECT_EQ(val, 0.0);
}

TEST(EncoderConfig, RejectsIndivisibleHeads) {
  auto c = small_config(TransformationMode::None);
  c.d_model = 9;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config(TransformationMode::None);
  c.structured_layers = {1, 3};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RawScores, ArithmeticAndLoopOracle) {
  const auto q = Tensor::full({1, 4}, 1.0);
  EXPECT_DOUBLE_EQ(raw_scores(q, q).item(), 2.0);
  EXPECT_EQ(raw_scores(Tensor::zeros({2, 4}), Tensor::zeros({2, 4})).at(1, 0), 0.0);

  Rng rng(2);
  const auto a = random_tensor({5, 6}, rng), b = random_tensor({5, 6}, rng);
  const auto e = raw_scores(a, b);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < 6; ++t) dot += a.at(i, t) * b.at(j, t);
      EXPECT_NEAR(e.at(i, j), dot / std::sqrt(6.0), 1e-14);
    }
}

TEST(BiaffineBias, ZeroAndIdentity) {
  DependencyTransform t{Tensor::zeros({2, 2}), {}, {}, Tensor::scalar(0.0)};
  const BiasTerms terms{false, false, true, true};
  const std::vector<double> q{1, 2}, k{3, 4};
  EXPECT_EQ(biaffine_bias(q, k, t, terms), 0.0);
  t.core = Tensor::from({2, 2}, {1, 0, 0, 1});
  t.prior = Tensor::scalar(0.5);
  EXPECT_DOUBLE_EQ(biaffine_bias(q, k, t, terms), 11.5);
}

TEST(BiaffineBias, EncoderMatchesTripleLoop) {
  ParameterStore store;
  Rng rng(4);
  Encoder enc(small_config(TransformationMode::Biaffine), store, rng);
  randomize_transforms(enc, rng);
  const auto q = random_tensor({1, 4}, rng), k = random_tensor({1, 4}, rng);
  const auto& t = enc.layers()[1].heads[0].transform(D::InterCoref);
  double expected = t.prior.item();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      expected += q.values()[i] * t.core.at(i, j) * k.values()[j];
  EXPECT_NEAR(enc.biaffine_bias(q.values(), k.values(), D::InterCoref, 1, 0), expected, 1e-14);
  EXPECT_THROW(enc.biaffine_bias(q.values(), k.values(), D::NA, 0, 0), Error);
}

TEST(DecompBias, ArithmeticAndToggles) {
  DependencyTransform t{{}, Tensor::from({1, 2}, {0, 1}), Tensor::from({1, 2}, {1, 1}),
                        Tensor::scalar(0.0)};
  const std::vector<double> q{1, 2}, k{3, 4};
  EXPECT_DOUBLE_EQ(decomp_bias(q, k, t, {true, true, true, false}), 7.0);
  t.prior = Tensor::scalar(0.3);
  EXPECT_DOUBLE_EQ(decomp_bias(q, k, t, {false, false, true, false}), 0.3);
  const DependencyTransform zero{{}, Tensor::zeros({1, 2}), Tensor::zeros({1, 2}),
                                 Tensor::scalar(0.0)};
  EXPECT_EQ(decomp_bias(q, k, zero, {true, true, true, false}), 0.0);

  ParameterStore store;
  Rng rng(1);
  Encoder enc(small_config(TransformationMode::Decomp), store, rng);
  EXPECT_THROW(enc.decomp_bias(q, k, D::NA, 0, 0), Error);
  EXPECT_THROW(enc.biaffine_bias(q, k, D::IntraNE, 0, 0), Error);
}

TEST(Transformation, TermsMustMatchMode) {
  Transformation t{TransformationMode::None, {false, false, true, false}};
  EXPECT_THROW(t.validate(), ConfigError);
  t = {TransformationMode::Biaffine, {true, false, false, false}};
  EXPECT_THROW(t.validate(), ConfigError);
  t = {TransformationMode::Decomp, {false, false, false, true}};
  EXPECT_THROW(t.validate(), ConfigError);
  EXPECT_NO_THROW(Transformation::make(TransformationMode::Decomp).validate());
  EXPECT_EQ(parse_bias_terms(format_bias_terms({true, false, true, false})),
            (BiasTerms{true, false, true, false}));
}

TEST(StructuredScores, BiasAddsInsideTheScale) {
  const auto q = Tensor::from({1, 4}, {1, 1, 1, 1});
  const auto bias = Tensor::from({1, 1}, {2.0});
  EXPECT_DOUBLE_EQ(structured_scores(q, q, bias).item(), 3.0);
  const auto plain = structured_scores(q, q, Tensor());
  EXPECT_DOUBLE_EQ(plain.item(), raw_scores(q, q).item());
}

TEST(StructuredScores, PaddedKeysGetNoWeight) {
  Rng rng(8);
  const auto q = random_tensor({3, 4}, rng), v = random_tensor({3, 2}, rng);
  const std::vector<std::uint8_t> pad{0, 0, 1};
  const auto s = structured_scores(q, q, Tensor(), pad);
  EXPECT_TRUE(std::isinf(s.at(0, 2)) && s.at(0, 2) < 0);
  const auto p = ops::softmax_rows(s);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(p.at(i, 2), 0.0);
    EXPECT_NEAR(p.at(i, 0) + p.at(i, 1), 1.0, 1e-12);
  }
}

TEST(Attend, UniformAndDominant) {
  const auto v = Tensor::from({2, 2}, {1, 2, 5, 8});
  const auto z = attend(Tensor::zeros({2, 2}), v);
  EXPECT_DOUBLE_EQ(z.at(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(z.at(1, 1), 5.0);
  const auto d = attend(Tensor::from({1, 2}, {0.0, 60.0}), v);
  EXPECT_NEAR(d.at(0, 0), 5.0, 1e-12);
  EXPECT_NEAR(d.at(0, 1), 8.0, 1e-12);
}

TEST(Attend, MatchesLoopOracle) {
  Rng rng(12);
  const auto e = random_tensor({4, 4}, rng, -3, 3), v = random_tensor({4, 3}, rng);
  const auto z = attend(e, v);
  for (std::size_t i = 0; i < 4; ++i) {
    double norm = 0.0;
    for (std::size_t j = 0; j < 4; ++j) norm += std::exp(e.at(i, j));
    for (std::size_t c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (std::size_t j = 0; j < 4; ++j) acc += std::exp(e.at(i, j)) / norm * v.at(j, c);
      EXPECT_NEAR(z.at(i, c), acc, 1e-12);
    }
  }
}

TEST(Encoder, SingleBlockHandTrace) {
  EncoderConfig c;
  c.layers = 1;
  c.heads = 1;
  c.d_model = 2;
  c.ffn_multiplier = 1;
  c.transform = Transformation::make(TransformationMode::None);
  ParameterStore store;
  Rng rng(5);
  Encoder enc(c, store, rng);
  const auto& L = enc.layers()[0];
  const std::vector<double> eye{1, 0, 0, 1};
  for (auto t : {L.heads[0].wq, L.heads[0].wk, L.heads[0].wv, L.wo})
    std::copy(eye.begin(), eye.end(), t.mutable_values().begin());
  for (auto t : {L.ffn_in, L.ffn_out}) std::fill(t.mutable_values().begin(), t.mutable_values().end(), 0.0);

  const std::vector<double> x{1.0, 3.0, -2.0, 0.5};
  const auto out = enc.forward(Tensor::from({2, 2}, x), StructureMatrix("t", 2));

  // Attention with identity projections, residual, then layer norm; the zero
  // FFN leaves a second layer norm of an already normalized row.
  const auto ln = [&](double a, double b) {
    const double m = (a + b) / 2, var = ((a - m) * (a - m) + (b - m) * (b - m)) / 2;
    const double s = std::sqrt(var + c.layer_norm_eps);
    return std::pair{(a - m) / s, (b - m) / s};
  };
  for (std::size_t i = 0; i < 2; ++i) {
    double e[2], z[2] = {0, 0}, norm = 0;
    for (std::size_t j = 0; j < 2; ++j) {
      e[j] = std::exp((x[2 * i] * x[2 * j] + x[2 * i + 1] * x[2 * j + 1]) / std::sqrt(2.0));
      norm += e[j];
    }
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t col = 0; col < 2; ++col) z[col] += e[j] / norm * x[2 * j + col];
    auto [a, b] = ln(x[2 * i] + z[0], x[2 * i + 1] + z[1]);
    std::tie(a, b) = ln(a, b);
    EXPECT_NEAR(out.at(i, 0), a, 1e-12);
    EXPECT_NEAR(out.at(i, 1), b, 1e-12);
  }
}

TEST(Encoder, BaselineEquivalence) {
  Rng data_rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    std::size_t n = 0;
    const auto structure = random_structure(data_rng, &n);
    const auto x = random_tensor({n, 8}, data_rng);

    ParameterStore s_none, s_zero, s_trained;
    Rng r1(3), r2(3), r3(3);
    Encoder none(small_config(TransformationMode::None), s_none, r1);
    Encoder zero(small_config(TransformationMode::Biaffine), s_zero, r2);
    Encoder trained(small_config(TransformationMode::Biaffine), s_trained, r3);
    randomize_transforms(trained, data_rng);

    const auto a = none.forward(x, structure);
    const auto b = zero.forward(x, structure);
    const auto c = trained.forward(x, StructureMatrix("na", n));
    EXPECT_TRUE(bitwise_equal(a, b));
    EXPECT_TRUE(bitwise_equal(a, c));
  }
}

TEST(Encoder, EmptyStructuredRangeEqualsModeNone) {
  Rng rng(6);
  std::size_t n = 0;
  const auto structure = random_structure(rng, &n);
  const auto x = random_tensor({n, 8}, rng);
  auto cfg = small_config(TransformationMode::Decomp);
  cfg.structured_layers = LayerRange::none();
  ParameterStore s1, s2;
  Rng r1(9), r2(9);
  Encoder ranged(cfg, s1, r1);
  randomize_transforms(ranged, rng);
  Encoder none(small_config(TransformationMode::None), s2, r2);
  EXPECT_TRUE(bitwise_equal(ranged.forward(x, structure), none.forward(x, structure)));
}

TEST(Encoder, TopLayersOnlyRecordBias) {
  auto cfg = small_config(TransformationMode::Biaffine);
  cfg.layers = 4;
  cfg.structured_layers = LayerRange::top(2, 4);
  ParameterStore store;
  Rng rng(10);
  Encoder enc(cfg, store, rng);
  const auto doc = testing::fig2_document();
  BiasRecorder recorder;
  enc.forward(random_tensor({doc.token_count(), 8}, rng), build_structure_matrix(doc), {},
              &recorder);
  const auto records = recorder.records();
  ASSERT_FALSE(records.empty());
  for (const auto& r : records) {
    EXPECT_GE(r.layer, 2u);
    EXPECT_NE(r.dependency, D::NA);
    EXPECT_GT(r.count, 0u);
  }
}

TEST(Encoder, PaddingLeavesRealRowsUnchanged) {
  ParameterStore store;
  Rng rng(13);
  Encoder enc(small_config(TransformationMode::Biaffine), store, rng);
  randomize_transforms(enc, rng);
  const auto doc = testing::fig2_document();
  const auto n = doc.token_count();
  const auto s = build_structure_matrix(doc);
  const auto x = random_tensor({n, 8}, rng);
  std::vector<double> padded_values(x.values().begin(), x.values().end());
  for (std::size_t i = 0; i < 3 * 8; ++i) padded_values.push_back(rng.uniform(-1, 1));
  std::vector<std::uint8_t> pad(n + 3, 0);
  std::fill(pad.begin() + static_cast<long>(n), pad.end(), 1);
  const auto plain = enc.forward(x, s);
  const auto padded = enc.forward(Tensor::from({n + 3, 8}, padded_values), s.padded(n + 3), pad);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(plain.at(i, j), padded.at(i, j));
}

TEST(Encoder, AttentionRowsSumToOne) {
  ParameterStore store;
  Rng rng(14);
  Encoder enc(small_config(TransformationMode::Biaffine), store, rng);
  randomize_transforms(enc, rng);
  const auto doc = testing::fig2_document();
  const auto n = doc.token_count();
  const auto masks = StructureMasks::from(build_structure_matrix(doc));
  std::vector<std::uint8_t> pad(n, 0);
  pad[n - 1] = 1;
  const auto p = ops::softmax_rows(enc.layer_scores(random_tensor({n, 8}, rng), masks, 0, 1, pad));
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) total += p.at(i, j);
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Encoder, PermutationConsistency) {
  ParameterStore store;
  Rng rng(15);
  Encoder enc(small_config(TransformationMode::Decomp), store, rng);
  randomize_transforms(enc, rng);
  std::size_t n = 0;
  const auto s = random_structure(rng, &n);
  const auto x = random_tensor({n, 8}, rng);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  std::vector<std::uint8_t> cells(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) cells[i * n + j] = s.cells()[perm[i] * n + perm[j]];
  const auto out = enc.forward(x, s);
  const auto permuted = enc.forward(ops::gather_rows(x, perm), StructureMatrix("p", n, cells));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(permuted.at(i, j), out.at(perm[i], j), 1e-12);
}

TEST(Encoder, PriorOnlyTouchesItsCells) {
  ParameterStore store;
  Rng rng(16);
  Encoder enc(small_config(TransformationMode::Biaffine), store, rng);
  randomize_transforms(enc, rng);
  const auto doc = testing::fig2_document();
  const auto s = build_structure_matrix(doc);
  const auto masks = StructureMasks::from(s);
  const auto x = random_tensor({doc.token_count(), 8}, rng);
  for (auto dep : kStructuredDependencies) {
    const auto before = enc.layer_scores(x, masks, 1, 1);
    auto prior = enc.layers()[1].heads[1].transform(dep).prior;
    prior.mutable_values()[0] += 0.75;
    const auto after = enc.layer_scores(x, masks, 1, 1);
    prior.mutable_values()[0] -= 0.75;
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j) {
        const bool changed = before.at(i, j) != after.at(i, j);
        EXPECT_EQ(changed, s.at(i, j) == dep) << dependency_name(dep) << " (" << i << "," << j << ")";
      }
  }
}

double encoder_grad_error(TransformationMode mode, bool transforms_only) {
  ParameterStore store;
  Rng rng(31);
  Encoder enc(small_config(mode), store, rng);
  randomize_transforms(enc, rng);
  const auto doc = testing::fig2_document();
  const auto s = build_structure_matrix(doc);
  const auto x = random_tensor({doc.token_count(), 8}, rng);
  std::vector<double> w(doc.token_count() * 8);
  for (auto& v : w) v = rng.uniform(-1, 1);
  std::vector<Parameter*> params;
  for (auto& p : store.all()) {
    const bool is_transform = p.name.ends_with(".A") || p.name.ends_with(".Q") ||
                              p.name.ends_with(".K") || p.name.ends_with(".b");
    if (p.trainable && (!transforms_only || is_transform)) params.push_back(&p);
  }
  const auto r = grad_check([&] { return ops::sum(ops::mul_constant(enc.forward(x, s), w)); },
                            params);
  return r.max_relative_error;
}

TEST(EncoderGradient, BiaffineTransforms) {
  EXPECT_LT(encoder_grad_error(TransformationMode::Biaffine, true), 1e-4);
}

TEST(EncoderGradient, DecompTransforms) {
  EXPECT_LT(encoder_grad_error(TransformationMode::Decomp, true), 1e-4);
}

TEST(EncoderGradient, FullLayer) {
  EXPECT_LT(encoder_grad_error(TransformationMode::Biaffine, false), 1e-4);
}

TEST(BiasTermsLinearity, FullDecompEqualsSumOfTerms) {
  ParameterStore store;
  Rng rng(18);
  Encoder enc(small_config(TransformationMode::Decomp), store, rng);
  randomize_transforms(enc, rng);
  const auto doc = testing::fig2_document();
  const auto masks = StructureMasks::from(build_structure_matrix(doc));
  const auto& head = enc.layers()[0].heads[1];
  const auto q = random_tensor({doc.token_count(), 4}, rng);
  const auto k = random_tensor({doc.token_count(), 4}, rng);
  const auto bias = [&](BiasTerms terms) {
    return structured_bias(q, k, masks, head, {TransformationMode::Decomp, terms});
  };
  const auto full = bias({true, true, true, false});
  const auto qc = bias({true, false, false, false});
  const auto kc = bias({false, true, false, false});
  const auto pr = bias({false, false, true, false});
  for (std::size_t i = 0; i < full.size(); ++i)
    EXPECT_NEAR(full.values()[i], qc.values()[i] + kc.values()[i] + pr.values()[i], 1e-15);
}

TEST(BiasHeatmap, AggregatesOverHeads) {
  const std::vector<BiasRecord> one{{0, 0, D::IntraCoref, 1.0, 4}};
  const auto h1 = export_bias_heatmap(one, 1);
  EXPECT_DOUBLE_EQ(h1.cells[0][index_of(D::IntraCoref)].mean_bias, 1.0);

  const std::vector<BiasRecord> two{{0, 0, D::IntraNE, 1.0, 5}, {0, 1, D::IntraNE, 3.0, 5}};
  EXPECT_DOUBLE_EQ(export_bias_heatmap(two, 2).cells[0][index_of(D::IntraNE)].mean_bias, 2.0);
  EXPECT_THROW(export_bias_heatmap(std::vector<BiasRecord>{}, 2), Error);
}

TEST(BiasHeatmap, ZeroInitGivesZeroGrid) {
  ParameterStore store;
  Rng rng(19);
  Encoder enc(small_config(TransformationMode::Biaffine), store, rng);
  const auto doc = testing::fig2_document();
  BiasRecorder recorder;
  enc.forward(random_tensor({doc.token_count(), 8}, rng), build_structure_matrix(doc), {},
              &recorder);
  const auto records = recorder.records();
  const auto heatmap = export_bias_heatmap(records, 2);
  ASSERT_EQ(heatmap.cells.size(), 2u);
  for (const auto& row : heatmap.cells)
    for (const auto& cell : row) EXPECT_EQ(cell.mean_bias, 0.0);
  std::ostringstream out;
  write_bias_heatmap(out, heatmap);
  const auto text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * 6);
}

TEST(LayerRange, Parsing) {
  EXPECT_EQ(parse_layer_range("all", 4).count(4), 4u);
  EXPECT_EQ(parse_layer_range("none", 4).count(4), 0u);
  const auto top = parse_layer_range("top:1", 4);
  EXPECT_TRUE(top.contains(3));
  EXPECT_FALSE(top.contains(2));
  EXPECT_EQ(parse_layer_range("1-3", 4), (LayerRange{1, 3}));
  EXPECT_THROW(parse_layer_range("top:5", 4), ConfigError);
}

}  // namespace
}  // namespace ssan
