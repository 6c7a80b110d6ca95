#include <benchmark/benchmark.h>

#include <vector>

#include "ssan/structure.hpp"
#include "ssan/synthetic.hpp"
#include "ssan/trainer.hpp"

namespace {

std::vector<ssan::Document> corpus(std::size_t documents, std::size_t entities,
                                   std::size_t sentences) {
  ssan::SyntheticSpec spec;
  spec.documents = documents;
  spec.entities_per_doc = entities;
  spec.sentences_per_doc = sentences;
  return ssan::generate_synthetic(spec);
}

void BM_BuildStructure(benchmark::State& state) {
  const auto docs = corpus(1, static_cast<std::size_t>(state.range(0)),
                           static_cast<std::size_t>(state.range(0)) / 2);
  for (auto _ : state) benchmark::DoNotOptimize(ssan::build_structure_matrix(docs[0]));
  state.counters["tokens"] = static_cast<double>(docs[0].token_count());
}
BENCHMARK(BM_BuildStructure)->Arg(6)->Arg(24)->Arg(96);

void BM_EncoderForward(benchmark::State& state) {
  const auto docs = corpus(1, 6, 3);
  ssan::ModelConfig config;
  config.mode = static_cast<ssan::TransformationMode>(state.range(0));
  const auto model = ssan::initialize_model(config, docs, {});
  const auto encoded = model.encode(docs[0]);
  for (auto _ : state) benchmark::DoNotOptimize(model.score(encoded));
  state.counters["tokens"] = static_cast<double>(encoded.length());
}
BENCHMARK(BM_EncoderForward)
    ->Arg(static_cast<int>(ssan::TransformationMode::None))
    ->Arg(static_cast<int>(ssan::TransformationMode::Biaffine))
    ->Arg(static_cast<int>(ssan::TransformationMode::Decomp))
    ->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const auto docs = corpus(8, 6, 3);
  ssan::ModelConfig config;
  config.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(ssan::train(config, docs, {}));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
