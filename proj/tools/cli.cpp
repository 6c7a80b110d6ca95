#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ssan/ablation.hpp"
#include "ssan/corpus_stats.hpp"
#include "ssan/docred_io.hpp"
#include "ssan/error.hpp"
#include "ssan/metrics.hpp"
#include "ssan/structure.hpp"
#include "ssan/synthetic.hpp"
#include "ssan/trainer.hpp"

namespace ssan::cli {
namespace fs = std::filesystem;

namespace {

/// Config file plus one kebab-case flag per ModelConfig field.
struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "Configuration file (key = value lines)")
        ->check(CLI::ExistingFile);
    for (const auto& key : ModelConfig::keys())
      app->add_option("--" + kebab_case(key), overrides[key],
                      "Override '" + key + "'");
  }

  ModelConfig resolve() const {
    auto config = file.empty() ? ModelConfig{} : ModelConfig::load(file);
    for (const auto& [key, value] : overrides)
      if (!value.empty()) config.set(key, value);
    config.validate();
    return config;
  }
};

std::vector<Document> load_docs(const std::string& path, const RelationSchema* schema = nullptr) {
  if (path.empty()) return {};
  return parse_corpus(path, schema);
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  fn(out);
}

struct Paths {
  std::string train, dev, docs, checkpoint;
  std::string run_dir = ".";
};

void add_run_dir(CLI::App* app, Paths& p) {
  app->add_option("--run-dir", p.run_dir, "Output directory")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structured self-attention relation extraction", "ssan"};
  app.require_subcommand(1);

  Paths p;
  ConfigFlags flags;

  auto* train_cmd = app.add_subcommand("train", "Train a model and keep the best dev checkpoint");
  std::vector<std::string> sweep_specs;
  bool quiet = false;
  flags.attach(train_cmd);
  train_cmd->add_option("--train", p.train, "Training corpus")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--dev", p.dev, "Development corpus")->check(CLI::ExistingFile);
  train_cmd->add_option("--sweep", sweep_specs,
                        "Grid search entry key=v1,v2 (repeatable); best run is kept");
  train_cmd->add_flag("--quiet", quiet, "Suppress per-epoch progress");
  add_run_dir(train_cmd, p);

  auto* eval_cmd = app.add_subcommand("eval", "Score a corpus with a checkpoint");
  std::optional<double> threshold;
  eval_cmd->add_option("--checkpoint", p.checkpoint)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--docs", p.docs, "Corpus to evaluate")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--train", p.train, "Training corpus for Ign F1")->check(CLI::ExistingFile);
  eval_cmd->add_option("--threshold", threshold, "Decision threshold (default: checkpoint)");
  add_run_dir(eval_cmd, p);

  auto* tune_cmd = app.add_subcommand("tune-threshold", "Pick the F1-maximizing threshold on a dev corpus");
  bool update = false;
  tune_cmd->add_option("--checkpoint", p.checkpoint)->required()->check(CLI::ExistingFile);
  tune_cmd->add_option("--dev", p.dev)->required()->check(CLI::ExistingFile);
  tune_cmd->add_flag("--update", update, "Store the threshold in the checkpoint");
  add_run_dir(tune_cmd, p);

  auto* structure_cmd = app.add_subcommand("build-structure", "Write dependency grids");
  std::string exclude;
  structure_cmd->add_option("--docs", p.docs)->required()->check(CLI::ExistingFile);
  structure_cmd->add_option("--exclude", exclude, "Dependencies to set to NA");
  add_run_dir(structure_cmd, p);

  auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics");
  std::vector<std::string> stats_inputs;
  stats_cmd->add_option("--docs", stats_inputs, "Corpus files (pooled)")->required()->check(CLI::ExistingFile);
  add_run_dir(stats_cmd, p);

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic bridge corpus");
  SyntheticSpec spec;
  std::size_t dev_documents = 0;
  synth_cmd->add_option("--documents", spec.documents)->capture_default_str();
  synth_cmd->add_option("--dev-documents", dev_documents, "Extra documents written to dev.json")
      ->capture_default_str();
  synth_cmd->add_option("--entities", spec.entities_per_doc)->capture_default_str();
  synth_cmd->add_option("--sentences", spec.sentences_per_doc)->capture_default_str();
  synth_cmd->add_option("--bridges", spec.bridges_per_doc)->capture_default_str();
  synth_cmd->add_option("--pronoun-rate", spec.pronoun_rate)->capture_default_str();
  synth_cmd->add_option("--filler-vocab", spec.filler_vocab)->capture_default_str();
  synth_cmd->add_option("--name-vocab", spec.name_vocab)->capture_default_str();
  synth_cmd->add_option("--max-filler", spec.max_filler)->capture_default_str();
  synth_cmd->add_option("--seed", spec.seed)->capture_default_str();
  add_run_dir(synth_cmd, p);

  const auto add_ablation = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    flags.attach(cmd);
    cmd->add_option("--train", p.train)->required()->check(CLI::ExistingFile);
    cmd->add_option("--dev", p.dev)->required()->check(CLI::ExistingFile);
    add_run_dir(cmd, p);
    return cmd;
  };
  auto* deps_cmd = add_ablation("ablate-deps", "One run per excluded dependency");
  auto* terms_cmd = add_ablation("ablate-terms", "One run per bias-term configuration");
  auto* layers_cmd = add_ablation("ablate-layers", "One run per structured top-k layer count");
  std::vector<std::size_t> top_k;
  layers_cmd->add_option("--top-k", top_k, "Layer counts (default 0..layers)")->delimiter(',');

  auto* bias_cmd = app.add_subcommand("export-bias", "Mean attentive bias per layer and dependency");
  bias_cmd->add_option("--checkpoint", p.checkpoint)->required()->check(CLI::ExistingFile);
  bias_cmd->add_option("--docs", p.docs)->required()->check(CLI::ExistingFile);
  add_run_dir(bias_cmd, p);

  std::vector<std::string> argv_tail(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(argv_tail.begin(), argv_tail.end());
  try {
    app.parse(argv_tail);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  const fs::path dir = p.run_dir;
  try {
    if (train_cmd->parsed()) {
      auto config = flags.resolve();
      const auto train_docs = load_docs(p.train);
      const auto dev_docs = load_docs(p.dev);
      if (!sweep_specs.empty()) {
        const auto result = sweep(config, parse_sweep(sweep_specs), train_docs, dev_docs);
        write_file(dir / "sweep.tsv", [&](std::ostream& o) {
          o << "run\tdev_f1\tconfig\n";
          for (std::size_t i = 0; i < result.runs.size(); ++i) {
            auto text = result.runs[i].config.to_text();
            std::replace(text.begin(), text.end(), '\n', ';');
            o << i << '\t' << result.runs[i].dev_f1 << '\t' << text << '\n';
          }
        });
        config = result.runs[result.best].config;
        out << "sweep: best run " << result.best << " dev_f1 "
            << result.runs[result.best].dev_f1 << '\n';
      }
      TrainOptions options;
      options.progress = quiet ? nullptr : &out;
      const auto result = train(config, train_docs, dev_docs, options);
      write_run_directory(dir, config, result, train_docs, dev_docs);
      out << "best epoch " << result.best_epoch << " dev_f1 " << result.best_dev_f1
          << " -> " << (dir / "checkpoint.bin").string() << '\n';
    } else if (eval_cmd->parsed()) {
      const auto checkpoint = Checkpoint::load(p.checkpoint);
      const auto model = RelationModel::from_checkpoint(checkpoint);
      const auto docs = load_docs(p.docs, &model.schema());
      const auto train_docs = load_docs(p.train);
      const double theta = threshold.value_or(checkpoint_threshold(checkpoint));
      const auto scores = score_corpus(model, docs);
      const auto report = evaluate_scores(scores, docs, model.schema(),
                                          TrainFactIndex(train_docs), theta);
      write_file(dir / "report.tsv", [&](std::ostream& o) { write_report(o, report); });
      write_file(dir / "predictions.jsonl", [&](std::ostream& o) {
        write_predictions(o, predictions_at(scores, model.schema(), theta));
      });
      write_report(out, report);
    } else if (tune_cmd->parsed()) {
      auto checkpoint = Checkpoint::load(p.checkpoint);
      const auto model = RelationModel::from_checkpoint(checkpoint);
      const auto dev_docs = load_docs(p.dev, &model.schema());
      const auto choice = tune_threshold(model, dev_docs);
      write_file(dir / "threshold.tsv", [&](std::ostream& o) {
        o << "threshold\tf1\n" << choice.threshold << '\t' << choice.f1 << '\n';
      });
      if (update) {
        char buf[32];
        const auto end = std::to_chars(buf, buf + sizeof buf, choice.threshold).ptr;
        checkpoint.metadata["threshold"] = std::string(buf, end);
        checkpoint.save(p.checkpoint);
      }
      out << "threshold " << choice.threshold << " dev_f1 " << choice.f1 << '\n';
    } else if (structure_cmd->parsed()) {
      const auto excluded = parse_dependency_set(exclude);
      const auto docs = load_docs(p.docs);
      write_file(dir / "structure.grid", [&](std::ostream& o) {
        for (const auto& doc : docs)
          write_structure_grid(o, apply_ablation(build_structure_matrix(doc), excluded));
      });
      out << "wrote " << docs.size() << " grids to " << (dir / "structure.grid").string() << '\n';
    } else if (stats_cmd->parsed()) {
      std::vector<Document> docs;
      for (const auto& path : stats_inputs) {
        auto part = load_docs(path);
        docs.insert(docs.end(), part.begin(), part.end());
      }
      const auto stats = corpus_stats(docs);
      write_file(dir / "stats.tsv", [&](std::ostream& o) { write_corpus_stats(o, stats); });
      write_corpus_stats(out, stats);
    } else if (synth_cmd->parsed()) {
      auto total = spec;
      total.documents = spec.documents + dev_documents;
      auto docs = generate_synthetic(total);
      std::vector<Document> dev(docs.begin() + static_cast<long>(spec.documents), docs.end());
      docs.resize(spec.documents);
      fs::create_directories(dir);
      save_corpus(dir / (dev_documents ? "train.json" : "corpus.json"), docs);
      if (dev_documents) save_corpus(dir / "dev.json", dev);
      out << "wrote " << docs.size() << " + " << dev.size() << " documents to "
          << dir.string() << '\n';
    } else if (deps_cmd->parsed() || terms_cmd->parsed() || layers_cmd->parsed()) {
      const auto config = flags.resolve();
      const auto train_docs = load_docs(p.train);
      const auto dev_docs = load_docs(p.dev);
      AblationTable table;
      if (deps_cmd->parsed()) {
        table = ablate_dependencies(config, train_docs, dev_docs);
      } else if (terms_cmd->parsed()) {
        table = ablate_bias_terms(config, train_docs, dev_docs);
      } else {
        if (top_k.empty())
          for (std::size_t k = 0; k <= config.layers; ++k) top_k.push_back(k);
        table = ablate_layers(config, top_k, train_docs, dev_docs);
      }
      fs::create_directories(dir);
      config.save(dir / "base_config.txt");
      write_file(dir / ("ablation_" + table.title + ".tsv"),
                 [&](std::ostream& o) { write_ablation_table(o, table); });
      write_ablation_table(out, table);
    } else if (bias_cmd->parsed()) {
      const auto model = RelationModel::from_checkpoint(Checkpoint::load(p.checkpoint));
      const auto docs = load_docs(p.docs, &model.schema());
      const auto heatmap = export_bias(model, docs);
      write_file(dir / "bias_heatmap.tsv",
                 [&](std::ostream& o) { write_bias_heatmap(o, heatmap); });
      write_bias_heatmap(out, heatmap);
    }
  } catch (const std::exception& e) {
    err << "ssan: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace ssan::cli
