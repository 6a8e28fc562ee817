// posterctl: vocabulary, training, K-fold evaluation and crawl planning for
// the political-poster classifier.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poster/curation.hpp"
#include "poster/datamodel.hpp"
#include "poster/encoder.hpp"
#include "poster/eval.hpp"
#include "poster/net.hpp"
#include "poster/storage.hpp"
#include "poster/vocab.hpp"

namespace {

using namespace poster;
using json = nlohmann::ordered_json;

struct BuildVocabArgs {
  std::string manifest;
  std::size_t cap = kDefaultHistogramCap;
  std::size_t top_n = kDefaultVocabSize;
  std::string out;
};

struct TrainArgs {
  std::string manifest;
  std::string vocab;
  std::string mode = "fused";
  double k = kDefaultFusionWeight;
  std::size_t depth = 1;
  std::vector<std::size_t> hidden = kDefaultHidden3;
  std::size_t epochs = 90;
  std::size_t batch = 64;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::string out_model;
  std::string history;
};

struct EvalArgs {
  std::string pool;
  std::string setup = "1";
  double scale = 1.0;
  std::string models = "D,R,T,RT,R-3L,T-3L,RT-3L";
  std::size_t kfold = 5;
  std::uint64_t seed = 0;
  std::string report;
  std::string vocab;
  std::size_t top_n = kDefaultVocabSize;
  std::size_t cap = kDefaultHistogramCap;
  double k = kDefaultFusionWeight;
  std::size_t epochs = 90;
  std::size_t batch = 64;
  double lr = 1e-3;
  std::vector<std::size_t> hidden = kDefaultHidden3;
  unsigned threads = 1;
};

struct PlanArgs {
  std::string keywords_dir;
  std::string quotas;
  std::string out;
};

std::vector<TextAnnotation> read_annotations(const DatasetManifest& manifest) {
  std::vector<TextAnnotation> out;
  out.reserve(manifest.size());
  for (const auto& r : manifest.records()) {
    std::optional<std::string> warning;
    try {
      out.push_back(read_annotation(r.annotation_ref, r.id, warning));
    } catch (const Error& e) {
      throw Error("sample '" + r.id + "': " + e.what());
    }
    if (warning) std::cerr << "warning: " << *warning << '\n';
  }
  return out;
}

FeatureSource parse_mode(const std::string& mode) {
  if (mode == "appearance") return FeatureSource::Appearance;
  if (mode == "text") return FeatureSource::Text;
  if (mode == "fused") return FeatureSource::Fused;
  throw InvalidArgument("unknown mode '" + mode + "'");
}

int cmd_build_vocab(const BuildVocabArgs& a) {
  const auto manifest = load_manifest(a.manifest);
  const auto annotations = read_annotations(manifest);
  const auto hist = build_histogram(annotations, a.cap);
  const auto vocab = truncate_top_k(hist, a.top_n);
  save_vocabulary(vocab, a.out);

  std::cout << "manifest: " << a.manifest << "\ncap: " << a.cap << "\ntop_n: " << a.top_n
            << "\nout: " << a.out << "\nimages: " << manifest.size()
            << "\ntokens: " << hist.total_tokens() << "\ndistinct_words: " << hist.distinct()
            << "\noverflow_dropped: " << hist.overflow_dropped()
            << "\nvocabulary_size: " << vocab.size() << "\n\ntop words:\n";
  const auto shown = std::min<std::size_t>(50, vocab.size());
  for (std::size_t i = 0; i < shown; ++i) {
    std::printf("%4zu  %-24s %llu\n", i + 1, vocab.words()[i].c_str(),
                static_cast<unsigned long long>(vocab.source_counts()[i]));
  }
  return 0;
}

int cmd_train(const TrainArgs& a) {
  const auto source = parse_mode(a.mode);
  const auto manifest = load_manifest(a.manifest);
  const auto vocab = load_vocabulary(a.vocab);
  FusionConfig fusion;
  fusion.k = a.k;
  fusion.appearance_dim = 0;
  const auto data = encode_dataset(manifest, vocab, fusion);
  for (const auto& w : data.warnings) std::cerr << "warning: " << w << '\n';
  if (data.rows() == 0) throw InvalidArgument("manifest has no records");

  const auto hidden = a.depth == 3 ? a.hidden : default_hidden(a.depth);
  const auto inputs = data.inputs(source);
  auto model = MLPClassifier::glorot(static_cast<std::size_t>(inputs.cols()), hidden, a.seed);
  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.learning_rate = a.lr;
  cfg.seed = a.seed;
  const auto result = train(model, inputs, data.targets, cfg);
  save_checkpoint(model, a.out_model);

  std::vector<int> targets(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) targets[i] = static_cast<int>(data.targets(static_cast<Eigen::Index>(i)));
  const auto m = metrics(predict(model, inputs), targets);

  json h;
  h["config"] = {{"manifest", a.manifest}, {"vocab", a.vocab}, {"mode", a.mode},
                 {"fusion_k", a.k}, {"appearance_dim", data.config.appearance_dim},
                 {"vocab_n", data.config.n}, {"input_dim", inputs.cols()},
                 {"depth", a.depth}, {"dims", model.dims()}, {"epochs", a.epochs},
                 {"batch_size", a.batch}, {"learning_rate", a.lr}, {"seed", a.seed},
                 {"adam_beta1", cfg.beta1}, {"adam_beta2", cfg.beta2}, {"adam_epsilon", cfg.epsilon}};
  h["samples"] = data.rows();
  h["loss_history"] = result.loss_history;
  h["epochs_to_converge"] = epochs_to_converge(result.loss_history);
  h["train_metrics"] = {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}};
  const auto history = a.history.empty() ? a.out_model + ".history.json" : a.history;
  write_file_atomic(history, h.dump(2) + "\n");

  std::cout << "trained " << a.mode << " depth-" << a.depth << " model on " << data.rows()
            << " samples (input dim " << inputs.cols() << ")\nfinal loss: "
            << result.loss_history.back() << "\ntrain accuracy: " << m.accuracy
            << "\ncheckpoint: " << a.out_model << "\nhistory: " << history << '\n';
  return 0;
}

int cmd_eval(const EvalArgs& a) {
  const auto specs = parse_model_specs(a.models);
  const auto pool = load_manifest(a.pool);

  DatasetSetup setup;
  if (a.setup.size() == 1 && a.setup[0] >= '1' && a.setup[0] <= '5') {
    setup = preset_setup(a.setup[0] - '0', a.scale, a.seed);
  } else {
    setup = parse_custom_setup(a.setup, a.seed);
    setup.scale = 1.0;
  }
  const auto composed = compose_setup(pool, setup);

  Vocabulary vocab;
  std::string vocab_source;
  if (!a.vocab.empty()) {
    vocab = load_vocabulary(a.vocab);
    vocab_source = a.vocab;
  } else {
    vocab = truncate_top_k(build_histogram(read_annotations(composed), a.cap), a.top_n);
    vocab_source = "built from composed set (cap " + std::to_string(a.cap) + ", top " +
                   std::to_string(a.top_n) + ")";
  }
  if (vocab.empty()) throw InvalidArgument("vocabulary is empty; no text in the composed set");

  FusionConfig fusion;
  fusion.k = a.k;
  fusion.appearance_dim = 0;
  const auto data = encode_dataset(composed, vocab, fusion);

  EvalConfig cfg;
  cfg.folds = a.kfold;
  cfg.seed = a.seed;
  cfg.train.epochs = a.epochs;
  cfg.train.batch_size = a.batch;
  cfg.train.learning_rate = a.lr;
  cfg.hidden3 = a.hidden;
  cfg.threads = std::max(1u, a.threads);

  auto report = evaluate(data, specs, cfg);
  report.setup = setup;
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';

  auto j = to_json(report);
  j["config"]["pool_manifest"] = a.pool;
  j["config"]["vocab_source"] = vocab_source;
  j["config"]["models"] = a.models;
  if (!a.report.empty()) write_file_atomic(a.report, j.dump(2) + "\n");

  std::cout << render_table(std::span<const EvalReport>(&report, 1));
  for (const auto& r : report.results) {
    if (r.error) {
      std::cerr << "model " << r.spec.name << " failed: " << *r.error << '\n';
    }
  }
  return 0;
}

int cmd_plan(const PlanArgs& a) {
  const auto categories = load_keyword_dir(a.keywords_dir);
  QuotaConfig quotas;
  if (a.quotas.empty()) {
    quotas.defaults = default_suffix_quotas();
  } else {
    quotas = load_quota_file(a.quotas);
    if (quotas.defaults.empty()) quotas.defaults = default_suffix_quotas();
  }
  const auto plan = generate_query_plan(categories, quotas.defaults, quotas.overrides);
  export_plan(plan, a.out);

  std::cout << "keywords_dir: " << a.keywords_dir
            << "\nquotas: " << (a.quotas.empty() ? "built-in" : a.quotas) << "\nout: " << a.out
            << "\ncategories: " << categories.size() << "\nentries: " << plan.entries.size()
            << "\ntotal_budget: " << plan.total_budget() << '\n';
  for (const auto& c : categories) {
    std::cout << "  " << c.name << ": " << c.keywords.size() << " keywords";
    if (auto n = published_keyword_count(c.name); n && *n != c.keywords.size()) {
      std::cout << " (published list has " << *n << ")";
    }
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Political poster classification toolkit"};
  app.require_subcommand(1);

  BuildVocabArgs bv;
  auto* build_vocab = app.add_subcommand("build-vocab", "Build the capped word histogram and top-n vocabulary");
  build_vocab->add_option("--manifest", bv.manifest, "JSON Lines manifest")->required();
  build_vocab->add_option("--cap", bv.cap, "Maximum distinct words in the histogram")->capture_default_str();
  build_vocab->add_option("--top-n", bv.top_n, "Vocabulary size n")->capture_default_str();
  build_vocab->add_option("--out", bv.out, "Vocabulary file to write")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train one classifier on a manifest");
  train_cmd->add_option("--manifest", tr.manifest)->required();
  train_cmd->add_option("--vocab", tr.vocab)->required();
  train_cmd->add_option("--mode", tr.mode)->check(CLI::IsMember({"appearance", "text", "fused"}))->capture_default_str();
  train_cmd->add_option("--k", tr.k, "Text fusion weight")->check(CLI::NonNegativeNumber)->capture_default_str();
  train_cmd->add_option("--depth", tr.depth)->check(CLI::IsMember({1, 3}))->capture_default_str();
  train_cmd->add_option("--hidden", tr.hidden, "Hidden widths of the 3-layer model")->delimiter(',')->expected(2);
  train_cmd->add_option("--epochs", tr.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--batch", tr.batch)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--lr", tr.lr)->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--seed", tr.seed)->capture_default_str();
  train_cmd->add_option("--out-model", tr.out_model)->required();
  train_cmd->add_option("--history", tr.history, "Loss history JSON (default <out-model>.history.json)");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "K-fold evaluation of model specs on a dataset setup");
  eval_cmd->add_option("--pool-manifest", ev.pool)->required();
  eval_cmd->add_option("--setup", ev.setup, "Preset 1..5 or Category=count,...")->capture_default_str();
  eval_cmd->add_option("--scale", ev.scale, "Multiplier for preset counts")->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->add_option("--models", ev.models, "Comma-separated model specs")->capture_default_str();
  eval_cmd->add_option("--kfold", ev.kfold)->check(CLI::Range(2, 1000))->capture_default_str();
  eval_cmd->add_option("--seed", ev.seed)->capture_default_str();
  eval_cmd->add_option("--report", ev.report, "JSON report path");
  eval_cmd->add_option("--vocab", ev.vocab, "Vocabulary file (default: build from the composed set)");
  eval_cmd->add_option("--top-n", ev.top_n)->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->add_option("--cap", ev.cap)->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->add_option("--k", ev.k)->check(CLI::NonNegativeNumber)->capture_default_str();
  eval_cmd->add_option("--epochs", ev.epochs)->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->add_option("--batch", ev.batch)->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->add_option("--lr", ev.lr)->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->add_option("--hidden", ev.hidden, "Hidden widths of 3-layer models")->delimiter(',')->expected(2);
  eval_cmd->add_option("--threads", ev.threads, "Folds trained in parallel")->capture_default_str();

  PlanArgs pl;
  auto* plan_cmd = app.add_subcommand("plan", "Generate the keyword x suffix crawl plan");
  plan_cmd->add_option("--keywords-dir", pl.keywords_dir)->required();
  plan_cmd->add_option("--quotas", pl.quotas, "CSV of suffix,quota (default: built-in quotas)");
  plan_cmd->add_option("--out", pl.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*build_vocab) return cmd_build_vocab(bv);
    if (*train_cmd) return cmd_train(tr);
    if (*eval_cmd) return cmd_eval(ev);
    if (*plan_cmd) return cmd_plan(pl);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
