#include "poster/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <random>
#include <sstream>

namespace poster {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::size_t DatasetSetup::total() const {
  std::size_t n = 0;
  for (auto [c, k] : counts) n += k;
  return n;
}

std::size_t DatasetSetup::negatives() const {
  std::size_t n = 0;
  for (auto [c, k] : counts) n += binary_target(c) ? 0 : k;
  return n;
}

DatasetSetup preset_setup(int index, double scale, std::uint64_t seed) {
  using C = Category;
  std::map<Category, std::size_t> counts;
  switch (index) {
    case 1: counts = {{C::PoliticalOther, 8500}, {C::PoliticalPoster, 3000}, {C::OffTopic, 1500}}; break;
    case 2:
      counts = {{C::PoliticalOther, 5500}, {C::PoliticalPoster, 3000}, {C::OffTopic, 1500},
                {C::Natural, 3000}};
      break;
    case 3:
      counts = {{C::PoliticalOther, 3500}, {C::PoliticalPoster, 3000}, {C::OffTopic, 1500},
                {C::Natural, 5000}};
      break;
    case 4:
      counts = {{C::PoliticalPoster, 3000}, {C::Natural, 8200}, {C::NonPoliticalPoster, 1800}};
      break;
    case 5:
      counts = {{C::PoliticalPoster, 3000}, {C::OffTopic, 1500}, {C::NonPoliticalPoster, 1800}};
      break;
    default: throw InvalidArgument("setup preset must be 1..5, got " + std::to_string(index));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("scale must be > 0");
  for (auto& [c, k] : counts) {
    k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(k) * scale)));
  }
  return DatasetSetup{"setup-" + std::to_string(index), std::move(counts), seed, scale};
}

DatasetSetup parse_custom_setup(std::string_view text, std::uint64_t seed) {
  DatasetSetup setup;
  setup.name = "custom";
  setup.seed = seed;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    const auto item = trim(text.substr(start, end - start));
    start = end + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidArgument("expected Category=count, got '" + item + "'");
    const auto name = trim(std::string_view(item).substr(0, eq));
    const auto value = trim(std::string_view(item).substr(eq + 1));
    auto c = parse_category(name);
    if (!c) throw InvalidArgument("unknown category '" + name + "'");
    std::size_t count = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), count);
    if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
      throw InvalidArgument("bad count '" + value + "' for " + name);
    }
    if (setup.counts.contains(*c)) throw InvalidArgument("category " + name + " given twice");
    setup.counts[*c] = count;
  }
  if (setup.total() == 0) throw InvalidArgument("custom setup requests no samples");
  return setup;
}

InsufficientPoolError::InsufficientPoolError(Category c, std::size_t requested,
                                             std::size_t available)
    : Error("pool has " + std::to_string(available) + " " + std::string(category_name(c)) +
            " records but " + std::to_string(requested) + " were requested (short by " +
            std::to_string(requested - available) + ")"),
      category_(c),
      shortfall_(requested - available) {}

DatasetManifest compose_setup(const DatasetManifest& pool, const DatasetSetup& setup) {
  std::map<Category, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < pool.size(); ++i) by_category[pool[i].category].push_back(i);

  for (auto [c, want] : setup.counts) {
    const auto have = by_category[c].size();
    if (want > have) throw InsufficientPoolError(c, want, have);
  }

  std::mt19937_64 rng(setup.seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(setup.total());
  for (auto c : kAllCategories) {
    auto it = setup.counts.find(c);
    if (it == setup.counts.end() || it->second == 0) continue;
    auto& candidates = by_category[c];
    std::shuffle(candidates.begin(), candidates.end(), rng);
    chosen.insert(chosen.end(), candidates.begin(),
                  candidates.begin() + static_cast<std::ptrdiff_t>(it->second));
  }
  std::shuffle(chosen.begin(), chosen.end(), rng);

  std::vector<SampleRecord> records;
  records.reserve(chosen.size());
  for (auto i : chosen) records.push_back(pool[i]);
  return DatasetManifest(std::move(records));
}

std::vector<Fold> kfold_split(std::span<const int> targets, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("K-fold needs K >= 2");
  if (targets.size() < k) {
    throw InvalidArgument("K-fold with K=" + std::to_string(k) + " needs at least " +
                          std::to_string(k) + " samples, got " + std::to_string(targets.size()));
  }
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < targets.size(); ++i) (targets[i] ? pos : neg).push_back(i);
  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);

  std::vector<std::size_t> fold_of(targets.size());
  std::size_t dealt = 0;
  for (auto i : pos) fold_of[i] = dealt++ % k;
  for (auto i : neg) fold_of[i] = dealt++ % k;

  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) (f == fold_of[i] ? folds[f].test : folds[f].train).push_back(i);
  }
  return folds;
}

std::vector<Fold> kfold_split(const DatasetManifest& manifest, std::size_t k, std::uint64_t seed) {
  std::vector<int> targets;
  targets.reserve(manifest.size());
  for (const auto& r : manifest.records()) targets.push_back(binary_target(r));
  return kfold_split(targets, k, seed);
}

DummyClassifier DummyClassifier::fit(std::span<const int> train_targets) {
  if (train_targets.empty()) throw InvalidArgument("dummy classifier needs training targets");
  const auto ones = static_cast<std::size_t>(std::count(train_targets.begin(), train_targets.end(), 1));
  return DummyClassifier(2 * ones > train_targets.size() ? 1 : 0);
}

Metrics metrics(std::span<const int> predictions, std::span<const int> targets) {
  if (predictions.size() != targets.size()) {
    throw DimensionMismatch("predictions", targets.size(), predictions.size());
  }
  if (targets.empty()) throw InvalidArgument("metrics need at least one sample");
  Metrics m;
  auto& cm = m.confusion;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const bool p = predictions[i] != 0;
    const bool t = targets[i] != 0;
    if (p && t) ++cm.tp;
    else if (p) ++cm.fp;
    else if (t) ++cm.fn;
    else ++cm.tn;
  }
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  m.precision_degenerate = cm.tp + cm.fp == 0;
  m.precision = m.precision_degenerate ? 1.0 : static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  m.recall_degenerate = cm.tp + cm.fn == 0;
  m.recall = m.recall_degenerate ? 1.0 : static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  return m;
}

ModelSpec parse_model_spec(std::string_view text) {
  ModelSpec spec;
  spec.name = trim(text);
  std::string tag = spec.name;
  if (tag == "D") {
    spec.kind = ModelKind::Dummy;
    return spec;
  }
  for (std::string_view suffix : {"-3L", " 3-L", "3L", "-3-L"}) {
    if (tag.size() > suffix.size() && tag.ends_with(suffix)) {
      tag.resize(tag.size() - suffix.size());
      spec.depth = 3;
      break;
    }
  }
  if (tag.ends_with("-proxy")) tag.resize(tag.size() - 6);
  if (tag == "R" || tag == "I" || tag == "A") spec.source = FeatureSource::Appearance;
  else if (tag == "T") spec.source = FeatureSource::Text;
  else if (tag == "RT" || tag == "IT" || tag == "AT") spec.source = FeatureSource::Fused;
  else throw InvalidArgument("unknown model spec '" + spec.name + "'");
  return spec;
}

std::vector<ModelSpec> parse_model_specs(std::string_view comma_separated) {
  std::vector<ModelSpec> specs;
  std::size_t start = 0;
  while (start <= comma_separated.size()) {
    auto end = comma_separated.find(',', start);
    if (end == std::string_view::npos) end = comma_separated.size();
    const auto item = trim(comma_separated.substr(start, end - start));
    start = end + 1;
    if (item.empty()) continue;
    auto spec = parse_model_spec(item);
    for (const auto& s : specs) {
      if (s.name == spec.name) throw InvalidArgument("model spec '" + spec.name + "' listed twice");
    }
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) throw InvalidArgument("no model specs given");
  return specs;
}

std::vector<std::size_t> EvalConfig::hidden_for(std::size_t depth) const {
  if (depth == 3) return hidden3;
  return default_hidden(depth);
}

const SpecResult* EvalReport::find(std::string_view spec_name) const {
  for (const auto& r : results) {
    if (r.spec.name == spec_name) return &r;
  }
  return nullptr;
}

std::size_t epochs_to_converge(std::span<const double> loss_history) {
  if (loss_history.empty()) return 0;
  const double best = *std::min_element(loss_history.begin(), loss_history.end());
  const double drop = loss_history.front() - best;
  for (std::size_t e = 0; e < loss_history.size(); ++e) {
    if (loss_history[e] - best <= 0.05 * drop) return e + 1;
  }
  return loss_history.size();
}

namespace {

std::vector<int> gather(std::span<const int> values, std::span<const std::size_t> idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(values[i]);
  return out;
}

FoldResult run_fold(const ModelSpec& spec, const Eigen::MatrixXd& inputs,
                    std::span<const int> targets, const Fold& fold, std::size_t fold_index,
                    std::uint64_t model_seed, const EvalConfig& cfg) {
  FoldResult r;
  r.fold = fold_index;
  r.train_size = fold.train.size();
  r.test_size = fold.test.size();
  r.model_seed = model_seed;
  const auto test_targets = gather(targets, fold.test);
  const auto train_targets = gather(targets, fold.train);

  std::vector<int> predictions;
  if (spec.kind == ModelKind::Dummy) {
    const auto dummy = DummyClassifier::fit(train_targets);
    predictions.assign(fold.test.size(), dummy.predict());
  } else {
    std::vector<Eigen::Index> train_idx(fold.train.begin(), fold.train.end());
    std::vector<Eigen::Index> test_idx(fold.test.begin(), fold.test.end());
    const Eigen::MatrixXd x_train = inputs(train_idx, Eigen::all);
    Eigen::VectorXd y_train(static_cast<Eigen::Index>(train_targets.size()));
    for (std::size_t i = 0; i < train_targets.size(); ++i) y_train(static_cast<Eigen::Index>(i)) = train_targets[i];

    const auto hidden = cfg.hidden_for(spec.depth);
    auto model = MLPClassifier::glorot(static_cast<std::size_t>(inputs.cols()), hidden, model_seed);
    auto train_cfg = cfg.train;
    train_cfg.seed = splitmix64(model_seed);
    r.loss_history = train(model, x_train, y_train, train_cfg).loss_history;
    r.epochs_to_converge = epochs_to_converge(r.loss_history);
    predictions = predict(model, inputs(test_idx, Eigen::all));
  }
  r.metrics = metrics(predictions, test_targets);
  return r;
}

}  // namespace

EvalReport evaluate(const EncodedDataset& data, std::span<const ModelSpec> specs,
                    const EvalConfig& cfg) {
  EvalReport report;
  report.fusion = data.config;
  report.config = cfg;
  report.samples = data.rows();
  report.warnings = data.warnings;
  for (auto c : data.categories) ++report.composition[c];

  std::vector<int> targets(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) targets[i] = data.targets(static_cast<Eigen::Index>(i)) > 0.5 ? 1 : 0;
  report.positives = static_cast<std::size_t>(std::count(targets.begin(), targets.end(), 1));

  const auto folds = kfold_split(targets, cfg.folds, cfg.seed);
  for (const auto& f : folds) {
    const auto pos = static_cast<std::size_t>(
        std::count_if(f.test.begin(), f.test.end(), [&](std::size_t i) { return targets[i] == 1; }));
    report.fold_test_sizes.push_back({f.test.size(), pos});
  }

  for (const auto& spec : specs) {
    SpecResult sr;
    sr.spec = spec;
    sr.input_dim = spec.kind == ModelKind::Dummy ? 0 : data.input_dim(spec.source);
    try {
      Eigen::MatrixXd inputs;
      if (spec.kind == ModelKind::Network) inputs = data.inputs(spec.source);
      auto seed_for = [&](std::size_t f) {
        return splitmix64(cfg.seed ^ splitmix64(fnv1a(spec.name) + f));
      };
      sr.folds.resize(folds.size());
      if (cfg.threads > 1 && spec.kind == ModelKind::Network) {
        std::vector<std::future<FoldResult>> pending;
        for (std::size_t f = 0; f < folds.size(); ++f) {
          pending.push_back(std::async(std::launch::async, [&, f] {
            return run_fold(spec, inputs, targets, folds[f], f, seed_for(f), cfg);
          }));
          if (pending.size() == cfg.threads || f + 1 == folds.size()) {
            for (auto& p : pending) {
              auto r = p.get();
              sr.folds[r.fold] = std::move(r);
            }
            pending.clear();
          }
        }
      } else {
        for (std::size_t f = 0; f < folds.size(); ++f) {
          sr.folds[f] = run_fold(spec, inputs, targets, folds[f], f, seed_for(f), cfg);
        }
      }
      for (const auto& fr : sr.folds) {
        sr.mean_accuracy += fr.metrics.accuracy;
        sr.mean_precision += fr.metrics.precision;
        sr.mean_recall += fr.metrics.recall;
      }
      const auto k = static_cast<double>(sr.folds.size());
      sr.mean_accuracy /= k;
      sr.mean_precision /= k;
      sr.mean_recall /= k;
    } catch (const std::exception& e) {
      sr.folds.clear();
      sr.error = e.what();
    }
    report.results.push_back(std::move(sr));
  }
  return report;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  using J = nlohmann::ordered_json;
  J j;
  j["schema"] = "poster-eval-report/1";
  if (report.setup) {
    J s;
    s["name"] = report.setup->name;
    s["seed"] = report.setup->seed;
    s["scale"] = report.setup->scale;
    J counts = J::object();
    for (auto [c, k] : report.setup->counts) counts[std::string(category_name(c))] = k;
    s["requested"] = counts;
    j["setup"] = s;
  } else {
    j["setup"] = nullptr;
  }
  J comp = J::object();
  for (auto [c, k] : report.composition) comp[std::string(category_name(c))] = k;
  j["composition"] = comp;
  j["samples"] = report.samples;
  j["positives"] = report.positives;

  const auto& cfg = report.config;
  J config;
  config["kfold"] = cfg.folds;
  config["fold_seed"] = cfg.seed;
  config["fusion_k"] = report.fusion.k;
  config["appearance_dim"] = report.fusion.appearance_dim;
  config["vocab_n"] = report.fusion.n;
  config["epochs"] = cfg.train.epochs;
  config["batch_size"] = cfg.train.batch_size;
  config["learning_rate"] = cfg.train.learning_rate;
  config["adam_beta1"] = cfg.train.beta1;
  config["adam_beta2"] = cfg.train.beta2;
  config["adam_epsilon"] = cfg.train.epsilon;
  config["hidden_3layer"] = cfg.hidden3;
  config["decision_boundary"] = 0.5;
  j["config"] = config;

  J folds = J::array();
  for (const auto& f : report.fold_test_sizes) folds.push_back({{"test_size", f[0]}, {"test_positives", f[1]}});
  j["folds"] = folds;

  J models = J::array();
  for (const auto& r : report.results) {
    J m;
    m["name"] = r.spec.name;
    m["kind"] = r.spec.kind == ModelKind::Dummy ? "dummy" : "network";
    if (r.spec.kind == ModelKind::Network) {
      m["features"] = std::string(feature_source_name(r.spec.source));
      m["depth"] = r.spec.depth;
      m["input_dim"] = r.input_dim;
      m["fusion_k"] = r.spec.source == FeatureSource::Fused ? J(report.fusion.k) : J(nullptr);
    }
    if (r.error) {
      m["error"] = *r.error;
      models.push_back(m);
      continue;
    }
    m["mean"] = {{"accuracy", r.mean_accuracy}, {"precision", r.mean_precision}, {"recall", r.mean_recall}};
    J per_fold = J::array();
    for (const auto& f : r.folds) {
      J fj;
      fj["fold"] = f.fold;
      fj["train_size"] = f.train_size;
      fj["test_size"] = f.test_size;
      fj["accuracy"] = f.metrics.accuracy;
      fj["precision"] = f.metrics.precision;
      fj["recall"] = f.metrics.recall;
      fj["precision_degenerate"] = f.metrics.precision_degenerate;
      fj["recall_degenerate"] = f.metrics.recall_degenerate;
      const auto& cm = f.metrics.confusion;
      fj["confusion"] = {{"tp", cm.tp}, {"fp", cm.fp}, {"tn", cm.tn}, {"fn", cm.fn}};
      if (r.spec.kind == ModelKind::Network) {
        fj["model_seed"] = f.model_seed;
        fj["epochs_to_converge"] = f.epochs_to_converge;
        fj["loss_history"] = f.loss_history;
      }
      per_fold.push_back(fj);
    }
    m["per_fold"] = per_fold;
    models.push_back(m);
  }
  j["models"] = models;
  j["warnings"] = report.warnings;
  return j;
}

std::string render_table(std::span<const EvalReport> reports) {
  std::vector<std::string> columns;
  for (const auto& rep : reports) {
    for (const auto& r : rep.results) {
      if (std::find(columns.begin(), columns.end(), r.spec.name) == columns.end()) {
        columns.push_back(r.spec.name);
      }
    }
  }
  std::vector<std::string> header = {"Setup", "N"};
  for (auto c : kAllCategories) header.emplace_back(category_name(c));
  header.insert(header.end(), columns.begin(), columns.end());

  std::vector<std::vector<std::string>> rows;
  for (const auto& rep : reports) {
    std::vector<std::string> row;
    row.push_back(rep.setup ? rep.setup->name : "-");
    row.push_back(std::to_string(rep.samples));
    for (auto c : kAllCategories) {
      auto it = rep.composition.find(c);
      row.push_back(it == rep.composition.end() ? "-" : std::to_string(it->second));
    }
    for (const auto& col : columns) {
      const auto* r = rep.find(col);
      if (!r) {
        row.emplace_back("");
      } else if (r->error) {
        row.emplace_back("error");
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", 100.0 * r->mean_accuracy);
        row.emplace_back(buf);
      }
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << (i == 2 || i == 2 + kAllCategories.size() ? " | " : "  ");
      out << std::string(width[i] - cells[i].size(), ' ') << cells[i];
    }
    out << '\n';
  };
  emit(header);
  std::size_t rule = 0;
  for (auto w : width) rule += w + 2;
  out << std::string(rule + 2, '-') << '\n';
  for (const auto& row : rows) emit(row);
  return out.str();
}

}  // namespace poster
