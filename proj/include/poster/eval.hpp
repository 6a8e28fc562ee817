#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "poster/datamodel.hpp"
#include "poster/encoder.hpp"
#include "poster/net.hpp"

namespace poster {

/// Requested per-category sample counts for one experiment row.
struct DatasetSetup {
  std::string name;
  std::map<Category, std::size_t> counts;
  std::uint64_t seed = 0;
  double scale = 1.0;

  std::size_t total() const;
  std::size_t negatives() const;
};

inline constexpr int kPresetCount = 5;

/// Built-in setups 1..5. Counts are multiplied by `scale`, rounded down,
/// with at least one sample kept for every nonzero category.
DatasetSetup preset_setup(int index, double scale = 1.0, std::uint64_t seed = 0);

/// Parses "Category=count,Category=count,...".
DatasetSetup parse_custom_setup(std::string_view text, std::uint64_t seed = 0);

class InsufficientPoolError : public Error {
 public:
  InsufficientPoolError(Category c, std::size_t requested, std::size_t available);
  Category category() const noexcept { return category_; }
  std::size_t shortfall() const noexcept { return shortfall_; }

 private:
  Category category_;
  std::size_t shortfall_;
};

/// Uniform sampling without replacement per category, then a seeded shuffle
/// of the combined records.
DatasetManifest compose_setup(const DatasetManifest& pool, const DatasetSetup& setup);

struct Fold {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

/// Stratified K-fold. Positives and negatives are shuffled separately and
/// dealt round-robin, negatives continuing where positives stopped, so fold
/// sizes differ by at most one and every fold holds floor or ceil of P/K
/// positives.
std::vector<Fold> kfold_split(std::span<const int> targets, std::size_t k, std::uint64_t seed);
std::vector<Fold> kfold_split(const DatasetManifest& manifest, std::size_t k, std::uint64_t seed);

/// Predicts the majority class of its training targets; ties go to 0.
class DummyClassifier {
 public:
  static DummyClassifier fit(std::span<const int> train_targets);
  int predict() const noexcept { return majority_; }

 private:
  explicit DummyClassifier(int majority) : majority_(majority) {}
  int majority_;
};

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Precision and recall fall back to 1.0 with the matching flag set when
/// their denominator is empty.
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  ConfusionMatrix confusion;
};

Metrics metrics(std::span<const int> predictions, std::span<const int> targets);

enum class ModelKind { Dummy, Network };

struct ModelSpec {
  std::string name;
  ModelKind kind = ModelKind::Network;
  FeatureSource source = FeatureSource::Fused;
  std::size_t depth = 1;
};

/// Accepts "D" or a feature tag (R, I, A for appearance; T for text; RT, IT,
/// AT for fused) with an optional "-proxy" marker and an optional "-3L" or
/// " 3-L" depth suffix.
ModelSpec parse_model_spec(std::string_view text);
std::vector<ModelSpec> parse_model_specs(std::string_view comma_separated);

struct EvalConfig {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  TrainConfig train{};
  std::vector<std::size_t> hidden3 = kDefaultHidden3;
  unsigned threads = 1;

  std::vector<std::size_t> hidden_for(std::size_t depth) const;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::uint64_t model_seed = 0;
  Metrics metrics;
  std::vector<double> loss_history;
  std::size_t epochs_to_converge = 0;
};

struct SpecResult {
  ModelSpec spec;
  std::size_t input_dim = 0;
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  std::optional<std::string> error;
};

struct EvalReport {
  std::optional<DatasetSetup> setup;
  std::map<Category, std::size_t> composition;
  std::size_t samples = 0;
  std::size_t positives = 0;
  FusionConfig fusion;
  EvalConfig config;
  std::vector<std::vector<std::size_t>> fold_test_sizes;
  std::vector<SpecResult> results;
  std::vector<std::string> warnings;

  const SpecResult* find(std::string_view spec_name) const;
};

/// K-fold protocol over every spec. A failing spec records its error and the
/// remaining specs still run.
EvalReport evaluate(const EncodedDataset& data, std::span<const ModelSpec> specs,
                    const EvalConfig& cfg);

/// Epoch (1-based) at which the loss first comes within 5% of its total drop.
std::size_t epochs_to_converge(std::span<const double> loss_history);

nlohmann::ordered_json to_json(const EvalReport& report);

/// Text table, one row per report, one column per model spec (accuracy %).
std::string render_table(std::span<const EvalReport> reports);

}  // namespace poster
