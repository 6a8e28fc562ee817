#include "poster/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "poster/storage.hpp"

namespace poster {

namespace {

const std::vector<std::string> kPositiveWords = {
    "Vote", "ELECT", "campaign", "rally", "Candidate", "senate", "ballot", "re-elect", "Support!"};
const std::vector<std::string> kNegativeWords = {
    "sale", "Concert", "festival", "menu", "sunset", "movie", "museum", "beach", "Tickets"};
const std::vector<std::string> kNeutralWords = {
    "the",  "and",   "of",    "to",    "in",   "city", "new",   "2020", "street", "day",
    "free", "www",   "com",   "open",  "more", "now",  "join",  "us",   "park",   "march",
    "our",  "local", "event", "today", "all",  "for",  "people", "time", "news",  "road"};

std::string pick(const std::vector<std::string>& words, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, words.size() - 1);
  return words[d(rng)];
}

std::size_t between(std::size_t lo, std::size_t hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

std::vector<SyntheticSample> generate_synthetic(const std::map<Category, std::size_t>& counts,
                                                const SyntheticConfig& cfg) {
  if (cfg.appearance_dim == 0) throw InvalidArgument("appearance_dim must be >= 1");
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution text_kind(cfg.text_share);
  std::bernoulli_distribution no_text(0.3);

  std::vector<double> direction(cfg.appearance_dim);
  double norm = 0.0;
  for (auto& d : direction) {
    d = normal(rng);
    norm += d * d;
  }
  norm = std::sqrt(norm);
  for (auto& d : direction) d /= norm;

  std::vector<SyntheticSample> out;
  std::size_t serial = 0;
  for (auto c : kAllCategories) {
    auto it = counts.find(c);
    if (it == counts.end()) continue;
    for (std::size_t i = 0; i < it->second; ++i) {
      SyntheticSample s;
      char id[32];
      std::snprintf(id, sizeof id, "s%06zu", serial++);
      s.record.id = id;
      s.record.category = c;
      s.annotation.id = id;
      s.text_kind = text_kind(rng);
      const double sign = binary_target(c) ? 1.0 : -1.0;

      s.appearance.values.resize(cfg.appearance_dim);
      for (std::size_t d = 0; d < cfg.appearance_dim; ++d) {
        double v = normal(rng);
        if (!s.text_kind) v += sign * cfg.appearance_shift * direction[d];
        s.appearance.values[d] = static_cast<float>(v);
      }

      auto& tokens = s.annotation.tokens;
      if (s.text_kind) {
        const auto& signal = binary_target(c) ? kPositiveWords : kNegativeWords;
        for (auto n = between(2, 4, rng); n > 0; --n) tokens.push_back(pick(signal, rng));
        for (auto n = between(1, 4, rng); n > 0; --n) tokens.push_back(pick(kNeutralWords, rng));
        std::shuffle(tokens.begin(), tokens.end(), rng);
      } else if (!no_text(rng)) {
        for (auto n = between(1, 4, rng); n > 0; --n) tokens.push_back(pick(kNeutralWords, rng));
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::filesystem::path write_synthetic_pool(const std::vector<SyntheticSample>& samples,
                                           const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "features");
  std::filesystem::create_directories(dir / "annotations");
  std::vector<SampleRecord> records;
  records.reserve(samples.size());
  for (const auto& s : samples) {
    auto r = s.record;
    r.feature_ref = std::filesystem::path("features") / (r.id + ".avec");
    r.annotation_ref = std::filesystem::path("annotations") / (r.id + ".json");
    write_feature(dir / r.feature_ref, s.appearance.values);
    write_annotation(dir / r.annotation_ref, s.annotation);
    records.push_back(std::move(r));
  }
  const auto manifest = dir / "manifest.jsonl";
  save_manifest(DatasetManifest(std::move(records)), manifest);
  return manifest;
}

EncodedDataset encode_synthetic(const std::vector<SyntheticSample>& samples,
                                const Vocabulary& vocab, double k) {
  if (samples.empty()) throw InvalidArgument("no synthetic samples");
  EncodedDataset ds;
  ds.config.k = k;
  ds.config.appearance_dim = samples.front().appearance.dim();
  ds.config.n = vocab.size();
  ds.config.validate();
  const auto rows = static_cast<Eigen::Index>(samples.size());
  ds.appearance.resize(rows, static_cast<Eigen::Index>(ds.config.appearance_dim));
  ds.text = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(ds.config.n));
  ds.targets.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& s = samples[static_cast<std::size_t>(r)];
    if (s.appearance.dim() != ds.config.appearance_dim) {
      throw DimensionMismatch("synthetic appearance", ds.config.appearance_dim, s.appearance.dim());
    }
    for (std::size_t d = 0; d < s.appearance.dim(); ++d) {
      ds.appearance(r, static_cast<Eigen::Index>(d)) = s.appearance.values[d];
    }
    for (auto [i, c] : encode_text(s.annotation, vocab).entries) ds.text(r, i) = c;
    ds.targets(r) = binary_target(s.record);
    ds.ids.push_back(s.record.id);
    ds.categories.push_back(s.record.category);
  }
  return ds;
}

}  // namespace poster
