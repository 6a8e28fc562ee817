#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <vector>

#include "poster/datamodel.hpp"
#include "poster/encoder.hpp"

namespace poster {

/// Synthetic pool whose class signal is split across the two modalities.
///
/// Every sample is drawn as one of two kinds, chosen with probability
/// `text_share` for the text kind:
///   * appearance kind: features are N(0, I) shifted by +-`appearance_shift`
///     along a fixed random unit direction (sign = class); tokens are 0..4
///     neutral words, empty with probability 0.3.
///   * text kind: features are pure N(0, I) noise; tokens are 2..4 words from
///     the class-specific list plus 1..4 neutral words.
/// With balanced classes, either modality alone is uninformative on half of
/// the samples, so its Bayes accuracy is about 0.5 + 0.5 * (1 - text_share)
/// for appearance and 0.5 + 0.5 * text_share for text, while the pair
/// separates nearly every sample.
struct SyntheticConfig {
  std::size_t appearance_dim = 32;
  double appearance_shift = 3.0;
  double text_share = 0.5;
  std::uint64_t seed = 0;
};

struct SyntheticSample {
  SampleRecord record;
  TextAnnotation annotation;
  AppearanceVector appearance;
  bool text_kind = false;
};

std::vector<SyntheticSample> generate_synthetic(const std::map<Category, std::size_t>& counts,
                                                const SyntheticConfig& cfg);

/// Writes features/<id>.avec, annotations/<id>.json and manifest.jsonl
/// (relative refs) under `dir`; returns the manifest path.
std::filesystem::path write_synthetic_pool(const std::vector<SyntheticSample>& samples,
                                           const std::filesystem::path& dir);

/// In-memory equivalent of writing the pool and running encode_dataset.
EncodedDataset encode_synthetic(const std::vector<SyntheticSample>& samples,
                                const Vocabulary& vocab, double k);

}  // namespace poster
