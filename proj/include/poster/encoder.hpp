#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "poster/datamodel.hpp"
#include "poster/vocab.hpp"

namespace poster {

inline constexpr std::size_t kDefaultAppearanceDim = 2048;
inline constexpr double kDefaultFusionWeight = 0.5;

/// Frozen CNN embedding of one image, as read from disk.
struct AppearanceVector {
  std::vector<float> values;
  std::size_t dim() const noexcept { return values.size(); }
};

/// Sparse per-image word counts over a vocabulary of size n.
struct TextVector {
  std::size_t n = 0;
  std::map<std::uint32_t, std::uint32_t> entries;  // index -> count, absent = 0

  std::vector<double> dense() const;
  std::uint64_t total() const;
};

struct FusedVector {
  std::vector<double> values;
  std::size_t dim() const noexcept { return values.size(); }
};

struct FusionConfig {
  double k = kDefaultFusionWeight;
  std::size_t appearance_dim = kDefaultAppearanceDim;
  std::size_t n = kDefaultVocabSize;

  void validate() const;
  std::size_t fused_dim() const noexcept { return appearance_dim + n; }
};

TextVector encode_text(const TextAnnotation& annotation, const Vocabulary& vocab);

/// [appearance | k * text]. Throws DimensionMismatch if either part disagrees with cfg.
FusedVector fuse(const AppearanceVector& appearance, const TextVector& text,
                 const FusionConfig& cfg);
FusedVector fuse(const AppearanceVector& appearance, std::span<const double> dense_text,
                 const FusionConfig& cfg);

enum class FeatureSource { Appearance, Text, Fused };

std::string_view feature_source_name(FeatureSource s) noexcept;

/// Whole-corpus encoding, one row per manifest record in manifest order.
/// Appearance and raw text counts are kept apart so any feature source can be
/// assembled without re-reading files.
struct EncodedDataset {
  FusionConfig config;
  std::vector<std::string> ids;
  std::vector<Category> categories;
  Eigen::MatrixXd appearance;  // rows x appearance_dim
  Eigen::MatrixXd text;        // rows x n, raw counts
  Eigen::VectorXd targets;     // 0/1
  std::vector<std::string> warnings;

  std::size_t rows() const noexcept { return ids.size(); }

  /// Model inputs for a feature source: appearance, raw text counts, or
  /// [appearance | k * text] with k taken from `config`.
  Eigen::MatrixXd inputs(FeatureSource source) const;
  Eigen::MatrixXd fused() const { return inputs(FeatureSource::Fused); }
  std::size_t input_dim(FeatureSource source) const noexcept;
};

/// Errors carry the offending sample id. When cfg.appearance_dim is 0 the
/// dimension of the first feature file is adopted.
EncodedDataset encode_dataset(const DatasetManifest& manifest, const Vocabulary& vocab,
                              FusionConfig cfg);

}  // namespace poster
