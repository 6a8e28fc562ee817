#include "poster/encoder.hpp"

#include <cmath>

#include "poster/error.hpp"
#include "poster/storage.hpp"

namespace poster {

std::vector<double> TextVector::dense() const {
  std::vector<double> out(n, 0.0);
  for (auto [i, c] : entries) out[i] = c;
  return out;
}

std::uint64_t TextVector::total() const {
  std::uint64_t s = 0;
  for (auto [i, c] : entries) s += c;
  return s;
}

void FusionConfig::validate() const {
  if (!(k >= 0.0) || !std::isfinite(k)) throw InvalidArgument("fusion weight k must be >= 0");
  if (appearance_dim == 0) throw InvalidArgument("appearance dimension must be >= 1");
  if (n == 0) throw InvalidArgument("vocabulary size n must be >= 1");
}

TextVector encode_text(const TextAnnotation& annotation, const Vocabulary& vocab) {
  if (vocab.empty()) throw InvalidArgument("cannot encode text against an empty vocabulary");
  TextVector v;
  v.n = vocab.size();
  for (const auto& token : tokenize(annotation)) {
    if (auto idx = vocab.index_of(token)) ++v.entries[static_cast<std::uint32_t>(*idx)];
  }
  return v;
}

namespace {

FusedVector fuse_impl(const AppearanceVector& appearance, std::size_t text_n,
                      const FusionConfig& cfg, auto&& fill_text) {
  cfg.validate();
  if (appearance.dim() != cfg.appearance_dim) {
    throw DimensionMismatch("appearance vector", cfg.appearance_dim, appearance.dim());
  }
  if (text_n != cfg.n) throw DimensionMismatch("text vector", cfg.n, text_n);
  FusedVector out;
  out.values.assign(cfg.fused_dim(), 0.0);
  for (std::size_t i = 0; i < appearance.dim(); ++i) out.values[i] = appearance.values[i];
  fill_text(std::span<double>(out.values).subspan(cfg.appearance_dim));
  return out;
}

}  // namespace

FusedVector fuse(const AppearanceVector& appearance, const TextVector& text,
                 const FusionConfig& cfg) {
  for (auto [i, c] : text.entries) {
    if (i >= text.n) throw DimensionMismatch("text vector index", text.n, i);
  }
  return fuse_impl(appearance, text.n, cfg, [&](std::span<double> seg) {
    for (auto [i, c] : text.entries) seg[i] = cfg.k * static_cast<double>(c);
  });
}

FusedVector fuse(const AppearanceVector& appearance, std::span<const double> dense_text,
                 const FusionConfig& cfg) {
  return fuse_impl(appearance, dense_text.size(), cfg, [&](std::span<double> seg) {
    for (std::size_t i = 0; i < seg.size(); ++i) seg[i] = cfg.k * dense_text[i];
  });
}

std::string_view feature_source_name(FeatureSource s) noexcept {
  switch (s) {
    case FeatureSource::Appearance: return "appearance";
    case FeatureSource::Text: return "text";
    case FeatureSource::Fused: return "fused";
  }
  return "?";
}

std::size_t EncodedDataset::input_dim(FeatureSource source) const noexcept {
  switch (source) {
    case FeatureSource::Appearance: return config.appearance_dim;
    case FeatureSource::Text: return config.n;
    case FeatureSource::Fused: return config.fused_dim();
  }
  return 0;
}

Eigen::MatrixXd EncodedDataset::inputs(FeatureSource source) const {
  switch (source) {
    case FeatureSource::Appearance: return appearance;
    case FeatureSource::Text: return text;
    case FeatureSource::Fused: {
      Eigen::MatrixXd out(appearance.rows(), appearance.cols() + text.cols());
      out.leftCols(appearance.cols()) = appearance;
      out.rightCols(text.cols()) = config.k * text;
      return out;
    }
  }
  return {};
}

EncodedDataset encode_dataset(const DatasetManifest& manifest, const Vocabulary& vocab,
                              FusionConfig cfg) {
  if (vocab.empty()) throw InvalidArgument("cannot encode a dataset against an empty vocabulary");
  cfg.n = vocab.size();

  EncodedDataset ds;
  const auto rows = static_cast<Eigen::Index>(manifest.size());
  ds.ids.reserve(manifest.size());
  ds.categories.reserve(manifest.size());
  ds.targets.resize(rows);

  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& rec = manifest[static_cast<std::size_t>(r)];
    AppearanceVector va;
    TextAnnotation annotation;
    std::optional<std::string> warning;
    try {
      va.values = read_feature(rec.feature_ref);
      annotation = read_annotation(rec.annotation_ref, rec.id, warning);
    } catch (const Error& e) {
      throw Error("sample '" + rec.id + "': " + e.what());
    }
    if (warning) ds.warnings.push_back(*warning);

    if (r == 0) {
      if (cfg.appearance_dim == 0) cfg.appearance_dim = va.dim();
      cfg.validate();
      ds.appearance.resize(rows, static_cast<Eigen::Index>(cfg.appearance_dim));
      ds.text = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(cfg.n));
    }
    if (va.dim() != cfg.appearance_dim) {
      throw DimensionMismatch("sample '" + rec.id + "' appearance vector", cfg.appearance_dim,
                              va.dim());
    }
    for (std::size_t i = 0; i < va.dim(); ++i) {
      ds.appearance(r, static_cast<Eigen::Index>(i)) = va.values[i];
    }
    for (auto [i, c] : encode_text(annotation, vocab).entries) {
      ds.text(r, static_cast<Eigen::Index>(i)) = c;
    }
    ds.targets(r) = binary_target(rec);
    ds.ids.push_back(rec.id);
    ds.categories.push_back(rec.category);
  }
  if (rows == 0) {
    if (cfg.appearance_dim == 0) cfg.appearance_dim = kDefaultAppearanceDim;
    ds.appearance.resize(0, static_cast<Eigen::Index>(cfg.appearance_dim));
    ds.text.resize(0, static_cast<Eigen::Index>(cfg.n));
  }
  ds.config = cfg;
  return ds;
}

}  // namespace poster
