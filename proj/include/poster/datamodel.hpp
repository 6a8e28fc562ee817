#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "poster/error.hpp"

namespace poster {

/// Five-way image taxonomy. Only PoliticalPoster is the positive class.
enum class Category {
  PoliticalPoster,
  PoliticalOther,
  OffTopic,
  Natural,
  NonPoliticalPoster,
};

inline constexpr std::array<Category, 5> kAllCategories = {
    Category::PoliticalPoster, Category::PoliticalOther, Category::OffTopic,
    Category::Natural, Category::NonPoliticalPoster};

std::string_view category_name(Category c) noexcept;

/// Exact variant name lookup; std::nullopt for anything outside the taxonomy.
std::optional<Category> parse_category(std::string_view name) noexcept;

struct SampleRecord {
  std::string id;
  std::optional<std::filesystem::path> image_path;
  Category category = Category::OffTopic;
  std::filesystem::path annotation_ref;
  std::filesystem::path feature_ref;
};

/// OCR output for one image. Tokens are kept exactly as recognized.
struct TextAnnotation {
  std::string id;
  std::vector<std::string> tokens;

  bool operator==(const TextAnnotation&) const = default;
};

class UnknownCategoryError : public ParseError {
 public:
  using ParseError::ParseError;
};

class DuplicateIdError : public Error {
 public:
  explicit DuplicateIdError(const std::string& id)
      : Error("duplicate sample id '" + id + "'"), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

/// Ordered list of records with a per-category tally kept in sync.
class DatasetManifest {
 public:
  DatasetManifest() = default;
  /// Throws DuplicateIdError if two records share an id.
  explicit DatasetManifest(std::vector<SampleRecord> records);

  const std::vector<SampleRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const SampleRecord& operator[](std::size_t i) const { return records_[i]; }

  std::size_t count(Category c) const;
  const std::map<Category, std::size_t>& counts_by_category() const noexcept { return counts_; }
  std::size_t positives() const { return count(Category::PoliticalPoster); }

 private:
  std::vector<SampleRecord> records_;
  std::map<Category, std::size_t> counts_;
};

/// 1 iff the record is a political poster.
int binary_target(const SampleRecord& record) noexcept;
int binary_target(Category c) noexcept;

/// Reads a JSON Lines manifest. Relative refs are resolved against the
/// manifest's own directory.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Writes a JSON Lines manifest. Paths are written as given.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace poster
