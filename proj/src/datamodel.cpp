#include "poster/datamodel.hpp"

#include <fstream>
#include <string>
#include <unordered_set>

#include <json.hpp>

#include "poster/storage.hpp"

namespace poster {

std::string_view category_name(Category c) noexcept {
  switch (c) {
    case Category::PoliticalPoster: return "PoliticalPoster";
    case Category::PoliticalOther: return "PoliticalOther";
    case Category::OffTopic: return "OffTopic";
    case Category::Natural: return "Natural";
    case Category::NonPoliticalPoster: return "NonPoliticalPoster";
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view name) noexcept {
  for (auto c : kAllCategories) {
    if (category_name(c) == name) return c;
  }
  return std::nullopt;
}

DatasetManifest::DatasetManifest(std::vector<SampleRecord> records) : records_(std::move(records)) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(records_.size());
  for (const auto& r : records_) {
    if (!seen.insert(r.id).second) throw DuplicateIdError(r.id);
    ++counts_[r.category];
  }
}

std::size_t DatasetManifest::count(Category c) const {
  auto it = counts_.find(c);
  return it == counts_.end() ? 0 : it->second;
}

int binary_target(Category c) noexcept { return c == Category::PoliticalPoster ? 1 : 0; }

int binary_target(const SampleRecord& record) noexcept { return binary_target(record.category); }

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& ref) {
  std::filesystem::path p(ref);
  return p.is_absolute() ? p : base / p;
}

std::string required_string(const nlohmann::json& j, const char* key, const std::string& src,
                            std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw ParseError(src, line, std::string("missing string key '") + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  const auto src = path.string();

  std::vector<SampleRecord> records;
  std::unordered_set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(src, line, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(src, line, "record must be a JSON object");

    SampleRecord r;
    r.id = required_string(j, "id", src, line);
    const auto cat = required_string(j, "category", src, line);
    auto parsed = parse_category(cat);
    if (!parsed) throw UnknownCategoryError(src, line, "unknown category '" + cat + "'");
    r.category = *parsed;
    r.annotation_ref = resolve(base, required_string(j, "annotation_ref", src, line));
    r.feature_ref = resolve(base, required_string(j, "feature_ref", src, line));
    if (auto it = j.find("image_path"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(src, line, "image_path must be a string or null");
      r.image_path = resolve(base, it->get<std::string>());
    }
    if (!ids.insert(r.id).second) throw DuplicateIdError(r.id);
    records.push_back(std::move(r));
  }
  return DatasetManifest(std::move(records));
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : manifest.records()) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["image_path"] = r.image_path ? nlohmann::ordered_json(r.image_path->generic_string())
                                   : nlohmann::ordered_json(nullptr);
    j["category"] = std::string(category_name(r.category));
    j["annotation_ref"] = r.annotation_ref.generic_string();
    j["feature_ref"] = r.feature_ref.generic_string();
    out += j.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace poster
