#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "poster/error.hpp"

namespace poster {

struct KeywordCategory {
  std::string name;
  std::vector<std::string> keywords;
  std::size_t expected_count = 0;
};

/// Suffix -> images per keyword, in plan order.
using SuffixQuotas = std::vector<std::pair<std::string, std::uint32_t>>;

/// Per-keyword image quotas published for the party-ideology category.
const SuffixQuotas& default_suffix_quotas();

/// Published per-category keyword counts; std::nullopt for unknown names.
std::optional<std::size_t> published_keyword_count(std::string_view category);
const std::vector<std::pair<std::string, std::size_t>>& published_keyword_counts();

struct QueryPlanEntry {
  std::string category;
  std::string keyword;
  std::string suffix;
  std::uint32_t quota = 0;

  std::string query() const { return keyword + " " + suffix; }
  bool operator==(const QueryPlanEntry&) const = default;
};

struct QueryPlan {
  std::vector<QueryPlanEntry> entries;

  std::uint64_t total_budget() const;
  bool operator==(const QueryPlan&) const = default;
};

/// One entry per (keyword, suffix), ordered by category, keyword, then suffix
/// in input order. `overrides` replaces the suffix quotas for a category.
/// Throws InvalidArgument on an empty suffix set, a zero quota, or a keyword
/// repeated within or across categories.
QueryPlan generate_query_plan(std::span<const KeywordCategory> categories,
                              const SuffixQuotas& suffix_quotas,
                              const std::map<std::string, SuffixQuotas>& overrides = {});

/// RFC 4180 CSV with header `category,keyword,suffix,quota`.
std::string plan_to_csv(const QueryPlan& plan);
QueryPlan plan_from_csv(std::string_view csv, const std::string& source = "<memory>");
void export_plan(const QueryPlan& plan, const std::filesystem::path& path);
QueryPlan import_plan(const std::filesystem::path& path);

/// Reads every `*.txt` in `dir` (sorted by name) as one category named after
/// the file stem. One keyword per line; blank lines and `#` comments skipped.
std::vector<KeywordCategory> load_keyword_dir(const std::filesystem::path& dir);

/// Quota file: CSV with header `suffix,quota` or `category,suffix,quota`.
/// Rows with an empty category form the default quotas; others become
/// per-category overrides.
struct QuotaConfig {
  SuffixQuotas defaults;
  std::map<std::string, SuffixQuotas> overrides;
};
QuotaConfig parse_quota_csv(std::string_view csv, const std::string& source = "<memory>");
QuotaConfig load_quota_file(const std::filesystem::path& path);

/// CSV field splitting with quote handling; exposed for tests.
std::vector<std::vector<std::string>> parse_csv(std::string_view text, const std::string& source);
std::string csv_field(std::string_view field);

}  // namespace poster
