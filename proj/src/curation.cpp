#include "poster/curation.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "poster/storage.hpp"

namespace poster {

const SuffixQuotas& default_suffix_quotas() {
  static const SuffixQuotas quotas = {
      {"ad", 5}, {"poster", 20}, {"election poster", 40}, {"political poster", 40}};
  return quotas;
}

const std::vector<std::pair<std::string, std::size_t>>& published_keyword_counts() {
  static const std::vector<std::pair<std::string, std::size_t>> counts = {
      {"Popular Politicians", 39}, {"International Politicians", 338},
      {"Candidates", 1301},        {"U.S. Senators", 100},
      {"U.S. House", 433},         {"Parties Ideologies", 170},
      {"Paid for by", 34},         {"California Propositions", 17},
      {"General", 34},             {"Cartoons", 1}};
  return counts;
}

std::optional<std::size_t> published_keyword_count(std::string_view category) {
  for (const auto& [name, n] : published_keyword_counts()) {
    if (name == category) return n;
  }
  return std::nullopt;
}

std::uint64_t QueryPlan::total_budget() const {
  std::uint64_t total = 0;
  for (const auto& e : entries) total += e.quota;
  return total;
}

QueryPlan generate_query_plan(std::span<const KeywordCategory> categories,
                              const SuffixQuotas& suffix_quotas,
                              const std::map<std::string, SuffixQuotas>& overrides) {
  if (suffix_quotas.empty()) throw InvalidArgument("suffix set is empty");
  auto check = [](const SuffixQuotas& q, const std::string& where) {
    std::set<std::string> seen;
    for (const auto& [suffix, quota] : q) {
      if (quota == 0) throw InvalidArgument(where + ": quota for suffix '" + suffix + "' is 0");
      if (!seen.insert(suffix).second) throw InvalidArgument(where + ": duplicate suffix '" + suffix + "'");
    }
  };
  check(suffix_quotas, "default quotas");
  for (const auto& [cat, q] : overrides) {
    if (q.empty()) throw InvalidArgument("override for '" + cat + "' has no suffixes");
    check(q, "override for '" + cat + "'");
  }

  QueryPlan plan;
  std::map<std::string, std::string> owner;  // keyword -> category
  for (const auto& cat : categories) {
    const auto it = overrides.find(cat.name);
    const auto& quotas = it == overrides.end() ? suffix_quotas : it->second;
    for (const auto& kw : cat.keywords) {
      auto [pos, fresh] = owner.emplace(kw, cat.name);
      if (!fresh) {
        throw InvalidArgument(pos->second == cat.name
                                  ? "duplicate keyword '" + kw + "' in category '" + cat.name + "'"
                                  : "keyword '" + kw + "' appears in both '" + pos->second +
                                        "' and '" + cat.name + "'");
      }
      for (const auto& [suffix, quota] : quotas) plan.entries.push_back({cat.name, kw, suffix, quota});
    }
  }
  return plan;
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text, const std::string& source) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) throw ParseError(source, line, "stray quote inside unquoted field");
        quoted = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r': break;
      case '\n':
        if (field_started || !field.empty() || !row.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        row.clear();
        field.clear();
        field_started = false;
        ++line;
        break;
      default: field += c;
    }
  }
  if (quoted) throw ParseError(source, line, "unterminated quoted field");
  if (field_started || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string plan_to_csv(const QueryPlan& plan) {
  std::string out = "category,keyword,suffix,quota\n";
  for (const auto& e : plan.entries) {
    out += csv_field(e.category) + ',' + csv_field(e.keyword) + ',' + csv_field(e.suffix) + ',' +
           std::to_string(e.quota) + '\n';
  }
  return out;
}

namespace {

std::uint32_t parse_quota(const std::string& text, const std::string& source, std::size_t row) {
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || v == 0) {
    throw ParseError(source, row, "quota must be a positive integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

QueryPlan plan_from_csv(std::string_view csv, const std::string& source) {
  const auto rows = parse_csv(csv, source);
  if (rows.empty()) throw ParseError(source, 1, "missing header");
  if (rows[0] != std::vector<std::string>{"category", "keyword", "suffix", "quota"}) {
    throw ParseError(source, 1, "expected header category,keyword,suffix,quota");
  }
  QueryPlan plan;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 4) throw ParseError(source, r + 1, "expected 4 fields");
    plan.entries.push_back({rows[r][0], rows[r][1], rows[r][2], parse_quota(rows[r][3], source, r + 1)});
  }
  return plan;
}

void export_plan(const QueryPlan& plan, const std::filesystem::path& path) {
  write_file_atomic(path, plan_to_csv(plan));
}

QueryPlan import_plan(const std::filesystem::path& path) {
  return plan_from_csv(read_file(path), path.string());
}

std::vector<KeywordCategory> load_keyword_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<KeywordCategory> out;
  for (const auto& file : files) {
    KeywordCategory cat;
    cat.name = file.stem().string();
    const auto text = read_file(file);
    std::size_t start = 0;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(start, end - start);
      start = end + 1;
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos || line[b] == '#') continue;
      const auto e = line.find_last_not_of(" \t\r");
      cat.keywords.push_back(line.substr(b, e - b + 1));
    }
    cat.expected_count = published_keyword_count(cat.name).value_or(cat.keywords.size());
    out.push_back(std::move(cat));
  }
  return out;
}

QuotaConfig parse_quota_csv(std::string_view csv, const std::string& source) {
  const auto rows = parse_csv(csv, source);
  if (rows.empty()) throw ParseError(source, 1, "missing header");
  const bool with_category = rows[0] == std::vector<std::string>{"category", "suffix", "quota"};
  if (!with_category && rows[0] != std::vector<std::string>{"suffix", "quota"}) {
    throw ParseError(source, 1, "expected header suffix,quota or category,suffix,quota");
  }
  const std::size_t width = with_category ? 3 : 2;
  QuotaConfig cfg;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != width) throw ParseError(source, r + 1, "expected " + std::to_string(width) + " fields");
    const std::string category = with_category ? row[0] : std::string();
    const auto& suffix = row[width - 2];
    if (suffix.empty()) throw ParseError(source, r + 1, "empty suffix");
    const auto quota = parse_quota(row[width - 1], source, r + 1);
    (category.empty() ? cfg.defaults : cfg.overrides[category]).emplace_back(suffix, quota);
  }
  return cfg;
}

QuotaConfig load_quota_file(const std::filesystem::path& path) {
  return parse_quota_csv(read_file(path), path.string());
}

}  // namespace poster
