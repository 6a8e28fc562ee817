#include "poster/vocab.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "poster/error.hpp"
#include "poster/storage.hpp"

namespace poster {

namespace {

bool is_word_byte(unsigned char c) noexcept {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(std::span<const std::string> raw_tokens) {
  std::vector<std::string> out;
  for (const auto& raw : raw_tokens) {
    std::string current;
    for (unsigned char c : raw) {
      if (is_word_byte(c)) {
        current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                               : static_cast<char>(c));
      } else if (!current.empty()) {
        out.push_back(std::move(current));
        current.clear();
      }
    }
    if (!current.empty()) out.push_back(std::move(current));
  }
  return out;
}

std::vector<std::string> tokenize(const TextAnnotation& annotation) {
  return tokenize(std::span<const std::string>(annotation.tokens));
}

WordHistogram::WordHistogram(std::size_t cap) : cap_(cap) {
  if (cap == 0) throw InvalidArgument("histogram cap must be at least 1");
}

void WordHistogram::add(const std::string& word, std::uint64_t times) {
  if (times == 0) return;
  if (auto it = counts_.find(word); it != counts_.end()) {
    it->second += times;
  } else if (counts_.size() < cap_) {
    counts_.emplace(word, times);
  } else {
    ++overflow_dropped_;
    return;
  }
  total_ += times;
}

void WordHistogram::add(const TextAnnotation& annotation) {
  for (const auto& w : tokenize(annotation)) add(w);
}

void WordHistogram::merge(const WordHistogram& other) {
  // Iterate in sorted order so overflow behaviour does not depend on hash layout.
  std::vector<const std::pair<const std::string, std::uint64_t>*> entries;
  entries.reserve(other.counts_.size());
  for (const auto& kv : other.counts_) entries.push_back(&kv);
  std::sort(entries.begin(), entries.end(), [](auto* a, auto* b) { return a->first < b->first; });
  for (const auto* kv : entries) add(kv->first, kv->second);
  overflow_dropped_ += other.overflow_dropped_;
}

std::uint64_t WordHistogram::count(const std::string& word) const {
  auto it = counts_.find(word);
  return it == counts_.end() ? 0 : it->second;
}

WordHistogram build_histogram(std::span<const TextAnnotation> annotations, std::size_t cap) {
  WordHistogram h(cap);
  for (const auto& a : annotations) h.add(a);
  return h;
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts)
    : words_(std::move(words)), counts_(std::move(counts)) {
  if (words_.size() != counts_.size()) {
    throw InvalidArgument("vocabulary words and counts differ in length");
  }
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], i).second) {
      throw InvalidArgument("duplicate vocabulary word '" + words_[i] + "'");
    }
  }
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary truncate_top_k(const WordHistogram& histogram, std::size_t n) {
  if (n == 0) throw InvalidArgument("vocabulary size must be at least 1");
  using Entry = std::pair<const std::string*, std::uint64_t>;
  std::vector<Entry> entries;
  entries.reserve(histogram.distinct());
  for (const auto& [word, count] : histogram.counts()) entries.emplace_back(&word, count);

  auto before = [](const Entry& a, const Entry& b) {
    if (a.second != b.second) return a.second > b.second;
    return *a.first < *b.first;
  };
  const auto keep = std::min(n, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    entries.end(), before);

  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  words.reserve(keep);
  counts.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    words.push_back(*entries[i].first);
    counts.push_back(entries[i].second);
  }
  return Vocabulary(std::move(words), std::move(counts));
}

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out += vocab.words()[i];
    out += '\t';
    out += std::to_string(vocab.source_counts()[i]);
    out += '\n';
  }
  write_file_atomic(path, out);
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary " + path.string());
  const auto src = path.string();

  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(src, lineno, "expected 'word<TAB>count'");
    }
    std::uint64_t count = 0;
    const char* first = line.data() + tab + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, count);
    if (ec != std::errc() || ptr != last || first == last) {
      throw ParseError(src, lineno, "bad count '" + line.substr(tab + 1) + "'");
    }
    auto word = line.substr(0, tab);
    if (!seen.emplace(word, lineno).second) {
      throw ParseError(src, lineno, "duplicate word '" + word + "'");
    }
    words.push_back(std::move(word));
    counts.push_back(count);
  }
  return Vocabulary(std::move(words), std::move(counts));
}

}  // namespace poster
