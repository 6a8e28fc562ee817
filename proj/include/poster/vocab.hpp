#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "poster/datamodel.hpp"

namespace poster {

inline constexpr std::size_t kDefaultHistogramCap = 500'000;
inline constexpr std::size_t kDefaultVocabSize = 3000;

/// Lowercases ASCII letters and splits on every ASCII character that is not
/// a letter or digit. Bytes >= 0x80 are kept so UTF-8 words survive intact.
std::vector<std::string> tokenize(std::span<const std::string> raw_tokens);
std::vector<std::string> tokenize(const TextAnnotation& annotation);

/// Corpus word counts bounded to `cap` distinct words. Once the cap is hit,
/// unseen words are dropped (and tallied) while known words keep counting.
class WordHistogram {
 public:
  explicit WordHistogram(std::size_t cap = kDefaultHistogramCap);

  /// Counts one already-normalized token.
  void add(const std::string& word, std::uint64_t times = 1);
  /// Tokenizes and counts every token of the annotation.
  void add(const TextAnnotation& annotation);

  /// Commutative merge for sharded builds. Only commutative while the
  /// combined distinct-word count stays within the cap.
  void merge(const WordHistogram& other);

  std::size_t cap() const noexcept { return cap_; }
  std::size_t distinct() const noexcept { return counts_.size(); }
  std::uint64_t overflow_dropped() const noexcept { return overflow_dropped_; }
  std::uint64_t total_tokens() const noexcept { return total_; }
  std::uint64_t count(const std::string& word) const;
  const std::unordered_map<std::string, std::uint64_t>& counts() const noexcept { return counts_; }

 private:
  std::size_t cap_;
  std::uint64_t overflow_dropped_ = 0;
  std::uint64_t total_ = 0;
  std::unordered_map<std::string, std::uint64_t> counts_;
};

WordHistogram build_histogram(std::span<const TextAnnotation> annotations,
                              std::size_t cap = kDefaultHistogramCap);

/// Ordered top-n word list. Position in `words()` is the text-vector index.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// Throws InvalidArgument on duplicate words or size mismatch.
  Vocabulary(std::vector<std::string> words, std::vector<std::uint64_t> counts);

  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::vector<std::uint64_t>& source_counts() const noexcept { return counts_; }
  std::optional<std::size_t> index_of(std::string_view word) const;

  bool operator==(const Vocabulary& other) const {
    return words_ == other.words_ && counts_ == other.counts_;
  }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
};

/// Keeps the min(n, distinct) most frequent words: count descending, then
/// word ascending (bytewise).
Vocabulary truncate_top_k(const WordHistogram& histogram, std::size_t n);

/// One `word<TAB>count` line per entry, in index order.
void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace poster
