#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poster/datamodel.hpp"
#include "poster/error.hpp"

namespace poster {

/// Appearance feature file layout:
///   bytes 0..7   magic "AVEC0001"
///   bytes 8..11  dim, uint32 little-endian
///   then dim IEEE-754 binary32 values, little-endian
inline constexpr std::string_view kFeatureMagic = "AVEC0001";
inline constexpr std::size_t kFeatureHeaderBytes = 12;

class BadMagicError : public Error {
 public:
  using Error::Error;
};

class TruncatedFileError : public Error {
 public:
  using Error::Error;
};

class NonFiniteValueError : public Error {
 public:
  NonFiniteValueError(const std::string& what, std::size_t index)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Replaces `path` with `bytes` via write-to-temp then rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

std::string encode_feature(std::span<const float> values);
std::vector<float> decode_feature(std::string_view bytes, const std::string& source = "<memory>");

void write_feature(const std::filesystem::path& path, std::span<const float> values);
std::vector<float> read_feature(const std::filesystem::path& path);

std::string encode_annotation(const TextAnnotation& annotation);
TextAnnotation decode_annotation(std::string_view text, const std::string& source = "<memory>");

void write_annotation(const std::filesystem::path& path, const TextAnnotation& annotation);
TextAnnotation read_annotation(const std::filesystem::path& path);

/// Reads an annotation and compares its id with the referencing record.
/// A mismatch is not fatal; the message is returned in `warning`.
TextAnnotation read_annotation(const std::filesystem::path& path, std::string_view expected_id,
                               std::optional<std::string>& warning);

}  // namespace poster
