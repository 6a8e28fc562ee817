#include "poster/storage.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace poster {

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32_le(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return v;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

std::string encode_feature(std::span<const float> values) {
  std::string out;
  out.reserve(kFeatureHeaderBytes + 4 * values.size());
  out.append(kFeatureMagic);
  put_u32_le(out, static_cast<std::uint32_t>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NonFiniteValueError("non-finite feature value at index " + std::to_string(i), i);
    }
    put_u32_le(out, std::bit_cast<std::uint32_t>(values[i]));
  }
  return out;
}

std::vector<float> decode_feature(std::string_view bytes, const std::string& source) {
  if (bytes.size() < kFeatureHeaderBytes) {
    throw TruncatedFileError(source + ": file shorter than the 12-byte header");
  }
  if (bytes.substr(0, kFeatureMagic.size()) != kFeatureMagic) {
    throw BadMagicError(source + ": bad magic '" + std::string(bytes.substr(0, 8)) + "'");
  }
  const std::uint64_t dim = get_u32_le(bytes, 8);
  const std::uint64_t expected = kFeatureHeaderBytes + 4 * dim;
  if (bytes.size() < expected) {
    throw TruncatedFileError(source + ": declared dim " + std::to_string(dim) + " needs " +
                             std::to_string(expected) + " bytes, file has " +
                             std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw TruncatedFileError(source + ": declared dim " + std::to_string(dim) +
                             " disagrees with file length " + std::to_string(bytes.size()));
  }
  std::vector<float> values(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    values[i] = std::bit_cast<float>(get_u32_le(bytes, kFeatureHeaderBytes + 4 * i));
    if (!std::isfinite(values[i])) {
      throw NonFiniteValueError(source + ": non-finite value at index " + std::to_string(i), i);
    }
  }
  return values;
}

void write_feature(const std::filesystem::path& path, std::span<const float> values) {
  write_file_atomic(path, encode_feature(values));
}

std::vector<float> read_feature(const std::filesystem::path& path) {
  return decode_feature(read_file(path), path.string());
}

std::string encode_annotation(const TextAnnotation& annotation) {
  nlohmann::ordered_json j;
  j["id"] = annotation.id;
  j["tokens"] = annotation.tokens;
  return j.dump() + "\n";
}

TextAnnotation decode_annotation(std::string_view text, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 0, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(source, 0, "annotation must be a JSON object");
  auto id = j.find("id");
  if (id == j.end() || !id->is_string()) throw ParseError(source, 0, "missing string key 'id'");
  auto tokens = j.find("tokens");
  if (tokens == j.end() || !tokens->is_array()) {
    throw ParseError(source, 0, "missing array key 'tokens'");
  }
  TextAnnotation a;
  a.id = id->get<std::string>();
  a.tokens.reserve(tokens->size());
  for (const auto& t : *tokens) {
    if (!t.is_string()) throw ParseError(source, 0, "tokens must be strings");
    a.tokens.push_back(t.get<std::string>());
  }
  return a;
}

void write_annotation(const std::filesystem::path& path, const TextAnnotation& annotation) {
  write_file_atomic(path, encode_annotation(annotation));
}

TextAnnotation read_annotation(const std::filesystem::path& path) {
  return decode_annotation(read_file(path), path.string());
}

TextAnnotation read_annotation(const std::filesystem::path& path, std::string_view expected_id,
                               std::optional<std::string>& warning) {
  auto a = read_annotation(path);
  if (a.id != expected_id) {
    warning = path.string() + ": annotation id '" + a.id + "' does not match record id '" +
              std::string(expected_id) + "'";
  } else {
    warning.reset();
  }
  return a;
}

}  // namespace poster
