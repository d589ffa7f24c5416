#pragma once

// Polynomial file formats: a single-line JSON array of 256 decimal integers,
// or 1024 bytes of little-endian 32-bit words.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "field.hpp"

namespace bsntt {

enum class PolyFormat { Json, Binary };

class poly_format_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

[[nodiscard]] inline std::string poly_to_json(const Poly& a) {
  nlohmann::json j = nlohmann::json::array();
  for (auto c : a) j.push_back(c);
  return j.dump();
}

[[nodiscard]] inline std::string poly_to_binary(const Poly& a) {
  std::string out(kN * 4, '\0');
  for (std::size_t i = 0; i < kN; ++i) {
    for (std::size_t b = 0; b < 4; ++b)
      out[4 * i + b] = static_cast<char>((a[i] >> (8 * b)) & 0xFF);
  }
  return out;
}

[[nodiscard]] inline std::string serialize_poly(const Poly& a, PolyFormat fmt) {
  return fmt == PolyFormat::Json ? poly_to_json(a) : poly_to_binary(a);
}

[[nodiscard]] inline Poly poly_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != kN)
    throw poly_format_error("polynomial must be a JSON array of 256 integers");
  Poly a{};
  for (std::size_t i = 0; i < kN; ++i) {
    if (!j[i].is_number_unsigned() && !(j[i].is_number_integer() && j[i].get<std::int64_t>() >= 0))
      throw poly_format_error("coefficient " + std::to_string(i) + " is not a non-negative integer");
    const auto v = j[i].get<std::uint64_t>();
    if (v >= kQ)
      throw poly_format_error("coefficient " + std::to_string(i) + " is not reduced mod q");
    a[i] = static_cast<std::uint32_t>(v);
  }
  return a;
}

[[nodiscard]] inline Poly poly_from_binary(std::string_view bytes) {
  if (bytes.size() != kN * 4)
    throw poly_format_error("binary polynomial must be exactly 1024 bytes");
  Poly a{};
  for (std::size_t i = 0; i < kN; ++i) {
    std::uint32_t v = 0;
    for (std::size_t b = 0; b < 4; ++b)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
    if (v >= kQ)
      throw poly_format_error("coefficient " + std::to_string(i) + " is not reduced mod q");
    a[i] = v;
  }
  return a;
}

/// Accepts either format. Text starting with '[' is parsed as JSON; anything
/// else must be the 1024-byte binary form.
[[nodiscard]] inline Poly parse_poly(std::string_view content) {
  std::size_t first = 0;
  while (first < content.size() &&
         (content[first] == ' ' || content[first] == '\n' || content[first] == '\r' ||
          content[first] == '\t'))
    ++first;
  if (first < content.size() && content[first] == '[') {
    auto j = nlohmann::json::parse(content.begin(), content.end(), nullptr, false);
    if (!j.is_discarded()) return poly_from_json(j);
    if (content.size() != kN * 4) throw poly_format_error("malformed JSON polynomial");
  }
  return poly_from_binary(content);
}

[[nodiscard]] inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes to a sibling temporary and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view data) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

[[nodiscard]] inline Poly load_poly(const std::filesystem::path& path) {
  return parse_poly(read_file(path));
}

}  // namespace bsntt
