#pragma once

// Little-endian primitives and whole-file helpers shared by the RDC1/RAP1 codecs
// and the text formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace radarcal::io {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T byteswap_if_big(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  v = byteswap_if_big(v);
  const auto* p = reinterpret_cast<const unsigned char*>(&v);
  out.insert(out.end(), p, p + 4);
}

inline void put_f32(std::vector<unsigned char>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline void put_f64(std::vector<unsigned char>& out, double v) {
  auto bits = byteswap_if_big(std::bit_cast<std::uint64_t>(v));
  const auto* p = reinterpret_cast<const unsigned char*>(&bits);
  out.insert(out.end(), p, p + 8);
}

inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return byteswap_if_big(v);
}

inline float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

inline double get_f64(const unsigned char* p) {
  std::uint64_t v;
  std::memcpy(&v, p, 8);
  return std::bit_cast<double>(byteswap_if_big(v));
}

std::vector<unsigned char> read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

/// Writes via a sibling temporary and renames, so a failed write never leaves a
/// partial file under the final name.
void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes);
void write_text_file_atomic(const std::filesystem::path& path, const std::string& text);

/// Shortest text that parses back to the same double (`general` format).
std::string format_double(double v);
/// printf("%.*g") equivalent, locale independent.
std::string format_double(double v, int significant_digits);

}  // namespace radarcal::io
