#include "core/kvfile.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "core/binary_io.hpp"
#include "core/error.hpp"

namespace radarcal {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    fail(Errc::parse, std::string(what) + ": not a number: '" + std::string(text) + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  text = trim(text);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    fail(Errc::parse, std::string(what) + ": not a non-negative integer: '" + std::string(text) + "'");
  return v;
}

KeyValueFile KeyValueFile::parse(std::string_view text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(Errc::parse, origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) fail(Errc::parse, origin + ":" + std::to_string(line_no) + ": empty key");
    if (!kv.entries_.emplace(key, value).second)
      fail(Errc::parse, origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  return parse(io::read_text_file(path), path.string());
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

double KeyValueFile::get_double(const std::string& key) const {
  auto v = get(key);
  if (!v) fail(Errc::malformed, origin_ + ": missing key '" + key + "'");
  return parse_double(*v, key);
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  return contains(key) ? get_double(key) : fallback;
}

std::uint32_t KeyValueFile::get_u32(const std::string& key) const {
  auto v = get(key);
  if (!v) fail(Errc::malformed, origin_ + ": missing key '" + key + "'");
  auto n = parse_u64(*v, key);
  if (n > std::numeric_limits<std::uint32_t>::max()) fail(Errc::out_of_range, key + ": value too large");
  return static_cast<std::uint32_t>(n);
}

std::uint32_t KeyValueFile::get_u32(const std::string& key, std::uint32_t fallback) const {
  return contains(key) ? get_u32(key) : fallback;
}

std::uint64_t KeyValueFile::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto v = get(key);
  return v ? parse_u64(*v, key) : fallback;
}

void KeyValueFile::unknown_key(const std::string& key) const {
  fail(Errc::malformed, origin_ + ": unknown key '" + key + "'");
}

}  // namespace radarcal
