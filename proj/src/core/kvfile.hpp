#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace radarcal {

/// Flat `key = value` text. Blank lines and lines starting with '#' are ignored.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text, const std::string& origin = "<string>");
  static KeyValueFile load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint32_t get_u32(const std::string& key) const;
  std::uint32_t get_u32(const std::string& key, std::uint32_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  /// Throws if any key is neither listed nor accepted by `extra`.
  template <typename Pred>
  void reject_unknown(Pred&& accepted) const {
    for (const auto& [k, v] : entries_)
      if (!accepted(k)) unknown_key(k);
  }

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  [[noreturn]] void unknown_key(const std::string& key) const;

  std::string origin_;
  std::map<std::string, std::string> entries_;
};

double parse_double(std::string_view text, std::string_view what);
std::uint64_t parse_u64(std::string_view text, std::string_view what);
std::string_view trim(std::string_view s);

}  // namespace radarcal
