#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace turbo {

/// Plain-text configuration:
///
///   # comment
///   key = value
///   list_key = a, b, stable(1.5, 0)
///
/// Keys are case-sensitive, duplicates are an error, and list items are split
/// on commas outside parentheses. All accessors throw ParseError carrying the
/// line of the offending entry.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  /// Line the key was defined on, 0 if absent.
  std::size_t line_of(std::string_view key) const;

  std::string get_string(std::string_view key) const;
  std::string get_string(std::string_view key, std::string fallback) const;
  std::vector<std::string> get_list(std::string_view key) const;

  std::size_t get_count(std::string_view key, std::size_t fallback) const;
  std::vector<std::size_t> get_counts(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  std::vector<std::uint64_t> get_u64s(std::string_view key) const;
  double get_real(std::string_view key, double fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;

  /// Keys starting with `prefix`, with the prefix stripped.
  std::map<std::string, std::string> with_prefix(std::string_view prefix) const;

  /// Throws ParseError for the first key not in `known` and not starting
  /// with one of `known_prefixes`.
  void reject_unknown(const std::vector<std::string_view>& known,
                      const std::vector<std::string_view>& known_prefixes = {}) const;

  /// Directory of the loaded file, used to resolve relative paths.
  const std::filesystem::path& base_dir() const noexcept { return base_dir_; }

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  const Entry& entry(std::string_view key) const;

  std::map<std::string, Entry, std::less<>> entries_;
  std::filesystem::path base_dir_;
};

/// Splits on commas at parenthesis depth 0 and trims each item.
std::vector<std::string> split_list(std::string_view text);

}  // namespace turbo
