#include "turbo/config.hpp"

#include <charconv>
#include <fstream>

#include "turbo/error.hpp"

namespace turbo {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename Int>
Int parse_int(const std::string& text, std::string_view key, std::size_t line) {
  Int v{};
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ParseError("'" + std::string(key) + "' expects a non-negative integer, got '" + text + "'", line);
  }
  return v;
}

}  // namespace

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> items;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || (text[i] == ',' && depth == 0)) {
      std::string item = trim(text.substr(start, i - start));
      if (!item.empty()) items.push_back(std::move(item));
      start = i + 1;
    } else if (text[i] == '(') {
      ++depth;
    } else if (text[i] == ')') {
      --depth;
    }
  }
  return items;
}

KeyValueConfig KeyValueConfig::parse(std::istream& in) {
  KeyValueConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (cfg.entries_.count(key) != 0) throw ParseError("duplicate key '" + key + "'", line_no);
    cfg.entries_.emplace(std::move(key), Entry{std::move(value), line_no});
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string(), 0);
  KeyValueConfig cfg = parse(in);
  cfg.base_dir_ = path.parent_path();
  return cfg;
}

bool KeyValueConfig::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::size_t KeyValueConfig::line_of(std::string_view key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

const KeyValueConfig::Entry& KeyValueConfig::entry(std::string_view key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ParseError("missing required key '" + std::string(key) + "'", 0);
  return it->second;
}

std::string KeyValueConfig::get_string(std::string_view key) const { return entry(key).value; }

std::string KeyValueConfig::get_string(std::string_view key, std::string fallback) const {
  return has(key) ? entry(key).value : fallback;
}

std::vector<std::string> KeyValueConfig::get_list(std::string_view key) const {
  const Entry& e = entry(key);
  auto items = split_list(e.value);
  if (items.empty()) throw ParseError("'" + std::string(key) + "' must not be empty", e.line);
  return items;
}

std::size_t KeyValueConfig::get_count(std::string_view key, std::size_t fallback) const {
  if (!has(key)) return fallback;
  const Entry& e = entry(key);
  return parse_int<std::size_t>(e.value, key, e.line);
}

std::vector<std::size_t> KeyValueConfig::get_counts(std::string_view key) const {
  std::vector<std::size_t> out;
  for (const auto& item : get_list(key)) out.push_back(parse_int<std::size_t>(item, key, line_of(key)));
  return out;
}

std::uint64_t KeyValueConfig::get_u64(std::string_view key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const Entry& e = entry(key);
  return parse_int<std::uint64_t>(e.value, key, e.line);
}

std::vector<std::uint64_t> KeyValueConfig::get_u64s(std::string_view key) const {
  std::vector<std::uint64_t> out;
  for (const auto& item : get_list(key)) out.push_back(parse_int<std::uint64_t>(item, key, line_of(key)));
  return out;
}

double KeyValueConfig::get_real(std::string_view key, double fallback) const {
  if (!has(key)) return fallback;
  const Entry& e = entry(key);
  double v = 0.0;
  auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (res.ec != std::errc{} || res.ptr != e.value.data() + e.value.size()) {
    throw ParseError("'" + std::string(key) + "' expects a number, got '" + e.value + "'", e.line);
  }
  return v;
}

bool KeyValueConfig::get_bool(std::string_view key, bool fallback) const {
  if (!has(key)) return fallback;
  const Entry& e = entry(key);
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  throw ParseError("'" + std::string(key) + "' expects true or false, got '" + e.value + "'", e.line);
}

std::map<std::string, std::string> KeyValueConfig::with_prefix(std::string_view prefix) const {
  std::map<std::string, std::string> out;
  for (const auto& [key, e] : entries_) {
    if (key.size() > prefix.size() && key.compare(0, prefix.size(), prefix) == 0) {
      out.emplace(key.substr(prefix.size()), e.value);
    }
  }
  return out;
}

void KeyValueConfig::reject_unknown(const std::vector<std::string_view>& known,
                                    const std::vector<std::string_view>& known_prefixes) const {
  for (const auto& [key, e] : entries_) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    for (auto p : known_prefixes) ok = ok || key.rfind(p, 0) == 0;
    if (!ok) throw ParseError("unknown key '" + key + "'", e.line);
  }
}

}  // namespace turbo
