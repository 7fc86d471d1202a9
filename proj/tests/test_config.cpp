#include <sstream>

#include "doctest.h"
#include "turbo/config.hpp"
#include "turbo/error.hpp"

using namespace turbo;

namespace {
KeyValueConfig parse(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::parse(in);
}
}  // namespace

TEST_CASE("key value parsing") {
  const auto kv = parse(
      "# sweep\n"
      "sizes = 256, 1024\n"
      "\n"
      "distributions = normal, stable(1.5, 0), stable(1.0)   # heavy tails\n"
      "allow_large = true\n"
      "seed = 42\n"
      "lr = 0.05\n");
  CHECK(kv.get_counts("sizes") == std::vector<std::size_t>{256, 1024});
  CHECK(kv.get_list("distributions") == std::vector<std::string>{"normal", "stable(1.5, 0)", "stable(1.0)"});
  CHECK(kv.get_bool("allow_large", false));
  CHECK(kv.get_u64("seed", 0) == 42);
  CHECK(kv.get_real("lr", 0.0) == 0.05);
  CHECK(kv.get_count("batch", 32) == 32);
  CHECK(kv.line_of("seed") == 6);
  CHECK(kv.with_prefix("dist").size() == 1);
}

TEST_CASE("key value errors name the line") {
  auto line_of_error = [](const std::string& text, auto&& use) -> std::size_t {
    try {
      use(parse(text));
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(line_of_error("a = 1\nno equals here\n", [](const auto&) {}) == 2);
  CHECK(line_of_error("a = 1\na = 2\n", [](const auto&) {}) == 2);
  CHECK(line_of_error("\n\nsteps = many\n", [](const auto& kv) { kv.get_count("steps", 1); }) == 3);
  CHECK(line_of_error("flag = maybe\n", [](const auto& kv) { kv.get_bool("flag", false); }) == 1);
  CHECK(line_of_error("x = 1\ntypo = 2\n", [](const auto& kv) { kv.reject_unknown({"x"}); }) == 2);
  CHECK(line_of_error("sizes = 1, , 2x\n", [](const auto& kv) { kv.get_counts("sizes"); }) == 1);
}

TEST_CASE("list splitting respects parentheses") {
  CHECK(split_list("a,(b,c), d ") == std::vector<std::string>{"a", "(b,c)", "d"});
  CHECK(split_list("").empty());
}
