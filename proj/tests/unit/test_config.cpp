#include <doctest.h>

#include <filesystem>

#include "gridfault/config.hpp"
#include "gridfault/error.hpp"
#include "gridfault/io.hpp"

using namespace gridfault;

TEST_CASE("defaults are valid and round-trip through text") {
  const RunConfig def;
  CHECK(check_config(def).empty());
  const auto text = format_config(def);
  const auto back = parse_config(text);
  CHECK(format_config(back) == text);
  CHECK(back.clearing_times == def.clearing_times);
  CHECK(back.widths == def.widths);
  CHECK(back.verify_seeds == def.verify_seeds);
}

TEST_CASE("values are read by section") {
  const auto c = parse_config(R"(
# comment
[model]
seed = 11
epochs = 3   # trailing
widths = 10, 6, 6, 6, 1
normalize_adjacency = true
[analysis]
override.16 = 0.5, 0.25, 0.25
)");
  CHECK(c.seed == 11);
  CHECK(c.epochs == 3);
  CHECK(c.widths == std::vector<int>{10, 6, 6, 6, 1});
  CHECK(c.normalize_adjacency);
  REQUIRE(c.fusion_overrides.count(16) == 1);
  CHECK(c.fusion_overrides.at(16).feature == 0.5);
  CHECK(parse_config(format_config(c)).fusion_overrides.at(16).time == 0.25);
}

TEST_CASE("unknown keys and bad values are parse errors with a line number") {
  try {
    parse_config("[model]\nseed = 1\nspeed = 2\n", "x.ini");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.field() == "model.speed");
    CHECK(e.source() == "x.ini");
  }
  CHECK_THROWS_AS(parse_config("[model]\nepochs = many\n"), ParseError);
  CHECK_THROWS_AS(parse_config("[model\n"), ParseError);
  CHECK_THROWS_AS(parse_config("seed\n"), ParseError);
}

TEST_CASE("invariant violations are collected") {
  try {
    parse_config("[scenario]\nhorizon = 0.5\n[analysis]\nfusion_weights = 0.5, 0.5, 0.5\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.violations().size() >= 2);
  }
  RunConfig c;
  c.window = 4;
  CHECK_FALSE(check_config(c).empty());
  c = RunConfig{};
  c.widths = {10, 4};
  CHECK_FALSE(check_config(c).empty());
}

TEST_CASE("relative case paths resolve against the config file") {
  const auto dir = std::filesystem::temp_directory_path() / "gridfault-config-test";
  std::filesystem::remove_all(dir);
  write_text(dir / "case.txt", "placeholder");
  write_text(dir / "run.ini", "[paths]\ncase = case.txt\n");
  const auto c = load_config(dir / "run.ini");
  CHECK(c.case_file == dir / "case.txt");
  write_text(dir / "missing.ini", "[paths]\ncase = nope.txt\n");
  CHECK_THROWS_AS(load_config(dir / "missing.ini"), ValidationError);
  std::filesystem::remove_all(dir);
}
