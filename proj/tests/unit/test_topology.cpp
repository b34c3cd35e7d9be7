#include <doctest.h>

#include <algorithm>
#include <string>

#include "gridfault/default_case.hpp"
#include "gridfault/error.hpp"
#include "gridfault/topology.hpp"

using namespace gridfault;

TEST_CASE("built-in case has the canonical shape") {
  const auto grid = ne39_case();
  CHECK(grid.bus_count() == 39);
  CHECK(grid.branches.size() == 46);
  CHECK(grid.generators.size() == 10);
  CHECK(grid.buses[grid.slack_index()].id == 31);
  REQUIRE(grid.generator_at(39).has_value());
  CHECK(grid.generators[*grid.generator_at(39)].inertia_h == doctest::Approx(50.0));
  CHECK_FALSE(grid.generator_at(15).has_value());
}

TEST_CASE("adjacency is binary, symmetric, zero-diagonal") {
  const auto adj = build_adjacency(ne39_case());
  CHECK(adj.order() == 39);
  CHECK(adj.edge_count() == 46);
  CHECK(adj.nonzero_count() == 92);
  for (std::size_t i = 0; i < 39; ++i) {
    CHECK(adj(i, i) == 0);
    for (std::size_t j = 0; j < 39; ++j) {
      CHECK(adj(i, j) == adj(j, i));
      CHECK(adj(i, j) <= 1);
    }
  }
  CHECK(adj.neighbors(0) == std::vector<std::size_t>{1, 38});
  CHECK(is_connected(adj));
}

TEST_CASE("hop distances from bus 15 match a breadth-first reference") {
  const auto adj = build_adjacency(ne39_case());
  const std::vector<int> expected{5, 4, 3, 2, 3, 4, 5, 4, 5, 3, 4, 3, 2, 1, 0, 1, 2, 3, 2, 3,
                                  2, 3, 3, 2, 5, 4, 3, 5, 5, 5, 5, 4, 3, 4, 4, 4, 6, 6, 6};
  CHECK(hop_distances(adj, 14) == expected);
  CHECK(hop_distance(adj, 14, 16) == 2);
  CHECK_THROWS_AS((void)hop_distance(adj, 14, 39), Error);

  Adjacency split(3, {{0, 1}});
  CHECK_FALSE(hop_distance(split, 0, 2).has_value());
  CHECK_FALSE(is_connected(split));
}

TEST_CASE("parallel branches collapse to one edge") {
  auto grid = ne39_case();
  grid.branches.push_back(grid.branches.front());
  auto adj = build_adjacency(grid);
  CHECK(adj.edge_count() == 46);
}

TEST_CASE("wrong bus count is a validation error naming the count") {
  std::string text(ne39_case_text());
  const auto pos = text.find("\n39 ");
  REQUIRE(pos != std::string::npos);
  const auto end = text.find('\n', pos + 1);
  text.erase(pos, end - pos);
  try {
    (void)parse_case(text);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const auto& v = e.violations();
    CHECK(std::any_of(v.begin(), v.end(), [](const std::string& s) { return s.find("expected 39 buses, found 38") != std::string::npos; }));
  }
}

TEST_CASE("malformed numbers report line and field") {
  std::string text(ne39_case_text());
  const auto pos = text.find("\nBRANCH\n") + 1;
  const auto line_start = text.find('\n', pos) + 1;
  text.insert(line_start, "1 2 abc 0.0411 0.6987\n");
  try {
    (void)parse_case(text, "broken.case");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.source() == "broken.case");
    CHECK(e.line() > 0);
    CHECK(std::string(e.what()).find("abc") != std::string::npos);
  }
}

TEST_CASE("self-loops and non-positive reactance are rejected") {
  auto grid = ne39_case();
  grid.branches[0].to = grid.branches[0].from;
  grid.branches[1].x = 0.0;
  const auto v = check_case(grid);
  CHECK(v.size() >= 2);
  CHECK_THROWS_AS(validate_case(grid), ValidationError);
}

TEST_CASE("format_case reads back to the same case") {
  const auto grid = ne39_case();
  const auto again = parse_case(format_case(grid));
  CHECK(build_adjacency(again) == build_adjacency(grid));
  CHECK(again.generators.size() == grid.generators.size());
  CHECK(again.buses[3].load_p == doctest::Approx(grid.buses[3].load_p));
}

TEST_CASE("edge-as-node transform") {
  const auto g = edge_to_node_transform(ne39_case());
  CHECK(g.original_nodes == 39);
  CHECK(g.adjacency.order() == 39 + 46);
  CHECK(g.adjacency.edge_count() == 92);
  for (std::size_t k = 39; k < g.adjacency.order(); ++k) CHECK(g.adjacency.degree(k) == 2);
  CHECK(g.edge_features.size() == 46);
  CHECK(is_connected(g.adjacency));
}
