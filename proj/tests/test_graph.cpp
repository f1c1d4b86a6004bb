#include <doctest.h>

#include "test_helpers.hpp"

using namespace qgbc;
using nlohmann::json;

TEST_CASE("interval graph: two exterior points, no junctions") {
  MetricGraph g = test::interval_graph();
  CHECK(g.edges.size() == 1);
  CHECK(g.exterior.size() == 2);
  for (const auto& j : g.junctions) CHECK(j.empty());

  BoundaryLayout bl = boundary_index(g);
  CHECK(bl.size() == 2);
  CHECK(bl.points[0].junction == -1);
  CHECK(bl.points[1].junction == -1);
}

TEST_CASE("lasso graph: junction sizes (1, 3), loop endpoints share a junction") {
  MetricGraph g = test::lasso_graph();
  CHECK(g.junctions[g.vertex_index("v1")].size() == 1);
  CHECK(g.junctions[g.vertex_index("v2")].size() == 3);
  CHECK(g.exterior.empty());

  BoundaryLayout bl = boundary_index(g);
  CHECK(bl.size() == 4);
  CHECK(bl.junction_points[g.vertex_index("v2")].size() == 3);
  size_t covered = bl.exterior_points.size();
  for (const auto& jp : bl.junction_points) covered += jp.size();
  CHECK(covered == 4);
}

TEST_CASE("build_circuit rejections") {
  json base = json::parse(R"({
    "vertices": ["v1", "v2"],
    "edges": [{"id": "e1", "from": "v1", "to": "v2", "length": 1.0}],
    "exterior": [["e1", "tail"], ["e1", "head"]]
  })");

  SUBCASE("negative length") {
    json bad = base;
    bad["edges"][0]["length"] = -1.0;
    CHECK_THROWS_WITH_AS(build_circuit(bad), doctest::Contains("NONPOSITIVE_LENGTH"), error);
  }
  SUBCASE("endpoint in two junctions") {
    json bad = base;
    bad.erase("exterior");
    bad["junctions"] = json::parse(R"({"v1": [["e1", "tail"], ["e1", "tail"]], "v2": [["e1", "head"]]})");
    CHECK_THROWS_WITH_AS(build_circuit(bad), doctest::Contains("DUPLICATE_ASSIGNMENT"), error);
  }
  SUBCASE("undeclared endpoint") {
    json bad = base;
    bad["exterior"] = json::parse(R"([["e1", "tail"]])");
    CHECK_THROWS_WITH_AS(build_circuit(bad), doctest::Contains("DANGLING_ENDPOINT"), error);
  }
  SUBCASE("disconnected") {
    json bad = json::parse(R"({
      "vertices": ["v1", "v2", "w1", "w2"],
      "edges": [
        {"id": "e1", "from": "v1", "to": "v2", "length": 1.0},
        {"id": "e2", "from": "w1", "to": "w2", "length": 1.0}
      ],
      "exterior": [["e1", "tail"], ["e1", "head"], ["e2", "tail"], ["e2", "head"]]
    })");
    CHECK_THROWS_WITH_AS(build_circuit(bad), doctest::Contains("DISCONNECTED"), error);
  }
  SUBCASE("junction at non-incident vertex") {
    json bad = base;
    bad.erase("exterior");
    bad["junctions"] = json::parse(R"({"v1": [["e1", "tail"], ["e1", "head"]]})");
    CHECK_THROWS_WITH_AS(build_circuit(bad), doctest::Contains("not incident"), error);
  }
}

TEST_CASE("boundary_index is deterministic (golden enumeration)") {
  MetricGraph g = test::two_edge_graph();
  BoundaryLayout a = boundary_index(g);
  BoundaryLayout b = boundary_index(g);
  REQUIRE(a.size() == b.size());
  CHECK(a.block_order == b.block_order);
  // Golden: edge-major, tail before head.
  CHECK(a.points[0].edge == 0);
  CHECK(a.points[0].end == endpoint::tail);
  CHECK(a.points[1].edge == 0);
  CHECK(a.points[1].end == endpoint::head);
  CHECK(a.points[2].edge == 1);
  CHECK(a.points[3].edge == 1);
  // Middle junction couples e1/head with e2/tail.
  const int m = g.vertex_index("m");
  CHECK(a.junction_points[m] == std::vector<int>{1, 2});
}

TEST_CASE("partition count: sum of blocks plus exterior equals 2|E|") {
  for (const MetricGraph& g : {test::interval_graph(), test::two_edge_graph(), test::lasso_graph()}) {
    BoundaryLayout bl = boundary_index(g);
    size_t total = bl.exterior_points.size();
    for (const auto& jp : bl.junction_points) total += jp.size();
    CHECK(total == 2 * g.edges.size());
  }
}
