#include "qgbc/graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

namespace qgbc {

const char* errc_name(errc c) {
  switch (c) {
    case errc::duplicate_assignment: return "DUPLICATE_ASSIGNMENT";
    case errc::dangling_endpoint: return "DANGLING_ENDPOINT";
    case errc::nonpositive_length: return "NONPOSITIVE_LENGTH";
    case errc::disconnected: return "DISCONNECTED";
    case errc::param_mismatch: return "PARAM_MISMATCH";
    case errc::no_gap: return "NO_GAP";
    case errc::mesh_bc_mismatch: return "MESH_BC_MISMATCH";
    case errc::eigensolve_fail: return "EIGENSOLVE_FAIL";
    case errc::not_positive: return "NOT_POSITIVE";
    case errc::out_of_domain: return "OUT_OF_DOMAIN";
    case errc::at_breakpoint: return "AT_BREAKPOINT";
    case errc::not_piecewise_constant: return "NOT_PIECEWISE_CONSTANT";
    case errc::a1_violation: return "A1_VIOLATION";
    case errc::a3_unbounded: return "A3_UNBOUNDED";
    case errc::a4_divergent: return "A4_DIVERGENT";
    case errc::budget_exhausted: return "BUDGET_EXHAUSTED";
    case errc::config_invalid: return "CONFIG_INVALID";
    case errc::io_error: return "IO_ERROR";
  }
  return "UNKNOWN";
}

int MetricGraph::vertex_index(const std::string& id) const {
  auto it = std::find(vertices.begin(), vertices.end(), id);
  return it == vertices.end() ? -1 : static_cast<int>(it - vertices.begin());
}

int MetricGraph::edge_index(const std::string& id) const {
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].id == id) return static_cast<int>(i);
  return -1;
}

namespace {

endpoint parse_endpoint(const std::string& s) {
  if (s == "tail") return endpoint::tail;
  if (s == "head") return endpoint::head;
  fail(errc::config_invalid, "endpoint must be \"tail\" or \"head\", got \"" + s + "\"");
}

int endpoint_vertex(const Edge& e, endpoint end) {
  return end == endpoint::tail ? e.from : e.to;
}

}  // namespace

MetricGraph build_circuit(const nlohmann::json& spec) {
  MetricGraph g;
  if (!spec.is_object() || !spec.contains("vertices") || !spec.contains("edges"))
    fail(errc::config_invalid, "graph document needs keys \"vertices\" and \"edges\"");

  for (const auto& v : spec.at("vertices")) {
    std::string id = v.get<std::string>();
    if (g.vertex_index(id) >= 0) fail(errc::config_invalid, "duplicate vertex id " + id);
    g.vertices.push_back(id);
  }

  for (const auto& ej : spec.at("edges")) {
    Edge e;
    e.id = ej.at("id").get<std::string>();
    if (g.edge_index(e.id) >= 0) fail(errc::config_invalid, "duplicate edge id " + e.id);
    e.from = g.vertex_index(ej.at("from").get<std::string>());
    e.to = g.vertex_index(ej.at("to").get<std::string>());
    if (e.from < 0 || e.to < 0) fail(errc::config_invalid, "edge " + e.id + " references unknown vertex");
    e.length = ej.at("length").get<double>();
    if (!(e.length > 0.0)) fail(errc::nonpositive_length, "edge " + e.id);
    if (ej.contains("mesh_hint")) e.mesh_hint = ej.at("mesh_hint").get<double>();
    g.edges.push_back(e);
  }
  if (g.edges.empty()) fail(errc::config_invalid, "graph has no edges");

  g.junctions.assign(g.vertices.size(), {});
  // owner[2e + side] = 0 unassigned, 1 junction, 2 exterior
  std::vector<int> owner(2 * g.edges.size(), 0);

  auto claim = [&](const EdgeEnd& ee, int kind, const std::string& where) {
    int id = 2 * ee.edge + static_cast<int>(ee.end);
    if (owner[id] != 0)
      fail(errc::duplicate_assignment, "endpoint of edge " + g.edges[ee.edge].id + " assigned twice (" + where + ")");
    owner[id] = kind;
  };

  if (spec.contains("junctions")) {
    for (const auto& [vid, list] : spec.at("junctions").items()) {
      int v = g.vertex_index(vid);
      if (v < 0) fail(errc::config_invalid, "junction references unknown vertex " + vid);
      for (const auto& item : list) {
        EdgeEnd ee;
        ee.edge = g.edge_index(item.at(0).get<std::string>());
        if (ee.edge < 0) fail(errc::config_invalid, "junction at " + vid + " references unknown edge");
        ee.end = parse_endpoint(item.at(1).get<std::string>());
        if (endpoint_vertex(g.edges[ee.edge], ee.end) != v)
          fail(errc::config_invalid, "junction at " + vid + " claims an endpoint not incident to it");
        claim(ee, 1, "junction " + vid);
        g.junctions[v].push_back(ee);
      }
      if (g.junctions[v].empty()) fail(errc::config_invalid, "junction at " + vid + " lists no endpoints");
    }
  }

  if (spec.contains("exterior")) {
    for (const auto& item : spec.at("exterior")) {
      EdgeEnd ee;
      ee.edge = g.edge_index(item.at(0).get<std::string>());
      if (ee.edge < 0) fail(errc::config_invalid, "exterior references unknown edge");
      ee.end = parse_endpoint(item.at(1).get<std::string>());
      claim(ee, 2, "exterior");
      g.exterior.push_back(ee);
    }
  }

  // Unlisted endpoints are an error, not implicitly exterior.
  for (size_t e = 0; e < g.edges.size(); ++e)
    for (int s = 0; s < 2; ++s)
      if (owner[2 * e + s] == 0)
        fail(errc::dangling_endpoint,
             "endpoint " + g.edges[e].id + "/" + (s == 0 ? "tail" : "head") +
                 " is neither in a junction nor declared exterior");

  // Connectivity of the combinatorial graph.
  std::vector<int> comp(g.vertices.size());
  std::iota(comp.begin(), comp.end(), 0);
  std::function<int(int)> find = [&](int x) { return comp[x] == x ? x : comp[x] = find(comp[x]); };
  for (const auto& e : g.edges) comp[find(e.from)] = find(e.to);
  // Vertices that are not touched by any edge do not count against connectivity.
  std::set<int> used;
  for (const auto& e : g.edges) {
    used.insert(find(e.from));
    used.insert(find(e.to));
  }
  if (used.size() > 1) fail(errc::disconnected, "graph has " + std::to_string(used.size()) + " components");

  return g;
}

BoundaryLayout boundary_index(const MetricGraph& g) {
  BoundaryLayout bl;
  bl.points.resize(2 * g.edges.size());
  for (size_t e = 0; e < g.edges.size(); ++e) {
    for (int s = 0; s < 2; ++s) {
      BoundaryLayout::Point p;
      p.edge = static_cast<int>(e);
      p.end = static_cast<endpoint>(s);
      p.junction = -1;
      bl.points[2 * e + s] = p;
    }
  }
  bl.junction_points.assign(g.vertices.size(), {});
  for (size_t v = 0; v < g.junctions.size(); ++v) {
    for (const auto& ee : g.junctions[v]) {
      int id = BoundaryLayout::point_id(ee.edge, ee.end);
      bl.points[id].junction = static_cast<int>(v);
      bl.junction_points[v].push_back(id);
    }
  }
  for (const auto& ee : g.exterior) bl.exterior_points.push_back(BoundaryLayout::point_id(ee.edge, ee.end));

  bl.junction_blocks.assign(g.vertices.size(), {0, 0});
  for (size_t v = 0; v < g.junctions.size(); ++v) {
    bl.junction_blocks[v] = {static_cast<int>(bl.block_order.size()),
                             static_cast<int>(bl.junction_points[v].size())};
    for (int id : bl.junction_points[v]) bl.block_order.push_back(id);
  }
  for (int id : bl.exterior_points) bl.block_order.push_back(id);
  return bl;
}

}  // namespace qgbc
