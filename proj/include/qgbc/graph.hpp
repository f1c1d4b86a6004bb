#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qgbc/errors.hpp"

namespace qgbc {

// Which end of an edge a boundary point sits on. Edges carry an orientation
// only to fix the coordinate chart [0, length]; couplings never depend on it.
enum class endpoint : int { tail = 0, head = 1 };

struct Edge {
  std::string id;
  int from = -1;  // vertex index
  int to = -1;
  double length = 0.0;
  double mesh_hint = 0.0;  // 0 = none
};

// An edge endpoint, the atom of the boundary partition.
struct EdgeEnd {
  int edge = -1;
  endpoint end = endpoint::tail;
  friend bool operator==(const EdgeEnd&, const EdgeEnd&) = default;
};

// A metric graph together with the partition of its 2|E| edge endpoints into
// junctions (one per participating vertex) and an exterior set. Immutable
// after build_circuit; safe to share across threads.
struct MetricGraph {
  std::vector<std::string> vertices;
  std::vector<Edge> edges;
  // junctions[v] lists the endpoints coupled at vertex v, in declaration
  // order; empty when v carries no junction.
  std::vector<std::vector<EdgeEnd>> junctions;
  std::vector<EdgeEnd> exterior;

  int vertex_index(const std::string& id) const;
  int edge_index(const std::string& id) const;
};

// Flat enumeration of boundary points. Point ids are edge-major: the point of
// edge e at its tail is 2e, at its head 2e+1. Junction blocks are exposed as
// contiguous ranges of a separate block ordering (junctions by vertex index,
// then the exterior).
struct BoundaryLayout {
  struct Point {
    int edge = -1;
    endpoint end = endpoint::tail;
    int junction = -1;  // vertex index, or -1 for exterior
  };
  std::vector<Point> points;                    // index = point id = 2*edge + side
  std::vector<std::vector<int>> junction_points;  // per vertex: point ids in junction order
  std::vector<int> exterior_points;
  std::vector<int> block_order;                 // permutation of point ids
  std::vector<std::pair<int, int>> junction_blocks;  // per vertex: (begin, count) into block_order

  int size() const { return static_cast<int>(points.size()); }
  static int point_id(int edge, endpoint end) { return 2 * edge + static_cast<int>(end); }
};

// Validates and builds a metric graph from its JSON description. Rejects
// endpoint double-assignment, undeclared endpoints, nonpositive lengths and
// disconnected graphs.
MetricGraph build_circuit(const nlohmann::json& spec);

// Deterministic boundary enumeration for a valid graph.
BoundaryLayout boundary_index(const MetricGraph& g);

}  // namespace qgbc
