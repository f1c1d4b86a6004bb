#pragma once

#include <nlohmann/json.hpp>

#include "qgbc/control.hpp"

namespace qgbc::test {

// Single edge of unit length, both endpoints exterior (Dirichlet interval).
inline MetricGraph interval_graph(double length = 1.0) {
  nlohmann::json doc = nlohmann::json::parse(R"({
    "vertices": ["v1", "v2"],
    "edges": [{"id": "e1", "from": "v1", "to": "v2", "length": 1.0}],
    "junctions": {},
    "exterior": [["e1", "tail"], ["e1", "head"]]
  })");
  doc["edges"][0]["length"] = length;
  return build_circuit(doc);
}

// Two unit edges joined at a middle vertex, exterior at the far ends.
inline MetricGraph two_edge_graph() {
  return build_circuit(nlohmann::json::parse(R"({
    "vertices": ["a", "m", "b"],
    "edges": [
      {"id": "e1", "from": "a", "to": "m", "length": 1.0},
      {"id": "e2", "from": "m", "to": "b", "length": 1.0}
    ],
    "junctions": {"m": [["e1", "head"], ["e2", "tail"]]},
    "exterior": [["e1", "tail"], ["e2", "head"]]
  })"));
}

// Pendant edge into a loop: e1 from v1 to v2, e2 a loop at v2. Junction sizes
// are 1 at v1 and 3 at v2; no exterior points.
inline MetricGraph lasso_graph() {
  return build_circuit(nlohmann::json::parse(R"({
    "vertices": ["v1", "v2"],
    "edges": [
      {"id": "e1", "from": "v1", "to": "v2", "length": 1.0},
      {"id": "e2", "from": "v2", "to": "v2", "length": 1.0}
    ],
    "junctions": {
      "v1": [["e1", "tail"]],
      "v2": [["e1", "head"], ["e2", "tail"], ["e2", "head"]]
    },
    "exterior": []
  })"));
}

inline double frob(const MatrixXcd& A) { return A.norm(); }

}  // namespace qgbc::test
