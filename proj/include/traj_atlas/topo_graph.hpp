#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "traj_atlas/geometry.hpp"

namespace traj_atlas {

enum class NodeKind { Unclassified, Start, End, Crossover, Decision };

std::string to_string(NodeKind k);
NodeKind node_kind_from_string(const std::string& s);

struct Node {
  int id = 0;
  Vec2 pos;
  NodeKind kind = NodeKind::Unclassified;
};

// Directed edge. Edges built from one skeleton path come in twin pairs with
// ids 2k (forward) and 2k+1 (reverse); the pairing survives pruning.
struct Edge {
  int id = 0;
  int from = 0;
  int to = 0;
  std::vector<Vec2> polyline;
  double length = 0.0;
  int traversal_count = 0;
};

inline int twin_id(int edge_id) { return edge_id ^ 1; }

// G = (E, V) with stable integer ids. Iteration order is by id.
class TopoGraph {
 public:
  void add_node(Node n);
  // Recomputes `length` from the polyline.
  void add_edge(Edge e);
  void remove_edge(int id);
  void remove_node(int id);  // must be isolated

  const std::map<int, Node>& nodes() const { return nodes_; }
  const std::map<int, Edge>& edges() const { return edges_; }
  const Node& node(int id) const;
  Node& node(int id);
  const Edge& edge(int id) const;
  Edge& edge(int id);
  bool has_node(int id) const { return nodes_.count(id) != 0; }
  bool has_edge(int id) const { return edges_.count(id) != 0; }

  // Edge ids, ascending.
  std::vector<int> out_edges(int node) const;
  std::vector<int> in_edges(int node) const;

  // Checks the referential and geometric invariants; throws ValidationError.
  void validate() const;

 private:
  std::map<int, Node> nodes_;
  std::map<int, Edge> edges_;
  std::map<int, std::vector<int>> out_, in_;
};

void to_json(nlohmann::json& j, const TopoGraph& g);
void from_json(const nlohmann::json& j, TopoGraph& g);

}  // namespace traj_atlas
