#include "traj_atlas/topo_graph.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "traj_atlas/error.hpp"

namespace traj_atlas {

std::string to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Start: return "start";
    case NodeKind::End: return "end";
    case NodeKind::Crossover: return "crossover";
    case NodeKind::Decision: return "decision";
    case NodeKind::Unclassified: break;
  }
  return "unclassified";
}

NodeKind node_kind_from_string(const std::string& s) {
  if (s == "start") return NodeKind::Start;
  if (s == "end") return NodeKind::End;
  if (s == "crossover") return NodeKind::Crossover;
  if (s == "decision") return NodeKind::Decision;
  if (s == "unclassified") return NodeKind::Unclassified;
  throw ParseError("unknown node kind '" + s + "'");
}

void TopoGraph::add_node(Node n) {
  if (!nodes_.emplace(n.id, n).second) throw ValidationError("duplicate node id " + std::to_string(n.id));
  out_[n.id];
  in_[n.id];
}

void TopoGraph::add_edge(Edge e) {
  if (!has_node(e.from) || !has_node(e.to)) throw ValidationError("edge " + std::to_string(e.id) + " references missing node");
  if (e.polyline.size() < 2) throw ValidationError("edge " + std::to_string(e.id) + " needs >= 2 polyline points");
  e.length = arc_length(e.polyline);
  const int id = e.id, from = e.from, to = e.to;
  if (!edges_.emplace(id, std::move(e)).second) throw ValidationError("duplicate edge id " + std::to_string(id));
  auto& o = out_[from];
  o.insert(std::upper_bound(o.begin(), o.end(), id), id);
  auto& i = in_[to];
  i.insert(std::upper_bound(i.begin(), i.end(), id), id);
}

void TopoGraph::remove_edge(int id) {
  const auto it = edges_.find(id);
  if (it == edges_.end()) return;
  auto& o = out_[it->second.from];
  o.erase(std::remove(o.begin(), o.end(), id), o.end());
  auto& i = in_[it->second.to];
  i.erase(std::remove(i.begin(), i.end(), id), i.end());
  edges_.erase(it);
}

void TopoGraph::remove_node(int id) {
  if (!out_[id].empty() || !in_[id].empty()) throw ValidationError("node " + std::to_string(id) + " still has edges");
  nodes_.erase(id);
  out_.erase(id);
  in_.erase(id);
}

const Node& TopoGraph::node(int id) const {
  const auto it = nodes_.find(id);
  if (it == nodes_.end()) throw ValidationError("no node " + std::to_string(id));
  return it->second;
}
Node& TopoGraph::node(int id) { return const_cast<Node&>(std::as_const(*this).node(id)); }

const Edge& TopoGraph::edge(int id) const {
  const auto it = edges_.find(id);
  if (it == edges_.end()) throw ValidationError("no edge " + std::to_string(id));
  return it->second;
}
Edge& TopoGraph::edge(int id) { return const_cast<Edge&>(std::as_const(*this).edge(id)); }

std::vector<int> TopoGraph::out_edges(int node) const {
  const auto it = out_.find(node);
  return it == out_.end() ? std::vector<int>{} : it->second;
}

std::vector<int> TopoGraph::in_edges(int node) const {
  const auto it = in_.find(node);
  return it == in_.end() ? std::vector<int>{} : it->second;
}

void TopoGraph::validate() const {
  for (const auto& [id, e] : edges_) {
    if (!has_node(e.from) || !has_node(e.to)) throw ValidationError("edge " + std::to_string(id) + " dangles");
    if (distance(e.polyline.front(), node(e.from).pos) > 1e-9 || distance(e.polyline.back(), node(e.to).pos) > 1e-9)
      throw ValidationError("edge " + std::to_string(id) + " polyline not anchored at its nodes");
    if (e.traversal_count < 0) throw ValidationError("negative traversal count");
  }
}

void to_json(nlohmann::json& j, const TopoGraph& g) {
  j = nlohmann::json::object();
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const auto& [id, n] : g.nodes())
    nodes.push_back({{"id", id}, {"x_m", n.pos.x}, {"y_m", n.pos.y}, {"kind", to_string(n.kind)}});
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& [id, e] : g.edges()) {
    nlohmann::json poly = nlohmann::json::array();
    for (const auto& p : e.polyline) poly.push_back({p.x, p.y});
    edges.push_back({{"id", id}, {"from", e.from}, {"to", e.to}, {"polyline", std::move(poly)},
                     {"traversal_count", e.traversal_count}});
  }
}

void from_json(const nlohmann::json& j, TopoGraph& g) {
  g = TopoGraph{};
  try {
    for (const auto& n : j.at("nodes"))
      g.add_node({n.at("id").get<int>(), {n.at("x_m").get<double>(), n.at("y_m").get<double>()},
                  node_kind_from_string(n.at("kind").get<std::string>())});
    for (const auto& e : j.at("edges")) {
      Edge edge;
      edge.id = e.at("id").get<int>();
      edge.from = e.at("from").get<int>();
      edge.to = e.at("to").get<int>();
      for (const auto& p : e.at("polyline")) edge.polyline.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      edge.traversal_count = e.value("traversal_count", 0);
      g.add_edge(std::move(edge));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("graph json: ") + ex.what());
  }
}

}  // namespace traj_atlas
