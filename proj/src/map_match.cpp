#include "traj_atlas/map_match.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "traj_atlas/error.hpp"

namespace traj_atlas {

EdgeLocator::EdgeLocator(const TopoGraph& g, double max_snap_m)
    : g_(&g), snap_(max_snap_m), index_(std::max(max_snap_m, 1.0)) {
  if (!(max_snap_m > 0.0)) throw ValidationError("max_snap_m must be > 0");
  for (const auto& [id, e] : g.edges()) {
    index_.insert(ids_.size(), e.polyline);
    ids_.push_back(id);
  }
}

std::vector<EdgeLocator::Hit> EdgeLocator::near(Vec2 p) const {
  std::vector<Hit> hits;
  for (auto owner : index_.owners_near(p, snap_)) {
    const int id = ids_[owner];
    const auto proj = project_onto_polyline(p, g_->edge(id).polyline);
    if (proj.dist <= snap_) hits.push_back({id, proj.dist, proj});
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.dist != b.dist ? a.dist < b.dist : a.edge < b.edge;
  });
  return hits;
}

std::optional<EdgeLocator::Hit> EdgeLocator::aligned_nearest(Vec2 p, double heading) const {
  const auto hits = near(p);
  if (hits.empty()) return std::nullopt;
  const Vec2 dir = unit_from_heading(heading);
  const int nearest = hits.front().edge;
  for (const auto& h : hits) {
    if (h.edge != nearest && h.edge != twin_id(nearest)) continue;
    const Vec2 local = segment_direction(g_->edge(h.edge).polyline, h.proj.segment);
    if (dot(local, dir) > 0.0) return h;
  }
  return std::nullopt;
}

std::vector<EdgeLocator::Hit> EdgeLocator::aligned(Vec2 p, double heading) const {
  const Vec2 dir = unit_from_heading(heading);
  std::vector<Hit> out;
  for (auto& h : near(p))
    if (dot(segment_direction(g_->edge(h.edge).polyline, h.proj.segment), dir) > 0.0) out.push_back(std::move(h));
  return out;
}

MatchedTrajectory match_trajectory(const Trajectory& traj, const EdgeLocator& locator, const MatchOptions& opt) {
  if (!traj.has_kinematics()) throw ValidationError("match_trajectory needs derived kinematics");
  const TopoGraph& g = locator.graph();
  MatchedTrajectory m;
  m.trajectory_id = traj.id;
  m.assignments.assign(traj.size(), -1);
  int gap = 0, rejects = 0;
  auto flag = [&](std::string why) {
    m.matched = false;
    m.reason = std::move(why);
  };
  for (std::size_t i = 0; i < traj.size() && m.matched; ++i) {
    const auto hits = locator.aligned(traj.points[i].pos(), traj.heading[i]);
    if (hits.empty()) {
      if (++gap > opt.max_gap_samples) flag("no edge within snap distance");
      continue;
    }
    gap = 0;
    if (m.edge_sequence.empty()) {
      m.assignments[i] = hits.front().edge;
      m.edge_sequence.push_back(hits.front().edge);
      m.spans.emplace_back(i, i);
      continue;
    }
    const int last = m.edge_sequence.back();
    const Edge& le = g.edge(last);
    bool placed = false;
    for (const auto& h : hits) {
      const int cand = h.edge;
      const Edge& ce = g.edge(cand);
      if (cand == last) {
        m.spans.back().second = i;
      } else if (cand == twin_id(last)) {
        continue;  // heading jitter near a node, not a U-turn
      } else if (ce.from == le.to) {
        m.edge_sequence.push_back(cand);
        m.spans.emplace_back(i, i);
      } else if (ce.from == le.from) {
        // sibling branch: the earlier pick was made while both looked alike
        m.edge_sequence.back() = cand;
        m.spans.back().second = i;
      } else {
        continue;
      }
      m.assignments[i] = cand;
      placed = true;
      break;
    }
    if (placed) {
      rejects = 0;
      continue;
    }
    m.spans.back().second = i;
    if (++rejects > opt.max_gap_samples) flag("candidate edges not connected to the matched sequence");
  }
  if (m.matched && m.edge_sequence.empty()) flag("no edge within snap distance");
  return m;
}

MatchedTrajectory match_trajectory(const Trajectory& traj, const TopoGraph& g, const MatchOptions& opt) {
  return match_trajectory(traj, EdgeLocator(g, opt.max_snap_m), opt);
}

std::vector<MatchedTrajectory> match_all(std::span<const Trajectory> trajs, const TopoGraph& g,
                                         const MatchOptions& opt) {
  const EdgeLocator locator(g, opt.max_snap_m);
  std::vector<MatchedTrajectory> out(trajs.size());
  const long long n = static_cast<long long>(trajs.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long long i = 0; i < n; ++i) out[i] = match_trajectory(trajs[i], locator, opt);
  return out;
}

void write_matches(std::ostream& out, std::span<const MatchedTrajectory> matches) {
  out << "trajectory_id,seq_index,edge_id\n";
  for (const auto& m : matches) {
    if (!m.matched) continue;
    for (std::size_t k = 0; k < m.edge_sequence.size(); ++k)
      out << m.trajectory_id << ',' << k << ',' << m.edge_sequence[k] << '\n';
  }
}

bool sequence_is_valid(const TopoGraph& g, std::span<const int> seq) {
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (!g.has_edge(seq[k])) return false;
    if (k == 0) continue;
    if (seq[k] == seq[k - 1]) return false;
    if (g.edge(seq[k - 1]).to != g.edge(seq[k]).from) return false;
  }
  return true;
}

TopoGraph prune_unused_edges(const TopoGraph& g, std::span<const MatchedTrajectory> matches, PruneReport* report) {
  std::map<int, int> count;
  for (const auto& m : matches)
    if (m.matched)
      for (int e : m.edge_sequence) ++count[e];
  TopoGraph out = g;
  PruneReport rep;
  for (const auto& [id, e] : g.edges()) {
    const auto it = count.find(id);
    if (it == count.end()) {
      out.remove_edge(id);
      ++rep.removed_edges;
    } else {
      out.edge(id).traversal_count = it->second;
    }
  }
  for (const auto& [id, n] : g.nodes())
    if (out.out_edges(id).empty() && out.in_edges(id).empty()) {
      out.remove_node(id);
      ++rep.removed_nodes;
    }
  if (report) *report = rep;
  return out;
}

TransitionCounts observe_transitions(const TopoGraph& g, std::span<const MatchedTrajectory> matches) {
  TransitionCounts t;
  for (const auto& m : matches) {
    if (!m.matched || m.edge_sequence.empty()) continue;
    const auto& seq = m.edge_sequence;
    if (!g.has_edge(seq.front())) continue;
    ++t[{g.edge(seq.front()).from, kNoEdge}][seq.front()];
    for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
      if (!g.has_edge(seq[k]) || !g.has_edge(seq[k + 1])) continue;
      ++t[{g.edge(seq[k]).to, seq[k]}][seq[k + 1]];
    }
  }
  return t;
}

TopoGraph classify_nodes(TopoGraph g, const TransitionCounts& observed, ClassifyReport* report) {
  ClassifyReport rep;
  std::vector<int> ids;
  for (const auto& [id, n] : g.nodes()) ids.push_back(id);
  for (int id : ids) {
    const auto ins = g.in_edges(id);
    const auto outs = g.out_edges(id);
    NodeKind kind = NodeKind::Unclassified;
    if (ins.empty() && !outs.empty()) {
      kind = NodeKind::Start;
    } else if (!ins.empty() && outs.empty()) {
      kind = NodeKind::End;
    } else if (!ins.empty()) {
      bool splits = false, all_unique = true;
      for (int e : ins) {
        const auto it = observed.find({id, e});
        const std::size_t succ = it == observed.end() ? 0 : it->second.size();
        if (succ >= 2) splits = true;
        if (succ != 1) all_unique = false;
      }
      if (splits)
        kind = NodeKind::Decision;
      else if (all_unique && ins.size() >= 2 && outs.size() >= 2)
        kind = NodeKind::Crossover;
    }
    g.node(id).kind = kind;
    switch (kind) {
      case NodeKind::Start: ++rep.start; break;
      case NodeKind::End: ++rep.end; break;
      case NodeKind::Crossover: ++rep.crossover; break;
      case NodeKind::Decision: ++rep.decision; break;
      case NodeKind::Unclassified: ++rep.unclassified; break;
    }
  }
  if (report) *report = rep;
  return g;
}

}  // namespace traj_atlas
