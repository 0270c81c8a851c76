#include "traj_atlas/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "traj_atlas/error.hpp"

namespace traj_atlas {

// --- velocity clustering -----------------------------------------------------

std::vector<VelocityGroup> cluster_velocities(std::span<const double> samples, const ClusterParams& p) {
  const std::size_t n = samples.size();
  if (n == 0) return {};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return samples[a] < samples[b]; });
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = samples[order[k]];

  // Neighbourhood sizes via two pointers over the sorted values.
  std::vector<bool> core(n, false);
  std::size_t lo = 0, hi = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (v[k] - v[lo] > p.eps_mps) ++lo;
    if (hi < k) hi = k;
    while (hi + 1 < n && v[hi + 1] - v[k] <= p.eps_mps) ++hi;
    core[k] = static_cast<int>(hi - lo + 1) >= p.min_lns;
  }

  // Stage 1: density groups. In 1-D, core samples chain when consecutive
  // cores are within eps; border samples attach to a core within eps.
  std::vector<long long> label(n, -1);
  long long groups = 0;
  std::size_t last_core = n;
  for (std::size_t k = 0; k < n; ++k) {
    if (!core[k]) continue;
    if (last_core == n || v[k] - v[last_core] > p.eps_mps) ++groups;
    label[k] = groups - 1;
    last_core = k;
  }
  if (groups == 0) {
    VelocityGroup all;
    all.members = order;
    std::sort(all.members.begin(), all.members.end());
    all.center = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    return {all};
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (core[k]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = k; j-- > 0 && v[k] - v[j] <= p.eps_mps;)
      if (core[j] && v[k] - v[j] < best) {
        best = v[k] - v[j];
        label[k] = label[j];
      }
    for (std::size_t j = k + 1; j < n && v[j] - v[k] <= p.eps_mps; ++j)
      if (core[j] && v[j] - v[k] < best) {
        best = v[j] - v[k];
        label[k] = label[j];
      }
  }

  std::vector<double> sum(groups, 0.0);
  std::vector<std::size_t> cnt(groups, 0);
  for (std::size_t k = 0; k < n; ++k)
    if (label[k] >= 0) {
      sum[label[k]] += v[k];
      ++cnt[label[k]];
    }

  // Stage 2: single linkage on group centres, cut at merge_gap. Groups are
  // already ordered along the axis, so only neighbours can chain.
  std::vector<long long> merged(groups);
  long long m = 0;
  for (long long gi = 0; gi < groups; ++gi) {
    if (gi > 0 && sum[gi] / cnt[gi] - sum[gi - 1] / cnt[gi - 1] >= p.merge_gap_mps) ++m;
    merged[gi] = m;
  }
  const std::size_t final_groups = static_cast<std::size_t>(m + 1);
  std::vector<VelocityGroup> out(final_groups);
  std::vector<double> fsum(final_groups, 0.0);
  std::vector<std::size_t> fcnt(final_groups, 0);
  for (std::size_t k = 0; k < n; ++k)
    if (label[k] >= 0) {
      fsum[merged[label[k]]] += v[k];
      ++fcnt[merged[label[k]]];
    }
  std::vector<double> centers(final_groups);
  for (std::size_t g = 0; g < final_groups; ++g) centers[g] = fsum[g] / static_cast<double>(fcnt[g]);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t g = 0;
    if (label[k] >= 0) {
      g = static_cast<std::size_t>(merged[label[k]]);
    } else {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < final_groups; ++c)
        if (std::abs(v[k] - centers[c]) < best) {
          best = std::abs(v[k] - centers[c]);
          g = c;
        }
    }
    out[g].members.push_back(order[k]);
  }
  for (auto& grp : out) {
    std::sort(grp.members.begin(), grp.members.end());
    double s = 0.0;
    for (auto i : grp.members) s += samples[i];
    grp.center = s / static_cast<double>(grp.members.size());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.center < b.center; });
  return out;
}

// --- approach velocity -------------------------------------------------------

double sample_approach_velocity(const Trajectory& traj, Vec2 node, double lookback_m, double max_snap_m) {
  if (!traj.has_kinematics()) throw ValidationError("sample_approach_velocity needs derived kinematics");
  const auto pos = positions(traj);
  const auto proj = project_onto_polyline(node, pos);
  if (proj.dist > max_snap_m)
    throw ValidationError("trajectory '" + traj.id + "' does not approach the node");
  const auto cum = cumulative_arc(pos);
  const double d = proj.arc;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (cum[i] >= d - lookback_m && cum[i] <= d) {
      sum += traj.speed[i];
      ++n;
    }
  if (n > 0) return sum / static_cast<double>(n);
  return traj.speed[std::min(proj.segment, traj.size() - 1)];
}

double departure_velocity(const Trajectory& traj, std::size_t first, double lookback_m) {
  if (!traj.has_kinematics()) throw ValidationError("departure_velocity needs derived kinematics");
  if (first >= traj.size()) throw ValidationError("departure index out of range");
  double sum = 0.0, arc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = first; i < traj.size() && arc <= lookback_m; ++i) {
    if (i > first) arc += distance(traj.points[i - 1].pos(), traj.points[i].pos());
    if (arc > lookback_m) break;
    sum += traj.speed[i];
    ++n;
  }
  return sum / static_cast<double>(n);
}

// --- prototypes ----------------------------------------------------------------

namespace {

struct Resampled {
  std::vector<Vec2> pos;
  std::vector<double> speed;  // per point
};

Resampled resample(const Trajectory& tr, double step) {
  Resampled r;
  const auto pts = positions(tr);
  const auto cum = cumulative_arc(pts);
  const double len = cum.back();
  const std::size_t count = static_cast<std::size_t>(std::floor(len / step)) + 1;
  std::vector<double> times;
  for (std::size_t k = 0; k <= count; ++k) {
    const double s = std::min(static_cast<double>(k) * step, len);
    if (k == count && (len - static_cast<double>(count - 1) * step) < 1e-9) break;
    const auto it = std::upper_bound(cum.begin(), cum.end(), s);
    std::size_t i = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
    i = std::min(i, pts.size() - 2);
    const double seg = cum[i + 1] - cum[i];
    const double u = seg > 0.0 ? std::clamp((s - cum[i]) / seg, 0.0, 1.0) : 0.0;
    r.pos.push_back(pts[i] + (pts[i + 1] - pts[i]) * u);
    times.push_back(tr.points[i].t + (tr.points[i + 1].t - tr.points[i].t) * u);
  }
  r.speed.assign(r.pos.size(), 0.0);
  for (std::size_t k = 0; k + 1 < r.pos.size(); ++k) {
    const double dt = times[k + 1] - times[k];
    r.speed[k] = dt > 0.0 ? distance(r.pos[k], r.pos[k + 1]) / dt : 0.0;
  }
  if (r.pos.size() >= 2) r.speed.back() = r.speed[r.pos.size() - 2];
  return r;
}

Trajectory timed_from_speeds(std::string id, const std::vector<Vec2>& pos, const std::vector<double>& speed) {
  Trajectory out;
  out.id = std::move(id);
  double t = 0.0;
  for (std::size_t k = 0; k < pos.size(); ++k) {
    if (k > 0) {
      const double v = std::max(0.5 * (speed[k - 1] + speed[k]), 0.1);
      t += std::max(distance(pos[k - 1], pos[k]) / v, 1e-6);
    }
    out.points.push_back({t, pos[k].x, pos[k].y});
  }
  return out;
}

}  // namespace

std::optional<Trajectory> extract_prototype(std::span<const Trajectory> members, const PrototypeParams& p) {
  std::vector<Resampled> rs;
  Vec2 dir;
  for (const auto& m : members) {
    if (m.size() < 2 || path_length(m) <= 0.0) continue;
    rs.push_back(resample(m, p.step_m));
    const auto& pos = rs.back().pos;
    for (std::size_t k = 0; k + 1 < pos.size(); ++k) dir += pos[k + 1] - pos[k];
  }
  if (rs.empty()) return std::nullopt;
  if (rs.size() == 1) return timed_from_speeds("prototype", rs[0].pos, rs[0].speed);
  const double dl = norm(dir);
  if (dl <= 0.0) return std::nullopt;
  const Vec2 ax = dir * (1.0 / dl);
  const Vec2 ay{-ax.y, ax.x};
  auto to_local = [&](Vec2 q) { return Vec2{dot(q, ax), dot(q, ay)}; };

  std::vector<std::vector<Vec2>> local(rs.size());
  std::vector<double> sweep;
  for (std::size_t m = 0; m < rs.size(); ++m) {
    for (const auto& q : rs[m].pos) {
      local[m].push_back(to_local(q));
      sweep.push_back(local[m].back().x);
    }
  }
  std::sort(sweep.begin(), sweep.end());
  const std::size_t need = std::min<std::size_t>(static_cast<std::size_t>(std::max(p.min_lns, 1)), rs.size());

  std::vector<Vec2> out_pos;
  std::vector<double> out_speed;
  double last_x = -std::numeric_limits<double>::infinity();
  for (double x : sweep) {
    if (x - last_x < p.step_m) continue;
    double y_sum = 0.0, v_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t m = 0; m < rs.size(); ++m) {
      const auto& L = local[m];
      for (std::size_t k = 0; k + 1 < L.size(); ++k) {
        const double x0 = L[k].x, x1 = L[k + 1].x;
        if (x < std::min(x0, x1) || x > std::max(x0, x1)) continue;
        const double u = x1 != x0 ? (x - x0) / (x1 - x0) : 0.0;
        y_sum += L[k].y + (L[k + 1].y - L[k].y) * u;
        v_sum += rs[m].speed[k] + (rs[m].speed[k + 1] - rs[m].speed[k]) * u;
        ++hits;
        break;  // first crossing per member
      }
    }
    if (hits < need) continue;
    const double y = y_sum / static_cast<double>(hits);
    out_pos.push_back(ax * x + ay * y);
    out_speed.push_back(v_sum / static_cast<double>(hits));
    last_x = x;
  }
  if (out_pos.size() < 2) return std::nullopt;
  return timed_from_speeds("prototype", out_pos, out_speed);
}

Trajectory polyline_prototype(std::span<const Vec2> polyline, double speed_mps, double step_m) {
  Trajectory tmp;
  const double v = std::max(speed_mps, 0.1);
  const auto cum = cumulative_arc(polyline);
  std::vector<Vec2> pos;
  const double len = cum.empty() ? 0.0 : cum.back();
  for (double s = 0.0; s < len; s += step_m) pos.push_back(point_at_arc(polyline, cum, s));
  pos.push_back(polyline.back());
  std::vector<double> speed(pos.size(), v);
  return timed_from_speeds("prototype", pos, speed);
}

// --- tables --------------------------------------------------------------------

std::vector<int> TransitionTable::successors() const {
  std::vector<int> out;
  for (const auto& c : clusters)
    for (const auto& [e, n] : c.counts) out.push_back(e);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const TransitionTable* BehaviorMap::table(int node, int in_edge) const {
  const auto it = std::lower_bound(tables.begin(), tables.end(), std::pair{node, in_edge},
                                   [](const TransitionTable& t, const std::pair<int, int>& k) {
                                     return std::pair{t.node, t.in_edge} < k;
                                   });
  if (it == tables.end() || it->node != node || it->in_edge != in_edge) return nullptr;
  return &*it;
}

std::vector<int> BehaviorMap::successors(int edge) const {
  if (!graph.has_edge(edge)) return {};
  const auto* t = table(graph.edge(edge).to, edge);
  return t ? t->successors() : std::vector<int>{};
}

Trajectory edge_piece(const Trajectory& traj, const MatchedTrajectory& m, std::size_t k) {
  auto [first, last] = m.spans.at(k);
  if (first > 0) --first;
  if (last + 1 < traj.size()) ++last;
  return slice(traj, first, last);
}

BehaviorMap build_behavior(TopoGraph graph, std::span<const Trajectory> trajs,
                           std::span<const MatchedTrajectory> matches, const BehaviorParams& p) {
  if (trajs.size() != matches.size()) throw ValidationError("trajectories and matches differ in length");
  BehaviorMap map;

  struct Sample {
    std::size_t traj;
    std::size_t out_pos;  // index of the out edge within the matched sequence
    double speed;
  };
  std::map<TransitionKey, std::vector<Sample>> samples;
  std::map<int, std::vector<Trajectory>> edge_members;

  for (std::size_t t = 0; t < trajs.size(); ++t) {
    const auto& m = matches[t];
    if (!m.matched || m.edge_sequence.empty()) continue;
    const auto& seq = m.edge_sequence;
    for (std::size_t k = 0; k < seq.size(); ++k) {
      if (!graph.has_edge(seq[k])) continue;
      edge_members[seq[k]].push_back(edge_piece(trajs[t], m, k));
      const Edge& e = graph.edge(seq[k]);
      const int in_edge = k == 0 ? kNoEdge : seq[k - 1];
      // Tracks begin at or just before a start node, so there is no approach
      // to look back on; one or two samples there are too noisy to cluster.
      double v;
      if (k == 0) {
        v = departure_velocity(trajs[t], m.spans[0].first, p.lookback_m);
      } else {
        try {
          v = sample_approach_velocity(trajs[t], graph.node(e.from).pos, p.lookback_m, p.max_snap_m);
        } catch (const ValidationError&) {
          v = trajs[t].speed[m.spans[k].first];
        }
      }
      samples[{e.from, in_edge}].push_back({t, k, v});
    }
  }

  for (const auto& [key, list] : samples) {
    TransitionTable table;
    table.node = key.first;
    table.in_edge = key.second;
    std::vector<double> speeds;
    for (const auto& s : list) speeds.push_back(s.speed);
    const auto groups = cluster_velocities(speeds, p.clustering);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      VelocityCluster c;
      c.index = static_cast<int>(gi);
      c.center_mps = groups[gi].center;
      c.n = static_cast<int>(groups[gi].members.size());
      std::map<int, std::vector<Trajectory>> pieces;
      for (auto mi : groups[gi].members) {
        const auto& s = list[mi];
        const auto& m = matches[s.traj];
        const int out = m.edge_sequence[s.out_pos];
        c.member_ids.push_back(trajs[s.traj].id);
        ++c.counts[out];
        pieces[out].push_back(edge_piece(trajs[s.traj], m, s.out_pos));
      }
      for (const auto& [e, nij] : c.counts) {
        c.transitions[e] = static_cast<double>(nij) / static_cast<double>(c.n);
        auto proto = extract_prototype(pieces[e], p.prototype);
        c.prototypes[e] = proto ? std::move(*proto)
                                : polyline_prototype(graph.edge(e).polyline, c.center_mps, p.prototype.step_m);
      }
      table.clusters.push_back(std::move(c));
    }
    map.tables.push_back(std::move(table));
  }

  for (const auto& [e, members] : edge_members) {
    auto proto = extract_prototype(members, p.prototype);
    if (proto) {
      map.edge_prototypes[e] = std::move(*proto);
    } else {
      double v = 0.0;
      for (const auto& m : members) v += path_length(m) / std::max(m.duration(), 1e-6);
      map.edge_prototypes[e] = polyline_prototype(graph.edge(e).polyline, v / static_cast<double>(members.size()),
                                                  p.prototype.step_m);
    }
  }
  map.graph = std::move(graph);
  return map;
}

// --- JSON ------------------------------------------------------------------------

namespace {

nlohmann::json proto_json(const Trajectory& t) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : t.points) a.push_back({p.x, p.y, p.t});
  return a;
}

Trajectory proto_from_json(const nlohmann::json& a) {
  Trajectory t;
  t.id = "prototype";
  for (const auto& p : a) t.points.push_back({p.at(2).get<double>(), p.at(0).get<double>(), p.at(1).get<double>()});
  return t;
}

}  // namespace

void to_json(nlohmann::json& j, const BehaviorMap& m) {
  to_json(j, m.graph);
  for (auto& e : j["edges"]) {
    const auto it = m.edge_prototypes.find(e["id"].get<int>());
    if (it != m.edge_prototypes.end()) e["prototype"] = proto_json(it->second);
  }
  auto& decisions = j["decisions"] = nlohmann::json::array();
  for (const auto& t : m.tables) {
    nlohmann::json clusters = nlohmann::json::array();
    for (const auto& c : t.clusters) {
      nlohmann::json counts = nlohmann::json::object(), trans = nlohmann::json::object(),
                     protos = nlohmann::json::object();
      for (const auto& [e, n] : c.counts) counts[std::to_string(e)] = n;
      for (const auto& [e, pr] : c.transitions) trans[std::to_string(e)] = pr;
      for (const auto& [e, pt] : c.prototypes) protos[std::to_string(e)] = proto_json(pt);
      clusters.push_back({{"center_mps", c.center_mps},
                          {"n", c.n},
                          {"members", c.member_ids},
                          {"counts", std::move(counts)},
                          {"transitions", std::move(trans)},
                          {"prototypes", std::move(protos)}});
    }
    decisions.push_back({{"node", t.node},
                         {"in_edge", t.in_edge},
                         {"kind", to_string(m.graph.has_node(t.node) ? m.graph.node(t.node).kind : NodeKind::Unclassified)},
                         {"clusters", std::move(clusters)}});
  }
}

void from_json(const nlohmann::json& j, BehaviorMap& m) {
  m = BehaviorMap{};
  from_json(j, m.graph);
  try {
    for (const auto& e : j.at("edges"))
      if (e.contains("prototype")) m.edge_prototypes[e.at("id").get<int>()] = proto_from_json(e.at("prototype"));
    for (const auto& d : j.value("decisions", nlohmann::json::array())) {
      TransitionTable t;
      t.node = d.at("node").get<int>();
      t.in_edge = d.at("in_edge").get<int>();
      int idx = 0;
      for (const auto& cj : d.at("clusters")) {
        VelocityCluster c;
        c.index = idx++;
        c.center_mps = cj.at("center_mps").get<double>();
        c.n = cj.at("n").get<int>();
        c.member_ids = cj.value("members", std::vector<std::string>{});
        for (const auto& [k, v] : cj.at("counts").items()) c.counts[std::stoi(k)] = v.get<int>();
        for (const auto& [k, v] : cj.at("transitions").items()) c.transitions[std::stoi(k)] = v.get<double>();
        const auto protos = cj.value("prototypes", nlohmann::json::object());
        for (const auto& [k, v] : protos.items()) c.prototypes[std::stoi(k)] = proto_from_json(v);
        t.clusters.push_back(std::move(c));
      }
      m.tables.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("behavior map json: ") + ex.what());
  }
  std::sort(m.tables.begin(), m.tables.end(),
            [](const auto& a, const auto& b) { return std::pair{a.node, a.in_edge} < std::pair{b.node, b.in_edge}; });
}

BehaviorMap load_behavior_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("behavior map: ") + ex.what());
  }
  return j.get<BehaviorMap>();
}

void save_behavior_map(const std::filesystem::path& path, const BehaviorMap& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << nlohmann::json(m).dump(1) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace traj_atlas
