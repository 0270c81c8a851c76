#include "traj_atlas/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "traj_atlas/error.hpp"

namespace traj_atlas {

EdgeLocator::Hit associate_edge(const EdgeLocator& locator, Vec2 pos, double heading, double heading_weight) {
  const auto hits = locator.near(pos);
  if (hits.empty()) throw NoCoverageError("no edge within snap distance");
  const Vec2 dir = unit_from_heading(heading);
  const TopoGraph& g = locator.graph();
  double best = std::numeric_limits<double>::infinity();
  const EdgeLocator::Hit* pick = nullptr;
  for (const auto& h : hits) {
    const Vec2 local = segment_direction(g.edge(h.edge).polyline, h.proj.segment);
    const double score = h.dist / locator.max_snap() + heading_weight * (1.0 - dot(local, dir));
    if (score < best || (score == best && pick && h.edge < pick->edge)) {
      best = score;
      pick = &h;
    }
  }
  return *pick;
}

std::vector<std::vector<int>> enumerate_sequences(const BehaviorMap& map, int start_edge, double start_arc_m,
                                                  double horizon_m) {
  if (!(horizon_m > 0.0)) throw ValidationError("horizon_m must be > 0");
  std::vector<std::vector<int>> out;
  std::vector<int> path{start_edge};
  auto dfs = [&](auto&& self, double covered) -> void {
    if (covered >= horizon_m) {
      out.push_back(path);
      return;
    }
    const auto next = map.successors(path.back());
    if (next.empty()) {
      out.push_back(path);
      return;
    }
    for (int e : next) {
      path.push_back(e);
      // zero-length edges cannot make progress; count them as a token step
      self(self, covered + std::max(map.graph.edge(e).length, 1e-3));
      path.pop_back();
    }
  };
  dfs(dfs, std::max(map.graph.edge(start_edge).length - start_arc_m, 0.0));
  return out;
}

InterpolationTrace interpolate_probability(double v_m, std::span<const VelocityCluster> clusters) {
  if (clusters.empty()) throw ValidationError("interpolate_probability needs at least one cluster");
  InterpolationTrace tr;
  tr.v_m = v_m;
  std::size_t lo = 0, hi = 0;
  if (clusters.size() == 1 || v_m <= clusters.front().center_mps) {
    lo = hi = 0;
  } else if (v_m >= clusters.back().center_mps) {
    lo = hi = clusters.size() - 1;
  } else {
    while (hi < clusters.size() && clusters[hi].center_mps <= v_m) ++hi;
    lo = hi - 1;
  }
  const auto& slow = clusters[lo];
  const auto& fast = clusters[hi];
  tr.slow_cluster = static_cast<int>(lo);
  tr.fast_cluster = static_cast<int>(hi);
  tr.v_slow = slow.center_mps;
  tr.v_fast = fast.center_mps;
  tr.p_slow = slow.transitions;
  tr.p_fast = fast.transitions;
  for (const auto& [e, p] : tr.p_slow) tr.p_fast.try_emplace(e, 0.0);
  for (const auto& [e, p] : tr.p_fast) tr.p_slow.try_emplace(e, 0.0);
  if (lo == hi) {
    tr.p = tr.p_slow;
    return tr;
  }
  tr.delta_slow = std::abs(v_m - tr.v_slow);
  tr.delta_fast = std::abs(tr.v_fast - v_m);
  tr.delta = std::abs(tr.v_fast - tr.v_slow);
  for (const auto& [e, ps] : tr.p_slow)
    tr.p[e] = ps * (tr.delta_fast / tr.delta) + tr.p_fast.at(e) * (tr.delta_slow / tr.delta);
  return tr;
}

Trajectory transform_segment(const Trajectory& proto, Vec2 observed_end, std::size_t cut, std::size_t n_seg) {
  if (n_seg < 2) throw ValidationError("segment needs at least 2 points");
  if (cut + n_seg > proto.size()) throw ValidationError("segment exceeds prototype");
  Trajectory out;
  out.id = proto.id;
  const Vec2 vn = observed_end - proto.points[cut].pos();
  const double denom = static_cast<double>(n_seg - 1);
  for (std::size_t k = 0; k < n_seg; ++k) {
    const auto& p = proto.points[cut + k];
    const double f = 1.0 - static_cast<double>(k) / denom;
    out.points.push_back({p.t, p.x + f * vn.x, p.y + f * vn.y});
  }
  // exact landing on the observed end, independent of rounding in p + vn
  out.points.front().x = observed_end.x;
  out.points.front().y = observed_end.y;
  return out;
}

double recent_speed(const Trajectory& traj, double window_s) {
  if (traj.size() < 2) throw ValidationError("need at least 2 points");
  const Trajectory k = traj.has_kinematics() ? traj : derive_kinematics(traj);
  const double t_end = k.points.back().t;
  double sum = 0.0;
  std::size_t n = 0;
  // the last sample copies its predecessor, so only forward differences count
  for (std::size_t i = 0; i + 1 < k.size(); ++i)
    if (k.points[i].t >= t_end - window_s - 1e-9) {
      sum += k.speed[i];
      ++n;
    }
  return n ? sum / static_cast<double>(n) : k.speed[k.size() - 2];
}

namespace {

std::size_t nearest_vertex(const Trajectory& p, Vec2 q) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = distance(p.points[i].pos(), q);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

double segment_speed(const Trajectory& p, std::size_t i) {
  if (p.size() < 2) return 0.0;
  i = std::min(i, p.size() - 2);
  const double dt = p.points[i + 1].t - p.points[i].t;
  return dt > 0.0 ? distance(p.points[i].pos(), p.points[i + 1].pos()) / dt : 0.0;
}

// Mean segment speed over the last `lookback_m` of a prototype.
double approach_speed(const Trajectory& p, double lookback_m) {
  const auto cum = cumulative_arc(positions(p));
  const double len = cum.back();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i)
    if (cum[i + 1] >= len - lookback_m) {
      sum += segment_speed(p, i);
      ++n;
    }
  return n ? sum / static_cast<double>(n) : segment_speed(p, p.size() - 2);
}

// Appends `proto` to `out`, blending its first part onto the current end.
void append_prototype(Trajectory& out, const Trajectory& proto, double min_segment_m) {
  if (proto.size() < 2) return;
  const Vec2 anchor = out.points.back().pos();
  const std::size_t cut = nearest_vertex(proto, anchor);
  if (cut + 1 >= proto.size()) return;
  const auto pos = positions(proto);
  const auto cum = cumulative_arc(pos);
  const double span = std::min(cum.back() - cum[cut], std::max(min_segment_m, 2.0 * distance(anchor, pos[cut])));
  std::size_t n_seg = 2;
  while (cut + n_seg < proto.size() && cum[cut + n_seg] - cum[cut] <= span) ++n_seg;
  const Trajectory seg = transform_segment(proto, anchor, cut, n_seg);

  auto push = [&](Vec2 q, std::size_t i) {
    const Vec2 prev = out.points.back().pos();
    const double step = distance(q, prev);
    if (step <= 1e-9) return;
    const double proto_step = distance(pos[i], pos[i - 1]);
    double dt = proto.points[i].t - proto.points[i - 1].t;
    if (proto_step > 1e-9) dt *= step / proto_step;
    dt = std::max(dt, 1e-6);
    out.points.push_back({out.points.back().t + dt, q.x, q.y});
  };
  for (std::size_t k = 1; k < n_seg; ++k) push(seg.points[k].pos(), cut + k);
  for (std::size_t i = cut + n_seg; i < proto.size(); ++i) push(pos[i], i);
}

std::size_t nearest_cluster(std::span<const VelocityCluster> clusters, double v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < clusters.size(); ++i)
    if (std::abs(clusters[i].center_mps - v) < std::abs(clusters[best].center_mps - v)) best = i;
  return best;
}

}  // namespace

Predictor::Predictor(const BehaviorMap& map, PredictorParams params)
    : map_(&map), params_(params), locator_(map.graph, params.max_snap_m) {
  if (!(params_.min_segment_m > 0.0)) throw ValidationError("min_segment_m must be > 0");
  if (!(params_.speed_window_s > 0.0)) throw ValidationError("speed_window_s must be > 0");
  double v = 0.0;
  std::size_t n = 0;
  for (const auto& t : map.tables)
    for (const auto& c : t.clusters) {
      v += c.center_mps * c.n;
      n += static_cast<std::size_t>(c.n);
    }
  const double fallback_speed = n ? v / static_cast<double>(n) : 10.0;
  for (const auto& [id, e] : map.graph.edges())
    if (!map.edge_prototypes.count(id)) fallback_[id] = polyline_prototype(e.polyline, fallback_speed, 0.5);
}

const Trajectory& Predictor::start_prototype(int edge, Vec2 at, double v_m) const {
  const Trajectory* best = nullptr;
  double best_gap = std::numeric_limits<double>::infinity();
  auto consider = [&](const Trajectory& p) {
    const double gap = std::abs(segment_speed(p, nearest_vertex(p, at)) - v_m);
    if (gap < best_gap) {
      best_gap = gap;
      best = &p;
    }
  };
  const int from = map_->graph.edge(edge).from;
  for (const auto& t : map_->tables) {
    if (t.node != from) continue;
    for (const auto& c : t.clusters) {
      const auto it = c.prototypes.find(edge);
      if (it != c.prototypes.end()) consider(it->second);
    }
  }
  if (const auto it = map_->edge_prototypes.find(edge); it != map_->edge_prototypes.end()) consider(it->second);
  if (best) return *best;
  return fallback_.at(edge);
}

const Trajectory& Predictor::successor_prototype(const TransitionTable* table, int cluster, int edge) const {
  if (table) {
    const auto& cl = table->clusters;
    std::vector<std::size_t> order(cl.size());
    for (std::size_t i = 0; i < cl.size(); ++i) order[i] = i;
    const double v = cl[static_cast<std::size_t>(cluster)].center_mps;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return std::abs(cl[a].center_mps - v) < std::abs(cl[b].center_mps - v);
    });
    for (auto i : order)
      if (const auto it = cl[i].prototypes.find(edge); it != cl[i].prototypes.end()) return it->second;
  }
  if (const auto it = map_->edge_prototypes.find(edge); it != map_->edge_prototypes.end()) return it->second;
  return fallback_.at(edge);
}

PredictionResult Predictor::predict(const Trajectory& observed_in, double horizon_m) const {
  if (observed_in.size() < 2) throw ValidationError("observed trajectory needs at least 2 points");
  if (!(horizon_m > 0.0)) throw ValidationError("horizon_m must be > 0");
  const Trajectory observed = observed_in.has_kinematics() ? observed_in : derive_kinematics(observed_in);
  PredictionResult res;
  const auto& last = observed.points.back();
  const Vec2 end = last.pos();
  res.v_m = recent_speed(observed, params_.speed_window_s);

  // Heading from the chord over the speed window; single-step headings are
  // too noisy on jittery input.
  double heading = observed.heading.back();
  for (std::size_t i = 0; i < observed.size(); ++i)
    if (observed.points[i].t >= last.t - params_.speed_window_s - 1e-9) {
      const Vec2 d = end - observed.points[i].pos();
      if (norm(d) > 0.5) heading = std::atan2(d.y, d.x);
      break;
    }

  EdgeLocator::Hit hit;
  try {
    hit = associate_edge(locator_, end, heading, params_.heading_weight);
  } catch (const NoCoverageError& e) {
    res.status = PredictStatus::NoCoverage;
    res.message = e.what();
    return res;
  }
  res.start_edge = hit.edge;

  const auto seqs = enumerate_sequences(*map_, hit.edge, hit.proj.arc, horizon_m);
  for (const auto& seq : seqs) {
    PredictionHypothesis h;
    h.edge_sequence = seq;
    h.probability = 1.0;
    h.trajectory.id = observed.id;
    h.trajectory.points.push_back({last.t, end.x, end.y});
    const Trajectory* proto = &start_prototype(seq.front(), end, res.v_m);
    append_prototype(h.trajectory, *proto, params_.min_segment_m);
    double v = res.v_m;
    for (std::size_t k = 1; k < seq.size(); ++k) {
      const auto* table = map_->table(map_->graph.edge(seq[k - 1]).to, seq[k - 1]);
      if (k > 1) v = approach_speed(*proto, params_.lookback_m);
      int cluster = 0;
      if (table && !table->clusters.empty()) {
        auto tr = interpolate_probability(v, table->clusters);
        const auto it = tr.p.find(seq[k]);
        h.probability *= it == tr.p.end() ? 0.0 : it->second;
        h.decisions.push_back(std::move(tr));
        cluster = static_cast<int>(nearest_cluster(table->clusters, v));
      }
      proto = &successor_prototype(table, cluster, seq[k]);
      append_prototype(h.trajectory, *proto, params_.min_segment_m);
    }
    h.trajectory = truncate_at_arc(h.trajectory, horizon_m);
    res.hypotheses.push_back(std::move(h));
  }
  std::stable_sort(res.hypotheses.begin(), res.hypotheses.end(),
                   [](const auto& a, const auto& b) { return a.probability > b.probability; });
  return res;
}

nlohmann::json prediction_to_json(const PredictionResult& r) {
  nlohmann::json hyps = nlohmann::json::array();
  for (const auto& h : r.hypotheses) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : h.trajectory.points) pts.push_back({p.t, p.x, p.y});
    hyps.push_back({{"probability", h.probability}, {"edge_sequence", h.edge_sequence}, {"points", std::move(pts)}});
  }
  return hyps;
}

}  // namespace traj_atlas
