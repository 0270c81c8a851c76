#include "traj_atlas/graph_extract.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "traj_atlas/error.hpp"

namespace traj_atlas {

namespace {

constexpr int kRing[8][2] = {{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}};

struct Px {
  int c;
  int r;
};

Px unpack(const GridGeometry& g, std::size_t i) {
  return {static_cast<int>(i % static_cast<std::size_t>(g.width)), static_cast<int>(i / static_cast<std::size_t>(g.width))};
}

// Foreground 8-neighbours of pixel `i` in ring order.
std::vector<std::size_t> fg_neighbors(const BinaryImage& img, std::size_t i) {
  const auto [c, r] = unpack(img.geom, i);
  std::vector<std::size_t> out;
  for (const auto& d : kRing)
    if (img.at(c + d[0], r + d[1])) out.push_back(img.geom.index(c + d[0], r + d[1]));
  return out;
}

Vec2 centroid(const GridGeometry& g, const std::vector<std::size_t>& pixels) {
  Vec2 s;
  for (auto i : pixels) {
    const auto [c, r] = unpack(g, i);
    s += Vec2{static_cast<double>(c), static_cast<double>(r)};
  }
  return s * (1.0 / static_cast<double>(pixels.size()));
}

}  // namespace

std::vector<PixelNode> detect_nodes(const Skeleton& skel) {
  const auto& img = skel.image;
  const auto& g = img.geom;
  std::vector<int> kind(g.size(), 0);  // 1 endpoint, 2 junction
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c) {
      if (!img.at(c, r)) continue;
      const int n = neighbor_count(img, c, r);
      if (n == 1) kind[g.index(c, r)] = 1;
      if (n >= 3) kind[g.index(c, r)] = 2;
    }

  std::vector<PixelNode> nodes;
  std::vector<std::uint8_t> taken(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!kind[i] || taken[i]) continue;
    PixelNode node;
    node.junction = kind[i] == 2;
    taken[i] = 1;
    node.pixels.push_back(i);
    if (node.junction) {
      for (std::size_t head = 0; head < node.pixels.size(); ++head)
        for (auto j : fg_neighbors(img, node.pixels[head]))
          if (kind[j] == 2 && !taken[j]) {
            taken[j] = 1;
            node.pixels.push_back(j);
          }
      std::sort(node.pixels.begin(), node.pixels.end());
    }
    node.centroid_px = centroid(g, node.pixels);
    nodes.push_back(std::move(node));
  }
  return nodes;
}

TraceResult trace_edges(const Skeleton& skel, const std::vector<PixelNode>& input_nodes) {
  const auto& img = skel.image;
  const auto& g = img.geom;
  TraceResult res;
  res.nodes = input_nodes;

  std::vector<long long> node_of(g.size(), -1);
  for (std::size_t n = 0; n < res.nodes.size(); ++n)
    for (auto p : res.nodes[n].pixels) node_of[p] = static_cast<long long>(n);
  std::vector<std::uint8_t> visited(g.size(), 0);
  std::set<std::pair<std::size_t, std::size_t>> direct;

  // Walks from node pixel `start` through non-node pixel `first`.
  auto walk = [&](std::size_t from_node, std::size_t start, std::size_t first) {
    PixelPath path;
    path.from = from_node;
    std::size_t prev = start, cur = first;
    visited[cur] = 1;
    path.pixels.push_back(cur);
    while (true) {
      std::size_t next = std::numeric_limits<std::size_t>::max();
      for (auto q : fg_neighbors(img, cur)) {
        if (q == prev) continue;
        if (node_of[q] >= 0) {  // a node always wins over further path pixels
          next = q;
          break;
        }
        if (!visited[q] && next == std::numeric_limits<std::size_t>::max()) next = q;
      }
      if (next == std::numeric_limits<std::size_t>::max()) {
        res.dropped_pixels += path.pixels.size();
        return;
      }
      if (node_of[next] >= 0) {
        path.to = static_cast<std::size_t>(node_of[next]);
        // degenerate hairpins back into the same junction clump
        if (path.to == path.from && path.pixels.size() < 3) {
          res.dropped_pixels += path.pixels.size();
          return;
        }
        res.paths.push_back(std::move(path));
        return;
      }
      visited[next] = 1;
      path.pixels.push_back(next);
      prev = cur;
      cur = next;
    }
  };

  for (std::size_t n = 0; n < res.nodes.size(); ++n) {
    for (auto p : res.nodes[n].pixels)
      for (auto q : fg_neighbors(img, p)) {
        if (node_of[q] == static_cast<long long>(n)) continue;
        if (node_of[q] >= 0) {
          const auto m = static_cast<std::size_t>(node_of[q]);
          if (direct.insert({std::min(n, m), std::max(n, m)}).second) res.paths.push_back({n, m, {}});
          continue;
        }
        if (!visited[q]) walk(n, p, q);
      }
  }

  // Node-free cycles and isolated pixels.
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!img.fg[i] || node_of[i] >= 0 || visited[i]) continue;
    const auto nb = fg_neighbors(img, i);
    if (nb.empty()) {
      ++res.dropped_pixels;
      continue;
    }
    const std::size_t anchor = res.nodes.size();
    PixelNode node;
    node.pixels = {i};
    node.centroid_px = centroid(g, node.pixels);
    res.nodes.push_back(std::move(node));
    node_of[i] = static_cast<long long>(anchor);
    visited[i] = 1;
    if (!visited[nb.front()] && node_of[nb.front()] < 0) walk(anchor, i, nb.front());
  }
  return res;
}

TopoGraph build_graph(const TraceResult& traced, const GridGeometry& geom, double simplify_tolerance_m) {
  std::vector<bool> used(traced.nodes.size(), false);
  for (const auto& p : traced.paths) used[p.from] = used[p.to] = true;
  TopoGraph g;
  for (std::size_t n = 0; n < traced.nodes.size(); ++n) {
    if (!used[n]) continue;
    const Vec2 c = traced.nodes[n].centroid_px;
    g.add_node({static_cast<int>(n), geom.pixel_to_world(c.x, c.y), NodeKind::Unclassified});
  }
  int k = 0;
  for (const auto& p : traced.paths) {
    std::vector<Vec2> raw;
    raw.reserve(p.pixels.size() + 2);
    raw.push_back(g.node(static_cast<int>(p.from)).pos);
    for (auto i : p.pixels) {
      const auto [c, r] = unpack(geom, i);
      raw.push_back(geom.pixel_to_world(c, r));
    }
    raw.push_back(g.node(static_cast<int>(p.to)).pos);
    auto fwd = simplify_polyline(raw, simplify_tolerance_m);
    auto rev = fwd;
    std::reverse(rev.begin(), rev.end());
    g.add_edge({2 * k, static_cast<int>(p.from), static_cast<int>(p.to), std::move(fwd), 0.0, 0});
    g.add_edge({2 * k + 1, static_cast<int>(p.to), static_cast<int>(p.from), std::move(rev), 0.0, 0});
    ++k;
  }
  return g;
}

namespace {

std::size_t undirected_degree(const TopoGraph& g, int node) {
  std::set<int> pairs;
  for (int e : g.out_edges(node)) pairs.insert(e / 2);
  for (int e : g.in_edges(node)) pairs.insert(e / 2);
  return pairs.size();
}

void reanchor(TopoGraph& g, int edge_id, int from, int to) {
  Edge e = g.edge(edge_id);
  g.remove_edge(edge_id);
  e.from = from;
  e.to = to;
  e.polyline.front() = g.node(from).pos;
  e.polyline.back() = g.node(to).pos;
  g.add_edge(std::move(e));
}

}  // namespace

std::size_t merge_close_junctions(TopoGraph& g, double min_length_m) {
  std::size_t merges = 0;
  while (true) {
    int best = -1;
    double best_len = min_length_m;
    for (const auto& [id, e] : g.edges()) {
      if (id % 2 || e.from == e.to || e.length >= best_len) continue;
      if (undirected_degree(g, e.from) < 3 || undirected_degree(g, e.to) < 3) continue;
      best = id;
      best_len = e.length;
    }
    if (best < 0) break;
    const int u = std::min(g.edge(best).from, g.edge(best).to);
    const int v = std::max(g.edge(best).from, g.edge(best).to);
    g.remove_edge(best);
    g.remove_edge(twin_id(best));
    g.node(u).pos = (g.node(u).pos + g.node(v).pos) * 0.5;
    std::set<int> touched;
    for (int e : g.out_edges(u)) touched.insert(e);
    for (int e : g.in_edges(u)) touched.insert(e);
    for (int e : g.out_edges(v)) touched.insert(e);
    for (int e : g.in_edges(v)) touched.insert(e);
    for (int id : touched) {
      const Edge& e = g.edge(id);
      reanchor(g, id, e.from == v ? u : e.from, e.to == v ? u : e.to);
    }
    g.remove_node(v);
    // loops collapsed by the contraction
    std::vector<int> stale;
    for (const auto& [id, e] : g.edges())
      if (e.from == u && e.to == u && e.length < min_length_m) stale.push_back(id);
    for (int id : stale) g.remove_edge(id);
    ++merges;
  }
  return merges;
}

}  // namespace traj_atlas
