#pragma once

#include <cstddef>
#include <vector>

#include "traj_atlas/raster.hpp"
#include "traj_atlas/topo_graph.hpp"

namespace traj_atlas {

// A graph node in pixel space: one endpoint pixel, or a clump of 8-adjacent
// junction pixels merged at its centroid.
struct PixelNode {
  std::vector<std::size_t> pixels;  // sorted grid indices
  Vec2 centroid_px;                 // (col, row)
  bool junction = false;
};

// A skeleton run between two nodes; `pixels` are the interior (non-node)
// pixels in walking order.
struct PixelPath {
  std::size_t from = 0;  // index into the node list
  std::size_t to = 0;
  std::vector<std::size_t> pixels;
};

struct TraceResult {
  std::vector<PixelNode> nodes;  // input nodes followed by any cycle anchors
  std::vector<PixelPath> paths;
  std::size_t dropped_pixels = 0;  // isolated pixels with no path
};

// Endpoints (exactly 1 foreground neighbour) and junctions (>= 3); adjacent
// junction pixels merge. Ordered by smallest pixel index.
std::vector<PixelNode> detect_nodes(const Skeleton& skel);

// Walks from every node along degree-2 pixels to the next node. Node-free
// cycles get an anchor node at their lowest pixel index and become
// self-loops.
TraceResult trace_edges(const Skeleton& skel, const std::vector<PixelNode>& nodes);

// Maps paths to world space, simplifies them (max deviation
// `simplify_tolerance_m`), and adds each path as twin directed edges
// 2k: u->v and 2k+1: v->u. Node ids are node-list indices.
TopoGraph build_graph(const TraceResult& traced, const GridGeometry& geom, double simplify_tolerance_m);

// Contracts every edge pair shorter than `min_length_m` joining two distinct
// junction nodes (total degree >= 3 each) into one node at their midpoint.
// Incident polylines are re-anchored. Returns the number of contractions.
std::size_t merge_close_junctions(TopoGraph& g, double min_length_m);

}  // namespace traj_atlas
