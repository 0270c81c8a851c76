#include "traj_atlas/pipeline.hpp"

#include <spdlog/spdlog.h>

#include "traj_atlas/error.hpp"
#include "traj_atlas/graph_extract.hpp"

namespace traj_atlas {

namespace {

template <class F>
auto stage(const char* name, F&& fn) {
  auto label = [name](const std::exception& e) { return std::string(name) + ": " + e.what(); };
  try {
    return fn();
  } catch (const ParseError& e) {
    throw ParseError(label(e));
  } catch (const IoError& e) {
    throw IoError(label(e));
  } catch (const ValidationError& e) {
    throw ValidationError(label(e));
  } catch (const NoCoverageError& e) {
    throw NoCoverageError(label(e));
  } catch (const Error& e) {
    throw Error(label(e));
  }
}

}  // namespace

std::vector<Trajectory> preprocess(std::span<const Trajectory> raw, const MapBuildParams& p) {
  std::vector<Trajectory> out;
  for (const auto& t : raw)
    for (auto& piece : split_and_trim(t, p.min_trajectory_m, p.max_gap_s))
      if (piece.size() >= 2) out.push_back(derive_kinematics(std::move(piece)));
  return out;
}

BuildResult build_behavior_map(std::span<const Trajectory> raw, const MapBuildParams& p) {
  BuildResult res;
  res.diag.input_trajectories = raw.size();
  if (raw.empty()) throw ValidationError("no trajectories");
  res.trajectories = stage("preprocess", [&] { return preprocess(raw, p); });
  res.diag.usable_trajectories = res.trajectories.size();
  if (res.trajectories.empty()) throw ValidationError("preprocess: no trajectory survives length trimming");
  spdlog::debug("preprocess: {} of {} trajectories usable", res.trajectories.size(), raw.size());

  const BinaryImage binary = stage("raster", [&] {
    const auto geom = fit_grid(res.trajectories, p.resolution_m, p.margin_m);
    auto r = rasterize(res.trajectories, geom);
    res.diag.skipped_pixels = r.skipped_pixels;
    res.density = morphological_denoise(r.grid, p.morphology);
    return binarize(res.density, p.threshold);
  });
  res.skeleton = stage("skeleton", [&] {
    auto s = remove_staircases(thin(binary));
    return remove_staircases(prune_spurs(s, p.max_spur_px));
  });
  res.diag.skeleton_pixels = res.skeleton.image.count();
  spdlog::debug("skeleton: {} px of {} foreground", res.diag.skeleton_pixels, binary.count());

  TopoGraph graph = stage("graph", [&] {
    const auto traced = trace_edges(res.skeleton, detect_nodes(res.skeleton));
    res.diag.dropped_pixels = traced.dropped_pixels;
    auto g = build_graph(traced, res.skeleton.image.geom, p.simplify_tolerance_m);
    res.diag.raw_nodes = g.nodes().size();
    res.diag.raw_edges = g.edges().size();
    if (p.merge_junctions_m > 0.0) res.diag.merged_junctions = merge_close_junctions(g, p.merge_junctions_m);
    if (g.edges().empty()) throw ValidationError("skeleton produced no edges");
    return g;
  });
  spdlog::debug("graph: {} nodes, {} edges, {} junction merges", graph.nodes().size(), graph.edges().size(),
                res.diag.merged_junctions);

  stage("match", [&] {
    res.matches = match_all(res.trajectories, graph, p.match);
    for (const auto& m : res.matches)
      if (!m.matched) res.diag.unmatched_ids.push_back(m.trajectory_id);
    graph = prune_unused_edges(graph, res.matches, &res.diag.prune);
    const auto observed = observe_transitions(graph, res.matches);
    graph = classify_nodes(std::move(graph), observed, &res.diag.classes);
    return 0;
  });
  spdlog::debug("match: {} unmatched, {} edges pruned", res.diag.unmatched_ids.size(), res.diag.prune.removed_edges);

  res.map = stage("behavior", [&] { return build_behavior(graph, res.trajectories, res.matches, p.behavior); });
  return res;
}

}  // namespace traj_atlas
