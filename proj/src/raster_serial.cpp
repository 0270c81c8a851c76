// Single-threaded reference versions of the raster kernels. Tests and the
// benchmark compare them against the OpenMP versions in raster.cpp.

#include <algorithm>

#include "raster_detail.hpp"
#include "traj_atlas/error.hpp"
#include "traj_atlas/raster.hpp"

namespace traj_atlas::serial {

RasterizeResult rasterize(std::span<const Trajectory> trajs, const GridGeometry& geom) {
  if (!(geom.resolution > 0.0) || geom.size() == 0) throw ValidationError("invalid grid geometry");
  RasterizeResult res{RasterGrid(geom), 0};
  for (const auto& tr : trajs)
    for (std::size_t idx : detail::trajectory_pixels(tr, geom, res.skipped_pixels)) res.grid.values[idx] += 1;
  return res;
}

namespace {

RasterGrid filter(const RasterGrid& grid, int radius, bool take_min) {
  if (radius < 1) throw ValidationError("radius_px must be >= 1");
  const int w = grid.geom.width, h = grid.geom.height;
  RasterGrid tmp(grid.geom), out(grid.geom);
  auto better = [take_min](std::uint32_t a, std::uint32_t b) { return take_min ? a < b : a > b; };
  for (int r = 0; r < h; ++r)
    detail::filter_line(&grid.values[grid.geom.index(0, r)], &tmp.values[grid.geom.index(0, r)], w, 1, radius,
                        better);
  for (int c = 0; c < w; ++c) detail::filter_line(&tmp.values[c], &out.values[c], h, w, radius, better);
  return out;
}

}  // namespace

RasterGrid erode(const RasterGrid& grid, int radius_px) { return filter(grid, radius_px, true); }
RasterGrid dilate(const RasterGrid& grid, int radius_px) { return filter(grid, radius_px, false); }

RasterGrid morphological_denoise(const RasterGrid& grid, std::span<const MorphPass> passes) {
  RasterGrid cur = grid;
  for (const auto& p : passes)
    cur = p.op == MorphOp::Open ? serial::dilate(serial::erode(cur, p.radius_px), p.radius_px)
                                : serial::erode(serial::dilate(cur, p.radius_px), p.radius_px);
  return cur;
}

BinaryImage binarize(const RasterGrid& grid, std::uint32_t threshold) {
  if (threshold < 1) throw ValidationError("threshold must be >= 1");
  BinaryImage out(grid.geom);
  for (std::size_t i = 0; i < grid.values.size(); ++i) out.fg[i] = grid.values[i] >= threshold ? 1 : 0;
  return out;
}

Skeleton thin(const BinaryImage& img) {
  BinaryImage cur = img;
  std::vector<std::uint8_t> del(cur.fg.size(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      bool any = false;
      for (int r = 0; r < cur.geom.height; ++r)
        for (int c = 0; c < cur.geom.width; ++c) {
          const std::size_t i = cur.geom.index(c, r);
          del[i] = cur.fg[i] && detail::zs_deletable(cur, c, r, pass);
          any |= del[i] != 0;
        }
      if (!any) continue;
      detail::spare_vanishing_components(cur, del);
      for (std::size_t i = 0; i < del.size(); ++i)
        if (del[i]) cur.fg[i] = 0;
      changed = true;
    }
  }
  return Skeleton{std::move(cur)};
}

}  // namespace traj_atlas::serial
