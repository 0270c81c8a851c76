#pragma once

// Per-pixel rules shared by the serial and OpenMP raster kernels.

#include <array>
#include <cstdint>
#include <vector>

#include "traj_atlas/raster.hpp"

namespace traj_atlas::detail {

// Sorted, unique in-grid pixel indices touched by the trajectory polyline.
std::vector<std::size_t> trajectory_pixels(const Trajectory& traj, const GridGeometry& geom,
                                           std::size_t& skipped);

// Zhang-Suen neighbourhood P2..P9 clockwise from the pixel above (row - 1).
inline std::array<std::uint8_t, 8> zs_neighbors(const BinaryImage& img, int c, int r) {
  return {static_cast<std::uint8_t>(img.at(c, r - 1)), static_cast<std::uint8_t>(img.at(c + 1, r - 1)),
          static_cast<std::uint8_t>(img.at(c + 1, r)), static_cast<std::uint8_t>(img.at(c + 1, r + 1)),
          static_cast<std::uint8_t>(img.at(c, r + 1)), static_cast<std::uint8_t>(img.at(c - 1, r + 1)),
          static_cast<std::uint8_t>(img.at(c - 1, r)), static_cast<std::uint8_t>(img.at(c - 1, r - 1))};
}

// True when the foreground pixel (c, r) is deleted in sub-iteration `pass`
// (0 or 1).
inline bool zs_deletable(const BinaryImage& img, int c, int r, int pass) {
  const auto p = zs_neighbors(img, c, r);
  int b = 0;
  for (auto v : p) b += v;
  if (b < 2 || b > 6) return false;
  int a = 0;
  for (int i = 0; i < 8; ++i)
    if (p[i] == 0 && p[(i + 1) % 8] == 1) ++a;
  if (a != 1) return false;
  // p[0]=P2 (N), p[2]=P4 (E), p[4]=P6 (S), p[6]=P8 (W)
  if (pass == 0) return (p[0] * p[2] * p[4]) == 0 && (p[2] * p[4] * p[6]) == 0;
  return (p[0] * p[2] * p[6]) == 0 && (p[0] * p[4] * p[6]) == 0;
}

// Clears the deletion mark of the lowest-index pixel of any component whose
// pixels are all marked. Plain Zhang-Suen erases isolated 2x2 blocks.
void spare_vanishing_components(const BinaryImage& img, std::vector<std::uint8_t>& del);

// 1-D sliding min/max with a window clamped to [0, n).
template <typename Cmp>
void filter_line(const std::uint32_t* in, std::uint32_t* out, int n, std::ptrdiff_t stride, int radius, Cmp better) {
  for (int i = 0; i < n; ++i) {
    const int lo = i - radius < 0 ? 0 : i - radius;
    const int hi = i + radius >= n ? n - 1 : i + radius;
    std::uint32_t v = in[lo * stride];
    for (int j = lo + 1; j <= hi; ++j)
      if (better(in[j * stride], v)) v = in[j * stride];
    out[i * stride] = v;
  }
}

}  // namespace traj_atlas::detail
