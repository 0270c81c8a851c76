#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "traj_atlas/geometry.hpp"
#include "traj_atlas/trajectory.hpp"

namespace traj_atlas {

// World registration of a pixel lattice. Pixel (col, row) has its center at
// origin + (col, row) * resolution; rows grow with +y.
struct GridGeometry {
  Vec2 origin;
  double resolution = 1.0;  // meters per pixel
  int width = 0;
  int height = 0;

  std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool contains(int col, int row) const { return col >= 0 && row >= 0 && col < width && row < height; }
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col);
  }
  Vec2 pixel_to_world(double col, double row) const {
    return {origin.x + col * resolution, origin.y + row * resolution};
  }
  // Continuous pixel coordinates (col, row) of a world point.
  Vec2 world_to_pixel(Vec2 p) const {
    return {(p.x - origin.x) / resolution, (p.y - origin.y) / resolution};
  }
  bool operator==(const GridGeometry&) const = default;
};

// Smallest grid at `resolution` covering every point plus `margin_m`.
GridGeometry fit_grid(std::span<const Trajectory> trajs, double resolution, double margin_m);

struct RasterGrid {
  GridGeometry geom;
  std::vector<std::uint32_t> values;

  explicit RasterGrid(GridGeometry g = {}) : geom(g), values(g.size(), 0) {}
  std::uint32_t at(int col, int row) const { return values[geom.index(col, row)]; }
  std::uint32_t& at(int col, int row) { return values[geom.index(col, row)]; }
  bool operator==(const RasterGrid&) const = default;
};

struct BinaryImage {
  GridGeometry geom;
  std::vector<std::uint8_t> fg;  // 1 = foreground

  explicit BinaryImage(GridGeometry g = {}) : geom(g), fg(g.size(), 0) {}
  bool at(int col, int row) const { return geom.contains(col, row) && fg[geom.index(col, row)] != 0; }
  void set(int col, int row, bool v) { fg[geom.index(col, row)] = v ? 1 : 0; }
  std::size_t count() const;
  bool operator==(const BinaryImage&) const = default;
};

// A binary image whose foreground is one pixel wide.
struct Skeleton {
  BinaryImage image;
  bool operator==(const Skeleton&) const = default;
};

struct RasterizeResult {
  RasterGrid grid;
  std::size_t skipped_pixels = 0;  // line pixels that fell outside the grid
};

enum class MorphOp { Open, Close };

struct MorphPass {
  MorphOp op = MorphOp::Open;
  int radius_px = 1;
};

// --- OpenMP kernels ----------------------------------------------------------
// Each has a serial twin in `serial::` with identical output for any thread
// count.

// Each trajectory adds 1 to every pixel its Bresenham polyline touches,
// counting a pixel at most once per trajectory.
RasterizeResult rasterize(std::span<const Trajectory> trajs, const GridGeometry& geom);

// Grayscale min / max filters over a (2r+1)^2 square; out-of-grid cells are
// ignored.
RasterGrid erode(const RasterGrid& grid, int radius_px);
RasterGrid dilate(const RasterGrid& grid, int radius_px);
RasterGrid morphological_denoise(const RasterGrid& grid, std::span<const MorphPass> passes);

BinaryImage binarize(const RasterGrid& grid, std::uint32_t threshold);

// Two-subiteration Zhang-Suen thinning, iterated to a fixed point. A
// subiteration never deletes every pixel of a component; the lowest-index
// pixel is kept instead.
Skeleton thin(const BinaryImage& img);

namespace serial {
RasterizeResult rasterize(std::span<const Trajectory> trajs, const GridGeometry& geom);
RasterGrid erode(const RasterGrid& grid, int radius_px);
RasterGrid dilate(const RasterGrid& grid, int radius_px);
RasterGrid morphological_denoise(const RasterGrid& grid, std::span<const MorphPass> passes);
BinaryImage binarize(const RasterGrid& grid, std::uint32_t threshold);
Skeleton thin(const BinaryImage& img);
}  // namespace serial

// --- skeleton cleanup --------------------------------------------------------

// Number of 8-neighbours in the foreground.
int neighbor_count(const BinaryImage& img, int col, int row);

// Deletes staircase corner pixels (a pixel whose foreground neighbours form a
// single 8-connected group and whose removal keeps the 4-connected background
// intact). Thinning leaves these behind and they read as false junctions.
Skeleton remove_staircases(Skeleton skel);

// Deletes every endpoint-to-junction branch of at most `max_spur_px` pixels,
// repeating until no such branch remains.
Skeleton prune_spurs(const Skeleton& skel, int max_spur_px);

// Grid pixels forming one 8-connected group are one component.
std::size_t count_components(const BinaryImage& img);

// --- debug dumps (plain PGM / PBM, north up) ---------------------------------

void write_pgm(const std::filesystem::path& path, const RasterGrid& grid);
void write_pbm(const std::filesystem::path& path, const BinaryImage& img);

}  // namespace traj_atlas
