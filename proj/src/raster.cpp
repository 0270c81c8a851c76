#include "traj_atlas/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>

#include "raster_detail.hpp"
#include "traj_atlas/error.hpp"

namespace traj_atlas {

namespace detail {

std::vector<std::size_t> trajectory_pixels(const Trajectory& traj, const GridGeometry& geom,
                                           std::size_t& skipped) {
  std::vector<std::size_t> px;
  auto plot = [&](long long c, long long r) {
    if (c < 0 || r < 0 || c >= geom.width || r >= geom.height) {
      ++skipped;
      return;
    }
    px.push_back(geom.index(static_cast<int>(c), static_cast<int>(r)));
  };
  auto to_px = [&](const TrajectoryPoint& p) {
    const Vec2 q = geom.world_to_pixel(p.pos());
    return std::pair<long long, long long>{std::llround(q.x), std::llround(q.y)};
  };
  if (traj.points.size() == 1) {
    const auto [c, r] = to_px(traj.points[0]);
    plot(c, r);
  }
  for (std::size_t i = 0; i + 1 < traj.points.size(); ++i) {
    auto [x0, y0] = to_px(traj.points[i]);
    const auto [x1, y1] = to_px(traj.points[i + 1]);
    const long long dx = std::llabs(x1 - x0), dy = -std::llabs(y1 - y0);
    const long long sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    long long err = dx + dy;
    while (true) {
      plot(x0, y0);
      if (x0 == x1 && y0 == y1) break;
      const long long e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }
  std::sort(px.begin(), px.end());
  px.erase(std::unique(px.begin(), px.end()), px.end());
  return px;
}

void spare_vanishing_components(const BinaryImage& img, std::vector<std::uint8_t>& del) {
  std::vector<std::uint8_t> seen(img.fg.size(), 0);
  std::vector<std::size_t> stack;
  const int w = img.geom.width;
  for (std::size_t i = 0; i < del.size(); ++i) {
    if (!del[i] || seen[i]) continue;
    bool survives = false;
    seen[i] = 1;
    stack.assign(1, i);
    while (!stack.empty()) {
      const std::size_t j = stack.back();
      stack.pop_back();
      if (!del[j]) survives = true;
      const int c = static_cast<int>(j % w), r = static_cast<int>(j / w);
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if (!img.at(c + dc, r + dr)) continue;
          const std::size_t k = img.geom.index(c + dc, r + dr);
          if (!seen[k]) {
            seen[k] = 1;
            stack.push_back(k);
          }
        }
    }
    if (!survives) del[i] = 0;
  }
}

}  // namespace detail

GridGeometry fit_grid(std::span<const Trajectory> trajs, double resolution, double margin_m) {
  if (!(resolution > 0.0)) throw ValidationError("resolution must be > 0");
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool any = false;
  for (const auto& t : trajs)
    for (const auto& p : t.points) {
      if (!any) {
        x0 = x1 = p.x;
        y0 = y1 = p.y;
        any = true;
      }
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
  GridGeometry g;
  g.resolution = resolution;
  g.origin = {std::floor((x0 - margin_m) / resolution) * resolution,
              std::floor((y0 - margin_m) / resolution) * resolution};
  g.width = static_cast<int>(std::ceil((x1 + margin_m - g.origin.x) / resolution)) + 1;
  g.height = static_cast<int>(std::ceil((y1 + margin_m - g.origin.y) / resolution)) + 1;
  return g;
}

std::size_t BinaryImage::count() const {
  return static_cast<std::size_t>(std::count(fg.begin(), fg.end(), std::uint8_t{1}));
}

RasterizeResult rasterize(std::span<const Trajectory> trajs, const GridGeometry& geom) {
  if (!(geom.resolution > 0.0) || geom.size() == 0) throw ValidationError("invalid grid geometry");
  RasterizeResult res{RasterGrid(geom), 0};
  std::uint32_t* values = res.grid.values.data();
  std::size_t skipped = 0;
  const long long n = static_cast<long long>(trajs.size());
#pragma omp parallel for schedule(dynamic, 8) reduction(+ : skipped)
  for (long long i = 0; i < n; ++i) {
    std::size_t local_skipped = 0;
    const auto px = detail::trajectory_pixels(trajs[static_cast<std::size_t>(i)], geom, local_skipped);
    skipped += local_skipped;
    for (std::size_t idx : px) {
#pragma omp atomic
      values[idx] += 1;
    }
  }
  res.skipped_pixels = skipped;
  return res;
}

namespace {

RasterGrid separable_filter(const RasterGrid& grid, int radius, bool take_min) {
  if (radius < 1) throw ValidationError("radius_px must be >= 1");
  const int w = grid.geom.width, h = grid.geom.height;
  RasterGrid tmp(grid.geom), out(grid.geom);
  auto better = [take_min](std::uint32_t a, std::uint32_t b) { return take_min ? a < b : a > b; };
#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r)
    detail::filter_line(grid.values.data() + grid.geom.index(0, r), tmp.values.data() + grid.geom.index(0, r), w, 1,
                        radius, better);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < w; ++c)
    detail::filter_line(tmp.values.data() + c, out.values.data() + c, h, w, radius, better);
  return out;
}

}  // namespace

RasterGrid erode(const RasterGrid& grid, int radius_px) { return separable_filter(grid, radius_px, true); }
RasterGrid dilate(const RasterGrid& grid, int radius_px) { return separable_filter(grid, radius_px, false); }

RasterGrid morphological_denoise(const RasterGrid& grid, std::span<const MorphPass> passes) {
  RasterGrid cur = grid;
  for (const auto& p : passes) {
    if (p.op == MorphOp::Open)
      cur = dilate(erode(cur, p.radius_px), p.radius_px);
    else
      cur = erode(dilate(cur, p.radius_px), p.radius_px);
  }
  return cur;
}

BinaryImage binarize(const RasterGrid& grid, std::uint32_t threshold) {
  if (threshold < 1) throw ValidationError("threshold must be >= 1");
  BinaryImage out(grid.geom);
  const long long n = static_cast<long long>(grid.values.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) out.fg[i] = grid.values[i] >= threshold ? 1 : 0;
  return out;
}

Skeleton thin(const BinaryImage& img) {
  BinaryImage cur = img;
  const int w = cur.geom.width, h = cur.geom.height;
  std::vector<std::uint8_t> del(cur.fg.size(), 0);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      int any = 0;
#pragma omp parallel for schedule(static) reduction(| : any)
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
          const std::size_t i = cur.geom.index(c, r);
          const bool d = cur.fg[i] && detail::zs_deletable(cur, c, r, pass);
          del[i] = d;
          any |= d ? 1 : 0;
        }
      if (!any) continue;
      detail::spare_vanishing_components(cur, del);
      changed = true;
      const long long n = static_cast<long long>(cur.fg.size());
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < n; ++i)
        if (del[i]) cur.fg[i] = 0;
    }
  }
  return Skeleton{std::move(cur)};
}

int neighbor_count(const BinaryImage& img, int col, int row) {
  int n = 0;
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc)
      if ((dr || dc) && img.at(col + dc, row + dr)) ++n;
  return n;
}

namespace {

// Offsets of the 8-ring, clockwise from north (row - 1).
constexpr int kRing[8][2] = {{0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}};

bool is_simple_corner(const BinaryImage& img, int c, int r) {
  bool ring[8];
  int fg = 0;
  for (int k = 0; k < 8; ++k) {
    ring[k] = img.at(c + kRing[k][0], r + kRing[k][1]);
    fg += ring[k];
  }
  if (fg < 2) return false;
  // Must sit on an inside corner: two orthogonal 4-neighbours set.
  const bool n = ring[0], e = ring[2], s = ring[4], wv = ring[6];
  if (!((n && e) || (e && s) || (s && wv) || (wv && n))) return false;
  // 8-connected foreground components among ring pixels.
  int fg_components = 0;
  bool seen[8] = {};
  for (int k = 0; k < 8; ++k) {
    if (!ring[k] || seen[k]) continue;
    ++fg_components;
    int stack[8], top = 0;
    stack[top++] = k;
    seen[k] = true;
    while (top) {
      const int cur = stack[--top];
      for (int j = 0; j < 8; ++j) {
        if (!ring[j] || seen[j]) continue;
        const int dx = kRing[cur][0] - kRing[j][0], dy = kRing[cur][1] - kRing[j][1];
        if (dx >= -1 && dx <= 1 && dy >= -1 && dy <= 1) {
          seen[j] = true;
          stack[top++] = j;
        }
      }
    }
  }
  if (fg_components != 1) return false;
  // 4-connected background components touching a 4-neighbour of the pixel.
  int bg_components = 0;
  bool bseen[8] = {};
  for (int k = 0; k < 8; k += 2) {
    if (ring[k] || bseen[k]) continue;
    ++bg_components;
    int stack[8], top = 0;
    stack[top++] = k;
    bseen[k] = true;
    while (top) {
      const int cur = stack[--top];
      // consecutive ring cells are 4-adjacent, all others are not
      for (int j : {(cur + 1) % 8, (cur + 7) % 8}) {
        if (ring[j] || bseen[j]) continue;
        bseen[j] = true;
        stack[top++] = j;
      }
    }
  }
  return bg_components == 1;
}

}  // namespace

Skeleton remove_staircases(Skeleton skel) {
  auto& img = skel.image;
  const int w = img.geom.width, h = img.geom.height;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (img.at(c, r) && is_simple_corner(img, c, r)) {
          img.set(c, r, false);
          changed = true;
        }
  }
  return skel;
}

namespace {

// True when the foreground neighbours of (c, r), other than (xc, xr), form a
// single 8-connected group.
bool rest_is_one_group(const BinaryImage& img, int c, int r, int xc, int xr) {
  std::vector<std::pair<int, int>> pts;
  for (const auto& d : kRing) {
    const int nc = c + d[0], nr = r + d[1];
    if ((nc != xc || nr != xr) && img.at(nc, nr)) pts.emplace_back(nc, nr);
  }
  if (pts.empty()) return false;
  std::vector<int> group(pts.size(), -1);
  group[0] = 0;
  for (bool grew = true; grew;) {
    grew = false;
    for (std::size_t a = 0; a < pts.size(); ++a) {
      if (group[a] != 0) continue;
      for (std::size_t b = 0; b < pts.size(); ++b)
        if (group[b] < 0 && std::abs(pts[a].first - pts[b].first) <= 1 &&
            std::abs(pts[a].second - pts[b].second) <= 1) {
          group[b] = 0;
          grew = true;
        }
    }
  }
  return std::all_of(group.begin(), group.end(), [](int g) { return g == 0; });
}

}  // namespace

Skeleton prune_spurs(const Skeleton& skel, int max_spur_px) {
  Skeleton out = skel;
  auto& img = out.image;
  const int w = img.geom.width, h = img.geom.height;
  while (true) {
    std::vector<std::pair<int, int>> doomed;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        if (!img.at(c, r) || neighbor_count(img, c, r) != 1) continue;
        std::vector<std::pair<int, int>> branch{{c, r}};
        int pc = -1, pr = -1, cc = c, cr = r;
        bool reached_junction = false;
        std::optional<std::pair<int, int>> tail;
        while (static_cast<int>(branch.size()) <= max_spur_px + 1) {
          if ((cc != c || cr != r) && neighbor_count(img, cc, cr) >= 3) {
            branch.pop_back();
            reached_junction = true;
            // A spur that touches the trunk diagonally ends in a pixel that
            // looks like a junction but only bridges to one side.
            if (rest_is_one_group(img, cc, cr, pc, pr)) tail = {cc, cr};
            break;
          }
          int nc = -1, nr = -1;
          for (const auto& d : kRing) {
            const int xc = cc + d[0], xr = cr + d[1];
            if ((xc == pc && xr == pr) || !img.at(xc, xr)) continue;
            nc = xc;
            nr = xr;
            break;
          }
          if (nc < 0) break;  // another endpoint: isolated segment, not a spur
          pc = cc;
          pr = cr;
          cc = nc;
          cr = nr;
          branch.emplace_back(cc, cr);
        }
        if (reached_junction && static_cast<int>(branch.size()) <= max_spur_px) {
          doomed.insert(doomed.end(), branch.begin(), branch.end());
          if (tail) doomed.push_back(*tail);
        }
      }
    if (doomed.empty()) break;
    for (const auto& [c, r] : doomed) img.set(c, r, false);
  }
  return out;
}

std::size_t count_components(const BinaryImage& img) {
  std::vector<std::uint8_t> seen(img.fg.size(), 0);
  std::size_t comps = 0;
  std::vector<std::pair<int, int>> stack;
  for (int r = 0; r < img.geom.height; ++r)
    for (int c = 0; c < img.geom.width; ++c) {
      const std::size_t i = img.geom.index(c, r);
      if (!img.fg[i] || seen[i]) continue;
      ++comps;
      seen[i] = 1;
      stack.emplace_back(c, r);
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        for (const auto& d : kRing) {
          const int xc = x + d[0], yr = y + d[1];
          if (!img.at(xc, yr)) continue;
          const std::size_t j = img.geom.index(xc, yr);
          if (seen[j]) continue;
          seen[j] = 1;
          stack.emplace_back(xc, yr);
        }
      }
    }
  return comps;
}

void write_pgm(const std::filesystem::path& path, const RasterGrid& grid) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  std::uint32_t maxv = 1;
  for (auto v : grid.values) maxv = std::max(maxv, v);
  out << "P2\n" << grid.geom.width << ' ' << grid.geom.height << '\n' << maxv << '\n';
  for (int r = grid.geom.height - 1; r >= 0; --r) {
    for (int c = 0; c < grid.geom.width; ++c) out << (c ? " " : "") << grid.at(c, r);
    out << '\n';
  }
}

void write_pbm(const std::filesystem::path& path, const BinaryImage& img) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P1\n" << img.geom.width << ' ' << img.geom.height << '\n';
  for (int r = img.geom.height - 1; r >= 0; --r) {
    for (int c = 0; c < img.geom.width; ++c) out << (c ? " " : "") << (img.at(c, r) ? 1 : 0);
    out << '\n';
  }
}

}  // namespace traj_atlas
