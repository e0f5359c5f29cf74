#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "scimap/analysis.hpp"
#include "scimap/error.hpp"

namespace scimap {

double signed_area(const Ring& ring) {
  double a = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& p = ring[i];
    const auto& q = ring[(i + 1) % ring.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

bool point_in_region(const std::vector<Ring>& rings, Point2 p) {
  bool inside = false;
  for (const auto& ring : rings) {
    for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
      const auto& a = ring[i];
      const auto& b = ring[j];
      if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
    }
  }
  return inside;
}

std::vector<Ring> marching_squares(std::span<const double> values, std::size_t nx, std::size_t ny, double x0,
                                   double y0, double dx, double dy, double threshold) {
  if (values.size() != nx * ny) throw Error(ErrorKind::DimensionMismatch, "marching_squares: grid size mismatch");
  if (nx == 0 || ny == 0) return {};

  // Surround the grid with one ring of below-threshold nodes so contours close.
  const std::size_t gx = nx + 2, gy = ny + 2;
  double lowest = threshold;
  for (double v : values) lowest = std::min(lowest, v);
  const double pad = lowest - 1.0 - std::abs(threshold);
  std::vector<double> g(gx * gy, pad);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) g[(j + 1) * gx + (i + 1)] = values[j * nx + i];
  const double ox = x0 - dx, oy = y0 - dy;

  auto value = [&](std::size_t i, std::size_t j) { return g[j * gx + i]; };
  auto inside = [&](std::size_t i, std::size_t j) { return value(i, j) >= threshold; };
  // Edge ids: horizontal (i,j)-(i+1,j) -> 2*(j*gx+i); vertical (i,j)-(i,j+1) -> 2*(j*gx+i)+1.
  auto edge_point = [&](std::uint64_t e) {
    const std::size_t node = e / 2;
    const std::size_t i = node % gx, j = node / gx;
    const bool vertical = e % 2 == 1;
    const std::size_t i2 = vertical ? i : i + 1;
    const std::size_t j2 = vertical ? j + 1 : j;
    const double a = value(i, j), b = value(i2, j2);
    const double t = a == b ? 0.5 : std::clamp((threshold - a) / (b - a), 0.0, 1.0);
    const double px = ox + dx * (static_cast<double>(i) + (vertical ? 0.0 : t));
    const double py = oy + dy * (static_cast<double>(j) + (vertical ? t : 0.0));
    return Point2{px, py};
  };

  std::vector<std::pair<std::uint64_t, std::uint64_t>> segments;
  for (std::size_t j = 0; j + 1 < gy; ++j) {
    for (std::size_t i = 0; i + 1 < gx; ++i) {
      // Corners counter-clockwise from bottom-left; edge k joins corner k to corner k+1.
      const bool in[4] = {inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)};
      const std::uint64_t edges[4] = {2 * (j * gx + i), 2 * (j * gx + i + 1) + 1, 2 * ((j + 1) * gx + i),
                                      2 * (j * gx + i) + 1};
      int crossings = 0;
      for (int k = 0; k < 4; ++k) crossings += in[k] != in[(k + 1) % 4];
      if (crossings == 0) continue;
      bool connected = false;
      if (crossings == 4) {
        const double center = 0.25 * (value(i, j) + value(i + 1, j) + value(i + 1, j + 1) + value(i, j + 1));
        connected = center >= threshold;
      }
      for (int k = 0; k < 4; ++k) {
        if (!(in[k] && !in[(k + 1) % 4])) continue;  // start at in->out edges
        int partner;
        if (crossings == 2) {
          partner = (k + 1) % 4;
          while (!(!in[partner] && in[(partner + 1) % 4])) partner = (partner + 1) % 4;
        } else {
          partner = connected ? (k + 1) % 4 : (k + 3) % 4;
        }
        segments.emplace_back(edges[k], edges[partner]);
      }
    }
  }

  std::unordered_map<std::uint64_t, std::size_t> by_start;
  by_start.reserve(segments.size());
  for (std::size_t s = 0; s < segments.size(); ++s) by_start.emplace(segments[s].first, s);
  std::vector<bool> used(segments.size(), false);
  std::vector<Ring> rings;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    Ring ring;
    std::size_t cur = s;
    while (!used[cur]) {
      used[cur] = true;
      ring.push_back(edge_point(segments[cur].first));
      auto it = by_start.find(segments[cur].second);
      if (it == by_start.end()) break;
      cur = it->second;
    }
    if (ring.size() >= 3) rings.push_back(std::move(ring));
  }
  return rings;
}

double kde_density(std::span<const Point2> points, double hx, double hy, Point2 at) {
  double sum = 0.0;
  for (const auto& p : points) {
    const double u = (at.x - p.x) / hx;
    const double v = (at.y - p.y) / hy;
    sum += std::exp(-0.5 * (u * u + v * v));
  }
  return sum / (static_cast<double>(points.size()) * 2.0 * std::numbers::pi * hx * hy);
}

KdeOutcome kde_hdr_contours(std::span<const Point2> points, const KdeOptions& opt) {
  KdeOutcome out;
  const std::size_t n = points.size();
  if (n < std::max<std::size_t>(opt.min_points, 2)) {
    out.notice = "skipped: " + std::to_string(n) + " points, need at least " + std::to_string(opt.min_points);
    return out;
  }
  for (double m : opt.levels)
    if (!(m > 0.0 && m < 1.0)) throw Error(ErrorKind::Config, "kde: mass levels must lie in (0, 1)");
  if (opt.grid_size < 2) throw Error(ErrorKind::Config, "kde: grid_size must be at least 2");

  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double vx = 0.0, vy = 0.0;
  for (const auto& p : points) {
    vx += (p.x - mx) * (p.x - mx);
    vy += (p.y - my) * (p.y - my);
  }
  const double sx = std::sqrt(vx / static_cast<double>(n - 1));
  const double sy = std::sqrt(vy / static_cast<double>(n - 1));

  double hx, hy;
  if (opt.bandwidth) {
    if (!(*opt.bandwidth > 0.0)) throw Error(ErrorKind::Config, "kde: bandwidth must be positive");
    hx = hy = *opt.bandwidth;
  } else {
    // Scott's rule in two dimensions: sigma * n^(-1/6).
    const double factor = std::pow(static_cast<double>(n), -1.0 / 6.0);
    hx = sx * factor;
    hy = sy * factor;
  }
  if (!(hx > 0.0) || !(hy > 0.0) || !std::isfinite(hx) || !std::isfinite(hy)) {
    out.notice = "skipped: degenerate spread, bandwidth undefined";
    return out;
  }

  // Density at the sample points.
  std::vector<double> at_points(n);
  for (std::size_t i = 0; i < n; ++i) at_points[i] = kde_density(points, hx, hy, points[i]);
  std::vector<double> sorted = at_points;
  std::sort(sorted.begin(), sorted.end());

  // Density on the grid; the Gaussian kernel factorizes per axis.
  const std::size_t G = opt.grid_size;
  double minx = points[0].x, maxx = minx, miny = points[0].y, maxy = miny;
  for (const auto& p : points) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  const double x0 = minx - opt.padding * hx, x1 = maxx + opt.padding * hx;
  const double y0 = miny - opt.padding * hy, y1 = maxy + opt.padding * hy;
  const double dx = (x1 - x0) / static_cast<double>(G - 1);
  const double dy = (y1 - y0) / static_cast<double>(G - 1);
  std::vector<double> kx(n * G), ky(n * G);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t g = 0; g < G; ++g) {
      const double u = (x0 + dx * static_cast<double>(g) - points[i].x) / hx;
      const double v = (y0 + dy * static_cast<double>(g) - points[i].y) / hy;
      kx[i * G + g] = std::exp(-0.5 * u * u);
      ky[i * G + g] = std::exp(-0.5 * v * v);
    }
  }
  const double norm = 1.0 / (static_cast<double>(n) * 2.0 * std::numbers::pi * hx * hy);
  std::vector<double> grid(G * G, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* rx = &kx[i * G];
    const double* ry = &ky[i * G];
    for (std::size_t gy = 0; gy < G; ++gy) {
      const double wy = ry[gy];
      if (wy < 1e-300) continue;
      double* row = &grid[gy * G];
      for (std::size_t gx = 0; gx < G; ++gx) row[gx] += rx[gx] * wy;
    }
  }
  for (auto& v : grid) v *= norm;

  KdeResult result;
  result.bandwidth_x = hx;
  result.bandwidth_y = hy;
  for (double m : opt.levels) {
    HdrLevel level;
    level.mass = m;
    level.threshold = quantile_sorted(sorted, 1.0 - m);
    level.rings = marching_squares(grid, G, G, x0, y0, dx, dy, level.threshold);
    for (const auto& r : level.rings) level.area += signed_area(r);
    result.levels.push_back(std::move(level));
  }
  out.result = std::move(result);
  return out;
}

}  // namespace scimap
