#pragma once

// Brute-force full-grid scans used as oracles for the windowed zonal statistics.

#include <optional>
#include <random>

#include "aqcast/raster.hpp"

namespace oracle {

inline bool in_disc(const aqcast::RasterGrid& g, std::size_t r, std::size_t c, double x, double y, double radius) {
  const double cx = g.xllcorner() + (static_cast<double>(c) + 0.5) * g.cellsize();
  const double cy = g.yllcorner() + (static_cast<double>(g.nrows() - r) - 0.5) * g.cellsize();
  const double dx = cx - x;
  const double dy = cy - y;
  return dx * dx + dy * dy <= radius * radius;
}

inline std::optional<double> radius_mean(const aqcast::RasterGrid& g, double x, double y, double radius) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < g.nrows(); ++r) {
    for (std::size_t c = 0; c < g.ncols(); ++c) {
      if (!in_disc(g, r, c, x, y, radius) || g.is_nodata(r, c)) continue;
      sum += g.raw(r, c);
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

inline aqcast::ClassFractions class_fractions(const aqcast::RasterGrid& g, const aqcast::LandCoverMap& map,
                                              double x, double y, double radius) {
  aqcast::ClassFractions counts{};
  double n = 0.0;
  for (std::size_t r = 0; r < g.nrows(); ++r) {
    for (std::size_t c = 0; c < g.ncols(); ++c) {
      if (!in_disc(g, r, c, x, y, radius) || g.is_nodata(r, c)) continue;
      counts[static_cast<std::size_t>(*map.category(static_cast<long long>(g.raw(r, c))))] += 1.0;
      n += 1.0;
    }
  }
  if (n > 0.0) {
    for (auto& v : counts) v /= n;
  }
  return counts;
}

struct Instance {
  aqcast::RasterGrid grid;
  double x = 0.0;
  double y = 0.0;
  double radius = 1.0;
};

// Random grid (with nodata holes), query point around the extent and radius.
// `classes` > 0 draws integer class codes in [1, classes] instead of real values.
inline Instance random_instance(std::mt19937_64& rng, int classes = 0) {
  std::uniform_int_distribution<int> dim(1, 25);
  const double sizes[] = {1.0, 10.0, 30.0, 100.0, 250.5};
  const double cs = sizes[std::uniform_int_distribution<int>(0, 4)(rng)];
  const std::size_t nc = dim(rng), nr = dim(rng);
  const double xll = std::uniform_real_distribution<double>(-1e5, 1e6)(rng);
  const double yll = std::uniform_real_distribution<double>(4e6, 5e6)(rng);
  std::vector<double> cells(nc * nr);
  std::uniform_real_distribution<double> value(-50.0, 500.0);
  std::uniform_int_distribution<int> cls(1, classes > 0 ? classes : 1);
  std::bernoulli_distribution hole(0.1);
  for (auto& v : cells) v = hole(rng) ? -9999.0 : (classes > 0 ? cls(rng) : value(rng));
  Instance out{aqcast::RasterGrid(nc, nr, xll, yll, cs, -9999.0, std::move(cells))};
  std::uniform_real_distribution<double> fx(-0.3, 1.3);
  out.x = xll + fx(rng) * cs * static_cast<double>(nc);
  out.y = yll + fx(rng) * cs * static_cast<double>(nr);
  // Snap some queries to cell centers, where ties on the disc boundary happen.
  if (std::bernoulli_distribution(0.3)(rng)) {
    out.x = xll + (std::floor(fx(rng) * static_cast<double>(nc)) + 0.5) * cs;
    out.y = yll + (std::floor(fx(rng) * static_cast<double>(nr)) + 0.5) * cs;
    out.radius = cs * static_cast<double>(std::uniform_int_distribution<int>(1, 6)(rng));
  } else {
    out.radius = std::uniform_real_distribution<double>(0.01, 8.0)(rng) * cs;
  }
  return out;
}

} // namespace oracle
