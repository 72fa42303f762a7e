#include "aqcast/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "aqcast/csv.hpp"
#include "aqcast/errors.hpp"

namespace aqcast {

RasterGrid::RasterGrid(std::size_t ncols, std::size_t nrows, double xllcorner, double yllcorner,
                       double cellsize, double nodata, std::vector<double> cells)
    : ncols_(ncols), nrows_(nrows), xll_(xllcorner), yll_(yllcorner), cellsize_(cellsize),
      nodata_(nodata), cells_(std::move(cells)) {
  if (ncols_ == 0 || nrows_ == 0) throw DomainError("raster dimensions must be positive");
  if (!(cellsize_ > 0.0) || !std::isfinite(cellsize_)) throw DomainError("raster cellsize must be > 0");
  if (cells_.size() != ncols_ * nrows_) {
    throw DimensionMismatch("raster declares " + std::to_string(ncols_) + "x" +
                            std::to_string(nrows_) + " cells but holds " +
                            std::to_string(cells_.size()));
  }
}

bool RasterGrid::is_nodata(std::size_t row, std::size_t col) const noexcept {
  const double v = raw(row, col);
  return v == nodata_ || std::isnan(v);
}

std::optional<double> RasterGrid::value(std::size_t row, std::size_t col) const noexcept {
  if (is_nodata(row, col)) return std::nullopt;
  return raw(row, col);
}

std::optional<std::pair<std::size_t, std::size_t>> RasterGrid::cell_at(double x,
                                                                       double y) const noexcept {
  if (!(x >= xll_ && x <= xmax() && y >= yll_ && y <= ymax())) return std::nullopt;
  auto col = static_cast<std::size_t>(std::floor((x - xll_) / cellsize_));
  auto row_from_south = static_cast<std::size_t>(std::floor((y - yll_) / cellsize_));
  col = std::min(col, ncols_ - 1);
  row_from_south = std::min(row_from_south, nrows_ - 1);
  return std::make_pair(nrows_ - 1 - row_from_south, col);
}

// ---------------------------------------------------------------------------

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

} // namespace

RasterGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string file = path.string();

  std::optional<double> ncols, nrows, xll, yll, cellsize;
  bool x_is_center = false;
  bool y_is_center = false;
  double nodata = -9999.0;
  std::vector<double> cells;
  std::size_t line_no = 0;
  std::string line;
  bool in_header = true;

  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (in_header) {
      if (!(fields >> token)) continue;
      if (std::isalpha(static_cast<unsigned char>(token[0]))) {
        const std::string key = lower(token);
        std::string value_text;
        if (!(fields >> value_text)) {
          throw ParseError(file + ":" + std::to_string(line_no) + ": header '" + token +
                           "' has no value");
        }
        auto value = csv::parse_double(value_text);
        if (!value) {
          throw ParseError(file + ":" + std::to_string(line_no) + ": invalid value '" +
                           value_text + "' for '" + token + "'");
        }
        if (key == "ncols") ncols = value;
        else if (key == "nrows") nrows = value;
        else if (key == "xllcorner") xll = value;
        else if (key == "yllcorner") yll = value;
        else if (key == "xllcenter") { xll = value; x_is_center = true; }
        else if (key == "yllcenter") { yll = value; y_is_center = true; }
        else if (key == "cellsize") cellsize = value;
        else if (key == "nodata_value") nodata = *value;
        else {
          throw ParseError(file + ":" + std::to_string(line_no) + ": unknown header '" + token + "'");
        }
        continue;
      }
      in_header = false;
      fields.clear();
      fields.str(line);
    }
    while (fields >> token) {
      auto v = csv::parse_double(token);
      if (!v) {
        throw ParseError(file + ":" + std::to_string(line_no) + ": invalid cell value '" + token + "'");
      }
      cells.push_back(*v);
    }
  }

  if (!ncols || !nrows || !xll || !yll || !cellsize) {
    throw ParseError(file + ": incomplete header (need ncols, nrows, xllcorner, yllcorner, cellsize)");
  }
  if (*ncols < 1 || *nrows < 1 || *ncols != std::floor(*ncols) || *nrows != std::floor(*nrows)) {
    throw ParseError(file + ": ncols/nrows must be positive integers");
  }
  if (!(*cellsize > 0.0)) throw ParseError(file + ": cellsize must be > 0");
  const auto nc = static_cast<std::size_t>(*ncols);
  const auto nr = static_cast<std::size_t>(*nrows);
  if (cells.size() != nc * nr) {
    throw DimensionMismatch(file + ": header declares " + std::to_string(nc) + "x" +
                            std::to_string(nr) + " = " + std::to_string(nc * nr) +
                            " cells, found " + std::to_string(cells.size()));
  }
  const double x0 = x_is_center ? *xll - *cellsize / 2.0 : *xll;
  const double y0 = y_is_center ? *yll - *cellsize / 2.0 : *yll;
  return RasterGrid(nc, nr, x0, y0, *cellsize, nodata, std::move(cells));
}

void save_grid(const RasterGrid& grid, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "ncols " << grid.ncols() << '\n'
      << "nrows " << grid.nrows() << '\n'
      << "xllcorner " << csv::format_double(grid.xllcorner()) << '\n'
      << "yllcorner " << csv::format_double(grid.yllcorner()) << '\n'
      << "cellsize " << csv::format_double(grid.cellsize()) << '\n'
      << "NODATA_value " << csv::format_double(grid.nodata()) << '\n';
  for (std::size_t r = 0; r < grid.nrows(); ++r) {
    for (std::size_t c = 0; c < grid.ncols(); ++c) {
      if (c) out << ' ';
      out << csv::format_double(grid.raw(r, c));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------

namespace {

// Visits in-disc cells in row-major order. The bounding window is padded by one cell
// so that the membership test alone decides inclusion.
template <typename Visit>
void for_each_in_disc(const RasterGrid& grid, double x, double y, double radius, Visit&& visit) {
  if (!(radius > 0.0)) throw DomainError("radius must be > 0");
  const double cs = grid.cellsize();
  const double r2 = radius * radius;
  const auto clamp_index = [](double v, std::size_t n) -> std::size_t {
    if (v <= 0.0) return 0;
    if (v >= static_cast<double>(n - 1)) return n - 1;
    return static_cast<std::size_t>(v);
  };
  const double col_lo = std::floor((x - radius - grid.xllcorner()) / cs) - 1.0;
  const double col_hi = std::ceil((x + radius - grid.xllcorner()) / cs) + 1.0;
  const double row_lo = static_cast<double>(grid.nrows()) - std::ceil((y + radius - grid.yllcorner()) / cs) - 1.0;
  const double row_hi = static_cast<double>(grid.nrows()) - std::floor((y - radius - grid.yllcorner()) / cs) + 1.0;
  if (col_hi < 0.0 || row_hi < 0.0 || col_lo > static_cast<double>(grid.ncols() - 1) ||
      row_lo > static_cast<double>(grid.nrows() - 1)) {
    return;
  }
  const std::size_t c0 = clamp_index(col_lo, grid.ncols());
  const std::size_t c1 = clamp_index(col_hi, grid.ncols());
  const std::size_t r0 = clamp_index(row_lo, grid.nrows());
  const std::size_t r1 = clamp_index(row_hi, grid.nrows());
  for (std::size_t r = r0; r <= r1; ++r) {
    const double dy = grid.center_y(r) - y;
    for (std::size_t c = c0; c <= c1; ++c) {
      const double dx = grid.center_x(c) - x;
      if (dx * dx + dy * dy <= r2) visit(r, c);
    }
  }
}

} // namespace

std::optional<double> radius_mean(const RasterGrid& grid, double x, double y, double radius) {
  double sum = 0.0;
  std::size_t n = 0;
  for_each_in_disc(grid, x, y, radius, [&](std::size_t r, std::size_t c) {
    if (grid.is_nodata(r, c)) return;
    sum += grid.raw(r, c);
    ++n;
  });
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::vector<std::pair<std::size_t, std::size_t>> disc_cells(const RasterGrid& grid, double x,
                                                            double y, double radius) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for_each_in_disc(grid, x, y, radius,
                   [&](std::size_t r, std::size_t c) { out.emplace_back(r, c); });
  return out;
}

// ---------------------------------------------------------------------------

std::optional<LandCover> parse_land_cover(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kLandCoverCount; ++i) {
    if (kLandCoverNames[i] == name) return static_cast<LandCover>(i);
  }
  return std::nullopt;
}

std::optional<LandCover> LandCoverMap::category(long long raw_class) const noexcept {
  auto it = mapping_.find(raw_class);
  if (it == mapping_.end()) return std::nullopt;
  return it->second;
}

LandCoverMap load_classmap(const std::filesystem::path& path) {
  csv::Reader reader(path);
  reader.expect_header({"raw_class", "category"});
  std::map<long long, LandCover> mapping;
  std::vector<std::string> row;
  while (reader.next(row)) {
    const double raw = reader.parse_double(row, 0);
    if (raw != std::floor(raw)) reader.fail(0, "class code must be an integer");
    auto cat = parse_land_cover(row[1]);
    if (!cat) reader.fail(1, "unknown land-cover category '" + row[1] + "'");
    if (!mapping.emplace(static_cast<long long>(raw), *cat).second) {
      reader.fail(0, "duplicate class code " + row[0]);
    }
  }
  return LandCoverMap(std::move(mapping));
}

void save_classmap(const LandCoverMap& map, const std::filesystem::path& path) {
  auto out = csv::open_output(path);
  out << "raw_class,category\n";
  for (const auto& [raw, cat] : map.mapping()) {
    out << raw << ',' << kLandCoverNames[static_cast<std::size_t>(cat)] << '\n';
  }
}

ClassFractions class_fractions(const RasterGrid& grid, const LandCoverMap& map, double x, double y,
                               double radius) {
  std::array<std::size_t, kLandCoverCount> counts{};
  std::size_t total = 0;
  for_each_in_disc(grid, x, y, radius, [&](std::size_t r, std::size_t c) {
    if (grid.is_nodata(r, c)) return;
    const double raw = grid.raw(r, c);
    const auto code = static_cast<long long>(std::llround(raw));
    auto cat = map.category(code);
    if (!cat || static_cast<double>(code) != raw) {
      throw UnknownClass("unmapped land-cover class " + csv::format_double(raw));
    }
    ++counts[static_cast<std::size_t>(*cat)];
    ++total;
  });
  ClassFractions out{};
  if (total == 0) return out;
  for (std::size_t k = 0; k < kLandCoverCount; ++k) {
    out[k] = static_cast<double>(counts[k]) / static_cast<double>(total);
  }
  return out;
}

DemProfile dem_profile(const RasterGrid& dem, double x, double y) {
  auto cell = dem.cell_at(x, y);
  if (!cell) {
    throw OutOfExtent("point (" + csv::format_double(x) + ", " + csv::format_double(y) +
                      ") lies outside the DEM extent");
  }
  DemProfile out;
  out.alt_point = dem.value(cell->first, cell->second);
  out.alt_100m = radius_mean(dem, x, y, kPointAltitudeRadius);
  out.alt_1km = radius_mean(dem, x, y, kAreaAltitudeRadius);
  return out;
}

TopoProfile topo_profile(const RasterGrid& dem, const RasterGrid& landcover,
                         const LandCoverMap& map, double x, double y) {
  TopoProfile out;
  out.altitude = dem_profile(dem, x, y);
  out.landcover = class_fractions(landcover, map, x, y, kLandCoverRadius);
  return out;
}

} // namespace aqcast
