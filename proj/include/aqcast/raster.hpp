#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace aqcast {

// Uniform north-up grid in a projected CRS (meters). Row 0 is the northernmost row.
class RasterGrid {
public:
  RasterGrid() = default;
  // Throws DimensionMismatch / DomainError on inconsistent geometry.
  RasterGrid(std::size_t ncols, std::size_t nrows, double xllcorner, double yllcorner,
             double cellsize, double nodata, std::vector<double> cells);

  std::size_t ncols() const noexcept { return ncols_; }
  std::size_t nrows() const noexcept { return nrows_; }
  double xllcorner() const noexcept { return xll_; }
  double yllcorner() const noexcept { return yll_; }
  double cellsize() const noexcept { return cellsize_; }
  double nodata() const noexcept { return nodata_; }
  const std::vector<double>& cells() const noexcept { return cells_; }

  double xmax() const noexcept { return xll_ + static_cast<double>(ncols_) * cellsize_; }
  double ymax() const noexcept { return yll_ + static_cast<double>(nrows_) * cellsize_; }

  double raw(std::size_t row, std::size_t col) const noexcept { return cells_[row * ncols_ + col]; }
  bool is_nodata(std::size_t row, std::size_t col) const noexcept;
  // Missing for nodata cells.
  std::optional<double> value(std::size_t row, std::size_t col) const noexcept;

  double center_x(std::size_t col) const noexcept {
    return xll_ + (static_cast<double>(col) + 0.5) * cellsize_;
  }
  double center_y(std::size_t row) const noexcept {
    return yll_ + (static_cast<double>(nrows_ - row) - 0.5) * cellsize_;
  }

  // Cell containing (x, y); the east and north edges belong to the last column/row.
  std::optional<std::pair<std::size_t, std::size_t>> cell_at(double x, double y) const noexcept;

  friend bool operator==(const RasterGrid&, const RasterGrid&) = default;

private:
  std::size_t ncols_ = 0;
  std::size_t nrows_ = 0;
  double xll_ = 0.0;
  double yll_ = 0.0;
  double cellsize_ = 1.0;
  double nodata_ = -9999.0;
  std::vector<double> cells_;
};

// ESRI ASCII grid. Throws ParseError (with line) or DimensionMismatch.
RasterGrid load_grid(const std::filesystem::path& path);
void save_grid(const RasterGrid& grid, const std::filesystem::path& path);

// Mean of the non-nodata cells whose centers lie within `radius` of (x, y),
// summed in row-major order. Missing if no such cell.
std::optional<double> radius_mean(const RasterGrid& grid, double x, double y, double radius);

// Row-major (row, col) indices of cells whose centers lie within `radius` of (x, y),
// including nodata cells.
std::vector<std::pair<std::size_t, std::size_t>> disc_cells(const RasterGrid& grid, double x,
                                                            double y, double radius);

// ---------------------------------------------------------------------------
// Land cover

enum class LandCover : std::uint8_t {
  urban = 0, road, railways, port, airports, extraction, no_use, green, open_spaces, water
};

inline constexpr std::size_t kLandCoverCount = 10;
inline constexpr std::array<std::string_view, kLandCoverCount> kLandCoverNames{
    "urban", "road", "railways", "port", "airports",
    "extraction", "no_use", "green", "open_spaces", "water"};

std::optional<LandCover> parse_land_cover(std::string_view name) noexcept;

// Raw land-cover class codes mapped onto the ten aggregate categories.
class LandCoverMap {
public:
  LandCoverMap() = default;
  explicit LandCoverMap(std::map<long long, LandCover> mapping) : mapping_(std::move(mapping)) {}

  std::optional<LandCover> category(long long raw_class) const noexcept;
  const std::map<long long, LandCover>& mapping() const noexcept { return mapping_; }

private:
  std::map<long long, LandCover> mapping_;
};

// classmap.csv: `raw_class,category`. Throws SchemaError.
LandCoverMap load_classmap(const std::filesystem::path& path);
void save_classmap(const LandCoverMap& map, const std::filesystem::path& path);

using ClassFractions = std::array<double, kLandCoverCount>;

// Fraction of in-disc non-nodata cells per category; all zero for an empty disc.
// Throws UnknownClass if an in-disc class code is unmapped.
ClassFractions class_fractions(const RasterGrid& grid, const LandCoverMap& map, double x, double y,
                               double radius);

// ---------------------------------------------------------------------------
// Static topography block

inline constexpr double kPointAltitudeRadius = 100.0;
inline constexpr double kAreaAltitudeRadius = 1000.0;
inline constexpr double kLandCoverRadius = 500.0;
inline constexpr double kSatelliteRadius = 500.0;

struct DemProfile {
  std::optional<double> alt_point;
  std::optional<double> alt_100m;
  std::optional<double> alt_1km;
};

// Throws OutOfExtent if (x, y) lies outside the grid bounding box.
DemProfile dem_profile(const RasterGrid& dem, double x, double y);

struct TopoProfile {
  DemProfile altitude;
  ClassFractions landcover{};
};

TopoProfile topo_profile(const RasterGrid& dem, const RasterGrid& landcover,
                         const LandCoverMap& map, double x, double y);

} // namespace aqcast
