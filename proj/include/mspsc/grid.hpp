#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>

namespace mspsc {

// The emotion grid: 8x8 cells over the attitude (x, negative -> positive)
// and energy (y, low -> high) plane, both axes on [0, 100].
inline constexpr int kGridSide = 8;
inline constexpr int kCellCount = kGridSide * kGridSide;
inline constexpr double kAxisMin = 0.0;
inline constexpr double kAxisMax = 100.0;
inline constexpr double kCellPitch = (kAxisMax - kAxisMin) / kGridSide;  // 12.5

// Correctness tolerance used both for the utility update and for scoring.
inline constexpr double kDefaultTolerance = 13.0;

struct EmotionPoint {
  double attitude = 50.0;
  double energy = 50.0;

  bool valid() const noexcept;
  friend bool operator==(const EmotionPoint&, const EmotionPoint&) = default;
};

// Throws Error{OutOfRange} unless both coordinates are finite and in [0,100].
EmotionPoint make_point(double attitude, double energy);

class GridIndex {
 public:
  constexpr GridIndex() = default;
  // Throws Error{OutOfRange} for col/row outside 0..7.
  GridIndex(int col, int row);

  // Wire form: row * 8 + col.
  static GridIndex from_ordinal(int ordinal);
  int ordinal() const noexcept { return row_ * kGridSide + col_; }

  int col() const noexcept { return col_; }
  int row() const noexcept { return row_; }

  friend auto operator<=>(const GridIndex& a, const GridIndex& b) noexcept {
    return a.ordinal() <=> b.ordinal();
  }
  friend bool operator==(const GridIndex&, const GridIndex&) = default;

 private:
  std::int8_t col_ = 0;
  std::int8_t row_ = 0;
};

std::array<GridIndex, kCellCount> all_cells();

EmotionPoint grid_center(GridIndex index) noexcept;

// Minimizes the max-axis distance to a cell center; on a tie each axis
// resolves to the lower index.
GridIndex nearest_cell(EmotionPoint p) noexcept;

// Chebyshev (max-axis) distance.
double max_axis_distance(EmotionPoint a, EmotionPoint b) noexcept;

// Box test: both per-axis deltas within eps.
bool within_tolerance(EmotionPoint a, EmotionPoint b, double eps) noexcept;

inline bool cells_within_tolerance(GridIndex a, GridIndex b, double eps) noexcept {
  return within_tolerance(grid_center(a), grid_center(b), eps);
}

// Two decimals per coordinate, e.g. "6.25,93.75".
std::string format_point(EmotionPoint p);

}  // namespace mspsc
