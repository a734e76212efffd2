#include "mspsc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mspsc/error.hpp"

namespace mspsc {
namespace {

double axis_center(int i) noexcept {
  return kAxisMin + kCellPitch * (2.0 * i + 1.0) / 2.0;
}

int nearest_axis_index(double v) noexcept {
  int best = 0;
  double best_dist = std::abs(v - axis_center(0));
  for (int i = 1; i < kGridSide; ++i) {
    const double dist = std::abs(v - axis_center(i));
    if (dist < best_dist) {
      best = i;
      best_dist = dist;
    }
  }
  return best;
}

bool on_axis(double v) noexcept {
  return std::isfinite(v) && v >= kAxisMin && v <= kAxisMax;
}

}  // namespace

bool EmotionPoint::valid() const noexcept {
  return on_axis(attitude) && on_axis(energy);
}

EmotionPoint make_point(double attitude, double energy) {
  EmotionPoint p{attitude, energy};
  if (!p.valid()) {
    throw Error(Errc::OutOfRange, "emotion point outside [0,100]^2");
  }
  return p;
}

GridIndex::GridIndex(int col, int row) {
  if (col < 0 || col >= kGridSide || row < 0 || row >= kGridSide) {
    throw Error(Errc::OutOfRange,
                "grid index (" + std::to_string(col) + "," + std::to_string(row) + ")");
  }
  col_ = static_cast<std::int8_t>(col);
  row_ = static_cast<std::int8_t>(row);
}

GridIndex GridIndex::from_ordinal(int ordinal) {
  if (ordinal < 0 || ordinal >= kCellCount) {
    throw Error(Errc::OutOfRange, "grid ordinal " + std::to_string(ordinal));
  }
  return GridIndex(ordinal % kGridSide, ordinal / kGridSide);
}

std::array<GridIndex, kCellCount> all_cells() {
  std::array<GridIndex, kCellCount> cells;
  for (int i = 0; i < kCellCount; ++i) cells[i] = GridIndex::from_ordinal(i);
  return cells;
}

EmotionPoint grid_center(GridIndex index) noexcept {
  return {axis_center(index.col()), axis_center(index.row())};
}

GridIndex nearest_cell(EmotionPoint p) noexcept {
  // The max-axis metric separates per axis, so each axis is solved alone.
  return GridIndex(nearest_axis_index(p.attitude), nearest_axis_index(p.energy));
}

double max_axis_distance(EmotionPoint a, EmotionPoint b) noexcept {
  return std::max(std::abs(a.attitude - b.attitude), std::abs(a.energy - b.energy));
}

bool within_tolerance(EmotionPoint a, EmotionPoint b, double eps) noexcept {
  return std::abs(a.attitude - b.attitude) <= eps && std::abs(a.energy - b.energy) <= eps;
}

std::string format_point(EmotionPoint p) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f,%.2f", p.attitude, p.energy);
  return buf;
}

}  // namespace mspsc
