#pragma once

#include <cstdint>
#include <vector>

#include "surfcorr/errors.hpp"

namespace surfcorr {

// Image coordinates, (row, col) with row 0 at the top.
struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

// Dense H×W grid, row-major.
template <typename T>
struct Grid {
  int height = 0;
  int width = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int h, int w, T fill = T{})
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  bool in_bounds(int r, int c) const {
    return r >= 0 && r < height && c >= 0 && c < width;
  }
  bool in_bounds(Pixel p) const { return in_bounds(p.row, p.col); }

  T& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
  const T& at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * width + c];
  }
  T& at(Pixel p) { return at(p.row, p.col); }
  const T& at(Pixel p) const { return at(p.row, p.col); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

using Mask = Grid<std::uint8_t>;   // nonzero = foreground
using PartMap = Grid<int>;         // 0 = background, >0 = part label
using VertexMap = Grid<int>;       // -1 = no prediction

}  // namespace surfcorr
