#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curvespec/grid.hpp"
#include "curvespec/vec2.hpp"

namespace curvespec {

// One observed contour: n planar points sampled at the grid angles.
struct ContourSamples {
  Grid grid;
  std::vector<Vec2> points;
};

inline ContourSamples make_contour_samples(Grid grid,
                                           std::vector<Vec2> points) {
  if (points.size() != grid.theta.size())
    throw std::invalid_argument(
        "make_contour_samples: point count " + std::to_string(points.size()) +
        " does not match grid size " + std::to_string(grid.theta.size()));
  for (const Vec2& p : points)
    if (!finite(p))
      throw std::invalid_argument(
          "make_contour_samples: all coordinates must be finite");
  return ContourSamples{std::move(grid), std::move(points)};
}

// T+1 contours observed on one common grid.
struct ContourStack {
  std::vector<ContourSamples> contours;
  std::vector<std::string> labels;  // empty or one per contour

  // Replicate count minus one.
  int T() const { return static_cast<int>(contours.size()) - 1; }
  const Grid& grid() const { return contours.front().grid; }
};

inline ContourStack make_contour_stack(std::vector<ContourSamples> contours,
                                       std::vector<std::string> labels = {}) {
  if (contours.empty())
    throw std::invalid_argument("make_contour_stack: need at least 1 contour");
  for (std::size_t t = 1; t < contours.size(); ++t)
    if (!(contours[t].grid == contours[0].grid))
      throw std::invalid_argument(
          "make_contour_stack: contour " + std::to_string(t) +
          " is not on the common grid");
  if (!labels.empty() && labels.size() != contours.size())
    throw std::invalid_argument(
        "make_contour_stack: label count does not match contour count");
  return ContourStack{std::move(contours), std::move(labels)};
}

}  // namespace curvespec
