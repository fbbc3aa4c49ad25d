// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "nldiff/grid.hpp"

namespace nldiff::testing {

inline ImageGrid random_grid(int rows, int cols, std::mt19937_64& rng, double lo = 0.0,
                             double hi = 255.0,
                             BoundaryCondition bc = BoundaryCondition::Neumann) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(rows) * cols);
  for (double& x : v) x = dist(rng);
  return ImageGrid(rows, cols, std::move(v), bc);
}

inline VectorField random_field(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VectorField p(rows, cols);
  for (double& x : p.vx) x = dist(rng);
  for (double& x : p.vy) x = dist(rng);
  for (double& x : p.top) x = dist(rng);
  for (double& x : p.left) x = dist(rng);
  return p;
}

inline ImageGrid sine_mode(int rows, int cols, BoundaryCondition bc = BoundaryCondition::Dirichlet) {
  ImageGrid u(rows, cols, bc);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      u(i, j) = std::sin(std::numbers::pi * (i + 1) / (rows + 1)) *
                std::sin(std::numbers::pi * (j + 1) / (cols + 1));
    }
  }
  return u;
}

inline double sine_eigenvalue(int rows, int cols) {
  const double a = std::sin(std::numbers::pi / (2.0 * (rows + 1)));
  const double b = std::sin(std::numbers::pi / (2.0 * (cols + 1)));
  return 4.0 * a * a + 4.0 * b * b;
}

inline double max_abs_diff(const ImageGrid& a, const ImageGrid& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    m = std::max(m, std::fabs(a.values()[k] - b.values()[k]));
  }
  return m;
}

inline double max_abs_diff(const std::vector<double>& a, const ImageGrid& b) {
  return max_abs_diff(ImageGrid(b.rows(), b.cols(), a, b.bc()), b);
}

// Piecewise-constant test scene: background with three flat shapes.
inline ImageGrid blocks(int n, BoundaryCondition bc = BoundaryCondition::Neumann) {
  ImageGrid u(n, n, bc);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v = 60.0;
      if (i >= n / 6 && i < n / 2 && j >= n / 4 && j < 3 * n / 4) v = 180.0;
      if (i >= 5 * n / 8 && i < 15 * n / 16 && j >= n / 12 && j < n / 2) v = 120.0;
      const double di = i - 0.72 * n;
      const double dj = j - 0.75 * n;
      if (di * di + dj * dj < (0.15 * n) * (0.15 * n)) v = 220.0;
      u(i, j) = v;
    }
  }
  return u;
}

}  // namespace nldiff::testing
