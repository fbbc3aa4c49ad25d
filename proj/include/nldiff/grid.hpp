// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nldiff {

enum class BoundaryCondition { Neumann, Dirichlet };

const char* to_string(BoundaryCondition bc) noexcept;

/// A rows x cols field of gray values on a unit-spaced pixel grid.
///
/// Row index i runs along "x", column index j along "y". Values are stored
/// row-major. The boundary tag selects the ghost-cell rule used by the
/// difference operators: Neumann replicates the edge value (zero flux),
/// Dirichlet puts zeros outside the grid.
class ImageGrid {
 public:
  ImageGrid() = default;

  /// Zero image. Throws InvalidArgument unless rows, cols >= 2.
  ImageGrid(int rows, int cols, BoundaryCondition bc = BoundaryCondition::Neumann);

  /// Throws InvalidArgument on bad shape, size mismatch, or NaN/Inf values.
  ImageGrid(int rows, int cols, std::vector<double> values,
            BoundaryCondition bc = BoundaryCondition::Neumann);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  BoundaryCondition bc() const noexcept { return bc_; }
  void set_bc(BoundaryCondition bc) noexcept { bc_ = bc; }

  double operator()(int i, int j) const noexcept { return values_[index(i, j)]; }
  double& operator()(int i, int j) noexcept { return values_[index(i, j)]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const std::vector<double>& storage() const noexcept { return values_; }

  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(j);
  }

  bool same_shape(const ImageGrid& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  /// True when every value is finite.
  bool is_finite() const noexcept;

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
  BoundaryCondition bc_ = BoundaryCondition::Neumann;
};

/// Per-pixel 2-vector field holding forward differences (or fluxes).
///
/// `vx(i,j)` is the difference toward row i+1 and `vy(i,j)` toward column
/// j+1. Under Dirichlet conditions the zero ghost row above row 0 and the zero
/// ghost column left of column 0 also carry one nonzero difference each; those
/// live in `top` (x-component, one per column) and `left` (y-component, one
/// per row). They are identically zero under Neumann conditions.
struct VectorField {
  VectorField() = default;
  VectorField(int rows, int cols);

  int rows = 0;
  int cols = 0;
  std::vector<double> vx;
  std::vector<double> vy;
  std::vector<double> top;
  std::vector<double> left;

  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) +
           static_cast<std::size_t>(j);
  }
};

VectorField gradient(const ImageGrid& u);

/// Negative adjoint of `gradient` for the given boundary condition:
/// <gradient(u), p> == -<u, divergence(p, bc)> for every u with that tag.
ImageGrid divergence(const VectorField& p, BoundaryCondition bc);

/// Five-point Laplacian; identical to divergence(gradient(u), u.bc()).
ImageGrid laplacian(const ImageGrid& u);

/// Solves -laplacian_Dirichlet(w) = f by conjugate gradients, regardless of
/// f's own tag. Throws IterationLimitExceeded when the relative residual
/// cannot be pushed below `tol` in `max_iters` iterations.
ImageGrid poisson_solve_dirichlet(const ImageGrid& f, double tol, int max_iters = 20000);

/// Per-pixel |grad u| (ghost cells excluded).
ImageGrid gradient_magnitude(const ImageGrid& u);

/// Largest |grad u| over all cells, including Dirichlet ghost cells.
double max_gradient_norm(const ImageGrid& u);

// Inner products and norms on the flat value arrays.
double dot(const ImageGrid& a, const ImageGrid& b);
double dot(const VectorField& a, const VectorField& b);
double norm2(const ImageGrid& a);
double norm1(const ImageGrid& a);
double norm_inf(const ImageGrid& a);
double sum(const ImageGrid& a);
double mean(const ImageGrid& a);
double min_value(const ImageGrid& a);
double max_value(const ImageGrid& a);

/// y += alpha * x
void axpy(double alpha, const ImageGrid& x, ImageGrid& y);
ImageGrid operator+(const ImageGrid& a, const ImageGrid& b);
ImageGrid operator-(const ImageGrid& a, const ImageGrid& b);
ImageGrid operator*(double s, const ImageGrid& a);

}  // namespace nldiff
