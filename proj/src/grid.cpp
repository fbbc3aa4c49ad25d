// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#include "nldiff/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nldiff/error.hpp"

namespace nldiff {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IterationLimitExceeded: return "IterationLimitExceeded";
    case ErrorCode::NonFiniteEnergy: return "NonFiniteEnergy";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::EmptyObservation: return "EmptyObservation";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnsupportedMaxval: return "UnsupportedMaxval";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

void rethrow_at_step(const Error& e, int step) {
  throw Error(e.code(), "step " + std::to_string(step) + ": " + e.what(), step);
}

const char* to_string(BoundaryCondition bc) noexcept {
  return bc == BoundaryCondition::Neumann ? "neumann" : "dirichlet";
}

namespace {

void check_shape(int rows, int cols) {
  if (rows < 2 || cols < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "image must be at least 2x2, got " + std::to_string(rows) + "x" +
                    std::to_string(cols));
  }
}

}  // namespace

ImageGrid::ImageGrid(int rows, int cols, BoundaryCondition bc)
    : rows_(rows), cols_(cols), bc_(bc) {
  check_shape(rows, cols);
  values_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
}

ImageGrid::ImageGrid(int rows, int cols, std::vector<double> values, BoundaryCondition bc)
    : rows_(rows), cols_(cols), values_(std::move(values)), bc_(bc) {
  check_shape(rows, cols);
  if (values_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
    throw Error(ErrorCode::InvalidArgument, "value count does not match image shape");
  }
  if (!is_finite()) {
    throw Error(ErrorCode::InvalidArgument, "image contains NaN or Inf values");
  }
}

bool ImageGrid::is_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

VectorField::VectorField(int r, int c)
    : rows(r),
      cols(c),
      vx(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0),
      vy(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0),
      top(static_cast<std::size_t>(c), 0.0),
      left(static_cast<std::size_t>(r), 0.0) {}

VectorField gradient(const ImageGrid& u) {
  const int rows = u.rows();
  const int cols = u.cols();
  const bool dirichlet = u.bc() == BoundaryCondition::Dirichlet;
  VectorField g(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const std::size_t k = u.index(i, j);
      const double c = u(i, j);
      if (i + 1 < rows) {
        g.vx[k] = u(i + 1, j) - c;
      } else if (dirichlet) {
        g.vx[k] = -c;
      }
      if (j + 1 < cols) {
        g.vy[k] = u(i, j + 1) - c;
      } else if (dirichlet) {
        g.vy[k] = -c;
      }
    }
  }
  if (dirichlet) {
    for (int j = 0; j < cols; ++j) g.top[j] = u(0, j);
    for (int i = 0; i < rows; ++i) g.left[i] = u(i, 0);
  }
  return g;
}

ImageGrid divergence(const VectorField& p, BoundaryCondition bc) {
  const int rows = p.rows;
  const int cols = p.cols;
  ImageGrid d(rows, cols, bc);
  if (bc == BoundaryCondition::Neumann) {
    // Backward differences; the last row/column of p never enters the
    // gradient, so it is ignored here as well.
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        const std::size_t k = p.index(i, j);
        double v = 0.0;
        if (i + 1 < rows) v += p.vx[k];
        if (i > 0) v -= p.vx[p.index(i - 1, j)];
        if (j + 1 < cols) v += p.vy[k];
        if (j > 0) v -= p.vy[p.index(i, j - 1)];
        d(i, j) = v;
      }
    }
  } else {
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        const std::size_t k = p.index(i, j);
        const double up = i > 0 ? p.vx[p.index(i - 1, j)] : p.top[j];
        const double lf = j > 0 ? p.vy[p.index(i, j - 1)] : p.left[i];
        d(i, j) = (p.vx[k] - up) + (p.vy[k] - lf);
      }
    }
  }
  return d;
}

ImageGrid laplacian(const ImageGrid& u) {
  const int rows = u.rows();
  const int cols = u.cols();
  ImageGrid out(rows, cols, u.bc());
  if (u.bc() == BoundaryCondition::Neumann) {
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        const double c = u(i, j);
        double v = 0.0;
        if (i + 1 < rows) v += u(i + 1, j) - c;
        if (i > 0) v -= c - u(i - 1, j);
        if (j + 1 < cols) v += u(i, j + 1) - c;
        if (j > 0) v -= c - u(i, j - 1);
        out(i, j) = v;
      }
    }
  } else {
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        const double c = u(i, j);
        const double dn = i + 1 < rows ? u(i + 1, j) : 0.0;
        const double up = i > 0 ? u(i - 1, j) : 0.0;
        const double rt = j + 1 < cols ? u(i, j + 1) : 0.0;
        const double lf = j > 0 ? u(i, j - 1) : 0.0;
        out(i, j) = ((dn - c) - (c - up)) + ((rt - c) - (c - lf));
      }
    }
  }
  return out;
}

ImageGrid poisson_solve_dirichlet(const ImageGrid& f, double tol, int max_iters) {
  if (!(tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "poisson tolerance must be positive");
  }
  ImageGrid rhs = f;
  rhs.set_bc(BoundaryCondition::Dirichlet);
  ImageGrid w(f.rows(), f.cols(), BoundaryCondition::Dirichlet);
  const double fnorm = norm2(rhs);
  if (fnorm == 0.0) return w;

  // Plain CG on the SPD operator -laplacian_Dirichlet.
  ImageGrid r = rhs;
  ImageGrid p = r;
  double rr = dot(r, r);
  const double target = tol * fnorm;
  for (int it = 0; it < max_iters; ++it) {
    if (std::sqrt(rr) <= target) break;
    ImageGrid ap = laplacian(p);
    for (double& v : ap.values()) v = -v;
    const double alpha = rr / dot(p, ap);
    axpy(alpha, p, w);
    axpy(-alpha, ap, r);
    const double rr_new = dot(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    auto pv = p.values();
    auto rv = r.values();
    for (std::size_t k = 0; k < pv.size(); ++k) pv[k] = rv[k] + beta * pv[k];
  }
  // Recompute the true residual; the recurrence drifts on long solves.
  ImageGrid check = laplacian(w);
  axpy(1.0, rhs, check);
  if (norm2(check) > target) {
    throw Error(ErrorCode::IterationLimitExceeded,
                "poisson solve did not reach relative residual " + std::to_string(tol));
  }
  return w;
}

ImageGrid gradient_magnitude(const ImageGrid& u) {
  const VectorField g = gradient(u);
  ImageGrid out(u.rows(), u.cols(), u.bc());
  auto ov = out.values();
  for (std::size_t k = 0; k < ov.size(); ++k) ov[k] = std::hypot(g.vx[k], g.vy[k]);
  return out;
}

double max_gradient_norm(const ImageGrid& u) {
  const VectorField g = gradient(u);
  double m = 0.0;
  for (std::size_t k = 0; k < g.vx.size(); ++k) m = std::max(m, std::hypot(g.vx[k], g.vy[k]));
  for (double t : g.top) m = std::max(m, std::abs(t));
  for (double l : g.left) m = std::max(m, std::abs(l));
  return m;
}

double dot(const ImageGrid& a, const ImageGrid& b) {
  return std::inner_product(a.storage().begin(), a.storage().end(), b.storage().begin(), 0.0);
}

double dot(const VectorField& a, const VectorField& b) {
  auto ip = [](const std::vector<double>& x, const std::vector<double>& y) {
    return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
  };
  return ip(a.vx, b.vx) + ip(a.vy, b.vy) + ip(a.top, b.top) + ip(a.left, b.left);
}

double norm2(const ImageGrid& a) { return std::sqrt(dot(a, a)); }

double norm1(const ImageGrid& a) {
  double s = 0.0;
  for (double v : a.storage()) s += std::abs(v);
  return s;
}

double norm_inf(const ImageGrid& a) {
  double m = 0.0;
  for (double v : a.storage()) m = std::max(m, std::abs(v));
  return m;
}

double sum(const ImageGrid& a) {
  return std::accumulate(a.storage().begin(), a.storage().end(), 0.0);
}

double mean(const ImageGrid& a) { return sum(a) / static_cast<double>(a.size()); }

double min_value(const ImageGrid& a) {
  return *std::min_element(a.storage().begin(), a.storage().end());
}

double max_value(const ImageGrid& a) {
  return *std::max_element(a.storage().begin(), a.storage().end());
}

void axpy(double alpha, const ImageGrid& x, ImageGrid& y) {
  auto yv = y.values();
  auto xv = x.values();
  for (std::size_t k = 0; k < yv.size(); ++k) yv[k] += alpha * xv[k];
}

ImageGrid operator+(const ImageGrid& a, const ImageGrid& b) {
  ImageGrid out = a;
  axpy(1.0, b, out);
  return out;
}

ImageGrid operator-(const ImageGrid& a, const ImageGrid& b) {
  ImageGrid out = a;
  axpy(-1.0, b, out);
  return out;
}

ImageGrid operator*(double s, const ImageGrid& a) {
  ImageGrid out = a;
  for (double& v : out.values()) v *= s;
  return out;
}

}  // namespace nldiff
