// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <variant>

#include "nldiff/error.hpp"

namespace nldiff::oracle {

namespace {

void guard_size(int rows, int cols) {
  if (rows > kMaxSide || cols > kMaxSide) {
    throw Error(ErrorCode::GridTooLarge, "oracle grids are limited to 16x16, got " +
                                             std::to_string(rows) + "x" + std::to_string(cols));
  }
}

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double huber(double x, double d) {
  const double a = std::fabs(x);
  return a <= d ? a * a / (2.0 * d) : a - d / 2.0;
}

double huber_slope(double x, double d) {
  if (x > d) return 1.0;
  if (x < -d) return -1.0;
  return x / d;
}

}  // namespace

Dense dense_laplacian(int rows, int cols, BoundaryCondition bc) {
  Dense m{rows * cols, {}};
  m.a.assign(static_cast<std::size_t>(m.n) * m.n, 0.0);
  const int di[4] = {-1, 1, 0, 0};
  const int dj[4] = {0, 0, -1, 1};
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const int p = i * cols + j;
      for (int k = 0; k < 4; ++k) {
        const int ni = i + di[k];
        const int nj = j + dj[k];
        const bool inside = ni >= 0 && ni < rows && nj >= 0 && nj < cols;
        if (inside) {
          m.at(p, ni * cols + nj) += 1.0;
          m.at(p, p) -= 1.0;
        } else if (bc == BoundaryCondition::Dirichlet) {
          // Ghost value is zero: the difference to it still costs the diagonal.
          m.at(p, p) -= 1.0;
        }
      }
    }
  }
  return m;
}

std::vector<double> dense_solve(Dense m, std::vector<double> b) {
  const int n = m.n;
  double scale = 0.0;
  for (double v : m.a) scale = std::max(scale, std::fabs(v));
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(m.at(r, col)) > std::fabs(m.at(piv, col))) piv = r;
    }
    if (std::fabs(m.at(piv, col)) <= 1e-14 * scale) {
      throw Error(ErrorCode::SingularSystem, "dense system is singular");
    }
    if (piv != col) {
      for (int k = 0; k < n; ++k) std::swap(m.at(piv, k), m.at(col, k));
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = m.at(r, col) / m.at(col, col);
      if (f == 0.0) continue;
      for (int k = col; k < n; ++k) m.at(r, k) -= f * m.at(col, k);
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < n; ++k) s -= m.at(r, k) * x[k];
    x[r] = s / m.at(r, r);
  }
  return x;
}

std::vector<double> dense_apply(const Dense& m, const std::vector<double>& x) {
  std::vector<double> y(m.n, 0.0);
  for (int i = 0; i < m.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.n; ++j) s += m.at(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Dense dense_inverse(const Dense& m) {
  Dense inv{m.n, std::vector<double>(m.a.size(), 0.0)};
  for (int c = 0; c < m.n; ++c) {
    std::vector<double> e(m.n, 0.0);
    e[c] = 1.0;
    const std::vector<double> col = dense_solve(m, e);
    for (int r = 0; r < m.n; ++r) inv.at(r, c) = col[r];
  }
  return inv;
}

ImageGrid dense_linear_solve(LinearOperator op, double h_or_lambda, const ImageGrid& rhs) {
  guard_size(rhs.rows(), rhs.cols());
  if (!(h_or_lambda > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "dense_linear_solve needs a positive parameter");
  }
  BoundaryCondition bc = rhs.bc();
  if (op == LinearOperator::HeatNeumann) bc = BoundaryCondition::Neumann;
  if (op == LinearOperator::HeatDirichlet) bc = BoundaryCondition::Dirichlet;
  Dense m = dense_laplacian(rhs.rows(), rhs.cols(), bc);
  for (double& v : m.a) v = -v;
  if (op == LinearOperator::ScreenedPoisson) {
    for (int i = 0; i < m.n; ++i) m.at(i, i) += h_or_lambda;
  } else {
    for (double& v : m.a) v *= h_or_lambda;
    for (int i = 0; i < m.n; ++i) m.at(i, i) += 1.0;
  }
  const std::vector<double> b(rhs.values().begin(), rhs.values().end());
  std::vector<double> x = dense_solve(m, b);
  // One step of refinement keeps the relative residual near machine precision.
  std::vector<double> r = dense_apply(m, x);
  for (int i = 0; i < m.n; ++i) r[i] = b[i] - r[i];
  const std::vector<double> dx = dense_solve(m, r);
  for (int i = 0; i < m.n; ++i) x[i] += dx[i];
  return ImageGrid(rhs.rows(), rhs.cols(), std::move(x), bc);
}

double radial_energy(const Radial& density, const ImageGrid& u) {
  const int R = u.rows();
  const int C = u.cols();
  const bool dir = u.bc() == BoundaryCondition::Dirichlet;
  double e = 0.0;
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < C; ++j) {
      const double down = i + 1 < R ? u(i + 1, j) : (dir ? 0.0 : u(i, j));
      const double right = j + 1 < C ? u(i, j + 1) : (dir ? 0.0 : u(i, j));
      e += density.J(std::hypot(down - u(i, j), right - u(i, j)));
    }
  }
  if (dir) {
    for (int j = 0; j < C; ++j) e += density.J(std::fabs(u(0, j)));
    for (int i = 0; i < R; ++i) e += density.J(std::fabs(u(i, 0)));
  }
  return e;
}

std::vector<double> radial_energy_gradient(const Radial& density, const ImageGrid& u) {
  const int R = u.rows();
  const int C = u.cols();
  const bool dir = u.bc() == BoundaryCondition::Dirichlet;
  std::vector<double> g(u.size(), 0.0);
  auto at = [C](int i, int j) { return static_cast<std::size_t>(i) * C + j; };
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < C; ++j) {
      const bool has_down = i + 1 < R;
      const bool has_right = j + 1 < C;
      const double dx = has_down ? u(i + 1, j) - u(i, j) : (dir ? -u(i, j) : 0.0);
      const double dy = has_right ? u(i, j + 1) - u(i, j) : (dir ? -u(i, j) : 0.0);
      const double r = std::hypot(dx, dy);
      if (r == 0.0) continue;
      const double s = density.dJ(r) / r;
      // d dx / d u(i,j) = -1 whenever dx is nonzero by construction.
      g[at(i, j)] -= s * (dx + dy);
      if (has_down) g[at(i + 1, j)] += s * dx;
      if (has_right) g[at(i, j + 1)] += s * dy;
    }
  }
  if (dir) {
    auto edge = [&](int i, int j) {
      const double t = u(i, j);
      if (t != 0.0) g[at(i, j)] += density.dJ(std::fabs(t)) * (t > 0.0 ? 1.0 : -1.0);
    };
    for (int j = 0; j < C; ++j) edge(0, j);
    for (int i = 0; i < R; ++i) edge(i, 0);
  }
  return g;
}

Radial model_density(const FlowModel& model) {
  struct Visitor {
    Radial operator()(const HeatParams&) const {
      return {[](double r) { return r * r / 2.0; }, [](double r) { return r; }};
    }
    Radial operator()(const PLaplacianParams& m) const {
      const double p = m.p;
      return {[p](double r) { return std::pow(r, p) / p; },
              [p](double r) { return std::pow(r, p - 1.0); }};
    }
    Radial operator()(const TvEpsParams& m) const {
      const double e = m.eps;
      return {[e](double r) { return huber(r, e) + e * r * r / 2.0; },
              [e](double r) { return huber_slope(r, e) + e * r; }};
    }
    Radial operator()(const PeronaMalikParams& m) const {
      const double a = m.alpha;
      const double v = m.eps_visc;
      // Flux r * a^2 / (a^2 + r^2) up to r = a, then r / 2.
      return {[a, v](double r) {
                const double base = r <= a ? a * a / 2.0 * std::log(1.0 + r * r / (a * a))
                                           : a * a / 2.0 * std::log(2.0) + (r * r - a * a) / 4.0;
                return base + v * r * r / 2.0;
              },
              [a, v](double r) {
                const double flux = r <= a ? r * a * a / (a * a + r * r) : r / 2.0;
                return flux + v * r;
              }};
    }
    Radial operator()(const PorousParams&) const {
      throw Error(ErrorCode::InvalidArgument, "porous energy is pointwise, not radial");
    }
  };
  return std::visit(Visitor{}, model);
}

namespace {

double porous_value(double a, const ImageGrid& u) {
  double e = 0.0;
  for (double v : u.values()) e += std::pow(std::fabs(v), a + 2.0) / (a + 2.0);
  return e;
}

std::vector<double> porous_grad(double a, const ImageGrid& u) {
  std::vector<double> g(u.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double v = u.values()[k];
    g[k] = std::pow(std::fabs(v), a) * v;
  }
  return g;
}

}  // namespace

double model_energy(const EnergyModel& model, const ImageGrid& u_in) {
  ImageGrid u = u_in;
  u.set_bc(model.bc());
  const FlowModel desc = model.descriptor();
  double e = 0.0;
  if (const auto* p = std::get_if<PorousParams>(&desc)) {
    e = porous_value(p->a, u);
  } else {
    e = radial_energy(model_density(desc), u);
  }
  if (const auto fid = model.fidelity()) {
    const double lambda = fid->params.lambda;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double d = u.values()[k] - fid->u0.values()[k];
      e += lambda * (fid->params.fidelity == Fidelity::L2 ? d * d : huber(d, fid->sign_smooth));
    }
  }
  return e;
}

std::vector<double> model_energy_gradient(const EnergyModel& model, const ImageGrid& u_in) {
  ImageGrid u = u_in;
  u.set_bc(model.bc());
  const FlowModel desc = model.descriptor();
  std::vector<double> g;
  if (const auto* p = std::get_if<PorousParams>(&desc)) {
    g = porous_grad(p->a, u);
  } else {
    g = radial_energy_gradient(model_density(desc), u);
  }
  if (const auto fid = model.fidelity()) {
    const double lambda = fid->params.lambda;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double d = u.values()[k] - fid->u0.values()[k];
      g[k] += lambda * (fid->params.fidelity == Fidelity::L2 ? 2.0 * d
                                                             : huber_slope(d, fid->sign_smooth));
    }
  }
  return g;
}

std::vector<double> oracle_minimize(const Problem& problem, std::vector<double> x,
                                    const OracleConfig& cfg) {
  if (!(cfg.step_size > 0.0) || cfg.max_iters <= 0 || !(cfg.grad_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "oracle configuration must be positive");
  }
  double f = problem.value(x);
  std::vector<double> g = problem.gradient(x);
  double gnorm = std::sqrt(dotv(g, g));
  double t = cfg.step_size;
  std::vector<double> x_new(x.size());
  std::vector<double> s(x.size());
  std::vector<double> y(x.size());
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (gnorm <= cfg.grad_tol) return x;
    const double g2 = gnorm * gnorm;
    bool accepted = false;
    double f_new = 0.0;
    std::vector<double> g_new;
    for (int tries = 0; tries < 80; ++tries) {
      for (std::size_t k = 0; k < x.size(); ++k) x_new[k] = x[k] - t * g[k];
      f_new = problem.value(x_new);
      if (f_new <= f - 1e-4 * t * g2) {
        g_new = problem.gradient(x_new);
        accepted = true;
        break;
      }
      // Near the minimum the decrease drowns in rounding; accept a step whose
      // value is unchanged to rounding and whose gradient shrinks.
      if (std::isfinite(f_new) && f_new <= f + 1e-13 * (1.0 + std::fabs(f))) {
        g_new = problem.gradient(x_new);
        if (dotv(g_new, g_new) < g2) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      throw Error(ErrorCode::IterationLimitExceeded,
                  "oracle line search stalled at gradient norm " + std::to_string(gnorm));
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
      s[k] = x_new[k] - x[k];
      y[k] = g_new[k] - g[k];
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    gnorm = std::sqrt(dotv(g, g));
    const double sy = dotv(s, y);
    t = sy > 0.0 ? dotv(s, s) / sy : cfg.step_size;
  }
  if (gnorm <= cfg.grad_tol) return x;
  throw Error(ErrorCode::IterationLimitExceeded,
              "oracle did not reach gradient norm " + std::to_string(cfg.grad_tol) + " (at " +
                  std::to_string(gnorm) + ")");
}

ImageGrid prox_oracle(const EnergyModel& energy, const ImageGrid& u_prev, double h, Metric metric,
                      const OracleConfig& cfg) {
  guard_size(u_prev.rows(), u_prev.cols());
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "h must be positive");
  const int R = u_prev.rows();
  const int C = u_prev.cols();
  const BoundaryCondition bc = energy.bc();
  const std::vector<double> base(u_prev.values().begin(), u_prev.values().end());

  // Metric operator M: identity for L2, inverse Dirichlet Laplacian for H^-1.
  Dense minv;
  if (metric == Metric::Hminus1) {
    Dense neg = dense_laplacian(R, C, BoundaryCondition::Dirichlet);
    for (double& v : neg.a) v = -v;
    minv = dense_inverse(neg);
  }
  auto metric_apply = [&](const std::vector<double>& d) {
    return metric == Metric::L2 ? d : dense_apply(minv, d);
  };
  auto as_grid = [&](const std::vector<double>& v) { return ImageGrid(R, C, v, bc); };

  Problem problem;
  problem.value = [&](const std::vector<double>& v) {
    std::vector<double> d(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) d[k] = v[k] - base[k];
    for (double x : v) {
      if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
    }
    return model_energy(energy, as_grid(v)) + dotv(d, metric_apply(d)) / (2.0 * h);
  };
  problem.gradient = [&](const std::vector<double>& v) {
    std::vector<double> d(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) d[k] = v[k] - base[k];
    std::vector<double> g = model_energy_gradient(energy, as_grid(v));
    const std::vector<double> md = metric_apply(d);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += md[k] / h;
    return g;
  };
  return as_grid(oracle_minimize(problem, base, cfg));
}

}  // namespace nldiff::oracle
