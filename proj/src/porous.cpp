// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#include "nldiff/porous.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "newton.hpp"
#include "nldiff/flows.hpp"

namespace nldiff {

double beta_pm(double r, double a) { return a == 0.0 ? r : std::pow(std::abs(r), a) * r; }

double gamma_pm(double w, double a) {
  if (a == 0.0 || w == 0.0) return w;
  const double m = std::pow(std::abs(w), 1.0 / (1.0 + a));
  return w > 0.0 ? m : -m;
}

double h_minus1_norm_sq(const ImageGrid& u, double tol) { return h_minus1_dot(u, u, tol); }

double h_minus1_dot(const ImageGrid& u, const ImageGrid& v, double tol) {
  return dot(poisson_solve_dirichlet(u, tol), v);
}

void validate(const SparseObservation& obs) {
  if (obs.rows < 2 || obs.cols < 2) {
    throw Error(ErrorCode::InvalidArgument, "observation grid must be at least 2x2");
  }
  if (obs.points.empty()) {
    throw Error(ErrorCode::EmptyObservation, "sparse observation has no points");
  }
  std::set<std::pair<int, int>> seen;
  for (const ObservedPixel& p : obs.points) {
    if (p.row < 0 || p.row >= obs.rows || p.col < 0 || p.col >= obs.cols) {
      throw Error(ErrorCode::InvalidArgument, "observed pixel (" + std::to_string(p.row) + "," +
                                                  std::to_string(p.col) + ") is out of range");
    }
    if (!(p.weight > 0.0) || !std::isfinite(p.weight) || !std::isfinite(p.value)) {
      throw Error(ErrorCode::InvalidArgument, "observation weights must be positive and finite");
    }
    if (!seen.emplace(p.row, p.col).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate observed pixel (" +
                                                  std::to_string(p.row) + "," +
                                                  std::to_string(p.col) + ")");
    }
  }
}

ImageGrid observation_load(const SparseObservation& obs) {
  validate(obs);
  ImageGrid f(obs.rows, obs.cols, BoundaryCondition::Dirichlet);
  for (const ObservedPixel& p : obs.points) f(p.row, p.col) = p.weight * p.value;
  return f;
}

SparseObservation read_sparse_observation_csv(const std::string& path, int rows, int cols) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open observation file " + path);
  SparseObservation obs{rows, cols, {}};
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::InvalidArgument, path + ": missing header row,col,weight,value");
  }
  std::string header;
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) header += c;
  if (header != "row,col,weight,value") {
    throw Error(ErrorCode::InvalidArgument,
                path + ": expected header row,col,weight,value, got '" + line + "'");
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    ObservedPixel p;
    std::string rest;
    if (!(fields >> p.row >> p.col >> p.weight >> p.value) || (fields >> rest)) {
      throw Error(ErrorCode::InvalidArgument,
                  path + ": malformed record on line " + std::to_string(lineno));
    }
    obs.points.push_back(p);
  }
  validate(obs);
  return obs;
}

namespace {

// Dual problem  min_w  (c/2) <w, -lap w> + sum G(w) - <b, w>,  G' = gamma.
class DualProblem {
 public:
  DualProblem(const ImageGrid& b, double c, double a) : b_(b), c_(c), a_(a) {}

  double value(const ImageGrid& w) const {
    const double q = (2.0 + a_) / (1.0 + a_);
    const double lead = (1.0 + a_) / (2.0 + a_);
    const ImageGrid lw = laplacian(w);
    double v = -0.5 * c_ * dot(w, lw);
    auto wv = w.values();
    auto bv = b_.values();
    for (std::size_t k = 0; k < wv.size(); ++k)
      v += lead * std::pow(std::abs(wv[k]), q) - bv[k] * wv[k];
    return v;
  }

  ImageGrid gradient(const ImageGrid& w) const {
    ImageGrid g = laplacian(w);
    auto gv = g.values();
    auto wv = w.values();
    auto bv = b_.values();
    for (std::size_t k = 0; k < gv.size(); ++k)
      gv[k] = -c_ * gv[k] + gamma_pm(wv[k], a_) - bv[k];
    return g;
  }

  HessianOperator hessian(const ImageGrid& w) const {
    std::vector<double> diag(w.size());
    auto wv = w.values();
    for (std::size_t k = 0; k < diag.size(); ++k) diag[k] = gamma_slope(wv[k]);
    return [diag = std::move(diag), c = c_](const ImageGrid& d) {
      ImageGrid out = laplacian(d);
      auto ov = out.values();
      auto dv = d.values();
      for (std::size_t k = 0; k < ov.size(); ++k) ov[k] = -c * ov[k] + diag[k] * dv[k];
      return out;
    };
  }

  // Lexicographic nonlinear Gauss-Seidel: each pixel solves
  // 4c w + gamma(w) = b + c * (sum of neighbours), exactly minimizing the
  // objective in that coordinate.
  void sweep(ImageGrid& w) const {
    const int rows = w.rows();
    const int cols = w.cols();
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        double nb = 0.0;
        if (i > 0) nb += w(i - 1, j);
        if (i + 1 < rows) nb += w(i + 1, j);
        if (j > 0) nb += w(i, j - 1);
        if (j + 1 < cols) nb += w(i, j + 1);
        w(i, j) = solve_scalar(4.0 * c_, b_(i, j) + c_ * nb);
      }
    }
  }

  // Root of k w + gamma(w) = rhs, k > 0.
  double solve_scalar(double k, double rhs) const {
    if (rhs == 0.0) return 0.0;
    if (a_ == 0.0) return rhs / (k + 1.0);
    const double s = rhs > 0.0 ? 1.0 : -1.0;
    const double target = std::abs(rhs);
    double lo = 0.0;
    double hi = std::min(target / k, beta_pm(target, a_));
    double x = hi;
    for (int it = 0; it < 200; ++it) {
      const double f = k * x + gamma_pm(x, a_) - target;
      if (f == 0.0) break;
      if (f > 0.0) {
        hi = x;
      } else {
        lo = x;
      }
      double next;
      if (x > 1e-10) {
        next = x - f / (k + gamma_slope(x));
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      } else {
        next = 0.5 * (lo + hi);
      }
      if (std::abs(next - x) <= 1e-12 * std::max(next, 1e-300) || hi - lo <= 1e-15 * hi) {
        x = next;
        break;
      }
      x = next;
    }
    return s * x;
  }

 private:
  double gamma_slope(double w) const {
    if (a_ == 0.0) return 1.0;
    const double m = std::max(std::abs(w), 1e-10);
    return std::pow(m, -a_ / (1.0 + a_)) / (1.0 + a_);
  }

  const ImageGrid& b_;
  double c_;
  double a_;
};

struct DualSolution {
  ImageGrid w;
  double residual = 0.0;
  int iterations = 0;
};

DualSolution solve_dual(const ImageGrid& b, double c, double a, const SolverConfig& cfg,
                        const char* what) {
  validate(cfg);
  ImageGrid rhs = b;
  rhs.set_bc(BoundaryCondition::Dirichlet);
  const DualProblem problem(rhs, c, a);
  detail::Objective obj;
  obj.value = [&](const ImageGrid& w) { return problem.value(w); };
  obj.gradient = [&](const ImageGrid& w) { return problem.gradient(w); };
  obj.hessian = [&](const ImageGrid& w) { return problem.hessian(w); };
  obj.sweep = [&](ImageGrid& w) { problem.sweep(w); };

  ImageGrid w0 = rhs;
  for (double& v : w0.values()) v = beta_pm(v, a);
  const double tol = cfg.prox_tol * (1.0 + norm2(rhs));
  detail::NewtonResult res = detail::newton_minimize(obj, std::move(w0), tol, cfg);
  if (!res.converged) {
    std::ostringstream msg;
    msg << what << " stopped after " << res.iterations << " iterations with residual "
        << res.residual << " > " << tol;
    throw Error(ErrorCode::IterationLimitExceeded, msg.str());
  }
  return {std::move(res.x), res.residual, res.iterations};
}

ImageGrid apply_gamma(const ImageGrid& w, double a) {
  ImageGrid u = w;
  for (double& v : u.values()) v = gamma_pm(v, a);
  return u;
}

}  // namespace

std::pair<ImageGrid, StepReport> porous_resolvent(const ImageGrid& u_prev, double h,
                                                  const PorousParams& params,
                                                  const SolverConfig& cfg) {
  validate(FlowModel{params});
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::InvalidArgument, "step size h must be positive");
  }
  const auto start = std::chrono::steady_clock::now();
  const PorousEnergy energy(params);
  StepReport report;
  report.energy_before = energy.energy(u_prev);
  DualSolution dual = solve_dual(u_prev, h, params.a, cfg, "porous resolvent");
  ImageGrid u = apply_gamma(dual.w, params.a);
  u.set_bc(u_prev.bc());
  report.energy_after = energy.energy(u);
  report.residual = dual.residual;
  report.inner_iterations = dual.iterations;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(u), report};
}

Evolution porous_evolve(const ImageGrid& f, double T, int n_steps, const PorousParams& params,
                        const SolverConfig& cfg, const StepObserver& observer) {
  if (!(T > 0.0) || n_steps < 1) {
    throw Error(ErrorCode::InvalidArgument, "evolution needs T > 0 and n_steps >= 1");
  }
  const double h = T / n_steps;
  Evolution out;
  out.image = f;
  for (int step = 1; step <= n_steps; ++step) {
    try {
      auto [next, report] = porous_resolvent(out.image, h, params, cfg);
      report.step_index = step;
      out.image = std::move(next);
      out.reports.push_back(report);
    } catch (const Error& e) {
      rethrow_at_step(e, step);
    }
    if (observer) observer(step, out.image);
  }
  return out;
}

PorousRestoration porous_stationary_restore(const ImageGrid& f, const PorousParams& params,
                                            const SolverConfig& cfg) {
  validate(FlowModel{params});
  DualSolution dual = solve_dual(f, 1.0, params.a, cfg, "porous restoration");
  PorousRestoration out;
  out.u = apply_gamma(dual.w, params.a);
  out.w = std::move(dual.w);
  out.residual = dual.residual;
  out.iterations = dual.iterations;
  return out;
}

PorousRestoration porous_stationary_restore(const SparseObservation& obs,
                                            const PorousParams& params, const SolverConfig& cfg) {
  return porous_stationary_restore(observation_load(obs), params, cfg);
}

double porous_primal_residual(const ImageGrid& u, const ImageGrid& u_prev, double h,
                              const PorousParams& params) {
  ImageGrid bu = u;
  bu.set_bc(BoundaryCondition::Dirichlet);
  for (double& v : bu.values()) v = beta_pm(v, params.a);
  ImageGrid r = laplacian(bu);
  auto rv = r.values();
  auto uv = u.values();
  auto pv = u_prev.values();
  for (std::size_t k = 0; k < rv.size(); ++k) rv[k] = uv[k] - h * rv[k] - pv[k];
  return norm2(r);
}

}  // namespace nldiff
