// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#include "nldiff/flows.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <type_traits>

#include "newton.hpp"

namespace nldiff {

std::string model_name(const FlowModel& model) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, HeatParams>) return "heat";
        if constexpr (std::is_same_v<T, PLaplacianParams>) return "plap";
        if constexpr (std::is_same_v<T, TvEpsParams>) return "tveps";
        if constexpr (std::is_same_v<T, PeronaMalikParams>) return "pm";
        if constexpr (std::is_same_v<T, PorousParams>) return "porous";
      },
      model);
}

void validate(const FlowModel& model) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PLaplacianParams>) {
          if (!(m.p > 1.0) || !std::isfinite(m.p)) fail("p must be greater than 1");
        } else if constexpr (std::is_same_v<T, TvEpsParams>) {
          if (!(m.eps > 0.0)) fail("eps must be positive");
        } else if constexpr (std::is_same_v<T, PeronaMalikParams>) {
          if (!(m.alpha > 0.0)) fail("alpha must be positive");
          if (!(m.eps_pen > 0.0)) fail("eps_pen must be positive");
          if (!(m.eps_visc >= 0.0)) fail("eps_visc must be nonnegative");
        } else if constexpr (std::is_same_v<T, PorousParams>) {
          if (!(m.a >= 0.0 && m.a < 1.0)) fail("porous exponent a must lie in [0, 1)");
        }
      },
      model);
}

Vec2 psi_eps(Vec2 v, double eps) {
  const double r = std::hypot(v.x, v.y);
  if (r <= eps) return {v.x / eps, v.y / eps};
  return {v.x / r, v.y / r};
}

double j_eps(double r, double eps) { return r <= eps ? 0.5 * r * r / eps : r - 0.5 * eps; }

double pm_g(double s, double alpha) {
  const double a2 = alpha * alpha;
  return a2 / (a2 + s);
}

double pm_g_trunc(double s, double alpha) { return s <= alpha * alpha ? pm_g(s, alpha) : 0.5; }

Vec2 beta_eps_penalty(Vec2 v, double alpha, double eps_pen) {
  const double r = std::hypot(v.x, v.y);
  if (r <= alpha) return {0.0, 0.0};
  const double s = (r - alpha) / (eps_pen * r);
  return {s * v.x, s * v.y};
}

namespace {

// Below this magnitude the curvature of densities that blow up at the origin
// is frozen.
constexpr double kCurvatureFloor = 1e-8;

class HeatDensity final : public RadialDensity {
 public:
  double value(double r) const override { return 0.5 * r * r; }
  double diffusivity(double) const override { return 1.0; }
  double curvature(double) const override { return 1.0; }
};

class PLaplacianDensity final : public RadialDensity {
 public:
  explicit PLaplacianDensity(double p) : p_(p) {}
  double value(double r) const override { return std::pow(r, p_) / p_; }
  double diffusivity(double r) const override {
    return std::pow(std::max(r, kCurvatureFloor), p_ - 2.0);
  }
  double curvature(double r) const override {
    return (p_ - 1.0) * std::pow(std::max(r, kCurvatureFloor), p_ - 2.0);
  }

 private:
  double p_;
};

class TvEpsDensity final : public RadialDensity {
 public:
  explicit TvEpsDensity(double eps) : eps_(eps) {}
  double value(double r) const override { return j_eps(r, eps_) + 0.5 * eps_ * r * r; }
  double diffusivity(double r) const override {
    return (r <= eps_ ? 1.0 / eps_ : 1.0 / r) + eps_;
  }
  double curvature(double r) const override { return (r <= eps_ ? 1.0 / eps_ : 0.0) + eps_; }

 private:
  double eps_;
};

class PeronaMalikDensity final : public RadialDensity {
 public:
  PeronaMalikDensity(double alpha, double visc) : alpha_(alpha), visc_(visc) {}
  double value(double r) const override {
    const double a2 = alpha_ * alpha_;
    double v;
    if (r <= alpha_) {
      v = 0.5 * a2 * std::log1p(r * r / a2);
    } else {
      v = 0.5 * a2 * std::log(2.0) + 0.25 * (r * r - a2);
    }
    return v + 0.5 * visc_ * r * r;
  }
  double diffusivity(double r) const override { return pm_g_trunc(r * r, alpha_) + visc_; }
  double curvature(double r) const override {
    const double a2 = alpha_ * alpha_;
    double c;
    if (r <= alpha_) {
      const double d = a2 + r * r;
      c = a2 * (a2 - r * r) / (d * d);
    } else {
      c = 0.5;
    }
    return c + visc_;
  }

 private:
  double alpha_;
  double visc_;
};

class PenaltyDensity final : public RadialDensity {
 public:
  PenaltyDensity(double alpha, double eps) : alpha_(alpha), eps_(eps) {}
  double value(double r) const override {
    const double e = std::max(r - alpha_, 0.0);
    return 0.5 * e * e / eps_;
  }
  double diffusivity(double r) const override {
    return r > alpha_ ? (r - alpha_) / (eps_ * r) : 0.0;
  }
  double curvature(double r) const override { return r > alpha_ ? 1.0 / eps_ : 0.0; }

 private:
  double alpha_;
  double eps_;
};

template <typename Fn>
void for_each_cell(const VectorField& g, Fn&& fn) {
  for (std::size_t k = 0; k < g.vx.size(); ++k) fn(g.vx[k], g.vy[k]);
}

}  // namespace

std::shared_ptr<const RadialDensity> make_density(const FlowModel& model) {
  validate(model);
  return std::visit(
      [](const auto& m) -> std::shared_ptr<const RadialDensity> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, HeatParams>) {
          return std::make_shared<HeatDensity>();
        } else if constexpr (std::is_same_v<T, PLaplacianParams>) {
          return std::make_shared<PLaplacianDensity>(m.p);
        } else if constexpr (std::is_same_v<T, TvEpsParams>) {
          return std::make_shared<TvEpsDensity>(m.eps);
        } else if constexpr (std::is_same_v<T, PeronaMalikParams>) {
          return std::make_shared<PeronaMalikDensity>(m.alpha, m.eps_visc);
        } else {
          throw Error(ErrorCode::InvalidArgument,
                      "the porous model has no gradient density; use PorousEnergy");
        }
      },
      model);
}

std::shared_ptr<const RadialDensity> make_penalty_density(double alpha, double eps_pen) {
  if (!(alpha > 0.0) || !(eps_pen > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha and eps_pen must be positive");
  }
  return std::make_shared<PenaltyDensity>(alpha, eps_pen);
}

DiffusionEnergy::DiffusionEnergy(std::shared_ptr<const RadialDensity> density,
                                 BoundaryCondition bc, FlowModel descriptor)
    : density_(std::move(density)), bc_(bc), descriptor_(descriptor) {}

double DiffusionEnergy::energy(const ImageGrid& u) const {
  const VectorField g = gradient(u);
  double e = 0.0;
  for_each_cell(g, [&](double x, double y) { e += density_->value(std::hypot(x, y)); });
  for (double t : g.top) e += density_->value(std::abs(t));
  for (double l : g.left) e += density_->value(std::abs(l));
  return e;
}

ImageGrid DiffusionEnergy::energy_gradient(const ImageGrid& u) const {
  VectorField g = gradient(u);
  auto scale = [&](double& x, double& y) {
    const double r = std::hypot(x, y);
    const double s = r > 0.0 ? density_->diffusivity(r) : 0.0;
    x *= s;
    y *= s;
  };
  for (std::size_t k = 0; k < g.vx.size(); ++k) scale(g.vx[k], g.vy[k]);
  double zero = 0.0;
  for (double& t : g.top) scale(t, zero);
  for (double& l : g.left) scale(l, zero);
  ImageGrid out = divergence(g, u.bc());
  for (double& v : out.values()) v = -v;
  return out;
}

HessianOperator DiffusionEnergy::hessian_at(const ImageGrid& u) const {
  // Per cell the Hessian of J(|r|) is  rho I + (J'' - rho) n n^T.
  struct Cell {
    double rho, kappa_minus_rho, nx, ny;
  };
  const VectorField g = gradient(u);
  std::vector<Cell> cells(g.vx.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double r = std::hypot(g.vx[k], g.vy[k]);
    const double rho = density_->diffusivity(r);
    const double kappa = density_->curvature(r);
    const double nx = r > 0.0 ? g.vx[k] / r : 0.0;
    const double ny = r > 0.0 ? g.vy[k] / r : 0.0;
    cells[k] = {rho, r > 0.0 ? kappa - rho : 0.0, nx, ny};
  }
  std::vector<double> top(g.top.size());
  std::vector<double> left(g.left.size());
  for (std::size_t j = 0; j < top.size(); ++j) top[j] = density_->curvature(std::abs(g.top[j]));
  for (std::size_t i = 0; i < left.size(); ++i) left[i] = density_->curvature(std::abs(g.left[i]));
  const BoundaryCondition bc = u.bc();
  return [cells = std::move(cells), top = std::move(top), left = std::move(left),
          bc](const ImageGrid& d) {
    VectorField q = gradient(d);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const Cell& c = cells[k];
      const double proj = c.kappa_minus_rho * (c.nx * q.vx[k] + c.ny * q.vy[k]);
      q.vx[k] = c.rho * q.vx[k] + proj * c.nx;
      q.vy[k] = c.rho * q.vy[k] + proj * c.ny;
    }
    for (std::size_t j = 0; j < top.size(); ++j) q.top[j] *= top[j];
    for (std::size_t i = 0; i < left.size(); ++i) q.left[i] *= left[i];
    ImageGrid out = divergence(q, bc);
    for (double& v : out.values()) v = -v;
    return out;
  };
}

PorousEnergy::PorousEnergy(PorousParams params) : params_(params) { validate(params_); }

double PorousEnergy::energy(const ImageGrid& u) const {
  const double q = params_.a + 2.0;
  double e = 0.0;
  for (double v : u.storage()) e += std::pow(std::abs(v), q) / q;
  return e;
}

ImageGrid PorousEnergy::energy_gradient(const ImageGrid& u) const {
  ImageGrid g = u;
  for (double& v : g.values()) v = std::pow(std::abs(v), params_.a) * v;
  return g;
}

HessianOperator PorousEnergy::hessian_at(const ImageGrid& u) const {
  std::vector<double> diag(u.size());
  auto uv = u.values();
  for (std::size_t k = 0; k < diag.size(); ++k)
    diag[k] = (1.0 + params_.a) * std::pow(std::abs(uv[k]), params_.a);
  return [diag = std::move(diag)](const ImageGrid& d) {
    ImageGrid out = d;
    auto ov = out.values();
    for (std::size_t k = 0; k < ov.size(); ++k) ov[k] *= diag[k];
    return out;
  };
}

std::unique_ptr<EnergyModel> make_energy(const FlowModel& model, BoundaryCondition bc) {
  validate(model);
  if (const auto* porous = std::get_if<PorousParams>(&model)) {
    return std::make_unique<PorousEnergy>(*porous);
  }
  if (std::holds_alternative<PeronaMalikParams>(model)) bc = BoundaryCondition::Dirichlet;
  return std::make_unique<DiffusionEnergy>(make_density(model), bc, model);
}

double tv_eps_energy(const ImageGrid& u, const TvEpsParams& params) {
  return make_energy(params, u.bc())->energy(u);
}

double plap_energy(const ImageGrid& u, const PLaplacianParams& params) {
  return make_energy(params, u.bc())->energy(u);
}

double pm_energy(const ImageGrid& u, const PeronaMalikParams& params) {
  return DiffusionEnergy(make_density(params), u.bc(), params).energy(u);
}

Projection project_K(const ImageGrid& f, double alpha, double eps_pen, const SolverConfig& cfg) {
  validate(cfg);
  if (f.bc() != BoundaryCondition::Dirichlet) {
    throw Error(ErrorCode::InvalidArgument, "project_K requires a Dirichlet image");
  }
  // min |v - f|^2 / 2 + sum B(|grad v|), B' = (r - alpha)^+ / eps_pen.
  const DiffusionEnergy penalty(make_penalty_density(alpha, eps_pen), BoundaryCondition::Dirichlet,
                                PeronaMalikParams{alpha, eps_pen, 0.0});
  detail::Objective obj;
  obj.value = [&](const ImageGrid& v) {
    const ImageGrid diff = v - f;
    return 0.5 * dot(diff, diff) + penalty.energy(v);
  };
  obj.gradient = [&](const ImageGrid& v) {
    ImageGrid g = penalty.energy_gradient(v);
    axpy(1.0, v, g);
    axpy(-1.0, f, g);
    return g;
  };
  obj.hessian = [&](const ImageGrid& v) -> HessianOperator {
    return [H = penalty.hessian_at(v)](const ImageGrid& d) {
      ImageGrid hd = H(d);
      axpy(1.0, d, hd);
      return hd;
    };
  };
  const double tol = cfg.prox_tol * (1.0 + norm2(f));
  detail::NewtonResult res = detail::newton_minimize(obj, f, tol, cfg);
  if (!res.converged) {
    std::ostringstream msg;
    msg << "projection solve stopped with residual " << res.residual << " > " << tol;
    throw Error(ErrorCode::IterationLimitExceeded, msg.str());
  }
  Projection out;
  out.excess_constant = std::max(0.0, max_gradient_norm(res.x) - alpha) / eps_pen;
  out.residual = res.residual;
  out.iterations = res.iterations;
  out.image = std::move(res.x);
  return out;
}

PeronaMalikRun pm_denoise(const ImageGrid& u0, const PeronaMalikParams& params, double h,
                          int n_steps, const SolverConfig& cfg, const StepObserver& observer) {
  validate(params);
  if (u0.bc() != BoundaryCondition::Dirichlet) {
    throw Error(ErrorCode::InvalidArgument, "Perona-Malik denoising requires a Dirichlet image");
  }
  if (!(h > 0.0) || n_steps < 1) {
    throw Error(ErrorCode::InvalidArgument, "pm_denoise needs h > 0 and n_steps >= 1");
  }
  PeronaMalikRun run;
  run.projection = project_K(u0, params.alpha, params.eps_pen, cfg);
  const double bound = 1.05 * params.alpha;
  auto record = [&](const ImageGrid& u) {
    const double m = max_gradient_norm(u);
    run.max_gradient.push_back(m);
    if (m > bound) ++run.bound_violations;
  };
  record(run.projection.image);
  const auto energy = make_energy(params, BoundaryCondition::Dirichlet);
  run.evolution = evolve(*energy, run.projection.image, h * n_steps, n_steps, cfg,
                         [&](int step, const ImageGrid& u) {
                           record(u);
                           if (observer) observer(step, u);
                         });
  return run;
}

Evolution l1_tv_restore(const ImageGrid& u0, const TvEpsParams& tv, const L1FidelityParams& fid,
                        int n_steps, double h, const SolverConfig& cfg) {
  if (!(fid.lambda > 0.0) || !(fid.sign_smooth > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "L1 fidelity lambda and smoothing must be positive");
  }
  if (n_steps < 1 || !(h > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "l1_tv_restore needs n_steps >= 1 and h > 0");
  }
  std::shared_ptr<const EnergyModel> base = make_energy(tv, u0.bc());
  const FidelityEnergy model(base, FidelityTerm{{fid.lambda, Fidelity::L1}, fid.sign_smooth, u0});
  Evolution out;
  out.image = u0;
  double change = 0.0;
  for (int step = 1; step <= n_steps; ++step) {
    try {
      auto [next, report] = resolvent_step(model, out.image, h, cfg);
      report.step_index = step;
      change = norm2(next - out.image);
      out.image = std::move(next);
      out.reports.push_back(report);
    } catch (const Error& e) {
      rethrow_at_step(e, step);
    }
    if (change <= cfg.prox_tol) return out;
  }
  std::ostringstream msg;
  msg << "L1-TV restoration did not settle within " << n_steps
      << " steps; last update norm " << change;
  throw NotConvergedError(msg.str(), out.image, change);
}

}  // namespace nldiff
