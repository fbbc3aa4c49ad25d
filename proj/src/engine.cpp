// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#include "nldiff/engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "newton.hpp"

namespace nldiff {

HessianOperator EnergyModel::hessian_at(const ImageGrid& u) const {
  ImageGrid g0 = energy_gradient(u);
  return [this, u, g0 = std::move(g0)](const ImageGrid& d) {
    const double dn = norm2(d);
    if (dn == 0.0) return ImageGrid(d.rows(), d.cols(), d.bc());
    const double step = 1e-7 * (1.0 + norm2(u)) / dn;
    ImageGrid up = u;
    axpy(step, d, up);
    ImageGrid hd = energy_gradient(up) - g0;
    for (double& v : hd.values()) v /= step;
    return hd;
  };
}

void validate(const SolverConfig& cfg) {
  if (!(cfg.prox_tol > 0.0) || !(cfg.linear_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "solver tolerances must be positive");
  }
  if (cfg.max_iters < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_iters must be at least 1");
  }
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "damping must lie in (0, 1]");
  }
}

std::pair<ImageGrid, StepReport> resolvent_step(const EnergyModel& model, const ImageGrid& u_prev,
                                                double h, const SolverConfig& cfg) {
  validate(cfg);
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::InvalidArgument, "step size h must be positive");
  }
  if (u_prev.bc() != model.bc()) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("image boundary condition ") + to_string(u_prev.bc()) +
                    " does not match model boundary condition " + to_string(model.bc()));
  }
  const auto start = std::chrono::steady_clock::now();
  const double inv_h = 1.0 / h;

  detail::Objective obj;
  obj.value = [&](const ImageGrid& v) {
    double q = 0.0;
    auto vv = v.values();
    auto pv = u_prev.values();
    for (std::size_t k = 0; k < vv.size(); ++k) q += (vv[k] - pv[k]) * (vv[k] - pv[k]);
    return model.energy(v) + 0.5 * inv_h * q;
  };
  obj.gradient = [&](const ImageGrid& v) {
    ImageGrid g = model.energy_gradient(v);
    axpy(inv_h, v, g);
    axpy(-inv_h, u_prev, g);
    return g;
  };
  obj.hessian = [&](const ImageGrid& v) -> HessianOperator {
    HessianOperator H = model.hessian_at(v);
    return [H = std::move(H), inv_h](const ImageGrid& d) {
      ImageGrid hd = H(d);
      axpy(inv_h, d, hd);
      return hd;
    };
  };

  StepReport report;
  report.energy_before = model.energy(u_prev);
  if (!std::isfinite(report.energy_before)) {
    throw Error(ErrorCode::NonFiniteEnergy, "model energy is not finite at the input image");
  }
  // The residual cannot be resolved below the rounding of v itself, amplified
  // by 1/h and by the energy's curvature. For tiny h or very stiff energies
  // that floor, not prox_tol, is the binding target.
  const double u_norm = norm2(u_prev);
  const double rounding_floor =
      64.0 * std::numeric_limits<double>::epsilon() *
      (u_norm * inv_h + norm2(model.energy_gradient(u_prev)) +
       norm2(model.hessian_at(u_prev)(u_prev)));
  const double tol = std::max(cfg.prox_tol * (1.0 + u_norm), rounding_floor);
  detail::NewtonResult res = detail::newton_minimize(obj, u_prev, tol, cfg);
  if (!res.converged) {
    std::ostringstream msg;
    msg << "resolvent solve stopped after " << res.iterations
        << " iterations with residual " << res.residual << " > " << tol;
    throw Error(ErrorCode::IterationLimitExceeded, msg.str());
  }
  report.energy_after = model.energy(res.x);
  if (!std::isfinite(report.energy_after)) {
    throw Error(ErrorCode::NonFiniteEnergy, "model energy is not finite after the step");
  }
  report.residual = res.residual;
  report.inner_iterations = res.iterations;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(res.x), report};
}

Evolution evolve(const EnergyModel& model, const ImageGrid& u0, double T, int n_steps,
                 const SolverConfig& cfg, const StepObserver& observer) {
  if (!(T > 0.0) || n_steps < 1) {
    throw Error(ErrorCode::InvalidArgument, "evolution needs T > 0 and n_steps >= 1");
  }
  const double h = T / n_steps;
  Evolution out;
  out.image = u0;
  out.reports.reserve(static_cast<std::size_t>(n_steps));
  for (int step = 1; step <= n_steps; ++step) {
    try {
      auto [next, report] = resolvent_step(model, out.image, h, cfg);
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

ImageGrid exponential_formula(const EnergyModel& model, const ImageGrid& u0, double t, int n,
                              const SolverConfig& cfg) {
  return evolve(model, u0, t, n, cfg).image;
}

Evolution steepest_descent_restore(const EnergyModel& model, const ImageGrid& u0,
                                   const FidelityParams& fid, const ImageGrid& u_init, double h,
                                   int max_steps, const SolverConfig& cfg) {
  if (!(fid.lambda > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "fidelity lambda must be positive");
  }
  if (fid.fidelity != Fidelity::L2) {
    throw Error(ErrorCode::InvalidArgument,
                "steepest_descent_restore handles L2 fidelity; use l1_tv_restore for L1");
  }
  if (!u0.same_shape(u_init)) {
    throw Error(ErrorCode::ShapeMismatch, "observation and initial guess differ in shape");
  }
  if (max_steps < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_steps must be at least 1");
  }
  // Non-owning alias: `model` outlives this call.
  std::shared_ptr<const EnergyModel> base(&model, [](const EnergyModel*) {});
  FidelityEnergy restorer(base, FidelityTerm{fid, 0.05, u0});

  Evolution out;
  out.image = u_init;
  double change = 0.0;
  for (int step = 1; step <= max_steps; ++step) {
    try {
      auto [next, report] = resolvent_step(restorer, out.image, h, cfg);
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
  msg << "steepest descent did not settle within " << max_steps
      << " steps; last update norm " << change;
  throw NotConvergedError(msg.str(), out.image, change);
}

FidelityEnergy::FidelityEnergy(std::shared_ptr<const EnergyModel> base, FidelityTerm term)
    : base_(std::move(base)), term_(std::move(term)) {
  if (!(term_.params.lambda > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "fidelity lambda must be positive");
  }
  if (term_.params.fidelity == Fidelity::L1 && !(term_.sign_smooth > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "sign smoothing width must be positive");
  }
}

namespace {

// Huber-smoothed |x| with width d, and its first two derivatives.
double smooth_abs(double x, double d) {
  const double a = std::abs(x);
  return a <= d ? 0.5 * a * a / d : a - 0.5 * d;
}
double smooth_sign(double x, double d) { return std::abs(x) <= d ? x / d : (x > 0 ? 1.0 : -1.0); }

}  // namespace

double FidelityEnergy::energy(const ImageGrid& u) const {
  const double lambda = term_.params.lambda;
  auto uv = u.values();
  auto fv = term_.u0.values();
  double s = 0.0;
  if (term_.params.fidelity == Fidelity::L2) {
    for (std::size_t k = 0; k < uv.size(); ++k) s += (uv[k] - fv[k]) * (uv[k] - fv[k]);
  } else {
    for (std::size_t k = 0; k < uv.size(); ++k) s += smooth_abs(uv[k] - fv[k], term_.sign_smooth);
  }
  return base_->energy(u) + lambda * s;
}

ImageGrid FidelityEnergy::energy_gradient(const ImageGrid& u) const {
  ImageGrid g = base_->energy_gradient(u);
  const double lambda = term_.params.lambda;
  auto gv = g.values();
  auto uv = u.values();
  auto fv = term_.u0.values();
  if (term_.params.fidelity == Fidelity::L2) {
    for (std::size_t k = 0; k < gv.size(); ++k) gv[k] += 2.0 * lambda * (uv[k] - fv[k]);
  } else {
    for (std::size_t k = 0; k < gv.size(); ++k)
      gv[k] += lambda * smooth_sign(uv[k] - fv[k], term_.sign_smooth);
  }
  return g;
}

HessianOperator FidelityEnergy::hessian_at(const ImageGrid& u) const {
  HessianOperator H = base_->hessian_at(u);
  std::vector<double> diag(u.size());
  const double lambda = term_.params.lambda;
  auto uv = u.values();
  auto fv = term_.u0.values();
  for (std::size_t k = 0; k < diag.size(); ++k) {
    if (term_.params.fidelity == Fidelity::L2) {
      diag[k] = 2.0 * lambda;
    } else {
      diag[k] = std::abs(uv[k] - fv[k]) <= term_.sign_smooth ? lambda / term_.sign_smooth : 0.0;
    }
  }
  return [H = std::move(H), diag = std::move(diag)](const ImageGrid& d) {
    ImageGrid hd = H(d);
    auto hv = hd.values();
    auto dv = d.values();
    for (std::size_t k = 0; k < hv.size(); ++k) hv[k] += diag[k] * dv[k];
    return hd;
  };
}

}  // namespace nldiff
