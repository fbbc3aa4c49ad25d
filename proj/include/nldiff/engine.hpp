// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "nldiff/error.hpp"
#include "nldiff/grid.hpp"
#include "nldiff/model.hpp"

namespace nldiff {

enum class Fidelity { L2, L1 };

struct FidelityParams {
  double lambda = 1.0;
  Fidelity fidelity = Fidelity::L2;
};

/// Fidelity term attached to an energy: lambda * |v - u0|_2^2 for L2, or
/// lambda * sum s_delta(v - u0) for L1 with the Huber-smoothed absolute value
/// of width `sign_smooth`.
struct FidelityTerm {
  FidelityParams params;
  double sign_smooth = 0.05;
  ImageGrid u0;
};

/// Linear map d -> H d, where H is the Hessian (or a symmetric positive
/// semidefinite surrogate of it) at a fixed point.
using HessianOperator = std::function<ImageGrid(const ImageGrid&)>;

/// A convex functional phi on images together with an element of its
/// subdifferential.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual double energy(const ImageGrid& u) const = 0;
  virtual ImageGrid energy_gradient(const ImageGrid& u) const = 0;

  /// Curvature at `u` for Newton-type inner solvers. The default builds a
  /// forward finite difference of `energy_gradient`.
  virtual HessianOperator hessian_at(const ImageGrid& u) const;

  virtual BoundaryCondition bc() const = 0;
  virtual FlowModel descriptor() const = 0;
  virtual std::optional<FidelityTerm> fidelity() const { return std::nullopt; }
};

struct SolverConfig {
  double prox_tol = 1e-10;  // first-order optimality threshold (scaled by 1 + |u_prev|)
  int max_iters = 200;      // Newton iterations per resolvent solve
  double linear_tol = 1e-6; // relative CG forcing term
  double damping = 1.0;     // initial Newton step length, in (0, 1]
};

void validate(const SolverConfig& cfg);

struct StepReport {
  int step_index = 0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double residual = 0.0;
  int inner_iterations = 0;
  double wall_seconds = 0.0;
};

struct Evolution {
  ImageGrid image;
  std::vector<StepReport> reports;
};

/// Called after each completed step with its 1-based index and the iterate.
using StepObserver = std::function<void(int, const ImageGrid&)>;

/// Raised when an outer fixed-point iteration exhausts its step budget.
class NotConvergedError : public Error {
 public:
  NotConvergedError(const std::string& what, ImageGrid last, double residual)
      : Error(ErrorCode::NotConverged, what), last_(std::move(last)), residual_(residual) {}

  const ImageGrid& last_iterate() const noexcept { return last_; }
  double residual() const noexcept { return residual_; }

 private:
  ImageGrid last_;
  double residual_;
};

/// One implicit Euler step: argmin_v phi(v) + |v - u_prev|^2 / (2h).
/// The returned iterate satisfies
///   |grad phi(u) + (u - u_prev)/h| <= prox_tol * (1 + |u_prev|).
std::pair<ImageGrid, StepReport> resolvent_step(const EnergyModel& model, const ImageGrid& u_prev,
                                                double h, const SolverConfig& cfg);

/// n_steps resolvent steps of size T / n_steps.
Evolution evolve(const EnergyModel& model, const ImageGrid& u0, double T, int n_steps,
                 const SolverConfig& cfg, const StepObserver& observer = {});

/// (I + (t/n) d phi)^{-n} u0.
ImageGrid exponential_formula(const EnergyModel& model, const ImageGrid& u0, double t, int n,
                              const SolverConfig& cfg);

/// Proximal-point descent on phi(v) + lambda |v - u0|^2 from `u_init`, stopping
/// once consecutive iterates differ by at most prox_tol. Throws
/// NotConvergedError after `max_steps` steps without convergence.
Evolution steepest_descent_restore(const EnergyModel& model, const ImageGrid& u0,
                                   const FidelityParams& fid, const ImageGrid& u_init, double h,
                                   int max_steps, const SolverConfig& cfg);

/// phi plus a fidelity term; shares `base`.
class FidelityEnergy final : public EnergyModel {
 public:
  FidelityEnergy(std::shared_ptr<const EnergyModel> base, FidelityTerm term);

  double energy(const ImageGrid& u) const override;
  ImageGrid energy_gradient(const ImageGrid& u) const override;
  HessianOperator hessian_at(const ImageGrid& u) const override;
  BoundaryCondition bc() const override { return base_->bc(); }
  FlowModel descriptor() const override { return base_->descriptor(); }
  std::optional<FidelityTerm> fidelity() const override { return term_; }

 private:
  std::shared_ptr<const EnergyModel> base_;
  FidelityTerm term_;
};

}  // namespace nldiff
