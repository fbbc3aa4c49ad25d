// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#include "nldiff/nldiff.h"

#include <algorithm>
#include <exception>
#include <new>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nldiff/engine.hpp"
#include "nldiff/flows.hpp"
#include "nldiff/io.hpp"
#include "nldiff/porous.hpp"

struct nldiff_image {
  nldiff::ImageGrid grid;
};

struct nldiff_reports {
  std::vector<nldiff::StepReport> items;
};

namespace {

thread_local std::string g_last_error;
thread_local int g_last_step = -1;

nldiff_status to_status(nldiff::ErrorCode code) {
  using nldiff::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return NLDIFF_E_INVALID_ARGUMENT;
    case ErrorCode::IterationLimitExceeded: return NLDIFF_E_ITERATION_LIMIT;
    case ErrorCode::NonFiniteEnergy: return NLDIFF_E_NON_FINITE_ENERGY;
    case ErrorCode::NotConverged: return NLDIFF_E_NOT_CONVERGED;
    case ErrorCode::EmptyObservation: return NLDIFF_E_EMPTY_OBSERVATION;
    case ErrorCode::GridTooLarge: return NLDIFF_E_GRID_TOO_LARGE;
    case ErrorCode::SingularSystem: return NLDIFF_E_SINGULAR_SYSTEM;
    case ErrorCode::ShapeMismatch: return NLDIFF_E_SHAPE_MISMATCH;
    case ErrorCode::MalformedHeader: return NLDIFF_E_MALFORMED_HEADER;
    case ErrorCode::UnsupportedMaxval: return NLDIFF_E_UNSUPPORTED_MAXVAL;
    case ErrorCode::TruncatedData: return NLDIFF_E_TRUNCATED_DATA;
    case ErrorCode::IoFailure: return NLDIFF_E_IO;
  }
  return NLDIFF_E_INTERNAL;
}

nldiff_status fail(nldiff_status status, const std::string& message, int step = -1) {
  g_last_error = message;
  g_last_step = step;
  return status;
}

template <typename Fn>
nldiff_status guarded(Fn&& fn) {
  try {
    fn();
    return NLDIFF_OK;
  } catch (const nldiff::Error& e) {
    return fail(to_status(e.code()), e.what(), e.step());
  } catch (const std::bad_alloc&) {
    return fail(NLDIFF_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NLDIFF_E_INTERNAL, e.what());
  } catch (...) {
    return fail(NLDIFF_E_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw nldiff::Error(nldiff::ErrorCode::InvalidArgument, what);
}

nldiff::BoundaryCondition to_bc(nldiff_bc bc) {
  return bc == NLDIFF_BC_DIRICHLET ? nldiff::BoundaryCondition::Dirichlet
                                   : nldiff::BoundaryCondition::Neumann;
}

nldiff::FlowModel to_model(const nldiff_model& m) {
  switch (m.kind) {
    case NLDIFF_MODEL_HEAT: return nldiff::HeatParams{};
    case NLDIFF_MODEL_PLAPLACIAN: return nldiff::PLaplacianParams{m.p};
    case NLDIFF_MODEL_TVEPS: return nldiff::TvEpsParams{m.eps};
    case NLDIFF_MODEL_PERONA_MALIK:
      return nldiff::PeronaMalikParams{m.alpha, m.eps_pen, m.eps_visc};
    case NLDIFF_MODEL_POROUS: return nldiff::PorousParams{m.a};
  }
  throw nldiff::Error(nldiff::ErrorCode::InvalidArgument, "unknown model kind");
}

nldiff::SolverConfig to_config(const nldiff_solver_config* c) {
  nldiff::SolverConfig cfg;
  if (c != nullptr) {
    cfg.prox_tol = c->prox_tol;
    cfg.max_iters = c->max_iters;
    cfg.linear_tol = c->linear_tol;
    cfg.damping = c->damping;
  }
  nldiff::validate(cfg);
  return cfg;
}

nldiff_image* wrap(nldiff::ImageGrid grid) { return new nldiff_image{std::move(grid)}; }

void emit(nldiff::Evolution&& run, nldiff_image** out, nldiff_reports** reports) {
  *out = wrap(std::move(run.image));
  if (reports != nullptr) *reports = new nldiff_reports{std::move(run.reports)};
}

}  // namespace

extern "C" {

const char* nldiff_version(void) { return "1.0.0"; }

const char* nldiff_last_error_message(void) { return g_last_error.c_str(); }

int nldiff_last_error_step(void) { return g_last_step; }

const char* nldiff_status_name(nldiff_status status) {
  switch (status) {
    case NLDIFF_OK: return "ok";
    case NLDIFF_E_INVALID_ARGUMENT: return "invalid argument";
    case NLDIFF_E_ITERATION_LIMIT: return "iteration limit exceeded";
    case NLDIFF_E_NON_FINITE_ENERGY: return "non-finite energy";
    case NLDIFF_E_NOT_CONVERGED: return "not converged";
    case NLDIFF_E_EMPTY_OBSERVATION: return "empty observation";
    case NLDIFF_E_GRID_TOO_LARGE: return "grid too large";
    case NLDIFF_E_SINGULAR_SYSTEM: return "singular system";
    case NLDIFF_E_SHAPE_MISMATCH: return "shape mismatch";
    case NLDIFF_E_MALFORMED_HEADER: return "malformed header";
    case NLDIFF_E_UNSUPPORTED_MAXVAL: return "unsupported maxval";
    case NLDIFF_E_TRUNCATED_DATA: return "truncated data";
    case NLDIFF_E_IO: return "i/o failure";
    case NLDIFF_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void nldiff_model_default(nldiff_model_kind kind, nldiff_model* out) {
  if (out == nullptr) return;
  const nldiff::PLaplacianParams plap;
  const nldiff::TvEpsParams tv;
  const nldiff::PeronaMalikParams pm;
  const nldiff::PorousParams porous;
  *out = nldiff_model{kind, plap.p, tv.eps, pm.alpha, pm.eps_pen, pm.eps_visc, porous.a};
}

void nldiff_solver_config_default(nldiff_solver_config* out) {
  if (out == nullptr) return;
  const nldiff::SolverConfig cfg;
  *out = nldiff_solver_config{cfg.prox_tol, cfg.max_iters, cfg.linear_tol, cfg.damping};
}

nldiff_status nldiff_image_create(int rows, int cols, const double* values, nldiff_bc bc,
                                  nldiff_image** out) {
  return guarded([&] {
    require(out != nullptr, "output handle is NULL");
    nldiff::ImageGrid grid(rows, cols, to_bc(bc));
    if (values != nullptr) {
      grid = nldiff::ImageGrid(
          rows, cols, std::vector<double>(values, values + grid.size()), to_bc(bc));
    }
    *out = wrap(std::move(grid));
  });
}

nldiff_status nldiff_image_read_pgm(const char* path, nldiff_image** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path or output handle is NULL");
    *out = wrap(nldiff::read_pgm(path));
  });
}

nldiff_status nldiff_image_write_pgm(const nldiff_image* image, const char* path,
                                     nldiff_pgm_format format) {
  return guarded([&] {
    require(image != nullptr && path != nullptr, "image or path is NULL");
    nldiff::write_pgm(image->grid, path,
                      format == NLDIFF_PGM_ASCII ? nldiff::PgmFormat::Ascii
                                                 : nldiff::PgmFormat::Binary);
  });
}

void nldiff_image_free(nldiff_image* image) { delete image; }

int nldiff_image_rows(const nldiff_image* image) { return image ? image->grid.rows() : 0; }

int nldiff_image_cols(const nldiff_image* image) { return image ? image->grid.cols() : 0; }

nldiff_bc nldiff_image_bc(const nldiff_image* image) {
  return image && image->grid.bc() == nldiff::BoundaryCondition::Dirichlet ? NLDIFF_BC_DIRICHLET
                                                                           : NLDIFF_BC_NEUMANN;
}

void nldiff_image_set_bc(nldiff_image* image, nldiff_bc bc) {
  if (image != nullptr) image->grid.set_bc(to_bc(bc));
}

nldiff_status nldiff_image_copy_values(const nldiff_image* image, double* out, size_t capacity) {
  return guarded([&] {
    require(image != nullptr && out != nullptr, "image or buffer is NULL");
    if (capacity < image->grid.size()) {
      throw nldiff::Error(nldiff::ErrorCode::ShapeMismatch,
                          "buffer holds " + std::to_string(capacity) + " values, image has " +
                              std::to_string(image->grid.size()));
    }
    const auto v = image->grid.values();
    std::copy(v.begin(), v.end(), out);
  });
}

nldiff_status nldiff_add_gaussian_noise(const nldiff_image* image, double sigma, uint64_t seed,
                                        nldiff_image** out) {
  return guarded([&] {
    require(image != nullptr && out != nullptr, "image or output handle is NULL");
    *out = wrap(nldiff::add_gaussian_noise(image->grid, sigma, seed));
  });
}

nldiff_status nldiff_compute_metrics(const nldiff_image* image, const nldiff_image* reference,
                                     const nldiff_model* model, nldiff_metrics* out) {
  return guarded([&] {
    require(image != nullptr && out != nullptr, "image or output is NULL");
    std::optional<nldiff::FlowModel> flow;
    if (model != nullptr) flow = to_model(*model);
    const nldiff::MetricsReport m = nldiff::compute_metrics(
        image->grid, reference ? &reference->grid : nullptr, flow ? &*flow : nullptr);
    *out = nldiff_metrics{};
    out->has_reference = m.mse.has_value();
    out->mse = m.mse.value_or(0.0);
    out->psnr = m.psnr.value_or(0.0);
    out->discrete_tv = m.discrete_tv;
    out->has_energy = m.energy.has_value();
    out->energy = m.energy.value_or(0.0);
  });
}

nldiff_status nldiff_denoise(const nldiff_image* input, const nldiff_model* model, double T,
                             int n_steps, const nldiff_solver_config* config, nldiff_image** out,
                             nldiff_reports** reports) {
  return guarded([&] {
    require(input != nullptr && model != nullptr && out != nullptr,
            "input, model or output handle is NULL");
    require(T > 0.0, "T must be positive");
    require(n_steps >= 1, "steps must be at least 1");
    const nldiff::FlowModel flow = to_model(*model);
    nldiff::validate(flow);
    const nldiff::SolverConfig cfg = to_config(config);
    nldiff::ImageGrid u0 = input->grid;
    if (const auto* pm = std::get_if<nldiff::PeronaMalikParams>(&flow)) {
      u0.set_bc(nldiff::BoundaryCondition::Dirichlet);
      nldiff::PeronaMalikRun run = nldiff::pm_denoise(u0, *pm, T / n_steps, n_steps, cfg);
      emit(std::move(run.evolution), out, reports);
    } else if (const auto* porous = std::get_if<nldiff::PorousParams>(&flow)) {
      u0.set_bc(nldiff::BoundaryCondition::Dirichlet);
      emit(nldiff::porous_evolve(u0, T, n_steps, *porous, cfg), out, reports);
    } else {
      const auto energy = nldiff::make_energy(flow, u0.bc());
      emit(nldiff::evolve(*energy, u0, T, n_steps, cfg), out, reports);
    }
  });
}

nldiff_status nldiff_restore_l2(const nldiff_image* observed, const nldiff_model* model,
                                double lambda, double h, int max_steps,
                                const nldiff_solver_config* config, nldiff_image** out,
                                nldiff_reports** reports) {
  return guarded([&] {
    require(observed != nullptr && model != nullptr && out != nullptr,
            "observation, model or output handle is NULL");
    const nldiff::FlowModel flow = to_model(*model);
    require(!std::holds_alternative<nldiff::PorousParams>(flow),
            "use nldiff_restore_porous for the porous model");
    nldiff::ImageGrid u0 = observed->grid;
    if (std::holds_alternative<nldiff::PeronaMalikParams>(flow)) {
      u0.set_bc(nldiff::BoundaryCondition::Dirichlet);
    }
    const auto energy = nldiff::make_energy(flow, u0.bc());
    emit(nldiff::steepest_descent_restore(*energy, u0, {lambda, nldiff::Fidelity::L2}, u0, h,
                                          max_steps, to_config(config)),
         out, reports);
  });
}

nldiff_status nldiff_restore_l1(const nldiff_image* observed, double eps, double lambda,
                                double sign_smooth, double h, int max_steps,
                                const nldiff_solver_config* config, nldiff_image** out,
                                nldiff_reports** reports) {
  return guarded([&] {
    require(observed != nullptr && out != nullptr, "observation or output handle is NULL");
    nldiff::validate(nldiff::FlowModel{nldiff::TvEpsParams{eps}});
    emit(nldiff::l1_tv_restore(observed->grid, {eps}, {lambda, sign_smooth}, max_steps, h,
                               to_config(config)),
         out, reports);
  });
}

nldiff_status nldiff_restore_porous(const nldiff_image* observed, double a,
                                    const nldiff_solver_config* config, nldiff_image** u_out,
                                    nldiff_image** w_out) {
  return guarded([&] {
    require(observed != nullptr, "observation is NULL");
    nldiff::PorousRestoration r =
        nldiff::porous_stationary_restore(observed->grid, {a}, to_config(config));
    if (u_out != nullptr) *u_out = wrap(std::move(r.u));
    if (w_out != nullptr) *w_out = wrap(std::move(r.w));
  });
}

nldiff_status nldiff_restore_porous_sparse(const char* csv_path, int rows, int cols, double a,
                                           const nldiff_solver_config* config,
                                           nldiff_image** u_out, nldiff_image** w_out) {
  return guarded([&] {
    require(csv_path != nullptr, "observation path is NULL");
    const nldiff::SparseObservation obs = nldiff::read_sparse_observation_csv(csv_path, rows, cols);
    nldiff::PorousRestoration r = nldiff::porous_stationary_restore(obs, {a}, to_config(config));
    if (u_out != nullptr) *u_out = wrap(std::move(r.u));
    if (w_out != nullptr) *w_out = wrap(std::move(r.w));
  });
}

size_t nldiff_reports_count(const nldiff_reports* reports) {
  return reports ? reports->items.size() : 0;
}

nldiff_status nldiff_reports_get(const nldiff_reports* reports, size_t index,
                                 nldiff_step_report* out) {
  return guarded([&] {
    require(reports != nullptr && out != nullptr, "reports or output is NULL");
    require(index < reports->items.size(), "report index out of range");
    const nldiff::StepReport& r = reports->items[index];
    *out = nldiff_step_report{r.step_index,  r.energy_before,    r.energy_after,
                              r.residual,    r.inner_iterations, r.wall_seconds};
  });
}

nldiff_status nldiff_reports_write_csv(const nldiff_reports* reports, const char* path) {
  return guarded([&] {
    require(reports != nullptr && path != nullptr, "reports or path is NULL");
    nldiff::write_step_log(reports->items, path);
  });
}

void nldiff_reports_free(nldiff_reports* reports) { delete reports; }

}  // extern "C"
