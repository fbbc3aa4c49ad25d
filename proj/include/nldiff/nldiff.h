/* SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
 * SPDX-License-Identifier: Apache-2.0 */

/*
 * C interface to the nldiff nonlinear diffusion toolkit.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns an nldiff_status;
 * on failure nldiff_last_error_message() describes the error for the calling
 * thread until its next failing call.
 */

#ifndef NLDIFF_H
#define NLDIFF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(NLDIFF_BUILDING_LIBRARY)
#    define NLDIFF_API __declspec(dllexport)
#  else
#    define NLDIFF_API __declspec(dllimport)
#  endif
#else
#  define NLDIFF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nldiff_status {
  NLDIFF_OK = 0,
  NLDIFF_E_INVALID_ARGUMENT = 1,
  NLDIFF_E_ITERATION_LIMIT = 2,
  NLDIFF_E_NON_FINITE_ENERGY = 3,
  NLDIFF_E_NOT_CONVERGED = 4,
  NLDIFF_E_EMPTY_OBSERVATION = 5,
  NLDIFF_E_GRID_TOO_LARGE = 6,
  NLDIFF_E_SINGULAR_SYSTEM = 7,
  NLDIFF_E_SHAPE_MISMATCH = 8,
  NLDIFF_E_MALFORMED_HEADER = 9,
  NLDIFF_E_UNSUPPORTED_MAXVAL = 10,
  NLDIFF_E_TRUNCATED_DATA = 11,
  NLDIFF_E_IO = 12,
  NLDIFF_E_INTERNAL = 13
} nldiff_status;

typedef enum nldiff_bc { NLDIFF_BC_NEUMANN = 0, NLDIFF_BC_DIRICHLET = 1 } nldiff_bc;

typedef enum nldiff_model_kind {
  NLDIFF_MODEL_HEAT = 0,
  NLDIFF_MODEL_PLAPLACIAN = 1,
  NLDIFF_MODEL_TVEPS = 2,
  NLDIFF_MODEL_PERONA_MALIK = 3,
  NLDIFF_MODEL_POROUS = 4
} nldiff_model_kind;

typedef enum nldiff_pgm_format { NLDIFF_PGM_ASCII = 0, NLDIFF_PGM_BINARY = 1 } nldiff_pgm_format;

/* Model descriptor. Only the fields used by `kind` are read. */
typedef struct nldiff_model {
  nldiff_model_kind kind;
  double p;        /* p-Laplacian exponent, > 1 */
  double eps;      /* TV regularization width, > 0 */
  double alpha;    /* Perona-Malik gradient bound, > 0 */
  double eps_pen;  /* Perona-Malik projection penalty width, > 0 */
  double eps_visc; /* Perona-Malik extra viscosity, >= 0 */
  double a;        /* porous exponent, in [0, 1) */
} nldiff_model;

typedef struct nldiff_solver_config {
  double prox_tol;
  int max_iters;
  double linear_tol;
  double damping;
} nldiff_solver_config;

typedef struct nldiff_step_report {
  int step_index;
  double energy_before;
  double energy_after;
  double residual;
  int inner_iterations;
  double wall_seconds;
} nldiff_step_report;

typedef struct nldiff_metrics {
  int has_reference; /* mse and psnr are valid only when nonzero */
  double mse;
  double psnr;       /* +infinity when mse == 0 */
  double discrete_tv;
  int has_energy;
  double energy;
} nldiff_metrics;

typedef struct nldiff_image nldiff_image;
typedef struct nldiff_reports nldiff_reports;

NLDIFF_API const char* nldiff_version(void);
NLDIFF_API const char* nldiff_last_error_message(void);
/* 1-based failing evolution step of the last error, or -1. */
NLDIFF_API int nldiff_last_error_step(void);
NLDIFF_API const char* nldiff_status_name(nldiff_status status);

NLDIFF_API void nldiff_model_default(nldiff_model_kind kind, nldiff_model* out);
NLDIFF_API void nldiff_solver_config_default(nldiff_solver_config* out);

/* Images */
NLDIFF_API nldiff_status nldiff_image_create(int rows, int cols, const double* values,
                                             nldiff_bc bc, nldiff_image** out);
NLDIFF_API nldiff_status nldiff_image_read_pgm(const char* path, nldiff_image** out);
NLDIFF_API nldiff_status nldiff_image_write_pgm(const nldiff_image* image, const char* path,
                                                nldiff_pgm_format format);
NLDIFF_API void nldiff_image_free(nldiff_image* image);
NLDIFF_API int nldiff_image_rows(const nldiff_image* image);
NLDIFF_API int nldiff_image_cols(const nldiff_image* image);
NLDIFF_API nldiff_bc nldiff_image_bc(const nldiff_image* image);
NLDIFF_API void nldiff_image_set_bc(nldiff_image* image, nldiff_bc bc);
/* Copies rows*cols values (row-major) into `out`, which holds `capacity`. */
NLDIFF_API nldiff_status nldiff_image_copy_values(const nldiff_image* image, double* out,
                                                  size_t capacity);

NLDIFF_API nldiff_status nldiff_add_gaussian_noise(const nldiff_image* image, double sigma,
                                                   uint64_t seed, nldiff_image** out);
/* `reference` and `model` may be NULL. */
NLDIFF_API nldiff_status nldiff_compute_metrics(const nldiff_image* image,
                                                const nldiff_image* reference,
                                                const nldiff_model* model, nldiff_metrics* out);

/* Evolutions. `config` may be NULL for defaults; `reports` may be NULL.
 * Perona-Malik and porous runs always use Dirichlet data; the other models
 * use the input image's boundary tag. */
NLDIFF_API nldiff_status nldiff_denoise(const nldiff_image* input, const nldiff_model* model,
                                        double T, int n_steps, const nldiff_solver_config* config,
                                        nldiff_image** out, nldiff_reports** reports);

/* Stationary restoration with lambda |u - u0|^2 fidelity over `model`'s
 * energy by proximal descent with step h. */
NLDIFF_API nldiff_status nldiff_restore_l2(const nldiff_image* observed, const nldiff_model* model,
                                           double lambda, double h, int max_steps,
                                           const nldiff_solver_config* config, nldiff_image** out,
                                           nldiff_reports** reports);

/* Smoothed TV with smoothed L1 fidelity. */
NLDIFF_API nldiff_status nldiff_restore_l1(const nldiff_image* observed, double eps, double lambda,
                                           double sign_smooth, double h, int max_steps,
                                           const nldiff_solver_config* config, nldiff_image** out,
                                           nldiff_reports** reports);

/* Porous-media restoration -lap(w) + gamma(w) = f from a dense image. Either
 * output pointer may be NULL. */
NLDIFF_API nldiff_status nldiff_restore_porous(const nldiff_image* observed, double a,
                                               const nldiff_solver_config* config,
                                               nldiff_image** u_out, nldiff_image** w_out);

/* Same, from a row,col,weight,value CSV on a rows x cols grid. */
NLDIFF_API nldiff_status nldiff_restore_porous_sparse(const char* csv_path, int rows, int cols,
                                                      double a, const nldiff_solver_config* config,
                                                      nldiff_image** u_out, nldiff_image** w_out);

/* Step reports */
NLDIFF_API size_t nldiff_reports_count(const nldiff_reports* reports);
NLDIFF_API nldiff_status nldiff_reports_get(const nldiff_reports* reports, size_t index,
                                            nldiff_step_report* out);
NLDIFF_API nldiff_status nldiff_reports_write_csv(const nldiff_reports* reports,
                                                  const char* path);
NLDIFF_API void nldiff_reports_free(nldiff_reports* reports);

#ifdef __cplusplus
}
#endif

#endif /* NLDIFF_H */
