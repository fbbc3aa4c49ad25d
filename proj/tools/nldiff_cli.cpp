// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "nldiff/nldiff.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitSolver = 2;

struct ImageDeleter {
  void operator()(nldiff_image* p) const { nldiff_image_free(p); }
};
struct ReportsDeleter {
  void operator()(nldiff_reports* p) const { nldiff_reports_free(p); }
};
using Image = std::unique_ptr<nldiff_image, ImageDeleter>;
using Reports = std::unique_ptr<nldiff_reports, ReportsDeleter>;

// Solver-side failures exit with 2; bad input (arguments, files) with 1.
int exit_code_for(nldiff_status s) {
  switch (s) {
    case NLDIFF_E_ITERATION_LIMIT:
    case NLDIFF_E_NON_FINITE_ENERGY:
    case NLDIFF_E_NOT_CONVERGED:
    case NLDIFF_E_SINGULAR_SYSTEM:
    case NLDIFF_E_INTERNAL:
      return kExitSolver;
    default:
      return kExitUsage;
  }
}

int report_failure(nldiff_status s) {
  std::fprintf(stderr, "nldiff: %s: %s\n", nldiff_status_name(s), nldiff_last_error_message());
  return exit_code_for(s);
}

// Throws on failure so the subcommand bodies stay linear.
struct Failure {
  nldiff_status status;
};
void check(nldiff_status s) {
  if (s != NLDIFF_OK) throw Failure{s};
}

Image load(const std::string& path, nldiff_bc bc) {
  nldiff_image* raw = nullptr;
  check(nldiff_image_read_pgm(path.c_str(), &raw));
  Image img(raw);
  nldiff_image_set_bc(img.get(), bc);
  return img;
}

void save(const Image& img, const std::string& path, bool ascii) {
  check(nldiff_image_write_pgm(img.get(), path.c_str(),
                               ascii ? NLDIFF_PGM_ASCII : NLDIFF_PGM_BINARY));
}

void save_log(const Reports& reports, const std::string& path) {
  if (!path.empty() && reports) check(nldiff_reports_write_csv(reports.get(), path.c_str()));
}

// Default end time and step count per model, sized for 8-bit images.
struct Schedule {
  double T;
  int steps;
};
const std::map<nldiff_model_kind, Schedule> kDefaultSchedule = {
    {NLDIFF_MODEL_HEAT, {0.5, 5}},
    {NLDIFF_MODEL_PLAPLACIAN, {2.0, 10}},
    {NLDIFF_MODEL_TVEPS, {10.0, 10}},
    {NLDIFF_MODEL_PERONA_MALIK, {0.5, 5}},
    {NLDIFF_MODEL_POROUS, {0.01, 5}},
};

const std::map<std::string, nldiff_model_kind> kModelNames = {
    {"heat", NLDIFF_MODEL_HEAT},       {"plap", NLDIFF_MODEL_PLAPLACIAN},
    {"tveps", NLDIFF_MODEL_TVEPS},     {"pm", NLDIFF_MODEL_PERONA_MALIK},
    {"porous", NLDIFF_MODEL_POROUS},
};

const std::map<std::string, nldiff_bc> kBcNames = {{"neumann", NLDIFF_BC_NEUMANN},
                                                    {"dirichlet", NLDIFF_BC_DIRICHLET}};

struct ModelFlags {
  std::string name = "heat";
  nldiff_model model{};

  void add_to(CLI::App& cmd, bool required) {
    nldiff_model_default(NLDIFF_MODEL_HEAT, &model);
    auto* opt = cmd.add_option("--model", name,
                               "heat: quadratic energy, linear diffusion; plap: |grad u|^p / p; "
                               "tveps: smoothed total variation; pm: Perona-Malik with gradient "
                               "projection; porous: u_t = lap(|u|^a u) in the H^-1 metric")
                    ->check(CLI::IsMember({"heat", "plap", "tveps", "pm", "porous"}));
    if (required) opt->required();
    cmd.add_option("--p", model.p, "p-Laplacian exponent, > 1")
        ->check(CLI::Range(1.0, 1e6))
        ->default_str("1.5");
    cmd.add_option("--eps", model.eps, "TV smoothing width of |grad u|, > 0")
        ->check(CLI::PositiveNumber)
        ->default_str("0.05");
    cmd.add_option("--alpha", model.alpha,
                   "Perona-Malik contrast scale: diffusivity alpha^2/(alpha^2+|grad u|^2) and "
                   "gradient bound |grad u| <= alpha, > 0")
        ->check(CLI::PositiveNumber)
        ->default_str("60");
    cmd.add_option("--eps-pen", model.eps_pen,
                   "penalty width of the projection onto {|grad u| <= alpha}, > 0")
        ->check(CLI::PositiveNumber)
        ->default_str("0.001");
    cmd.add_option("--eps-visc", model.eps_visc,
                   "extra viscosity eps |grad u|^2 / 2 added to Perona-Malik, >= 0")
        ->check(CLI::NonNegativeNumber)
        ->default_str("0");
    cmd.add_option("--a", model.a, "porous exponent in beta(u) = |u|^a u, in [0, 1)")
        ->check(CLI::Range(0.0, 0.999999999))
        ->default_str("0.5");
  }

  nldiff_model resolve() const {
    nldiff_model m = model;
    m.kind = kModelNames.at(name);
    return m;
  }
};

struct SolverFlags {
  nldiff_solver_config config{};

  void add_to(CLI::App& cmd) {
    nldiff_solver_config_default(&config);
    cmd.add_option("--prox-tol", config.prox_tol,
                   "first-order optimality tolerance of each implicit step, scaled by "
                   "1 + |u_prev|")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd.add_option("--max-iters", config.max_iters, "Newton iterations per implicit step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }
};

void print_metric(const char* name, double v) {
  if (std::isinf(v)) {
    std::printf("%s: %s\n", name, v > 0 ? "inf" : "-inf");
  } else {
    std::printf("%s: %.10g\n", name, v);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nldiff: nonlinear diffusion and variational restoration of grayscale images"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nldiff_version()));

  std::string input;
  std::string output;
  std::string log_path;
  std::string bc_name = "neumann";
  bool ascii = false;

  // denoise
  auto* denoise = app.add_subcommand(
      "denoise", "evolve the gradient flow of a regularizing energy by implicit Euler steps");
  ModelFlags denoise_model;
  SolverFlags denoise_solver;
  double T = 0.0;
  int steps = 0;
  denoise_model.add_to(*denoise, true);
  denoise_solver.add_to(*denoise);
  denoise->add_option("--T", T, "final time of the evolution, > 0 (default depends on model)")
      ->check(CLI::PositiveNumber);
  denoise->add_option("--steps", steps,
                      "number of implicit steps; step size h = T / steps (default depends on "
                      "model)")
      ->check(CLI::PositiveNumber);
  denoise->add_option("--bc", bc_name,
                      "boundary condition: neumann (zero flux) or dirichlet (zero value); pm "
                      "and porous always use dirichlet")
      ->check(CLI::IsMember({"neumann", "dirichlet"}))
      ->capture_default_str();
  denoise->add_option("--log", log_path,
                      "write per-step CSV: step,energy_before,energy_after,residual,iters");
  denoise->add_flag("--ascii", ascii, "write P2 instead of P5");
  denoise->add_option("input", input, "input PGM")->required();
  denoise->add_option("output", output, "output PGM")->required();

  // restore
  auto* restore = app.add_subcommand(
      "restore", "stationary restoration: regularizing energy plus a fidelity to the input");
  ModelFlags restore_model;
  SolverFlags restore_solver;
  std::string fidelity = "l2";
  double lambda = 0.05;
  double h = 1.0;
  int max_steps = 200;
  double sign_smooth = 0.05;
  std::string obs_path;
  std::string w_output;
  int obs_rows = 0;
  int obs_cols = 0;
  restore_model.add_to(*restore, false);
  restore_solver.add_to(*restore);
  restore->add_option("--fidelity", fidelity,
                      "l2: lambda |u - u0|^2; l1: lambda |u - u0|_1 (smoothed) with tveps "
                      "regularizer")
      ->check(CLI::IsMember({"l2", "l1"}))
      ->capture_default_str();
  restore->add_option("--lambda", lambda, "fidelity weight, > 0")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  restore->add_option("--dt", h, "implicit descent step size, > 0")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  restore->add_option("--steps", max_steps, "maximum descent steps before giving up")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  restore->add_option("--sign-smooth", sign_smooth, "smoothing width of the l1 fidelity, > 0")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  restore->add_option("--bc", bc_name, "boundary condition: neumann or dirichlet")
      ->check(CLI::IsMember({"neumann", "dirichlet"}))
      ->capture_default_str();
  restore->add_option("--obs", obs_path,
                      "porous only: sparse observations as CSV row,col,weight,value");
  restore->add_option("--rows", obs_rows, "porous --obs grid rows")->check(CLI::Range(2, 1 << 20));
  restore->add_option("--cols", obs_cols, "porous --obs grid columns")
      ->check(CLI::Range(2, 1 << 20));
  restore->add_option("--w-out", w_output, "porous only: also write the dual variable beta(u)");
  restore->add_option("--log", log_path,
                      "write per-step CSV: step,energy_before,energy_after,residual,iters");
  restore->add_flag("--ascii", ascii, "write P2 instead of P5");
  restore->add_option("input", input, "input PGM (omit for porous with --obs)");
  restore->add_option("output", output, "output PGM");

  // noise
  auto* noise = app.add_subcommand("noise", "add seeded i.i.d. Gaussian noise (mt19937_64)");
  double sigma = 0.0;
  std::uint64_t seed = 0;
  noise->add_option("--sigma", sigma, "noise standard deviation in gray levels, >= 0")
      ->check(CLI::NonNegativeNumber)
      ->required();
  noise->add_option("--seed", seed, "64-bit generator seed")->capture_default_str();
  noise->add_flag("--ascii", ascii, "write P2 instead of P5");
  noise->add_option("input", input, "input PGM")->required();
  noise->add_option("output", output, "output PGM")->required();

  // metrics
  auto* metrics = app.add_subcommand("metrics", "print mse, psnr, discrete TV and model energy");
  std::string ref_path;
  ModelFlags metrics_model;
  metrics_model.add_to(*metrics, false);
  metrics->add_option("--ref", ref_path, "reference PGM for mse and psnr");
  metrics->add_option("--bc", bc_name, "boundary condition for the energy")
      ->check(CLI::IsMember({"neumann", "dirichlet"}))
      ->capture_default_str();
  metrics->add_option("input", input, "input PGM")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const nldiff_bc bc = kBcNames.at(bc_name);

  try {
    if (denoise->parsed()) {
      const nldiff_model model = denoise_model.resolve();
      const Schedule schedule = kDefaultSchedule.at(model.kind);
      if (denoise->count("--T") == 0) T = schedule.T;
      if (denoise->count("--steps") == 0) steps = schedule.steps;
      Image in = load(input, bc);
      nldiff_image* out_raw = nullptr;
      nldiff_reports* rep_raw = nullptr;
      check(nldiff_denoise(in.get(), &model, T, steps, &denoise_solver.config, &out_raw,
                           &rep_raw));
      Image out(out_raw);
      Reports reports(rep_raw);
      save(out, output, ascii);
      save_log(reports, log_path);
    } else if (restore->parsed()) {
      const bool porous = restore->count("--model") > 0 && restore_model.name == "porous";
      if (!porous && (!obs_path.empty() || !w_output.empty())) {
        std::fprintf(stderr, "nldiff: --obs and --w-out require --model porous\n");
        return kExitUsage;
      }
      if (porous) {
        if (output.empty() && obs_path.empty()) {
          std::fprintf(stderr, "nldiff: restore needs input and output images\n");
          return kExitUsage;
        }
        nldiff_image* u_raw = nullptr;
        nldiff_image* w_raw = nullptr;
        const double a = restore_model.model.a;
        if (!obs_path.empty()) {
          // With --obs the single positional argument is the output.
          if (obs_rows == 0 || obs_cols == 0) {
            std::fprintf(stderr, "nldiff: --obs requires --rows and --cols\n");
            return kExitUsage;
          }
          if (output.empty()) output = input;
          if (output.empty()) {
            std::fprintf(stderr, "nldiff: restore needs an output image\n");
            return kExitUsage;
          }
          check(nldiff_restore_porous_sparse(obs_path.c_str(), obs_rows, obs_cols, a,
                                             &restore_solver.config, &u_raw, &w_raw));
        } else {
          Image in = load(input, NLDIFF_BC_DIRICHLET);
          check(nldiff_restore_porous(in.get(), a, &restore_solver.config, &u_raw, &w_raw));
        }
        Image u(u_raw);
        Image w(w_raw);
        save(u, output, ascii);
        if (!w_output.empty()) save(w, w_output, ascii);
        return 0;
      }
      if (input.empty() || output.empty()) {
        std::fprintf(stderr, "nldiff: restore needs input and output images\n");
        return kExitUsage;
      }
      Image in = load(input, bc);
      nldiff_image* out_raw = nullptr;
      nldiff_reports* rep_raw = nullptr;
      if (fidelity == "l1") {
        const double eps = restore_model.model.eps;
        check(nldiff_restore_l1(in.get(), eps, lambda, sign_smooth, h, max_steps,
                                &restore_solver.config, &out_raw, &rep_raw));
      } else {
        nldiff_model model = restore_model.resolve();
        check(nldiff_restore_l2(in.get(), &model, lambda, h, max_steps, &restore_solver.config,
                                &out_raw, &rep_raw));
      }
      Image out(out_raw);
      Reports reports(rep_raw);
      save(out, output, ascii);
      save_log(reports, log_path);
    } else if (noise->parsed()) {
      Image in = load(input, NLDIFF_BC_NEUMANN);
      nldiff_image* out_raw = nullptr;
      check(nldiff_add_gaussian_noise(in.get(), sigma, seed, &out_raw));
      save(Image(out_raw), output, ascii);
    } else if (metrics->parsed()) {
      Image in = load(input, bc);
      Image ref;
      if (!ref_path.empty()) ref = load(ref_path, bc);
      nldiff_model model = metrics_model.resolve();
      const bool with_energy = metrics->count("--model") > 0;
      nldiff_metrics m{};
      check(nldiff_compute_metrics(in.get(), ref.get(), with_energy ? &model : nullptr, &m));
      if (m.has_reference) {
        print_metric("mse", m.mse);
        print_metric("psnr", m.psnr);
      }
      print_metric("discrete_tv", m.discrete_tv);
      if (m.has_energy) print_metric("energy", m.energy);
    }
  } catch (const Failure& f) {
    return report_failure(f.status);
  }
  return 0;
}
