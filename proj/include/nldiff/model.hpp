// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <variant>

namespace nldiff {

/// Linear heat flow, density |r|^2 / 2.
struct HeatParams {};

/// Density |r|^p / p, p > 1.
struct PLaplacianParams {
  double p = 1.5;
};

/// Huber-regularized total variation: j_eps(|r|) + eps |r|^2 / 2.
struct TvEpsParams {
  double eps = 0.05;
};

/// Gradient-bounded Perona-Malik with truncated diffusivity.
struct PeronaMalikParams {
  double alpha = 60.0;     // gradient bound and diffusivity scale
  double eps_pen = 1e-3;   // penalty width of the projection onto {|grad u| <= alpha}
  double eps_visc = 0.0;   // optional extra eps * |r|^2 / 2 viscosity
};

/// Porous-media nonlinearity beta(r) = |r|^a r, 0 < a < 1 (a == 0 is the
/// linear special case).
struct PorousParams {
  double a = 0.5;
};

using FlowModel =
    std::variant<HeatParams, PLaplacianParams, TvEpsParams, PeronaMalikParams, PorousParams>;

std::string model_name(const FlowModel& model);

/// Throws InvalidArgument when a parameter is outside its admissible range.
void validate(const FlowModel& model);

}  // namespace nldiff
