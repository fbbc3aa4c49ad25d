// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nldiff/engine.hpp"
#include "nldiff/grid.hpp"
#include "nldiff/model.hpp"

namespace nldiff {

enum class PgmFormat { Ascii /* P2 */, Binary /* P5 */ };

/// Parses P2 or P5 data with maxval <= 255. Errors carry the byte offset.
ImageGrid parse_pgm(std::string_view bytes);
ImageGrid read_pgm(const std::string& path);

/// Gray values are clamped to [0, 255] and rounded half-to-even.
std::string format_pgm(const ImageGrid& u, PgmFormat format = PgmFormat::Binary);
void write_pgm(const ImageGrid& u, const std::string& path,
               PgmFormat format = PgmFormat::Binary);

/// Adds i.i.d. N(0, sigma^2) noise. Normals come from the Box-Muller
/// transform over std::mt19937_64 seeded with `seed`, so output is
/// bit-identical across platforms for a given seed. No clamping.
ImageGrid add_gaussian_noise(const ImageGrid& u, double sigma, std::uint64_t seed);

struct MetricsReport {
  std::optional<double> mse;   // set when a reference is given
  std::optional<double> psnr;  // +inf when mse == 0
  double discrete_tv = 0.0;    // sum of per-pixel |grad u|
  std::optional<double> energy;
};

MetricsReport compute_metrics(const ImageGrid& u, const ImageGrid* reference,
                              const FlowModel* model);

/// "inf" for +infinity, shortest round-trip decimal otherwise.
std::string format_number(double v);

inline constexpr std::string_view kStepLogHeader = "# nldiff-log-v1";

std::string format_step_log(const std::vector<StepReport>& reports);
void write_step_log(const std::vector<StepReport>& reports, const std::string& path);

}  // namespace nldiff
