// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#include "nldiff/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "nldiff/flows.hpp"

namespace nldiff {

namespace {

class PgmScanner {
 public:
  explicit PgmScanner(std::string_view bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ >= bytes_.size(); }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  // Reads an unsigned decimal; returns nullopt (without consuming) if the
  // next token is not one.
  std::optional<long> number() {
    skip_space_and_comments();
    std::size_t end = pos_;
    while (end < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[end]))) ++end;
    if (end == pos_) return std::nullopt;
    if (end < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[end])) &&
        bytes_[end] != '#') {
      return std::nullopt;
    }
    long v = 0;
    auto [p, ec] = std::from_chars(bytes_.data() + pos_, bytes_.data() + end, v);
    if (ec != std::errc()) return std::nullopt;
    pos_ = end;
    return v;
  }

  void advance(std::size_t n) { pos_ += n; }
  std::string_view rest() const { return bytes_.substr(pos_); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageGrid parse_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw ParseError(ErrorCode::MalformedHeader, "missing P2/P5 magic number", 0);
  }
  const bool binary = bytes[1] == '5';
  PgmScanner scan(bytes);
  scan.advance(2);
  if (!scan.at_end() && !std::isspace(static_cast<unsigned char>(bytes[2])) && bytes[2] != '#') {
    throw ParseError(ErrorCode::MalformedHeader, "magic number not followed by whitespace", 2);
  }
  auto header_field = [&](const char* name) {
    const auto v = scan.number();
    if (!v) {
      throw ParseError(ErrorCode::MalformedHeader, std::string("expected ") + name,
                       scan.offset());
    }
    return *v;
  };
  const long width = header_field("width");
  const long height = header_field("height");
  const std::size_t maxval_offset = (scan.skip_space_and_comments(), scan.offset());
  const long maxval = header_field("maxval");
  if (width < 2 || height < 2 || width > (1L << 20) || height > (1L << 20)) {
    throw ParseError(ErrorCode::MalformedHeader,
                     "image must be at least 2x2 and at most 2^20 on a side", maxval_offset);
  }
  if (maxval < 1) throw ParseError(ErrorCode::MalformedHeader, "maxval must be positive", maxval_offset);
  if (maxval > 255) {
    throw ParseError(ErrorCode::UnsupportedMaxval,
                     "maxval " + std::to_string(maxval) + " exceeds 255", maxval_offset);
  }

  const int rows = static_cast<int>(height);
  const int cols = static_cast<int>(width);
  const std::size_t count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  std::vector<double> values(count);
  if (binary) {
    // Exactly one whitespace byte separates maxval from the raster.
    if (scan.at_end() || !std::isspace(static_cast<unsigned char>(scan.rest()[0]))) {
      throw ParseError(ErrorCode::MalformedHeader, "expected whitespace after maxval",
                       scan.offset());
    }
    scan.advance(1);
    const std::string_view raster = scan.rest();
    if (raster.size() < count) {
      throw ParseError(ErrorCode::TruncatedData,
                       "expected " + std::to_string(count) + " raster bytes, found " +
                           std::to_string(raster.size()),
                       scan.offset() + raster.size());
    }
    for (std::size_t k = 0; k < count; ++k) {
      const auto sample = static_cast<unsigned char>(raster[k]);
      if (sample > maxval) {
        throw ParseError(ErrorCode::TruncatedData, "sample exceeds maxval", scan.offset() + k);
      }
      values[k] = sample;
    }
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      scan.skip_space_and_comments();
      const std::size_t at = scan.offset();
      if (scan.at_end()) {
        throw ParseError(ErrorCode::TruncatedData,
                         "expected " + std::to_string(count) + " samples, found " +
                             std::to_string(k),
                         at);
      }
      const auto v = scan.number();
      if (!v) throw ParseError(ErrorCode::TruncatedData, "invalid sample", at);
      if (*v > maxval) throw ParseError(ErrorCode::TruncatedData, "sample exceeds maxval", at);
      values[k] = static_cast<double>(*v);
    }
  }
  return ImageGrid(rows, cols, std::move(values));
}

ImageGrid read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  try {
    return parse_pgm(bytes);
  } catch (const ParseError& e) {
    throw ParseError(e.code(), path + ": " + e.detail(), e.offset());
  }
}

namespace {

int quantize(double v) {
  // nearbyint under the default rounding mode rounds half to even.
  return static_cast<int>(std::nearbyint(std::clamp(v, 0.0, 255.0)));
}

}  // namespace

std::string format_pgm(const ImageGrid& u, PgmFormat format) {
  std::string out;
  if (format == PgmFormat::Binary) {
    out = "P5\n" + std::to_string(u.cols()) + " " + std::to_string(u.rows()) + "\n255\n";
    out.reserve(out.size() + u.size());
    for (double v : u.storage()) out.push_back(static_cast<char>(quantize(v)));
  } else {
    out = "P2\n" + std::to_string(u.cols()) + " " + std::to_string(u.rows()) + "\n255\n";
    for (int i = 0; i < u.rows(); ++i) {
      for (int j = 0; j < u.cols(); ++j) {
        if (j > 0) out += (j % 16 == 0) ? '\n' : ' ';
        out += std::to_string(quantize(u(i, j)));
      }
      out += '\n';
    }
  }
  return out;
}

void write_pgm(const ImageGrid& u, const std::string& path, PgmFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  const std::string bytes = format_pgm(u, format);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write to " + path + " failed");
}

ImageGrid add_gaussian_noise(const ImageGrid& u, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidArgument, "sigma must be nonnegative");
  }
  ImageGrid out = u;
  if (sigma == 0.0) return out;
  std::mt19937_64 gen(seed);
  // 53-bit uniform in (0, 1].
  auto uniform = [&gen] { return (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53; };
  auto values = out.values();
  for (std::size_t k = 0; k < values.size(); k += 2) {
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    values[k] += sigma * radius * std::cos(angle);
    if (k + 1 < values.size()) values[k + 1] += sigma * radius * std::sin(angle);
  }
  return out;
}

MetricsReport compute_metrics(const ImageGrid& u, const ImageGrid* reference,
                              const FlowModel* model) {
  MetricsReport report;
  if (reference != nullptr) {
    if (!u.same_shape(*reference)) {
      throw Error(ErrorCode::ShapeMismatch,
                  "image is " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) +
                      " but reference is " + std::to_string(reference->rows()) + "x" +
                      std::to_string(reference->cols()));
    }
    const ImageGrid diff = u - *reference;
    const double mse = dot(diff, diff) / static_cast<double>(u.size());
    report.mse = mse;
    report.psnr = mse == 0.0 ? std::numeric_limits<double>::infinity()
                             : 10.0 * std::log10(255.0 * 255.0 / mse);
  }
  report.discrete_tv = sum(gradient_magnitude(u));
  if (model != nullptr) report.energy = make_energy(*model, u.bc())->energy(u);
  return report;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

std::string format_step_log(const std::vector<StepReport>& reports) {
  std::string out(kStepLogHeader);
  out += "\nstep,energy_before,energy_after,residual,iters\n";
  for (const StepReport& r : reports) {
    out += std::to_string(r.step_index) + "," + format_number(r.energy_before) + "," +
           format_number(r.energy_after) + "," + format_number(r.residual) + "," +
           std::to_string(r.inner_iterations) + "\n";
  }
  return out;
}

void write_step_log(const std::vector<StepReport>& reports, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out << format_step_log(reports);
  if (!out) throw Error(ErrorCode::IoFailure, "write to " + path + " failed");
}

}  // namespace nldiff
