// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

// Runs the nldiff executable end to end.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nldiff/io.hpp"
#include "support.hpp"

using namespace nldiff;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = NLDIFF_CLI_WORKDIR;

struct Run {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

Run run(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path out = kWork / "stdout.txt";
  const fs::path err = kWork / "stderr.txt";
  const std::string cmd =
      std::string("'") + NLDIFF_CLI_PATH + "' " + args + " >" + q(out) + " 2>" + q(err);
  const int status = std::system(cmd.c_str());
  Run r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_image(const std::string& name, const ImageGrid& u) {
  fs::create_directories(kWork);
  const fs::path p = kWork / name;
  write_pgm(u, p.string());
  return p;
}

std::vector<double> column(const std::string& csv, int index) {
  std::istringstream in(csv);
  std::string line;
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("step", 0) == 0) continue;
    std::istringstream fields(line);
    std::string cell;
    for (int k = 0; k <= index; ++k) std::getline(fields, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

}  // namespace

TEST_CASE("help and usage errors") {
  const Run help = run("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("denoise") != std::string::npos);
  CHECK(help.out.find("restore") != std::string::npos);

  const Run sub = run("denoise --help");
  CHECK(sub.exit_code == 0);
  for (const char* flag : {"--model", "--p", "--eps", "--alpha", "--a", "--T", "--steps", "--bc", "--log"})
    CHECK(sub.out.find(flag) != std::string::npos);

  CHECK(run("").exit_code == 1);
  CHECK(run("frobnicate").exit_code == 1);
  CHECK(run("denoise --model nope a.pgm b.pgm").exit_code == 1);
}

TEST_CASE("heat on a constant image is the identity") {
  ImageGrid c(16, 20);
  for (double& v : c.values()) v = 117.0;
  const fs::path in = write_image("const.pgm", c);
  const fs::path out = kWork / "const_out.pgm";
  const Run r = run("denoise --model heat --T 1 --steps 10 " + q(in) + " " + q(out));
  CHECK(r.exit_code == 0);
  CHECK(slurp(out) == slurp(in));
}

TEST_CASE("noise then metrics") {
  const ImageGrid clean = testing::blocks(32);
  const fs::path in = write_image("clean.pgm", clean);
  const fs::path noisy = kWork / "noisy.pgm";
  REQUIRE(run("noise --sigma 10 --seed 3 " + q(in) + " " + q(noisy)).exit_code == 0);
  const Run m = run("metrics --ref " + q(in) + " " + q(noisy));
  CHECK(m.exit_code == 0);
  const auto pos = m.out.find("mse: ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(m.out.substr(pos + 5)) > 0.0);
  CHECK(m.out.find("psnr: ") != std::string::npos);
  CHECK(m.out.find("discrete_tv: ") != std::string::npos);

  const Run same = run("metrics --model tveps --ref " + q(in) + " " + q(in));
  CHECK(same.exit_code == 0);
  CHECK(same.out.find("psnr: inf") != std::string::npos);
  CHECK(same.out.find("energy: ") != std::string::npos);

  const fs::path small = write_image("small.pgm", ImageGrid(4, 4));
  const Run mismatch = run("metrics --ref " + q(small) + " " + q(in));
  CHECK(mismatch.exit_code == 1);
  CHECK(mismatch.err.find("nldiff:") != std::string::npos);
}

TEST_CASE("invalid model parameters exit with 1") {
  const fs::path in = write_image("pm_in.pgm", testing::blocks(16));
  const Run r = run("denoise --model pm --alpha -1 " + q(in) + " " + q(kWork / "pm_out.pgm"));
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("--alpha") != std::string::npos);

  CHECK(run("denoise --model plap --p 1 " + q(in) + " " + q(kWork / "x.pgm")).exit_code == 1);
  CHECK(run("denoise --model heat --T -2 " + q(in) + " " + q(kWork / "x.pgm")).exit_code == 1);
  CHECK(run("denoise --model heat " + q(kWork / "missing.pgm") + " " + q(kWork / "x.pgm")).exit_code == 1);

  std::ofstream(kWork / "broken.pgm") << "P2 4 4 65535\n";
  const Run bad = run("denoise --model heat " + q(kWork / "broken.pgm") + " " + q(kWork / "x.pgm"));
  CHECK(bad.exit_code == 1);
  CHECK(bad.err.find("offset") != std::string::npos);
}

TEST_CASE("solver failure exits with 2 and names the step") {
  ImageGrid u = testing::blocks(24);
  const fs::path in = write_image("fail_in.pgm", add_gaussian_noise(u, 20.0, 1));
  const Run r = run("denoise --model tveps --eps 0.01 --T 20 --steps 2 --max-iters 1 " + q(in) + " " +
                    q(kWork / "fail_out.pgm"));
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("step 1") != std::string::npos);
  CHECK_FALSE(fs::exists(kWork / "fail_out.pgm"));
}

TEST_CASE("runs are deterministic and logs are monotone") {
  const fs::path clean = write_image("det_clean.pgm", testing::blocks(32));
  const std::vector<std::string> models = {"heat", "plap", "tveps", "pm", "porous"};
  for (const std::string& m : models) {
    CAPTURE(m);
    std::string outputs[2];
    std::string logs[2];
    for (int k = 0; k < 2; ++k) {
      const fs::path noisy = kWork / ("det_noisy" + std::to_string(k) + ".pgm");
      const fs::path out = kWork / ("det_" + m + std::to_string(k) + ".pgm");
      const fs::path log = kWork / ("det_" + m + std::to_string(k) + ".csv");
      REQUIRE(run("noise --sigma 15 --seed 99 " + q(clean) + " " + q(noisy)).exit_code == 0);
      const Run r = run("denoise --model " + m + " --log " + q(log) + " " + q(noisy) + " " + q(out));
      REQUIRE(r.exit_code == 0);
      outputs[k] = slurp(out);
      logs[k] = slurp(log);
    }
    CHECK(outputs[0] == outputs[1]);
    // wall time is not part of the log, so logs must match byte for byte.
    CHECK(logs[0] == logs[1]);
    CHECK(logs[0].rfind("# nldiff-log-v1\nstep,energy_before,energy_after,residual,iters\n", 0) == 0);
    const std::vector<double> energy = column(logs[0], 2);
    REQUIRE(energy.size() >= 1);
    for (std::size_t k = 1; k < energy.size(); ++k) CHECK(energy[k] <= energy[k - 1]);
  }
}

TEST_CASE("restore subcommand") {
  const fs::path clean = write_image("rest_clean.pgm", testing::blocks(24));
  const fs::path noisy = kWork / "rest_noisy.pgm";
  REQUIRE(run("noise --sigma 10 --seed 5 " + q(clean) + " " + q(noisy)).exit_code == 0);

  const Run l2 = run("restore --model tveps --fidelity l2 --lambda 0.05 --dt 5 --steps 400 " +
                     q(noisy) + " " + q(kWork / "rest_l2.pgm"));
  CHECK(l2.exit_code == 0);
  CHECK(fs::exists(kWork / "rest_l2.pgm"));

  const Run l1 = run("restore --fidelity l1 --lambda 0.5 --dt 5 --steps 2000 --ascii " + q(noisy) +
                     " " + q(kWork / "rest_l1.pgm"));
  CHECK(l1.exit_code == 0);
  CHECK(slurp(kWork / "rest_l1.pgm").rfind("P2", 0) == 0);

  std::ofstream(kWork / "obs.csv") << "row,col,weight,value\n4,4,10,1\n";
  const Run sparse = run("restore --model porous --obs " + q(kWork / "obs.csv") +
                         " --rows 9 --cols 9 --w-out " + q(kWork / "w.pgm") + " " +
                         q(kWork / "u.pgm"));
  CHECK(sparse.exit_code == 0);
  CHECK(fs::exists(kWork / "w.pgm"));
  const ImageGrid u = read_pgm((kWork / "u.pgm").string());
  CHECK(u.rows() == 9);

  std::ofstream(kWork / "empty.csv") << "row,col,weight,value\n";
  const Run empty = run("restore --model porous --obs " + q(kWork / "empty.csv") +
                        " --rows 9 --cols 9 " + q(kWork / "u2.pgm"));
  CHECK(empty.exit_code == 1);

  const Run stuck = run("restore --model heat --fidelity l2 --steps 1 " + q(noisy) + " " +
                        q(kWork / "stuck.pgm"));
  CHECK(stuck.exit_code == 2);
}
