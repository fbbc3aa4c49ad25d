// SPDX-FileCopyrightText: Copyright (c) 2026 nldiff contributors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nldiff/grid.hpp"
#include "oracle/oracle.hpp"
#include "support.hpp"

using namespace nldiff;
using nldiff::testing::max_abs_diff;
using nldiff::testing::random_field;
using nldiff::testing::random_grid;
using nldiff::testing::sine_eigenvalue;
using nldiff::testing::sine_mode;

TEST_CASE("image grid rejects bad shapes and values") {
  CHECK_THROWS_AS(ImageGrid(1, 4), Error);
  CHECK_THROWS_AS(ImageGrid(3, 3, std::vector<double>(8, 0.0)), Error);
  std::vector<double> v(4, 0.0);
  v[2] = std::nan("");
  try {
    ImageGrid(2, 2, v);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("gradient of a constant under Neumann vanishes") {
  const VectorField g = gradient(ImageGrid(5, 4, std::vector<double>(20, 7.0)));
  for (double x : g.vx) CHECK(x == 0.0);
  for (double x : g.vy) CHECK(x == 0.0);
  for (double x : g.top) CHECK(x == 0.0);
  for (double x : g.left) CHECK(x == 0.0);
}

TEST_CASE("ramp gradient and its divergence") {
  const int R = 6;
  const int C = 5;
  ImageGrid u(R, C);
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) u(i, j) = i;
  const VectorField g = gradient(u);
  for (int i = 0; i < R; ++i) {
    for (int j = 0; j < C; ++j) {
      CHECK(g.vx[g.index(i, j)] == (i < R - 1 ? 1.0 : 0.0));
      CHECK(g.vy[g.index(i, j)] == 0.0);
    }
  }
  // Backward differences telescope: +1 on the first row, -1 on the last.
  const ImageGrid d = divergence(g, BoundaryCondition::Neumann);
  for (int i = 0; i < R; ++i) {
    const double want = i == 0 ? 1.0 : (i == R - 1 ? -1.0 : 0.0);
    for (int j = 0; j < C; ++j) CHECK(d(i, j) == want);
  }
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    const ImageGrid w = random_grid(R, C, rng, -1.0, 1.0);
    CHECK(dot(g, gradient(w)) == doctest::Approx(-dot(w, d)).epsilon(1e-12));
  }
}

TEST_CASE("two by two Dirichlet gradient") {
  const ImageGrid u(2, 2, {0, 1, 2, 3}, BoundaryCondition::Dirichlet);
  const VectorField g = gradient(u);
  CHECK(g.vx == std::vector<double>{2, 2, -2, -3});
  CHECK(g.vy == std::vector<double>{1, -1, 1, -3});
  CHECK(g.top == std::vector<double>{0, 1});
  CHECK(g.left == std::vector<double>{0, 2});
}

TEST_CASE("divergence is the negative adjoint of gradient") {
  std::mt19937_64 rng(2024);
  for (BoundaryCondition bc : {BoundaryCondition::Neumann, BoundaryCondition::Dirichlet}) {
    CAPTURE(to_string(bc));
    for (int t = 0; t < 100; ++t) {
      const int R = 2 + static_cast<int>(rng() % 9);
      const int C = 2 + static_cast<int>(rng() % 9);
      const ImageGrid u = random_grid(R, C, rng, -1.0, 1.0, bc);
      VectorField p = random_field(R, C, rng);
      if (bc == BoundaryCondition::Neumann) {
        // Neumann fields carry no flux through the boundary.
        for (int j = 0; j < C; ++j) p.vx[p.index(R - 1, j)] = 0.0;
        for (int i = 0; i < R; ++i) p.vy[p.index(i, C - 1)] = 0.0;
        std::fill(p.top.begin(), p.top.end(), 0.0);
        std::fill(p.left.begin(), p.left.end(), 0.0);
      }
      const double lhs = dot(gradient(u), p);
      const double rhs = -dot(u, divergence(p, bc));
      CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, std::fabs(lhs)));
    }
  }
}

TEST_CASE("laplacian equals divergence of gradient") {
  std::mt19937_64 rng(5);
  for (BoundaryCondition bc : {BoundaryCondition::Neumann, BoundaryCondition::Dirichlet}) {
    const ImageGrid u = random_grid(7, 9, rng, -50.0, 50.0, bc);
    CHECK(max_abs_diff(laplacian(u), divergence(gradient(u), bc)) <= 1e-14 * 200.0);
  }
}

TEST_CASE("laplacian of constants") {
  const ImageGrid n(4, 5, std::vector<double>(20, 3.0), BoundaryCondition::Neumann);
  CHECK(norm_inf(laplacian(n)) == 0.0);
  const double c = 3.0;
  const ImageGrid d(4, 5, std::vector<double>(20, c), BoundaryCondition::Dirichlet);
  const ImageGrid l = laplacian(d);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 5; ++j) {
      const int edges = (i == 0 || i == 3) + (j == 0 || j == 4);
      CHECK(l(i, j) == -edges * c);
    }
  }
}

TEST_CASE("Dirichlet sine mode is a laplacian eigenvector") {
  for (auto [R, C] : {std::pair{4, 4}, std::pair{7, 11}, std::pair{16, 9}}) {
    const ImageGrid u = sine_mode(R, C);
    const double lambda = sine_eigenvalue(R, C);
    const ImageGrid l = laplacian(u);
    ImageGrid want = -lambda * u;
    CHECK(norm2(l - want) <= 1e-10 * norm2(want));
  }
}

TEST_CASE("Neumann laplacian sums to zero") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const ImageGrid u = random_grid(6, 8, rng, -100.0, 100.0);
    CHECK(std::fabs(sum(laplacian(u))) <= 1e-10 * norm1(u));
  }
}

TEST_CASE("Poisson solve") {
  SUBCASE("zero right-hand side") {
    CHECK(norm_inf(poisson_solve_dirichlet(ImageGrid(5, 5), 1e-10)) == 0.0);
  }
  SUBCASE("sine mode") {
    const double tol = 1e-10;
    const ImageGrid phi = sine_mode(9, 6);
    const ImageGrid w = poisson_solve_dirichlet(sine_eigenvalue(9, 6) * phi, tol);
    CHECK(norm_inf(w - phi) <= 10 * tol);
  }
  SUBCASE("random 8x8 against dense elimination") {
    std::mt19937_64 rng(3);
    const ImageGrid f = random_grid(8, 8, rng, -1.0, 1.0);
    const ImageGrid w = poisson_solve_dirichlet(f, 1e-10);
    oracle::Dense neg = oracle::dense_laplacian(8, 8, BoundaryCondition::Dirichlet);
    for (double& x : neg.a) x = -x;
    const std::vector<double> ref = oracle::dense_solve(neg, f.storage());
    CHECK(max_abs_diff(ref, w) <= 1e-8);
    // Residual contract.
    CHECK(norm2(-1.0 * laplacian(ImageGrid(8, 8, w.storage(), BoundaryCondition::Dirichlet)) -
                ImageGrid(8, 8, f.storage(), BoundaryCondition::Dirichlet)) <=
          1e-10 * norm2(f));
  }
  SUBCASE("symmetric") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 10; ++t) {
      const ImageGrid f = random_grid(7, 5, rng, -1.0, 1.0);
      const ImageGrid g = random_grid(7, 5, rng, -1.0, 1.0);
      const double a = dot(f, poisson_solve_dirichlet(g, 1e-12));
      const double b = dot(poisson_solve_dirichlet(f, 1e-12), g);
      CHECK(std::fabs(a - b) <= 1e-8 * std::max(std::fabs(a), 1e-300));
    }
  }
  SUBCASE("iteration cap") {
    std::mt19937_64 rng(1);
    try {
      poisson_solve_dirichlet(random_grid(10, 10, rng), 1e-14, 2);
      FAIL("expected IterationLimitExceeded");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IterationLimitExceeded);
    }
  }
}

TEST_CASE("dense oracle Laplacian matches the stencil") {
  std::mt19937_64 rng(12);
  for (BoundaryCondition bc : {BoundaryCondition::Neumann, BoundaryCondition::Dirichlet}) {
    const ImageGrid u = random_grid(5, 6, rng, -1.0, 1.0, bc);
    const oracle::Dense L = oracle::dense_laplacian(5, 6, bc);
    const std::vector<double> lu = oracle::dense_apply(L, u.storage());
    CHECK(max_abs_diff(lu, laplacian(u)) <= 1e-14);
  }
}

TEST_CASE("gradient magnitude") {
  const ImageGrid u(2, 3, {0, 0, 1, 0, 0, 1});
  const ImageGrid m = gradient_magnitude(u);
  CHECK(sum(m) == 2.0);
  CHECK(max_gradient_norm(ImageGrid(2, 2, {0, 0, 0, 5}, BoundaryCondition::Dirichlet)) ==
        doctest::Approx(std::sqrt(50.0)));
}
