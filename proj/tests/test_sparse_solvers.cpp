/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The sparseimg Authors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "sparseimg/sparse_solvers.hpp"

using namespace sparseimg;

TEST_SUITE("sparse_solvers") {
  TEST_CASE("complex soft thresholding") {
    CHECK(soft_threshold(Complex(0.0, 0.0), 0.5) == Complex(0.0));
    CHECK(soft_threshold(Complex(0.3, 0.4), 0.5) == Complex(0.0));
    CHECK(soft_threshold(Complex(0.3, 0.4), 0.6) == Complex(0.0));
    const Complex z = soft_threshold(Complex(3.0, 4.0), 1.0);
    CHECK(std::abs(z) == doctest::Approx(4.0));
    CHECK(std::arg(z) == doctest::Approx(std::arg(Complex(3.0, 4.0))));
    CHECK(soft_threshold(Complex(-2.0, 0.0), 0.0) == Complex(-2.0, 0.0));
  }

  TEST_CASE("spectral norm estimate") {
    std::mt19937_64 rng(2);
    const CMat a = fixtures::random_gaussian(30, 50, rng);
    const double exact = Eigen::JacobiSVD<CMat>(a).singularValues()(0);
    const double est = spectral_norm_estimate(a, 20);
    CHECK(est <= exact * (1.0 + 1e-12));
    CHECK(est >= 0.95 * exact);
    SolverParams p;
    const auto sol = solve_l1_smv(a, CVec(a.col(3)), p);
    CHECK(sol.step * spectral_norm_estimate(a * a.colwise().norm().cwiseInverse().asDiagonal()) *
              spectral_norm_estimate(a * a.colwise().norm().cwiseInverse().asDiagonal()) <
          2.0);
  }

  TEST_CASE("zero data gives the zero solution") {
    std::mt19937_64 rng(3);
    const CMat a = fixtures::random_gaussian(6, 10, rng);
    const auto s = solve_l1_smv(a, CVec(CVec::Zero(6)));
    CHECK(s.x.norm() == 0.0);
    CHECK(s.converged);
    CHECK(s.support.empty());
    const auto m = solve_l1_mmv(a, CMat(CMat::Zero(6, 4)));
    CHECK(m.x.norm() == 0.0);
  }

  TEST_CASE("orthonormal columns give the closed-form solution") {
    std::mt19937_64 rng(4);
    const CMat q = fixtures::random_unitary(12, rng).leftCols(7);
    const CVec b = 3.0 * q.col(4);
    const auto s = solve_l1_smv(q, b);
    CVec expect = CVec::Zero(7);
    expect(4) = 3.0;
    CHECK(s.converged);
    CHECK((s.vector() - expect).norm() < 1e-8);
    CHECK(s.support == std::vector<std::size_t>{4});
  }

  TEST_CASE("planted pair in a random 8x20 matrix agrees with exhaustive search") {
    // Welch bound for 8x20 is above 1/4, so no such matrix meets
    // coherence * 2 < 1/2; the comparison is made without that hypothesis.
    std::mt19937_64 rng(8);
    const double welch = std::sqrt(12.0 / (8.0 * 19.0));
    CHECK(welch > 0.25);
    std::normal_distribution<double> n(0.0, 1.0);
    int agree = 0;
    for (int t = 0; t < 10; ++t) {
      const CMat a = fixtures::unit_columns(fixtures::random_gaussian(8, 20, rng));
      CHECK(mutual_coherence(a).epsilon >= welch);
      CVec x = CVec::Zero(20);
      x(3 + t) = Complex(1.0 + n(rng) * 0.1, 0.5);
      x(17 - t / 2) = Complex(-0.8, 0.6 + 0.1 * n(rng));
      const CVec b = a * x;
      const auto l0 = brute_force_l0(a, b, 2);
      REQUIRE(l0.feasible);
      CHECK(l0.residual < 1e-10);
      const auto l1 = solve_l1_smv(a, b);
      if (l1.support == l0.support && (l1.vector() - l0.x).norm() < 1e-6) ++agree;
    }
    CHECK(agree == 10);
  }

  TEST_CASE("l1 support equals the exhaustive l0 support on low-coherence instances") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 30; ++t) {
      const std::size_t m = 1 + static_cast<std::size_t>(t % 2);
      const auto inst = fixtures::low_coherence_instance(m, rng);
      REQUIRE(inst.a.cols() <= 16);
      const CVec b = inst.a * inst.x;
      const auto l0 = brute_force_l0(inst.a, b, 2);
      REQUIRE(l0.feasible);
      CHECK(l0.support == inst.support);
      const auto l1 = solve_l1_smv(inst.a, b);
      CHECK(l1.converged);
      CHECK(l1.support == l0.support);
      CHECK((l1.vector() - inst.x).norm() < 1e-6 * inst.x.norm());
    }
  }

  TEST_CASE("exhaustive l0 search") {
    std::mt19937_64 rng(6);
    const CMat a = fixtures::unit_columns(fixtures::random_gaussian(6, 12, rng));
    const auto one = brute_force_l0(a, CVec(a.col(5)), 3);
    CHECK(one.support == std::vector<std::size_t>{5});
    const auto zero = brute_force_l0(a, CVec(CVec::Zero(6)), 3);
    CHECK(zero.feasible);
    CHECK(zero.support.empty());
    CVec x = CVec::Zero(12);
    x(2) = Complex(1.0, -1.0);
    x(9) = Complex(0.5, 2.0);
    const auto two = brute_force_l0(a, CVec(a * x), 2);
    CHECK(two.support == std::vector<std::size_t>{2, 9});
    CHECK(two.residual < 1e-10);
    CHECK_THROWS_AS(brute_force_l0(CMat::Ones(3, 25), CVec(CVec::Ones(3)), 2), ConfigError);
    CHECK_THROWS_AS(brute_force_l0(a, CVec(a.col(0)), 4), ConfigError);
  }

  TEST_CASE("row support") {
    CHECK(rowsupp(CMat(CMat::Zero(5, 3)), 0.0).empty());
    CMat one = CMat::Zero(8, 2);
    one(5, 1) = Complex(0.0, 1e-3);
    CHECK(rowsupp(one, 0.0) == std::vector<std::size_t>{5});
    std::mt19937_64 rng(9);
    CMat noisy = 0.01 * fixtures::random_gaussian(15, 4, rng);
    for (Eigen::Index r : {2, 7, 11}) noisy.row(r) += fixtures::random_gaussian(1, 4, rng).normalized() * 2.0;
    CHECK(rowsupp(noisy, 0.2) == std::vector<std::size_t>{2, 7, 11});
    CHECK_THROWS_AS(rowsupp(noisy, 1.0), ConfigError);
  }

  TEST_CASE("single-column MMV matches SMV") {
    std::mt19937_64 rng(10);
    const CMat a = fixtures::identity_fourier(16);
    CVec x = CVec::Zero(32);
    x(3) = Complex(1.0, 2.0);
    x(20) = Complex(-0.5, 0.7);
    const CVec b = a * x;
    const auto s = solve_l1_smv(a, b);
    const auto m = solve_l1_mmv(a, CMat(b));
    CHECK((s.vector() - m.vector()).norm() <= 1e-8);
  }

  TEST_CASE("planted row-sparse MMV recovery") {
    std::mt19937_64 rng(12);
    const CMat a = fixtures::identity_fourier(64);
    const double eps = mutual_coherence(a).epsilon;
    CHECK(eps == doctest::Approx(0.125).epsilon(1e-10));
    CHECK(eps * 3.0 < 0.5);
    CMat x = CMat::Zero(128, 5);
    const std::vector<std::size_t> rows{10, 70, 101};
    for (auto r : rows) x.row(static_cast<Eigen::Index>(r)) = fixtures::random_gaussian(1, 5, rng);
    const auto sol = solve_l1_mmv(a, CMat(a * x));
    CHECK(sol.converged);
    CHECK(sol.support == rows);
    CHECK((sol.x - x).norm() < 1e-6 * x.norm());
  }

  TEST_CASE("noise-relaxed solutions are feasible") {
    std::mt19937_64 rng(13);
    const CMat a = fixtures::identity_fourier(32);
    CVec x = CVec::Zero(64);
    x(4) = 2.0;
    x(40) = Complex(0.0, -1.5);
    x(50) = Complex(1.0, 1.0);
    const CVec clean = a * x;
    const CVec e = 0.05 * clean.norm() * fixtures::random_gaussian(32, 1, rng).col(0).normalized();
    const double eps = mutual_coherence(a).epsilon;
    const double m = 3.0;
    const double gap = 1.0 - 2.0 * m * eps + eps;
    REQUIRE(gap > 0.0);
    SolverParams p;
    p.delta = e.norm() * std::sqrt(1.0 + m * (1.0 - (m - 1.0) * eps) / (gap * gap));
    const auto sol = solve_l1_smv(a, CVec(clean + e), p);
    CHECK(sol.converged);
    CHECK(sol.residual <= p.delta + 1e-8);
    const auto bound = noisy_recovery_bound(p.delta, 3, eps);
    CHECK((sol.vector() - x).norm() <= bound.error_bound);
  }

  TEST_CASE("merit is non-increasing within each multiplier step") {
    std::mt19937_64 rng(14);
    const CMat a = fixtures::unit_columns(fixtures::random_gaussian(20, 60, rng));
    CVec x = CVec::Zero(60);
    x(1) = 1.0;
    x(33) = Complex(0.0, 1.0);
    x(47) = Complex(-0.6, 0.3);
    SolverParams p;
    p.record_trace = true;
    const auto sol = solve_l1_smv(a, CVec(a * x), p);
    REQUIRE(sol.trace.size() > 2);
    std::size_t checked = 0;
    for (std::size_t k = 1; k < sol.trace.size(); ++k) {
      if (sol.trace[k].outer != sol.trace[k - 1].outer) continue;
      CHECK(sol.trace[k].merit <= sol.trace[k - 1].merit * (1.0 + 1e-12));
      ++checked;
    }
    CHECK(checked > 0);
  }

  TEST_CASE("phase equivariance") {
    std::mt19937_64 rng(15);
    const CMat a = fixtures::unit_columns(fixtures::random_gaussian(12, 30, rng));
    CVec x = CVec::Zero(30);
    x(7) = Complex(1.0, 0.5);
    x(22) = Complex(-0.4, 1.1);
    const CVec b = a * x;
    const Complex c = std::polar(1.0, 1.234);
    const auto s1 = solve_l1_smv(a, b);
    const auto s2 = solve_l1_smv(a, CVec(c * b));
    CHECK((s2.vector() - c * s1.vector()).norm() <= 1e-8 * std::max(1.0, s1.vector().norm()));
  }

  TEST_CASE("non-convergence is reported") {
    std::mt19937_64 rng(16);
    const CMat a = fixtures::unit_columns(fixtures::random_gaussian(10, 40, rng));
    SolverParams p;
    p.max_iterations = 3;
    const auto sol = solve_l1_smv(a, CVec(a.col(0) + 0.5 * a.col(9)), p);
    CHECK_FALSE(sol.converged);
    CHECK(sol.iterations <= 3);
  }

  TEST_CASE("invalid solver inputs") {
    const CMat a = CMat::Identity(4, 4);
    CHECK_THROWS_AS(solve_l1_smv(a, CVec(CVec::Ones(5))), ConfigError);
    SolverParams p;
    p.support_threshold = 1.0;
    CHECK_THROWS_AS(solve_l1_smv(a, CVec(CVec::Ones(4)), p), ConfigError);
    CMat z = a;
    z.col(2).setZero();
    CHECK_THROWS_AS(solve_l1_smv(z, CVec(CVec::Ones(4))), DomainError);
  }

  TEST_CASE("stability bound") {
    CHECK(noisy_recovery_bound(0.3, 5, 0.0).error_bound == doctest::Approx(0.3));
    CHECK(noisy_recovery_bound(0.0, 5, 0.1).error_bound == 0.0);
    CHECK(noisy_recovery_bound(1.0, 3, 0.2).error_bound ==
          doctest::Approx(1.0 / std::sqrt(0.6)).epsilon(1e-14));
    CHECK_THROWS_AS(noisy_recovery_bound(1.0, 5, 0.25), DomainError);
  }
}
