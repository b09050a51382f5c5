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

#ifndef SPARSEIMG_SPARSE_SOLVERS_HPP
#define SPARSEIMG_SPARSE_SOLVERS_HPP

#include <cstddef>
#include <vector>

#include "sparseimg/types.hpp"

namespace sparseimg {

/// Parameters of the l1 / joint-sparsity solvers. Non-positive beta or tau
/// select the automatic choice. beta and tau act on the internally
/// normalized problem (unit columns, unit-norm data).
struct SolverParams {
  double delta = 0.0;
  double beta = 0.0;
  double beta_fraction = 0.05;
  double tau = 0.0;
  std::size_t max_iterations = 50000;
  double tolerance = 1e-8;
  double support_threshold = 0.1;
  /// Penalize each unknown in the units of a unit-norm column. When false the
  /// penalty is the plain l1 (l2,1) norm of the unknowns as given.
  bool normalize_columns = true;
  bool record_trace = false;
};

struct TraceEntry {
  std::size_t iteration;
  std::size_t outer;
  /// Objective of the current proximal subproblem; non-increasing within one
  /// outer step.
  double merit;
  double l1;
  double residual;
};

struct SparseSolution {
  /// K x C; a single column for SMV problems.
  CMat x;
  std::size_t iterations = 0;
  std::size_t outer_iterations = 0;
  bool converged = false;
  double residual = 0.0;
  std::vector<std::size_t> support;
  double step = 0.0;
  double beta = 0.0;
  std::vector<TraceEntry> trace;

  CVec vector() const { return x.col(0); }
};

/// z * max(0, 1 - t / |z|).
Complex soft_threshold(Complex z, double t);

/// Largest singular value from a fixed number of power iterations on A^H A.
double spectral_norm_estimate(const CMat& a, int iterations = 20);

/// min |gamma|_1 subject to |A gamma - b| <= delta.
SparseSolution solve_l1_smv(const CMat& a, const CVec& b, const SolverParams& params = {});

/// min sum_i |X_i.|_2 subject to |A X - B|_F <= delta.
SparseSolution solve_l1_mmv(const CMat& a, const CMat& b, const SolverParams& params = {});

/// Rows whose l2 norm exceeds threshold times the largest row norm.
std::vector<std::size_t> rowsupp(const CMat& x, double threshold);
std::vector<std::size_t> rowsupp(const CVec& x, double threshold);

struct L0Solution {
  bool feasible = false;
  std::vector<std::size_t> support;
  CVec x;
  double residual = 0.0;
};

/// Exhaustive search over supports of size <= max_support (at most 3) for a
/// matrix with at most 24 columns.
L0Solution brute_force_l0(const CMat& a, const CVec& b, std::size_t max_support,
                          double delta = 0.0);

struct NoisyRecoveryBound {
  /// Upper bound on the l2 error of the recovered (column-normalized) sources.
  double error_bound;
  /// Components larger than this are guaranteed to be detected.
  double detection_floor;
};

NoisyRecoveryBound noisy_recovery_bound(double delta, std::size_t m, double epsilon);

}  // namespace sparseimg

#endif  // SPARSEIMG_SPARSE_SOLVERS_HPP
