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

#ifndef SPARSEIMG_GREENS_HPP
#define SPARSEIMG_GREENS_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sparseimg/geometry.hpp"
#include "sparseimg/types.hpp"

namespace sparseimg {

/// Two-point propagator G(x, y). The homogeneous kernel is the default; the
/// random medium supplies its own.
using GreenKernel = std::function<Complex(const Point&, const Point&)>;

/// exp(i k r) / (4 pi r) with r = |x - y|. Throws DomainError when x == y.
Complex green_homogeneous(const Point& x, const Point& y, const WaveContext& ctx);

GreenKernel homogeneous_kernel(const WaveContext& ctx);

/// Column of propagator values from every transducer to y.
CVec green_vector(const ArrayGeometry& geom, const Point& y, const WaveContext& ctx);
CVec green_vector(const ArrayGeometry& geom, const Point& y, const GreenKernel& kernel);

/// N x K matrix whose column j is the Green's vector of grid point j.
struct SensingMatrix {
  CMat matrix;
  std::vector<Point> grid;
  WaveContext ctx;
  /// Lattice shape of the grid (rows * cols == K).
  std::size_t grid_rows = 0;
  std::size_t grid_cols = 0;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
  auto column(std::size_t j) const { return matrix.col(static_cast<Eigen::Index>(j)); }
};

SensingMatrix sensing_matrix(const ArrayGeometry& geom, const ImageWindow& window,
                             const WaveContext& ctx);
SensingMatrix sensing_matrix(const ArrayGeometry& geom, const ImageWindow& window,
                             const WaveContext& ctx, const GreenKernel& kernel);

struct CoherenceResult {
  double epsilon = 0.0;
  std::size_t first = 0;
  std::size_t second = 0;
};

/// Largest normalized inner product between two distinct columns.
CoherenceResult mutual_coherence(const CMat& mat);
CoherenceResult mutual_coherence(const SensingMatrix& mat);
/// Same scan restricted to the listed columns. Indices in the result refer to
/// columns of the full matrix.
CoherenceResult mutual_coherence(const CMat& mat, std::span<const std::size_t> columns);

/// 1/2 - epsilon * m. Positive values certify exact recovery of m sources.
double exact_recovery_margin(double epsilon, std::size_t m);

struct CoherenceReport {
  CoherenceResult full;
  std::size_t sources = 0;
  double margin = 0.0;
  /// Filled when a support was supplied.
  bool has_support = false;
  CoherenceResult support;
  double support_margin = 0.0;
};

CoherenceReport coherence_report(const SensingMatrix& mat, std::size_t sources,
                                 std::span<const std::size_t> support = {});

}  // namespace sparseimg

#endif  // SPARSEIMG_GREENS_HPP
