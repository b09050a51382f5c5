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

#ifndef SPARSEIMG_IMAGING_HPP
#define SPARSEIMG_IMAGING_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sparseimg/foldy_lax.hpp"
#include "sparseimg/geometry.hpp"
#include "sparseimg/greens.hpp"
#include "sparseimg/sparse_solvers.hpp"
#include "sparseimg/types.hpp"

namespace sparseimg {

struct SolverDiagnostics {
  bool used = false;
  bool converged = true;
  std::size_t iterations = 0;
  double residual = 0.0;
  double delta = 0.0;
};

struct ImagingResult {
  std::string method;
  /// Grid indices, ascending. For optimization methods these carry a
  /// reflectivity estimate; for KM and MUSIC they are the extracted peaks.
  std::vector<std::size_t> support;
  /// Length K, nonzero exactly on support (optimization methods only).
  CVec reflectivity;
  /// Support points whose exciting field vanished in every illumination;
  /// they have no reflectivity estimate and are not part of support.
  std::vector<std::size_t> screened;
  /// Length K nonnegative image (KM magnitude, MUSIC functional); empty
  /// for optimization methods.
  RVec image;
  /// Complex KM values whose magnitudes form the image; empty otherwise.
  CVec field;
  std::size_t rank = 0;
  SolverDiagnostics solver;
};

struct ImagingOptions {
  SolverParams solver;
  /// Components of the column-normalized sources below this value are
  /// dropped after the l1 step. Non-positive selects the relative threshold
  /// solver.support_threshold instead.
  double detection_floor = 0.0;
  /// Exciting fields below screen_floor * |f| mark a component as screened.
  double screen_floor = 1e-12;
};

std::size_t select_rank(const RVec& singular_values, double relative_threshold,
                        std::optional<std::size_t> known = std::nullopt);

/// Second step of the two-step method: exciting fields at the recovered
/// support from the recovered sources, then reflectivity = source / field.
/// Entries of screened are set to true where the field is below the floor.
CVec reflectivities_from_sources(const SensingMatrix& sensing,
                                 const std::vector<std::size_t>& support,
                                 const CVec& sources_on_support, const CVec& illumination,
                                 double screen_floor, std::vector<bool>& screened);

ImagingResult image_smv(const CVec& b, const CVec& illumination, const SensingMatrix& sensing,
                        const ImagingOptions& opts = {});

ImagingResult image_mmv(const CMat& b, const CMat& illuminations, const SensingMatrix& sensing,
                        const ImagingOptions& opts = {});

/// Top right singular vectors of the response matrix as columns.
CMat optimal_illuminations(const ResponseMatrix& resp, std::size_t count);

struct HybridSystem {
  CMat matrix;
  RVec rhs;
  CMat left;
  CMat right;
};

HybridSystem build_hybrid_system(const ResponseMatrix& resp, const SensingMatrix& sensing,
                                 std::size_t rank);

struct HybridOptions {
  SolverParams solver;
  /// Constraint radius as a fraction of |sigma|; zero enforces equality.
  double delta_fraction = 0.0;
};

ImagingResult image_hybrid_l1(const ResponseMatrix& resp, const SensingMatrix& sensing,
                              std::size_t rank, const HybridOptions& opts = {});

struct HybridCertificate {
  /// Homogeneous form on l2-normalized columns: |S| < 1 - |E - I|.
  double off_support_norm = 0.0;
  double support_deviation = 0.0;
  bool holds = false;
  /// Random-medium form |D^-1 S| < 1 - |D^-1 E| with D the diagonal of the
  /// support block after matching rows to support columns.
  double scaled_off_support_norm = 0.0;
  double scaled_support_deviation = 0.0;
  bool scaled_holds = false;
};

/// Diagnostic only; needs as many rows as support points.
HybridCertificate hybrid_certificate(const HybridSystem& system,
                                     const std::vector<std::size_t>& support);

ImagingResult image_music(const ResponseMatrix& resp, const SensingMatrix& sensing,
                          std::size_t rank);

/// Kirchhoff migration. Several illuminations are summed coherently.
/// peak_count > 0 lists that many peaks as the support.
ImagingResult image_km(const CVec& b, const CVec& illumination, const SensingMatrix& sensing,
                       std::size_t peak_count = 0);
ImagingResult image_km(const CMat& b, const CMat& illuminations, const SensingMatrix& sensing,
                       std::size_t peak_count = 0);

/// Local maxima on the 4-neighbour lattice, strongest first, at least
/// min_separation cells apart (Chebyshev), above floor_fraction * max,
/// at most max_peaks of them. Returned ascending by index.
std::vector<std::size_t> extract_peaks(const RVec& image, std::size_t rows, std::size_t cols,
                                       std::size_t max_peaks, double floor_fraction = 0.5,
                                       std::size_t min_separation = 2);

/// Full width at half maximum along the image row through the given index,
/// in grid cells, with linear interpolation between samples.
double cross_range_fwhm(const RVec& image, std::size_t rows, std::size_t cols,
                        std::size_t peak_index);

/// Exact support match.
bool same_support(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

}  // namespace sparseimg

#endif  // SPARSEIMG_IMAGING_HPP
