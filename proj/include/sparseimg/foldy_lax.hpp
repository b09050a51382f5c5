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

#ifndef SPARSEIMG_FOLDY_LAX_HPP
#define SPARSEIMG_FOLDY_LAX_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "sparseimg/geometry.hpp"
#include "sparseimg/greens.hpp"
#include "sparseimg/types.hpp"

namespace sparseimg {

inline constexpr double kDefaultConditionCap = 1e8;

/// Interaction matrix of a set of point scatterers: ones on the diagonal and
/// -alpha_j * G(y_i, y_j) off it.
struct FoldyLaxMatrix {
  CMat matrix;
  std::vector<Point> positions;
  CVec reflectivities;
};

FoldyLaxMatrix foldy_lax_matrix(const std::vector<Point>& positions, const CVec& reflectivities,
                                const GreenKernel& kernel);
FoldyLaxMatrix foldy_lax_matrix(const std::vector<Point>& positions, const CVec& reflectivities,
                                const WaveContext& ctx);

/// Full-grid K x K variant over every grid point of the sensing matrix.
/// Only meant for small grids; forward runs use the support-restricted one.
FoldyLaxMatrix foldy_lax_matrix_full(const SensingMatrix& sensing, const ReflectivityVector& rho);

/// 2-norm condition number.
double condition_number(const CMat& mat);

/// Solves Z * fields = incident column by column. Throws ResonanceError when
/// the condition number of Z exceeds cap.
CMat solve_exciting_fields(const FoldyLaxMatrix& z, const CMat& incident,
                           double cap = kDefaultConditionCap);
CVec solve_exciting_fields(const FoldyLaxMatrix& z, const CVec& incident,
                           double cap = kDefaultConditionCap);

enum class ResponseModel { FoldyLax, Born, RandomMedium, Loaded };

std::string to_string(ResponseModel model);
ResponseModel response_model_from_string(const std::string& name);

/// Singular value decomposition P = U * diag(sigma) * V^H, sigma descending.
struct Svd {
  CMat u;
  RVec sigma;
  CMat v;
};

Svd compute_svd(const CMat& mat);

/// N x N inter-element response with its SVD. Immutable after construction.
class ResponseMatrix {
 public:
  ResponseMatrix(CMat matrix, ResponseModel model);

  const CMat& matrix() const noexcept { return matrix_; }
  ResponseModel model() const noexcept { return model_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  const Svd& svd() const noexcept { return svd_; }
  const RVec& singular_values() const noexcept { return svd_.sigma; }

 private:
  CMat matrix_;
  ResponseModel model_;
  Svd svd_;
};

/// Full multiple-scattering response G diag(rho) Z^{-1} G^T, solved on the
/// support only.
ResponseMatrix response_matrix_foldy_lax(const SensingMatrix& sensing,
                                         const ReflectivityVector& rho,
                                         double cap = kDefaultConditionCap);

/// Same response assembled from the K x K full-grid system.
ResponseMatrix response_matrix_foldy_lax_full(const SensingMatrix& sensing,
                                              const ReflectivityVector& rho,
                                              double cap = kDefaultConditionCap);

/// Single-scattering response G diag(rho) G^T.
ResponseMatrix response_matrix_born(const SensingMatrix& sensing, const ReflectivityVector& rho);
CMat born_matrix(const CMat& sensing, const CVec& rho);

CVec simulate_data(const ResponseMatrix& resp, const CVec& illumination);
CMat simulate_data(const ResponseMatrix& resp, const CMat& illuminations);

/// Effective sources rho_j * (exciting field at y_j) for illumination f,
/// over the whole grid. Data are sensing * sources.
CVec effective_sources(const SensingMatrix& sensing, const ReflectivityVector& rho,
                       const CVec& illumination, double cap = kDefaultConditionCap);

/// |(P - Pi) f| / |Pi f|, multiple over single scattering.
double multiple_scattering_ratio(const ReflectivityVector& rho, const CVec& illumination,
                                 const SensingMatrix& sensing);

}  // namespace sparseimg

#endif  // SPARSEIMG_FOLDY_LAX_HPP
