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

#include "sparseimg/foldy_lax.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

namespace sparseimg {

namespace {

CMat support_columns(const CMat& g, const std::vector<std::size_t>& support) {
  CMat out(g.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = g.col(static_cast<Eigen::Index>(support[j]));
  }
  return out;
}

std::vector<Point> support_points(const SensingMatrix& s, const std::vector<std::size_t>& support) {
  std::vector<Point> out;
  out.reserve(support.size());
  for (auto j : support) {
    out.push_back(s.grid.at(j));
  }
  return out;
}

void check_rho(const SensingMatrix& sensing, const ReflectivityVector& rho) {
  if (rho.size() != static_cast<std::size_t>(sensing.cols())) {
    throw ConfigError("reflectivity length " + std::to_string(rho.size()) +
                      " does not match " + std::to_string(sensing.cols()) + " grid points");
  }
}

}  // namespace

FoldyLaxMatrix foldy_lax_matrix(const std::vector<Point>& positions, const CVec& reflectivities,
                                const GreenKernel& kernel) {
  const auto m = static_cast<Eigen::Index>(positions.size());
  if (reflectivities.size() != m) {
    throw ConfigError("reflectivity count does not match scatterer count");
  }
  CMat z = CMat::Identity(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const auto& yi = positions[static_cast<std::size_t>(i)];
      const auto& yj = positions[static_cast<std::size_t>(j)];
      if ((yi - yj).norm() == 0.0) {
        throw DomainError("scatterers " + std::to_string(i) + " and " + std::to_string(j) +
                          " coincide");
      }
      const Complex g = kernel(yi, yj);
      z(i, j) = -reflectivities(j) * g;
      z(j, i) = -reflectivities(i) * g;
    }
  }
  return {std::move(z), positions, reflectivities};
}

FoldyLaxMatrix foldy_lax_matrix(const std::vector<Point>& positions, const CVec& reflectivities,
                                const WaveContext& ctx) {
  return foldy_lax_matrix(positions, reflectivities, homogeneous_kernel(ctx));
}

FoldyLaxMatrix foldy_lax_matrix_full(const SensingMatrix& sensing, const ReflectivityVector& rho) {
  check_rho(sensing, rho);
  return foldy_lax_matrix(sensing.grid, rho.values(), homogeneous_kernel(sensing.ctx));
}

double condition_number(const CMat& mat) {
  if (mat.size() == 0) {
    return 1.0;
  }
  Eigen::JacobiSVD<CMat> svd(mat);
  const RVec& s = svd.singularValues();
  const double lo = s(s.size() - 1);
  if (lo == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return s(0) / lo;
}

CMat solve_exciting_fields(const FoldyLaxMatrix& z, const CMat& incident, double cap) {
  if (incident.rows() != z.matrix.rows()) {
    throw ConfigError("incident field length does not match the Foldy-Lax system");
  }
  if (z.matrix.rows() == 0) {
    return incident;
  }
  const double cond = condition_number(z.matrix);
  if (!(cond <= cap)) {
    std::ostringstream os;
    os << "Foldy-Lax matrix condition number " << cond << " exceeds cap " << cap;
    throw ResonanceError(os.str(), cond);
  }
  return z.matrix.partialPivLu().solve(incident);
}

CVec solve_exciting_fields(const FoldyLaxMatrix& z, const CVec& incident, double cap) {
  CMat in = incident;
  return solve_exciting_fields(z, in, cap).col(0);
}

std::string to_string(ResponseModel model) {
  switch (model) {
    case ResponseModel::FoldyLax: return "foldy-lax";
    case ResponseModel::Born: return "born";
    case ResponseModel::RandomMedium: return "random-medium";
    case ResponseModel::Loaded: return "loaded";
  }
  return "unknown";
}

ResponseModel response_model_from_string(const std::string& name) {
  if (name == "foldy-lax") return ResponseModel::FoldyLax;
  if (name == "born") return ResponseModel::Born;
  if (name == "random-medium") return ResponseModel::RandomMedium;
  if (name == "loaded") return ResponseModel::Loaded;
  throw ConfigError("unknown response model '" + name + "'");
}

Svd compute_svd(const CMat& mat) {
  Eigen::BDCSVD<CMat> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

ResponseMatrix::ResponseMatrix(CMat matrix, ResponseModel model)
    : matrix_(std::move(matrix)), model_(model) {
  if (matrix_.rows() != matrix_.cols()) {
    throw ConfigError("response matrix must be square");
  }
  svd_ = compute_svd(matrix_);
}

ResponseMatrix response_matrix_foldy_lax(const SensingMatrix& sensing,
                                         const ReflectivityVector& rho, double cap) {
  check_rho(sensing, rho);
  const auto n = sensing.rows();
  if (rho.count() == 0) {
    return ResponseMatrix(CMat::Zero(n, n), ResponseModel::FoldyLax);
  }
  const CMat gs = support_columns(sensing.matrix, rho.support());
  const CVec alpha = rho.support_values();
  const auto z = foldy_lax_matrix(support_points(sensing, rho.support()), alpha,
                                  homogeneous_kernel(sensing.ctx));
  const CMat fields = solve_exciting_fields(z, CMat(gs.transpose()), cap);
  CMat p = gs * (alpha.asDiagonal() * fields);
  // Exact symmetry is a property of the model; remove round-off asymmetry.
  p = 0.5 * (p + p.transpose()).eval();
  return ResponseMatrix(std::move(p), ResponseModel::FoldyLax);
}

ResponseMatrix response_matrix_foldy_lax_full(const SensingMatrix& sensing,
                                              const ReflectivityVector& rho, double cap) {
  const auto z = foldy_lax_matrix_full(sensing, rho);
  const CMat fields = solve_exciting_fields(z, CMat(sensing.matrix.transpose()), cap);
  CMat p = sensing.matrix * (rho.values().asDiagonal() * fields);
  return ResponseMatrix(std::move(p), ResponseModel::FoldyLax);
}

CMat born_matrix(const CMat& sensing, const CVec& rho) {
  if (rho.size() != sensing.cols()) {
    throw ConfigError("reflectivity length does not match the sensing matrix");
  }
  std::vector<std::size_t> support;
  for (Eigen::Index j = 0; j < rho.size(); ++j) {
    if (std::abs(rho(j)) > 0.0) {
      support.push_back(static_cast<std::size_t>(j));
    }
  }
  if (support.empty()) {
    return CMat::Zero(sensing.rows(), sensing.rows());
  }
  const CMat gs = support_columns(sensing, support);
  CVec a(static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    a(static_cast<Eigen::Index>(j)) = rho(static_cast<Eigen::Index>(support[j]));
  }
  return gs * a.asDiagonal() * gs.transpose();
}

ResponseMatrix response_matrix_born(const SensingMatrix& sensing, const ReflectivityVector& rho) {
  check_rho(sensing, rho);
  return ResponseMatrix(born_matrix(sensing.matrix, rho.values()), ResponseModel::Born);
}

CVec simulate_data(const ResponseMatrix& resp, const CVec& illumination) {
  if (static_cast<std::size_t>(illumination.size()) != resp.size()) {
    throw ConfigError("illumination length " + std::to_string(illumination.size()) +
                      " does not match array size " + std::to_string(resp.size()));
  }
  return resp.matrix() * illumination;
}

CMat simulate_data(const ResponseMatrix& resp, const CMat& illuminations) {
  if (static_cast<std::size_t>(illuminations.rows()) != resp.size()) {
    throw ConfigError("illumination length " + std::to_string(illuminations.rows()) +
                      " does not match array size " + std::to_string(resp.size()));
  }
  return resp.matrix() * illuminations;
}

CVec effective_sources(const SensingMatrix& sensing, const ReflectivityVector& rho,
                       const CVec& illumination, double cap) {
  check_rho(sensing, rho);
  if (illumination.size() != sensing.rows()) {
    throw ConfigError("illumination length does not match array size");
  }
  CVec gamma = CVec::Zero(sensing.cols());
  if (rho.count() == 0) {
    return gamma;
  }
  const CMat gs = support_columns(sensing.matrix, rho.support());
  const CVec alpha = rho.support_values();
  const auto z = foldy_lax_matrix(support_points(sensing, rho.support()), alpha,
                                  homogeneous_kernel(sensing.ctx));
  const CVec fields = solve_exciting_fields(z, CVec(gs.transpose() * illumination), cap);
  for (std::size_t j = 0; j < rho.count(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    gamma(static_cast<Eigen::Index>(rho.support()[j])) = alpha(jj) * fields(jj);
  }
  return gamma;
}

double multiple_scattering_ratio(const ReflectivityVector& rho, const CVec& illumination,
                                 const SensingMatrix& sensing) {
  const CVec single = born_matrix(sensing.matrix, rho.values()) * illumination;
  const double denom = single.norm();
  if (!(denom > 0.0)) {
    throw DomainError("single-scattering field vanishes for this illumination");
  }
  const CVec full = sensing.matrix * effective_sources(sensing, rho, illumination);
  return (full - single).norm() / denom;
}

}  // namespace sparseimg
