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

#include "sparseimg/greens.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sparseimg {

Complex green_homogeneous(const Point& x, const Point& y, const WaveContext& ctx) {
  const double r = (x - y).norm();
  if (r == 0.0) {
    throw DomainError("Green's function evaluated at coincident points");
  }
  return std::polar(1.0 / (4.0 * kPi * r), ctx.wavenumber() * r);
}

GreenKernel homogeneous_kernel(const WaveContext& ctx) {
  return [ctx](const Point& x, const Point& y) { return green_homogeneous(x, y, ctx); };
}

CVec green_vector(const ArrayGeometry& geom, const Point& y, const WaveContext& ctx) {
  CVec g(static_cast<Eigen::Index>(geom.size()));
  for (std::size_t i = 0; i < geom.size(); ++i) {
    g(static_cast<Eigen::Index>(i)) = green_homogeneous(geom.position(i), y, ctx);
  }
  return g;
}

CVec green_vector(const ArrayGeometry& geom, const Point& y, const GreenKernel& kernel) {
  CVec g(static_cast<Eigen::Index>(geom.size()));
  for (std::size_t i = 0; i < geom.size(); ++i) {
    g(static_cast<Eigen::Index>(i)) = kernel(geom.position(i), y);
  }
  return g;
}

namespace {

SensingMatrix assemble(const ArrayGeometry& geom, const ImageWindow& window,
                       const WaveContext& ctx, const GreenKernel* kernel) {
  SensingMatrix out{CMat(static_cast<Eigen::Index>(geom.size()),
                         static_cast<Eigen::Index>(window.size())),
                    window.points(), ctx, window.rows(), window.cols()};
  for (std::size_t j = 0; j < window.size(); ++j) {
    const Point& y = out.grid[j];
    for (std::size_t i = 0; i < geom.size(); ++i) {
      if ((geom.position(i) - y).norm() == 0.0) {
        throw DomainError("grid point " + std::to_string(j) + " coincides with transducer " +
                          std::to_string(i));
      }
    }
    out.matrix.col(static_cast<Eigen::Index>(j)) =
        kernel ? green_vector(geom, y, *kernel) : green_vector(geom, y, ctx);
  }
  return out;
}

CMat normalized_columns(const CMat& mat) {
  CMat n = mat;
  for (Eigen::Index j = 0; j < n.cols(); ++j) {
    const double norm = n.col(j).norm();
    if (!(norm > 0.0)) {
      throw DomainError("column " + std::to_string(j) + " has zero norm");
    }
    n.col(j) /= norm;
  }
  return n;
}

constexpr Eigen::Index kBlock = 2048;

}  // namespace

SensingMatrix sensing_matrix(const ArrayGeometry& geom, const ImageWindow& window,
                             const WaveContext& ctx) {
  return assemble(geom, window, ctx, nullptr);
}

SensingMatrix sensing_matrix(const ArrayGeometry& geom, const ImageWindow& window,
                             const WaveContext& ctx, const GreenKernel& kernel) {
  return assemble(geom, window, ctx, &kernel);
}

CoherenceResult mutual_coherence(const CMat& mat) {
  if (mat.cols() < 2) {
    throw DomainError("mutual coherence needs at least two columns");
  }
  const CMat n = normalized_columns(mat);
  const Eigen::Index k = n.cols();
  CoherenceResult best{-1.0, 0, 1};
  for (Eigen::Index b0 = 0; b0 < k; b0 += kBlock) {
    const Eigen::Index bl = std::min(kBlock, k - b0);
    // Only blocks at or right of the diagonal are needed.
    for (Eigen::Index c0 = b0; c0 < k; c0 += kBlock) {
      const Eigen::Index cl = std::min(kBlock, k - c0);
      const RMat gram = (n.middleCols(b0, bl).adjoint() * n.middleCols(c0, cl)).cwiseAbs();
      for (Eigen::Index c = 0; c < cl; ++c) {
        for (Eigen::Index r = 0; r < bl; ++r) {
          if (b0 + r >= c0 + c) {
            continue;
          }
          const double v = gram(r, c);
          if (v > best.epsilon) {
            best = {v, static_cast<std::size_t>(b0 + r), static_cast<std::size_t>(c0 + c)};
          }
        }
      }
    }
  }
  best.epsilon = std::clamp(best.epsilon, 0.0, 1.0);
  return best;
}

CoherenceResult mutual_coherence(const SensingMatrix& mat) { return mutual_coherence(mat.matrix); }

CoherenceResult mutual_coherence(const CMat& mat, std::span<const std::size_t> columns) {
  if (columns.size() < 2) {
    throw DomainError("mutual coherence needs at least two columns");
  }
  CMat sub(mat.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j] >= static_cast<std::size_t>(mat.cols())) {
      throw ConfigError("column index " + std::to_string(columns[j]) + " out of range");
    }
    sub.col(static_cast<Eigen::Index>(j)) = mat.col(static_cast<Eigen::Index>(columns[j]));
  }
  CoherenceResult r = mutual_coherence(sub);
  r.first = columns[r.first];
  r.second = columns[r.second];
  return r;
}

double exact_recovery_margin(double epsilon, std::size_t m) {
  return 0.5 - epsilon * static_cast<double>(m);
}

CoherenceReport coherence_report(const SensingMatrix& mat, std::size_t sources,
                                 std::span<const std::size_t> support) {
  CoherenceReport rep;
  rep.full = mutual_coherence(mat);
  rep.sources = sources;
  rep.margin = exact_recovery_margin(rep.full.epsilon, sources);
  if (support.size() >= 2) {
    rep.has_support = true;
    rep.support = mutual_coherence(mat.matrix, support);
    rep.support_margin = exact_recovery_margin(rep.support.epsilon, sources);
  }
  return rep;
}

}  // namespace sparseimg
