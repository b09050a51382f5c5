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

#ifndef SPARSEIMG_RANDOM_MEDIUM_HPP
#define SPARSEIMG_RANDOM_MEDIUM_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sparseimg/foldy_lax.hpp"
#include "sparseimg/geometry.hpp"
#include "sparseimg/greens.hpp"
#include "sparseimg/types.hpp"

namespace sparseimg {

enum class Autocorrelation { Gaussian, PowerLaw };

std::string to_string(Autocorrelation kind);
Autocorrelation autocorrelation_from_string(const std::string& name);

/// Normalized autocorrelation R(t): exp(-t^2/2) or (1 + t) exp(-t).
double autocorrelation(Autocorrelation kind, double t);

/// Statistics of the sound-speed fluctuation field. A non-positive lattice
/// spacing selects l / 5.
struct RandomMediumSpec {
  double correlation_length = 20.0;
  double strength = 0.0;
  Autocorrelation kind = Autocorrelation::Gaussian;
  double lattice_spacing = 0.0;
  std::uint64_t seed = 0;

  double spacing() const { return lattice_spacing > 0.0 ? lattice_spacing : correlation_length / 5.0; }
  void validate() const;
};

/// Integral of R'(t) / t over (0, inf).
double autocorrelation_integral(Autocorrelation kind);

struct EffectiveAperture {
  double aperture;
  double integral;
  double range;
};

EffectiveAperture effective_aperture(const RandomMediumSpec& spec, double range);

/// Conditions under which the random phase model is not expected to hold, as
/// human-readable messages. Empty when the regime is fine.
std::vector<std::string> validity_warnings(const RandomMediumSpec& spec, double range,
                                           const WaveContext& ctx);

/// Axis-aligned box: x is cross-range, y is range.
struct Region {
  double x_min;
  double x_max;
  double y_min;
  double y_max;

  bool contains(const Point& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }
};

/// Smallest box holding the array and the image window.
Region propagation_region(const ArrayGeometry& geom, const ImageWindow& window);
Region bounding_region(const std::vector<Point>& points);

/// One sample of the zero-mean, unit-variance fluctuation field on a regular
/// lattice, bilinearly interpolated between nodes.
class RandomFieldRealization {
 public:
  RandomFieldRealization(Point origin, double spacing, RMat values, std::uint64_t seed,
                         double correlation_length);

  double operator()(const Point& p) const;
  bool contains(const Point& p) const;

  const Point& origin() const noexcept { return origin_; }
  double spacing() const noexcept { return spacing_; }
  /// values()(i, j) is the node at origin + (i * spacing, j * spacing).
  const RMat& values() const noexcept { return values_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double correlation_length() const noexcept { return correlation_length_; }

 private:
  Point origin_;
  double spacing_;
  RMat values_;
  std::uint64_t seed_;
  double correlation_length_;
};

/// Circulant-embedding synthesis on a torus padded by five correlation
/// lengths around the region. (seed, index) selects an independent draw.
RandomFieldRealization sample_field(const RandomMediumSpec& spec, const Region& region,
                                    std::uint64_t seed, std::uint64_t index = 0);

/// Constant field over a region; used for checks.
RandomFieldRealization constant_field(const Region& region, double spacing, double value,
                                      double correlation_length);

/// Average of the field along the segment x -> y, composite midpoint rule.
/// A non-positive step selects l / 10.
double phase_line_integral(const RandomFieldRealization& field, const Point& x, const Point& y,
                           double step = 0.0);

/// Homogeneous Green's function times exp(i sigma k |x - y| nu(x, y)).
Complex green_random(const RandomFieldRealization& field, const Point& x, const Point& y,
                     const WaveContext& ctx, const RandomMediumSpec& spec);

GreenKernel random_kernel(const RandomFieldRealization& field, const WaveContext& ctx,
                          const RandomMediumSpec& spec);

CVec green_vector_random(const RandomFieldRealization& field, const ArrayGeometry& geom,
                         const Point& y, const WaveContext& ctx, const RandomMediumSpec& spec);

/// Born response sum_j alpha_j g(y_j) g(y_j)^T with random Green's vectors.
ResponseMatrix response_matrix_random(const RandomFieldRealization& field,
                                      const ArrayGeometry& geom, const ImageWindow& window,
                                      const ReflectivityVector& rho, const WaveContext& ctx,
                                      const RandomMediumSpec& spec);

enum class StabilityMode { Self, Mixed };

struct MonteCarloEstimate {
  double value;
  double std_error;
  std::size_t realizations;
};

/// Normalized variance of g(y1)^H g(y2) (self) or g0(y1)^H g(y2) (mixed)
/// over independent media drawn from (spec.seed, realization index).
MonteCarloEstimate estimate_stability_ratio(const ArrayGeometry& geom, const Point& y1,
                                            const Point& y2, const WaveContext& ctx,
                                            const RandomMediumSpec& spec,
                                            std::size_t realizations, StabilityMode mode);

/// |E[G(x,y1) conj G(x,y2)]| / |G0(x,y1) G0(x,y2)|.
MonteCarloEstimate estimate_second_moment(const Point& x, const Point& y1, const Point& y2,
                                          const WaveContext& ctx, const RandomMediumSpec& spec,
                                          std::size_t realizations);

/// Predicted second-moment decay exp(-k^2 a_e^2 |dy|^2 / (2 L^2)).
double second_moment_prediction(double separation, double range, const WaveContext& ctx,
                                 const RandomMediumSpec& spec);

/// Upper bound on the self-mode stability ratio for aperture a at range L.
double stability_bound(double separation, double aperture, double range,
                       const WaveContext& ctx, const RandomMediumSpec& spec);

/// Paraxial prediction of the stability ratio for offsets (xi, eta) between
/// the two points. Requires aperture <= range / 5.
double paraxial_ratio(const ArrayGeometry& geom, double xi, double eta, double range,
                      const WaveContext& ctx, const RandomMediumSpec& spec);

}  // namespace sparseimg

#endif  // SPARSEIMG_RANDOM_MEDIUM_HPP
