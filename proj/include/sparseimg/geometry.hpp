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

#ifndef SPARSEIMG_GEOMETRY_HPP
#define SPARSEIMG_GEOMETRY_HPP

#include <cstddef>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "sparseimg/types.hpp"

namespace sparseimg {

/// Single-frequency wave parameters. Lengths are measured in wavelengths,
/// so the default context has wavelength 1 and wavenumber 2*pi.
class WaveContext {
 public:
  explicit WaveContext(double wavelength = 1.0, double speed = 1.0);

  double wavelength() const noexcept { return wavelength_; }
  double wavenumber() const noexcept { return wavenumber_; }
  double speed() const noexcept { return speed_; }
  double angular_frequency() const noexcept { return omega_; }

 private:
  double wavelength_;
  double wavenumber_;
  double speed_;
  double omega_;
};

/// Where a linear array sits in the plane: the cross-range coordinate of its
/// midpoint and the range of the line it lies on.
struct ArrayPlacement {
  double center_cross_range = 0.0;
  double range = 0.0;
};

class ArrayGeometry {
 public:
  ArrayGeometry(std::vector<Point> positions, double pitch);

  std::size_t size() const noexcept { return positions_.size(); }
  const std::vector<Point>& positions() const noexcept { return positions_; }
  const Point& position(std::size_t i) const { return positions_.at(i); }
  double pitch() const noexcept { return pitch_; }
  /// (N - 1) * pitch.
  double aperture() const noexcept { return aperture_; }

 private:
  std::vector<Point> positions_;
  double pitch_;
  double aperture_;
};

ArrayGeometry build_linear_array(std::size_t n, double pitch,
                                 ArrayPlacement placement = {});

/// Pitch that spreads n elements uniformly over the given aperture.
double pitch_for_aperture(std::size_t n, double aperture);

/// Uniform planar grid of search points centered at (center_cross_range,
/// center_range). Linear indices are row-major: index = row * cols + col,
/// rows run along range and columns along cross-range.
class ImageWindow {
 public:
  ImageWindow(double center_range, std::size_t rows, std::size_t cols,
              double spacing, double center_cross_range = 0.0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return rows_ * cols_; }
  double spacing() const noexcept { return spacing_; }
  double center_range() const noexcept { return center_range_; }
  double center_cross_range() const noexcept { return center_cross_range_; }

  std::size_t index(std::size_t row, std::size_t col) const;
  std::pair<std::size_t, std::size_t> row_col(std::size_t index) const;
  Point point(std::size_t index) const;
  Point point(std::size_t row, std::size_t col) const;
  std::vector<Point> points() const;

 private:
  double center_range_;
  double center_cross_range_;
  std::size_t rows_;
  std::size_t cols_;
  double spacing_;
};

ImageWindow build_image_window(double center_range, std::size_t rows,
                               std::size_t cols, double spacing);

/// Complex reflectivity over the K grid points of an image window.
class ReflectivityVector {
 public:
  ReflectivityVector() = default;
  explicit ReflectivityVector(CVec values);

  const CVec& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  Complex operator[](std::size_t i) const { return values_(static_cast<Eigen::Index>(i)); }

  /// Indices with nonzero magnitude, ascending.
  const std::vector<std::size_t>& support() const noexcept { return support_; }
  std::size_t count() const noexcept { return support_.size(); }
  /// Values on the support, in support order.
  CVec support_values() const;

  ReflectivityVector scaled(Complex factor) const;

 private:
  CVec values_;
  std::vector<std::size_t> support_;
};

struct ScattererEntry {
  std::size_t index;
  Complex reflectivity;
};

ReflectivityVector place_scatterers(const ImageWindow& window,
                                    std::span<const ScattererEntry> entries);

/// Reflectivities with the given magnitudes and phases drawn uniformly on
/// [0, 2*pi).
std::vector<Complex> random_phase_reflectivities(std::span<const double> magnitudes,
                                                 std::mt19937_64& rng);

/// Independent generator for (master seed, stream, index). Streams separate
/// uses of randomness (phases, noise, medium) inside one scenario.
std::mt19937_64 make_rng(std::uint64_t master_seed, std::uint64_t stream,
                         std::uint64_t index = 0);

}  // namespace sparseimg

#endif  // SPARSEIMG_GEOMETRY_HPP
