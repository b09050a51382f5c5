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

#include "sparseimg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace sparseimg {

WaveContext::WaveContext(double wavelength, double speed)
    : wavelength_(wavelength), wavenumber_(0.0), speed_(speed), omega_(0.0) {
  if (!(wavelength > 0.0) || !std::isfinite(wavelength)) {
    throw ConfigError("wavelength must be positive");
  }
  if (!(speed > 0.0) || !std::isfinite(speed)) {
    throw ConfigError("reference speed must be positive");
  }
  wavenumber_ = 2.0 * kPi / wavelength_;
  omega_ = wavenumber_ * speed_;
}

ArrayGeometry::ArrayGeometry(std::vector<Point> positions, double pitch)
    : positions_(std::move(positions)), pitch_(pitch), aperture_(0.0) {
  if (positions_.empty()) {
    throw ConfigError("array needs at least one transducer");
  }
  if (positions_.size() > 1 && !(pitch > 0.0)) {
    throw ConfigError("array pitch must be positive");
  }
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    for (std::size_t j = i + 1; j < positions_.size(); ++j) {
      if ((positions_[i] - positions_[j]).norm() == 0.0) {
        throw ConfigError("transducer positions " + std::to_string(i) + " and " +
                          std::to_string(j) + " coincide");
      }
    }
  }
  aperture_ = static_cast<double>(positions_.size() - 1) * pitch_;
}

ArrayGeometry build_linear_array(std::size_t n, double pitch, ArrayPlacement placement) {
  if (n == 0) {
    throw ConfigError("array needs at least one transducer");
  }
  if (!(pitch > 0.0) || !std::isfinite(pitch)) {
    throw ConfigError("array pitch must be positive");
  }
  std::vector<Point> pos;
  pos.reserve(n);
  const double mid = 0.5 * static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    pos.emplace_back(placement.center_cross_range + (static_cast<double>(i) - mid) * pitch,
                     placement.range);
  }
  return ArrayGeometry(std::move(pos), pitch);
}

double pitch_for_aperture(std::size_t n, double aperture) {
  if (n < 2) {
    throw ConfigError("an aperture needs at least two transducers");
  }
  if (!(aperture > 0.0)) {
    throw ConfigError("aperture must be positive");
  }
  return aperture / static_cast<double>(n - 1);
}

ImageWindow::ImageWindow(double center_range, std::size_t rows, std::size_t cols,
                         double spacing, double center_cross_range)
    : center_range_(center_range),
      center_cross_range_(center_cross_range),
      rows_(rows),
      cols_(cols),
      spacing_(spacing) {
  if (rows == 0 || cols == 0) {
    throw ConfigError("image window needs at least one row and one column");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw ConfigError("image window spacing must be positive");
  }
}

std::size_t ImageWindow::index(std::size_t row, std::size_t col) const {
  if (row >= rows_ || col >= cols_) {
    throw ConfigError("grid cell (" + std::to_string(row) + ", " + std::to_string(col) +
                      ") outside the image window");
  }
  return row * cols_ + col;
}

std::pair<std::size_t, std::size_t> ImageWindow::row_col(std::size_t index) const {
  if (index >= size()) {
    throw ConfigError("grid index " + std::to_string(index) + " outside the image window");
  }
  return {index / cols_, index % cols_};
}

Point ImageWindow::point(std::size_t row, std::size_t col) const {
  const double r = static_cast<double>(row) - 0.5 * static_cast<double>(rows_ - 1);
  const double c = static_cast<double>(col) - 0.5 * static_cast<double>(cols_ - 1);
  return {center_cross_range_ + c * spacing_, center_range_ + r * spacing_};
}

Point ImageWindow::point(std::size_t index) const {
  const auto [r, c] = row_col(index);
  return point(r, c);
}

std::vector<Point> ImageWindow::points() const {
  std::vector<Point> out;
  out.reserve(size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      out.push_back(point(r, c));
    }
  }
  return out;
}

ImageWindow build_image_window(double center_range, std::size_t rows, std::size_t cols,
                               double spacing) {
  return ImageWindow(center_range, rows, cols, spacing);
}

ReflectivityVector::ReflectivityVector(CVec values) : values_(std::move(values)) {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (std::abs(values_(i)) > 0.0) {
      support_.push_back(static_cast<std::size_t>(i));
    }
  }
}

CVec ReflectivityVector::support_values() const {
  CVec out(static_cast<Eigen::Index>(support_.size()));
  for (std::size_t j = 0; j < support_.size(); ++j) {
    out(static_cast<Eigen::Index>(j)) = values_(static_cast<Eigen::Index>(support_[j]));
  }
  return out;
}

ReflectivityVector ReflectivityVector::scaled(Complex factor) const {
  return ReflectivityVector(values_ * factor);
}

ReflectivityVector place_scatterers(const ImageWindow& window,
                                    std::span<const ScattererEntry> entries) {
  CVec values = CVec::Zero(static_cast<Eigen::Index>(window.size()));
  std::set<std::size_t> seen;
  for (const auto& e : entries) {
    if (e.index >= window.size()) {
      throw ConfigError("scatterer index " + std::to_string(e.index) +
                        " outside the image window of " + std::to_string(window.size()) +
                        " points");
    }
    if (!seen.insert(e.index).second) {
      throw ConfigError("duplicate scatterer index " + std::to_string(e.index));
    }
    values(static_cast<Eigen::Index>(e.index)) = e.reflectivity;
  }
  return ReflectivityVector(std::move(values));
}

std::vector<Complex> random_phase_reflectivities(std::span<const double> magnitudes,
                                                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::vector<Complex> out;
  out.reserve(magnitudes.size());
  for (double m : magnitudes) {
    out.push_back(std::polar(m, phase(rng)));
  }
  return out;
}

std::mt19937_64 make_rng(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace sparseimg
