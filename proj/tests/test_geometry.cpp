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
#include <vector>

#include "sparseimg/geometry.hpp"

using namespace sparseimg;

TEST_SUITE("geometry") {
  TEST_CASE("wave context derives wavenumber and frequency") {
    const WaveContext ctx(0.5, 3.0);
    CHECK(ctx.wavenumber() * ctx.wavelength() == doctest::Approx(2.0 * kPi).epsilon(1e-15));
    CHECK(ctx.angular_frequency() == ctx.wavenumber() * 3.0);
    CHECK_THROWS_AS(WaveContext(0.0), ConfigError);
    CHECK_THROWS_AS(WaveContext(1.0, -1.0), ConfigError);
  }

  TEST_CASE("linear array aperture and pitch") {
    const auto a100 = build_linear_array(100, 1.0);
    CHECK(a100.aperture() == 99.0);
    for (std::size_t i = 1; i < a100.size(); ++i) {
      CHECK((a100.position(i) - a100.position(i - 1)).norm() ==
            doctest::Approx(1.0).epsilon(1e-12));
      CHECK(a100.position(i).y() == 0.0);
    }
    const double l = 20.0;
    const double pitch = pitch_for_aperture(501, 25.0 * l);
    CHECK(pitch == doctest::Approx(1.0).epsilon(1e-15));
    const auto big = build_linear_array(501, pitch);
    CHECK(big.aperture() == doctest::Approx(500.0).epsilon(1e-15));

    const auto single = build_linear_array(1, 1.0);
    CHECK(single.size() == 1);
    CHECK(single.aperture() == 0.0);

    CHECK_THROWS_AS(build_linear_array(0, 1.0), ConfigError);
    CHECK_THROWS_AS(build_linear_array(5, 0.0), ConfigError);
    CHECK_THROWS_AS(build_linear_array(5, -2.0), ConfigError);
  }

  TEST_CASE("array is centered on its placement") {
    const auto arr = build_linear_array(4, 2.0, {10.0, -3.0});
    CHECK(arr.position(0).x() == doctest::Approx(7.0));
    CHECK(arr.position(3).x() == doctest::Approx(13.0));
    CHECK(arr.position(2).y() == -3.0);
  }

  TEST_CASE("coincident transducers are rejected") {
    CHECK_THROWS_AS(ArrayGeometry({Point(0, 0), Point(0, 0)}, 1.0), ConfigError);
  }

  TEST_CASE("image window sizes and index mapping") {
    const auto w41 = build_image_window(100.0, 41, 41, 1.0);
    CHECK(w41.size() == 1681);
    const auto one = build_image_window(100.0, 1, 1, 1.0);
    CHECK(one.size() == 1);
    CHECK(one.point(0).x() == 0.0);
    CHECK(one.point(0).y() == 100.0);

    const auto w = build_image_window(100.0, 21, 21, 1.0);
    CHECK(w.size() == 441);
    std::vector<int> hit(w.size(), 0);
    for (std::size_t r = 0; r < w.rows(); ++r) {
      for (std::size_t c = 0; c < w.cols(); ++c) hit[w.index(r, c)]++;
    }
    for (int h : hit) CHECK(h == 1);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const auto [r, c] = w.row_col(i);
      CHECK(w.index(r, c) == i);
    }
    CHECK_THROWS_AS(w.row_col(441), ConfigError);
    CHECK_THROWS_AS(build_image_window(100.0, 0, 3, 1.0), ConfigError);
    CHECK_THROWS_AS(build_image_window(100.0, 3, 0, 1.0), ConfigError);
    CHECK_THROWS_AS(build_image_window(100.0, 3, 3, 0.0), ConfigError);
  }

  TEST_CASE("rows run along range, columns along cross-range") {
    const auto w = build_image_window(50.0, 3, 5, 2.0);
    CHECK(w.point(1, 2).x() == doctest::Approx(0.0));
    CHECK(w.point(1, 2).y() == doctest::Approx(50.0));
    CHECK(w.point(2, 2).y() - w.point(1, 2).y() == doctest::Approx(2.0));
    CHECK(w.point(1, 3).x() - w.point(1, 2).x() == doctest::Approx(2.0));
    const auto pts = w.points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) CHECK((pts[i] - pts[j]).norm() > 0.0);
    }
  }

  TEST_CASE("placing scatterers") {
    const auto w = build_image_window(100.0, 41, 41, 1.0);
    auto rng = make_rng(7, 1);
    const std::vector<double> mags{2.96, 2.76, 2.05, 1.54, 1.35};
    const auto refl = random_phase_reflectivities(mags, rng);
    const std::vector<std::size_t> idx{900, 20, 455, 1300, 12};
    std::vector<ScattererEntry> entries;
    for (std::size_t j = 0; j < idx.size(); ++j) entries.push_back({idx[j], refl[j]});
    const auto rho = place_scatterers(w, entries);
    CHECK(rho.count() == 5);
    CHECK(rho.support() == std::vector<std::size_t>{12, 20, 455, 900, 1300});
    for (std::size_t j = 0; j < idx.size(); ++j) {
      CHECK(std::abs(rho[idx[j]]) == doctest::Approx(mags[j]).epsilon(1e-14));
    }

    const auto empty = place_scatterers(w, {});
    CHECK(empty.count() == 0);
    CHECK(empty.size() == w.size());
    CHECK(empty.values().norm() == 0.0);

    const std::vector<ScattererEntry> four{{10, 0.8}, {20, 1.0}, {30, 0.5}, {40, 0.7}};
    CHECK(place_scatterers(w, four).count() == 4);

    const std::vector<ScattererEntry> dup{{3, 1.0}, {3, 2.0}};
    CHECK_THROWS_AS(place_scatterers(w, dup), ConfigError);
    const std::vector<ScattererEntry> out{{1681, 1.0}};
    CHECK_THROWS_AS(place_scatterers(w, out), ConfigError);
  }

  TEST_CASE("random phases are uniform and seeded") {
    const std::vector<double> mags(2000, 1.0);
    auto r1 = make_rng(3, 1);
    auto r2 = make_rng(3, 1);
    auto r3 = make_rng(3, 2);
    const auto a = random_phase_reflectivities(mags, r1);
    const auto b = random_phase_reflectivities(mags, r2);
    const auto c = random_phase_reflectivities(mags, r3);
    CHECK(a == b);
    CHECK(a != c);
    Complex mean = 0.0;
    for (auto z : a) mean += z;
    mean /= static_cast<double>(a.size());
    // mean of e^{i phi} for uniform phi has standard error 1/sqrt(2n)
    CHECK(std::abs(mean) < 4.0 / std::sqrt(2.0 * 2000.0));
  }
}
