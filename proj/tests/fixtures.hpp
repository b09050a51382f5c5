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

#ifndef SPARSEIMG_TEST_FIXTURES_HPP
#define SPARSEIMG_TEST_FIXTURES_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "sparseimg/greens.hpp"

namespace fixtures {

using sparseimg::CMat;
using sparseimg::Complex;
using sparseimg::CVec;

inline CMat random_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Complex(n(rng), n(rng));
  return m;
}

inline CMat unit_columns(CMat m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j).normalize();
  return m;
}

inline CMat random_unitary(Eigen::Index n, std::mt19937_64& rng) {
  Eigen::HouseholderQR<CMat> qr(random_gaussian(n, n, rng));
  return qr.householderQ() * CMat::Identity(n, n);
}

// Rows of a K-point DFT restricted to a random subset, rotated by a random
// unitary and with random column phases. Coherence is that of the row subset.
inline CMat harmonic_frame(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(cols));
  std::iota(pick.begin(), pick.end(), 0);
  std::shuffle(pick.begin(), pick.end(), rng);
  CMat f(rows, cols);
  const double pi = 3.14159265358979323846;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double ph = 2.0 * pi * static_cast<double>(pick[static_cast<std::size_t>(r)] * c) /
                        static_cast<double>(cols);
      f(r, c) = std::polar(1.0 / std::sqrt(static_cast<double>(rows)), ph);
    }
  }
  std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
  for (Eigen::Index c = 0; c < cols; ++c) f.col(c) *= std::polar(1.0, u(rng));
  return random_unitary(rows, rng) * f;
}

struct Planted {
  CMat a;
  CVec x;
  std::vector<std::size_t> support;
  double epsilon;
};

// Underdetermined instance with K <= 16 columns, an M-sparse planted vector
// and coherence below 1 / (2M).
inline Planted low_coherence_instance(std::size_t m, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kd(10, 16);
  std::normal_distribution<double> n(0.0, 1.0);
  while (true) {
    const Eigen::Index k = kd(rng);
    std::uniform_int_distribution<int> nd(static_cast<int>(k) / 2 + 2, static_cast<int>(k) - 1);
    const Eigen::Index rows = nd(rng);
    CMat a = harmonic_frame(rows, k, rng);
    const double eps = sparseimg::mutual_coherence(a).epsilon;
    if (eps * static_cast<double>(m) >= 0.5) continue;
    std::vector<std::size_t> cols(static_cast<std::size_t>(k));
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(cols.begin(), cols.end(), rng);
    cols.resize(m);
    std::sort(cols.begin(), cols.end());
    CVec x = CVec::Zero(k);
    for (auto j : cols) {
      Complex v(n(rng), n(rng));
      while (std::abs(v) < 0.2) v = Complex(n(rng), n(rng));
      x(static_cast<Eigen::Index>(j)) = v;
    }
    return {std::move(a), std::move(x), std::move(cols), eps};
  }
}

// Identity next to a normalized DFT: coherence 1 / sqrt(n).
inline CMat identity_fourier(Eigen::Index n) {
  CMat a(n, 2 * n);
  a.leftCols(n).setIdentity();
  const double pi = 3.14159265358979323846;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      a(r, n + c) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                               2.0 * pi * static_cast<double>(r * c) / static_cast<double>(n));
    }
  }
  return a;
}

}  // namespace fixtures

#endif  // SPARSEIMG_TEST_FIXTURES_HPP
