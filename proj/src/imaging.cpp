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

#include "sparseimg/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace sparseimg {

namespace {

SolverDiagnostics diagnostics(const SparseSolution& s, double delta) {
  return {true, s.converged, s.iterations, s.residual, delta};
}

std::vector<std::size_t> detected_support(const CMat& x, const SensingMatrix& sensing,
                                          const ImagingOptions& opts, const SparseSolution& sol) {
  if (opts.detection_floor <= 0.0) {
    return sol.support;
  }
  std::vector<std::size_t> out;
  const RVec norms = x.rowwise().norm();
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    if (norms(j) * sensing.matrix.col(j).norm() > opts.detection_floor) {
      out.push_back(static_cast<std::size_t>(j));
    }
  }
  return out;
}

std::pair<std::size_t, std::size_t> grid_shape(const SensingMatrix& s) {
  const auto k = static_cast<std::size_t>(s.cols());
  if (s.grid_rows * s.grid_cols == k && k > 0) {
    return {s.grid_rows, s.grid_cols};
  }
  return {1, k};
}

void check_grid(const SensingMatrix& sensing) {
  if (sensing.grid.size() != static_cast<std::size_t>(sensing.cols())) {
    throw ConfigError("sensing matrix grid does not match its columns");
  }
}

}  // namespace

std::size_t select_rank(const RVec& singular_values, double relative_threshold,
                        std::optional<std::size_t> known) {
  if (singular_values.size() == 0) {
    throw ConfigError("no singular values to select a rank from");
  }
  if (known) {
    return *known;
  }
  const double cut = relative_threshold * singular_values(0);
  std::size_t m = 0;
  while (m < static_cast<std::size_t>(singular_values.size()) &&
         singular_values(static_cast<Eigen::Index>(m)) >= cut && singular_values(0) > 0.0) {
    ++m;
  }
  return m;
}

CVec reflectivities_from_sources(const SensingMatrix& sensing,
                                 const std::vector<std::size_t>& support,
                                 const CVec& sources_on_support, const CVec& illumination,
                                 double screen_floor, std::vector<bool>& screened) {
  const std::size_t m = support.size();
  if (static_cast<std::size_t>(sources_on_support.size()) != m) {
    throw ConfigError("source count does not match support size");
  }
  if (illumination.size() != sensing.rows()) {
    throw ConfigError("illumination length does not match array size");
  }
  check_grid(sensing);
  const double floor = screen_floor * illumination.norm();
  CVec rho = CVec::Zero(static_cast<Eigen::Index>(m));
  screened.assign(m, false);
  for (std::size_t j = 0; j < m; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const auto col = static_cast<Eigen::Index>(support[j]);
    Complex field = sensing.matrix.col(col).transpose() * illumination;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == j) continue;
      field += sources_on_support(static_cast<Eigen::Index>(k)) *
               green_homogeneous(sensing.grid[support[j]], sensing.grid[support[k]], sensing.ctx);
    }
    if (!(std::abs(field) >= floor) || std::abs(field) == 0.0) {
      screened[j] = true;
      continue;
    }
    rho(jj) = sources_on_support(jj) / field;
  }
  return rho;
}

ImagingResult image_smv(const CVec& b, const CVec& illumination, const SensingMatrix& sensing,
                        const ImagingOptions& opts) {
  ImagingResult r = image_mmv(CMat(b), CMat(illumination), sensing, opts);
  r.method = "smv";
  return r;
}

ImagingResult image_mmv(const CMat& b, const CMat& illuminations, const SensingMatrix& sensing,
                        const ImagingOptions& opts) {
  if (b.cols() != illuminations.cols()) {
    throw ConfigError("data has " + std::to_string(b.cols()) + " columns but " +
                      std::to_string(illuminations.cols()) + " illuminations were given");
  }
  if (illuminations.rows() != sensing.rows()) {
    throw ConfigError("illumination length does not match array size");
  }
  ImagingResult res;
  res.method = "mmv";
  res.reflectivity = CVec::Zero(sensing.cols());
  const SparseSolution sol = b.cols() == 1 ? solve_l1_smv(sensing.matrix, b.col(0), opts.solver)
                                           : solve_l1_mmv(sensing.matrix, b, opts.solver);
  res.solver = diagnostics(sol, opts.solver.delta);
  const auto support = detected_support(sol.x, sensing, opts, sol);
  const std::size_t m = support.size();
  CVec sum = CVec::Zero(static_cast<Eigen::Index>(m));
  std::vector<std::size_t> valid(m, 0);
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    CVec src(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      src(static_cast<Eigen::Index>(j)) = sol.x(static_cast<Eigen::Index>(support[j]), c);
    }
    std::vector<bool> screened;
    const CVec rho = reflectivities_from_sources(sensing, support, src, illuminations.col(c),
                                                 opts.screen_floor, screened);
    for (std::size_t j = 0; j < m; ++j) {
      if (!screened[j]) {
        sum(static_cast<Eigen::Index>(j)) += rho(static_cast<Eigen::Index>(j));
        ++valid[j];
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    const Complex v = valid[j] ? sum(static_cast<Eigen::Index>(j)) / double(valid[j]) : 0.0;
    if (valid[j] == 0 || std::abs(v) == 0.0) {
      res.screened.push_back(support[j]);
      continue;
    }
    res.support.push_back(support[j]);
    res.reflectivity(static_cast<Eigen::Index>(support[j])) = v;
  }
  return res;
}

CMat optimal_illuminations(const ResponseMatrix& resp, std::size_t count) {
  const RVec& s = resp.singular_values();
  std::size_t rank = 0;
  while (rank < static_cast<std::size_t>(s.size()) &&
         s(static_cast<Eigen::Index>(rank)) > 1e-12 * s(0) && s(0) > 0.0) {
    ++rank;
  }
  if (count == 0 || count > rank) {
    throw ConfigError("requested " + std::to_string(count) +
                      " optimal illuminations but the response has rank " +
                      std::to_string(rank));
  }
  return resp.svd().v.leftCols(static_cast<Eigen::Index>(count));
}

HybridSystem build_hybrid_system(const ResponseMatrix& resp, const SensingMatrix& sensing,
                                 std::size_t rank) {
  if (rank == 0 || rank > resp.size()) {
    throw ConfigError("hybrid rank must lie in [1, N]");
  }
  if (static_cast<std::size_t>(sensing.rows()) != resp.size()) {
    throw ConfigError("sensing matrix and response matrix disagree on array size");
  }
  const auto m = static_cast<Eigen::Index>(rank);
  HybridSystem h;
  h.left = resp.svd().u.leftCols(m);
  h.right = resp.svd().v.leftCols(m);
  h.rhs = resp.singular_values().head(m);
  const CMat uh = h.left.adjoint() * sensing.matrix;   // U_i^H g(y_k)
  const CMat vt = h.right.transpose() * sensing.matrix;  // V_i^T g(y_k)
  h.matrix = uh.cwiseProduct(vt);
  return h;
}

ImagingResult image_hybrid_l1(const ResponseMatrix& resp, const SensingMatrix& sensing,
                              std::size_t rank, const HybridOptions& opts) {
  const HybridSystem h = build_hybrid_system(resp, sensing, rank);
  SolverParams sp = opts.solver;
  sp.delta = opts.delta_fraction * h.rhs.norm();
  // Unknowns are measured against unit Green's vectors: rho_k |g_k|^2. Plain
  // column normalization would inflate the near-empty columns far from every
  // scatterer.
  const RVec gain = sensing.matrix.colwise().squaredNorm().transpose();
  sp.normalize_columns = false;
  SparseSolution sol =
      solve_l1_smv(h.matrix * gain.cwiseInverse().asDiagonal(), h.rhs.cast<Complex>(), sp);
  sol.x = gain.cwiseInverse().asDiagonal() * sol.x;
  ImagingResult res;
  res.method = "hybrid";
  res.rank = rank;
  res.solver = diagnostics(sol, sp.delta);
  res.support = sol.support;
  res.reflectivity = CVec::Zero(sensing.cols());
  for (auto j : res.support) {
    res.reflectivity(static_cast<Eigen::Index>(j)) = sol.x(static_cast<Eigen::Index>(j), 0);
  }
  return res;
}

HybridCertificate hybrid_certificate(const HybridSystem& system,
                                     const std::vector<std::size_t>& support) {
  const auto m = static_cast<Eigen::Index>(support.size());
  if (m == 0 || system.matrix.rows() != m) {
    throw ConfigError("certificate needs one hybrid row per support point");
  }
  const CMat& b = system.matrix;
  std::vector<bool> on(static_cast<std::size_t>(b.cols()), false);
  for (auto j : support) on.at(j) = true;

  // Normalized columns.
  CMat bn = b;
  for (Eigen::Index j = 0; j < bn.cols(); ++j) {
    const double n = bn.col(j).norm();
    if (n > 0.0) bn.col(j) /= n;
  }
  // Match each row to the support column where it is largest so that the
  // support block is as close to diagonal as possible.
  std::vector<Eigen::Index> col_of_row(static_cast<std::size_t>(m));
  std::vector<bool> taken(static_cast<std::size_t>(m), false);
  for (Eigen::Index i = 0; i < m; ++i) {
    double best = -1.0;
    Eigen::Index pick = 0;
    for (Eigen::Index s = 0; s < m; ++s) {
      const double v = std::abs(b(i, static_cast<Eigen::Index>(support[s])));
      if (!taken[s] && v > best) {
        best = v;
        pick = s;
      }
    }
    taken[pick] = true;
    col_of_row[i] = pick;
  }
  CMat e(m, m), eraw(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index s = 0; s < m; ++s) {
      const auto col = static_cast<Eigen::Index>(support[col_of_row[s]]);
      e(i, s) = bn(i, col);
      eraw(i, s) = b(i, col);
    }
  }
  HybridCertificate c;
  const CVec d = eraw.diagonal();
  for (Eigen::Index s = 0; s < m; ++s) {
    double dev = 0.0, sdev = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      dev += std::abs(e(i, s) - (i == s ? Complex(1.0) : Complex(0.0)));
      if (i != s) sdev += std::abs(eraw(i, s) / d(i));
    }
    c.support_deviation = std::max(c.support_deviation, dev);
    c.scaled_support_deviation = std::max(c.scaled_support_deviation, sdev);
  }
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    if (on[static_cast<std::size_t>(j)]) continue;
    double n1 = 0.0, s1 = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      n1 += std::abs(bn(i, j));
      s1 += std::abs(b(i, j) / d(i));
    }
    c.off_support_norm = std::max(c.off_support_norm, n1);
    c.scaled_off_support_norm = std::max(c.scaled_off_support_norm, s1);
  }
  c.holds = c.off_support_norm < 1.0 - c.support_deviation;
  c.scaled_holds = c.scaled_off_support_norm < 1.0 - c.scaled_support_deviation;
  return c;
}

constexpr double kMusicRoundoff = 1e-8;

ImagingResult image_music(const ResponseMatrix& resp, const SensingMatrix& sensing,
                          std::size_t rank) {
  if (rank == 0 || rank > resp.size()) {
    throw ConfigError("MUSIC rank must lie in [1, N]");
  }
  if (static_cast<std::size_t>(sensing.rows()) != resp.size()) {
    throw ConfigError("sensing matrix and response matrix disagree on array size");
  }
  const CMat u = resp.svd().u.leftCols(static_cast<Eigen::Index>(rank));
  const CMat proj = u * (u.adjoint() * sensing.matrix) - sensing.matrix;
  RVec norms = proj.colwise().norm().transpose();
  if (norms.maxCoeff() == 0.0) {
    throw DomainError("every grid point lies in the signal subspace; MUSIC is degenerate");
  }
  // Projections below roundoff carry no ranking information; without a floor
  // exact data would leave all but one true point below the peak cut.
  const RVec gnorms = sensing.matrix.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < norms.size(); ++k) {
    norms(k) = std::max(norms(k), kMusicRoundoff * gnorms(k));
  }
  const double lo = norms.minCoeff();
  ImagingResult res;
  res.method = "music";
  res.rank = rank;
  res.image.resize(norms.size());
  for (Eigen::Index k = 0; k < norms.size(); ++k) {
    res.image(k) = norms(k) > 0.0 ? lo / norms(k) : 1.0;
  }
  res.reflectivity = CVec::Zero(sensing.cols());
  const auto [rows, cols] = grid_shape(sensing);
  res.support = extract_peaks(res.image, rows, cols, rank);
  return res;
}

ImagingResult image_km(const CMat& b, const CMat& illuminations, const SensingMatrix& sensing,
                       std::size_t peak_count) {
  if (b.cols() != illuminations.cols() || b.rows() != sensing.rows() ||
      illuminations.rows() != sensing.rows()) {
    throw ConfigError("KM data, illuminations and sensing matrix have inconsistent sizes");
  }
  // value_j = sum_c conj(g_j^T f_c) * (g_j^H b_c)
  const CMat gf = sensing.matrix.transpose() * illuminations;
  const CMat gb = sensing.matrix.adjoint() * b;
  const CVec v = gf.conjugate().cwiseProduct(gb).rowwise().sum();
  ImagingResult res;
  res.method = "km";
  res.image = v.cwiseAbs();
  res.field = v;
  res.reflectivity = CVec::Zero(sensing.cols());
  if (peak_count > 0) {
    const auto [rows, cols] = grid_shape(sensing);
    res.support = extract_peaks(res.image, rows, cols, peak_count);
  }
  return res;
}

ImagingResult image_km(const CVec& b, const CVec& illumination, const SensingMatrix& sensing,
                       std::size_t peak_count) {
  return image_km(CMat(b), CMat(illumination), sensing, peak_count);
}

std::vector<std::size_t> extract_peaks(const RVec& image, std::size_t rows, std::size_t cols,
                                       std::size_t max_peaks, double floor_fraction,
                                       std::size_t min_separation) {
  if (static_cast<std::size_t>(image.size()) != rows * cols) {
    throw ConfigError("image size does not match the grid");
  }
  std::vector<std::size_t> out;
  if (image.size() == 0 || max_peaks == 0) {
    return out;
  }
  const double top = image.maxCoeff();
  if (!(top > 0.0)) {
    return out;
  }
  auto at = [&](std::size_t r, std::size_t c) { return image(static_cast<Eigen::Index>(r * cols + c)); };
  std::vector<std::size_t> cand;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = at(r, c);
      if (v < floor_fraction * top) continue;
      if (r > 0 && at(r - 1, c) > v) continue;
      if (r + 1 < rows && at(r + 1, c) > v) continue;
      if (c > 0 && at(r, c - 1) > v) continue;
      if (c + 1 < cols && at(r, c + 1) > v) continue;
      cand.push_back(r * cols + c);
    }
  }
  std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
    return image(static_cast<Eigen::Index>(a)) > image(static_cast<Eigen::Index>(b));
  });
  for (auto idx : cand) {
    if (out.size() >= max_peaks) break;
    const auto r = static_cast<long>(idx / cols), c = static_cast<long>(idx % cols);
    bool ok = true;
    for (auto p : out) {
      const auto pr = static_cast<long>(p / cols), pc = static_cast<long>(p % cols);
      if (std::max(std::labs(pr - r), std::labs(pc - c)) < static_cast<long>(min_separation)) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(idx);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double cross_range_fwhm(const RVec& image, std::size_t rows, std::size_t cols,
                        std::size_t peak_index) {
  if (static_cast<std::size_t>(image.size()) != rows * cols || peak_index >= rows * cols) {
    throw ConfigError("peak index outside the image");
  }
  const std::size_t r = peak_index / cols, c0 = peak_index % cols;
  auto at = [&](std::size_t c) { return image(static_cast<Eigen::Index>(r * cols + c)); };
  const double half = 0.5 * at(c0);
  double left = 0.0, right = 0.0;
  std::size_t c = c0;
  while (c > 0 && at(c - 1) > half) --c;
  if (c == 0) {
    left = static_cast<double>(c0);
  } else {
    const double t = (at(c) - half) / (at(c) - at(c - 1));
    left = static_cast<double>(c0 - c) + t;
  }
  c = c0;
  while (c + 1 < cols && at(c + 1) > half) ++c;
  if (c + 1 == cols) {
    right = static_cast<double>(c - c0);
  } else {
    const double t = (at(c) - half) / (at(c) - at(c + 1));
    right = static_cast<double>(c - c0) + t;
  }
  return left + right;
}

bool same_support(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> x = a, y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

}  // namespace sparseimg
