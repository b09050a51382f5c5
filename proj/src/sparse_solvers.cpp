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

#include "sparseimg/sparse_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace sparseimg {

namespace {

constexpr std::size_t kInnerCap = 300;
constexpr std::size_t kTraceStride = 50;
constexpr double kFeasibilitySlack = 1e-10;
constexpr std::size_t kWorkingGrowth = 20;
constexpr std::size_t kWorkingChunk = 200;

RVec row_norms(const CMat& x) { return x.rowwise().norm(); }

void shrink_rows(CMat& x, double t) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double n = x.row(i).norm();
    x.row(i) *= (n > t) ? (1.0 - t / n) : 0.0;
  }
}

double l21(const CMat& x) { return row_norms(x).sum(); }

// Monotone FISTA for  beta * sum_i |X_i.| + 0.5 |A X - T|_F^2  restricted to
// the columns of a (the caller's working set), warm-started from x.
// Products with a are carried along so each step costs one A and one A^H.
std::size_t prox_solve(const CMat& a, const CMat& t, double beta, double tau, double tol,
                       std::size_t cap, CMat& x, std::size_t outer, std::size_t done,
                       bool record, std::vector<TraceEntry>& trace, bool& converged) {
  converged = false;
  CMat ax = a * x;
  CMat prev = x, aprev = ax;
  CMat y = x, ay = ax;
  double fx = beta * l21(x) + 0.5 * (ax - t).squaredNorm();
  double tk = 1.0;
  std::size_t it = 0;
  while (it < cap) {
    CMat z = y - tau * (a.adjoint() * (ay - t));
    shrink_rows(z, tau * beta);
    const CMat az = a * z;
    const double resid = (az - t).norm();
    const double fz = beta * l21(z) + 0.5 * resid * resid;
    const double step = (z - y).norm();
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    prev = x;
    aprev = ax;
    if (fz <= fx) {
      x = z;
      ax = az;
      fx = fz;
    }
    const double c1 = tk / tn, c2 = (tk - 1.0) / tn;
    y = x + c1 * (z - x) + c2 * (x - prev);
    ay = ax + c1 * (az - ax) + c2 * (ax - aprev);
    tk = tn;
    ++it;
    if (record && (done + it) % kTraceStride == 0) {
      trace.push_back({done + it, outer, fx, l21(x), (ax - t).norm()});
    }
    if (step <= tol * std::max(x.norm(), 1e-300) && it > 1) {
      converged = true;
      break;
    }
  }
  return it;
}

// Solves the full-width proximal problem by running prox_solve on a working
// set of columns and enlarging it until no outside row violates the
// optimality condition |A_i^H (T - A X)| <= beta.
std::size_t working_set_solve(const CMat& a, const CMat& t, double beta, double tau, double tol,
                              std::size_t cap, CMat& x, std::vector<Eigen::Index>& working,
                              std::size_t outer, std::size_t done, bool record,
                              std::vector<TraceEntry>& trace) {
  const Eigen::Index k = a.cols();
  std::vector<char> in(static_cast<std::size_t>(k), 0);
  for (auto j : working) in[static_cast<std::size_t>(j)] = 1;
  std::size_t used = 0;
  while (true) {
    CMat sub(a.rows(), static_cast<Eigen::Index>(working.size()));
    CMat xs(static_cast<Eigen::Index>(working.size()), x.cols());
    for (std::size_t w = 0; w < working.size(); ++w) {
      sub.col(static_cast<Eigen::Index>(w)) = a.col(working[w]);
      xs.row(static_cast<Eigen::Index>(w)) = x.row(working[w]);
    }
    bool inner_done = working.empty();
    if (!working.empty()) {
      const std::size_t chunk = std::min(cap - used, kWorkingChunk);
      used += prox_solve(sub, t, beta, tau, tol, chunk, xs, outer, done + used, record, trace,
                         inner_done);
    }
    x.setZero();
    for (std::size_t w = 0; w < working.size(); ++w) {
      x.row(working[w]) = xs.row(static_cast<Eigen::Index>(w));
    }
    if (used >= cap) {
      return used;
    }
    const RVec g = (a.adjoint() * (t - sub * xs)).rowwise().norm();
    std::vector<std::pair<double, Eigen::Index>> viol;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (!in[static_cast<std::size_t>(j)] && g(j) > beta * (1.0 + 1e-9)) {
        viol.emplace_back(g(j), j);
      }
    }
    if (viol.empty()) {
      if (inner_done) return used;
      continue;
    }
    std::sort(viol.begin(), viol.end(), [](const auto& p, const auto& q) {
      return p.first > q.first || (p.first == q.first && p.second < q.second);
    });
    const std::size_t add = std::min<std::size_t>(viol.size(), kWorkingGrowth);
    for (std::size_t v = 0; v < add; ++v) {
      working.push_back(viol[v].second);
      in[static_cast<std::size_t>(viol[v].second)] = 1;
    }
  }
}

SparseSolution solve_core(const CMat& a, const CMat& b, const SolverParams& p) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw ConfigError("sensing matrix is empty");
  }
  if (b.rows() != a.rows()) {
    throw ConfigError("data has " + std::to_string(b.rows()) + " rows but the matrix has " +
                      std::to_string(a.rows()));
  }
  if (b.cols() < 1) {
    throw ConfigError("data needs at least one column");
  }
  if (p.delta < 0.0 || p.tolerance <= 0.0 || p.max_iterations == 0) {
    throw ConfigError("invalid solver parameters");
  }
  if (p.support_threshold < 0.0 || p.support_threshold >= 1.0) {
    throw ConfigError("support threshold must lie in [0, 1)");
  }

  SparseSolution sol;
  sol.x = CMat::Zero(a.cols(), b.cols());
  const double bnorm = b.norm();
  if (bnorm <= p.delta || bnorm == 0.0) {
    sol.converged = true;
    sol.residual = bnorm;
    return sol;
  }

  const RVec cn = a.colwise().norm().transpose();
  if ((cn.array() <= 0.0).any()) {
    throw DomainError("sensing matrix has a zero column");
  }
  // A single global scale keeps the objective the plain norm of the unknowns.
  const RVec scale = p.normalize_columns ? cn : RVec::Constant(cn.size(), cn.maxCoeff());
  const CMat an = a * scale.cwiseInverse().asDiagonal();
  const CMat bn = b / bnorm;
  const double dn = p.delta / bnorm;

  const double snorm = spectral_norm_estimate(an);
  const double tau = p.tau > 0.0 ? p.tau : 0.9 / (snorm * snorm);
  const double beta =
      p.beta > 0.0 ? p.beta : p.beta_fraction * row_norms(an.adjoint() * bn).maxCoeff();
  sol.step = tau;
  sol.beta = beta;

  CMat x = CMat::Zero(a.cols(), b.cols());
  CMat z = CMat::Zero(bn.rows(), bn.cols());
  CMat e = CMat::Zero(bn.rows(), bn.cols());
  CMat xprev = x;
  std::vector<Eigen::Index> working;
  std::size_t total = 0;
  std::size_t outer = 0;
  const double inner_tol = std::min(p.tolerance, 1e-9);
  while (total < p.max_iterations) {
    const CMat target = bn + z - e;
    const std::size_t cap = std::min(kInnerCap, p.max_iterations - total);
    total += working_set_solve(an, target, beta, tau, inner_tol, cap, x, working, outer, total,
                               p.record_trace, sol.trace);
    ++outer;
    const CMat r = bn - an * x;
    if (dn > 0.0) {
      e = r + z;
      const double en = e.norm();
      if (en > dn) e *= dn / en;
    }
    z += r - e;
    const double rn = r.norm();
    const double change = (x - xprev).norm() / std::max(x.norm(), 1e-300);
    xprev = x;
    if (rn <= dn + kFeasibilitySlack && change < p.tolerance) {
      sol.converged = true;
      break;
    }
  }

  sol.x = scale.cwiseInverse().asDiagonal() * x * bnorm;
  sol.iterations = total;
  sol.outer_iterations = outer;
  sol.residual = (a * sol.x - b).norm();
  sol.support = rowsupp(sol.x, p.support_threshold);
  return sol;
}

}  // namespace

Complex soft_threshold(Complex z, double t) {
  const double m = std::abs(z);
  if (m <= t || m == 0.0) {
    return {0.0, 0.0};
  }
  return z * (1.0 - t / m);
}

double spectral_norm_estimate(const CMat& a, int iterations) {
  if (a.size() == 0) {
    return 0.0;
  }
  CVec v = CVec::Ones(a.cols()) / std::sqrt(static_cast<double>(a.cols()));
  // A deterministic, non-symmetric start avoids landing orthogonal to the top
  // singular vector on structured matrices.
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    v(j) *= Complex(1.0, 0.37 * static_cast<double>(j % 7));
  }
  v.normalize();
  double s = 0.0;
  for (int k = 0; k < iterations; ++k) {
    CVec w = a.adjoint() * (a * v);
    const double n = w.norm();
    if (n == 0.0) {
      return 0.0;
    }
    s = std::sqrt(n);
    v = w / n;
  }
  return std::max(s, (a * v).norm());
}

SparseSolution solve_l1_smv(const CMat& a, const CVec& b, const SolverParams& params) {
  CMat bm = b;
  return solve_core(a, bm, params);
}

SparseSolution solve_l1_mmv(const CMat& a, const CMat& b, const SolverParams& params) {
  return solve_core(a, b, params);
}

std::vector<std::size_t> rowsupp(const CMat& x, double threshold) {
  if (threshold < 0.0 || threshold >= 1.0) {
    throw ConfigError("support threshold must lie in [0, 1)");
  }
  std::vector<std::size_t> out;
  if (x.size() == 0) {
    return out;
  }
  const RVec n = row_norms(x);
  const double cut = threshold * n.maxCoeff();
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    if (n(i) > cut) {
      out.push_back(static_cast<std::size_t>(i));
    }
  }
  return out;
}

std::vector<std::size_t> rowsupp(const CVec& x, double threshold) {
  return rowsupp(CMat(x), threshold);
}

L0Solution brute_force_l0(const CMat& a, const CVec& b, std::size_t max_support, double delta) {
  if (a.cols() > 24) {
    throw ConfigError("exhaustive l0 search is limited to 24 columns, got " +
                      std::to_string(a.cols()));
  }
  if (max_support > 3) {
    throw ConfigError("exhaustive l0 search is limited to supports of size 3");
  }
  if (b.size() != a.rows()) {
    throw ConfigError("data length does not match the matrix");
  }
  const double tol = delta + 1e-10 * std::max(b.norm(), 1.0);
  L0Solution best;
  best.x = CVec::Zero(a.cols());
  best.residual = b.norm();
  if (best.residual <= tol) {
    best.feasible = true;
    return best;
  }
  const auto k = static_cast<std::size_t>(a.cols());
  std::vector<std::size_t> pick;
  for (std::size_t size = 1; size <= max_support && size <= k; ++size) {
    double best_res = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_set;
    CVec best_coef;
    std::function<void(std::size_t)> rec = [&](std::size_t start) {
      if (pick.size() == size) {
        CMat sub(a.rows(), static_cast<Eigen::Index>(size));
        for (std::size_t j = 0; j < size; ++j) {
          sub.col(static_cast<Eigen::Index>(j)) = a.col(static_cast<Eigen::Index>(pick[j]));
        }
        const CVec coef = sub.colPivHouseholderQr().solve(b);
        const double res = (sub * coef - b).norm();
        // Strict comparison keeps the lexicographically first among ties.
        if (res < best_res) {
          best_res = res;
          best_set = pick;
          best_coef = coef;
        }
        return;
      }
      for (std::size_t j = start; j < k; ++j) {
        pick.push_back(j);
        rec(j + 1);
        pick.pop_back();
      }
    };
    rec(0);
    if (best_res <= tol) {
      best.feasible = true;
      best.support = best_set;
      best.residual = best_res;
      for (std::size_t j = 0; j < size; ++j) {
        best.x(static_cast<Eigen::Index>(best_set[j])) = best_coef(static_cast<Eigen::Index>(j));
      }
      return best;
    }
  }
  return best;
}

NoisyRecoveryBound noisy_recovery_bound(double delta, std::size_t m, double epsilon) {
  if (delta < 0.0 || epsilon < 0.0 || epsilon > 1.0) {
    throw DomainError("noise level and coherence must be non-negative, coherence at most 1");
  }
  const double q = 1.0 - (m == 0 ? 0.0 : static_cast<double>(m - 1)) * epsilon;
  if (!(q > 0.0)) {
    throw DomainError("stability bound requires (M - 1) * coherence < 1");
  }
  const double bound = delta / std::sqrt(q);
  return {bound, bound};
}

}  // namespace sparseimg
