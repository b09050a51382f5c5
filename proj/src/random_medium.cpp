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

#include "sparseimg/random_medium.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

namespace sparseimg {

namespace {

constexpr std::uint64_t kMediumStream = 3;
constexpr double kPaddingLengths = 5.0;

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

// Smallest integer >= n whose only prime factors are 2, 3 and 5.
std::size_t fft_size(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2u, 3u, 5u}) {
      while (r % p == 0) r /= p;
    }
    if (r == 1) return m;
  }
}

double autocorrelation_rate(Autocorrelation kind, double t) {
  // R'(t) / t, both kernels have the closed form -w(t).
  switch (kind) {
    case Autocorrelation::Gaussian: return -std::exp(-0.5 * t * t);
    case Autocorrelation::PowerLaw: return -std::exp(-t);
  }
  throw ConfigError("unsupported autocorrelation kernel");
}

double normalized_sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

std::string to_string(Autocorrelation kind) {
  switch (kind) {
    case Autocorrelation::Gaussian: return "gaussian";
    case Autocorrelation::PowerLaw: return "power-law";
  }
  return "unknown";
}

Autocorrelation autocorrelation_from_string(const std::string& name) {
  if (name == "gaussian") return Autocorrelation::Gaussian;
  if (name == "power-law" || name == "powerlaw") return Autocorrelation::PowerLaw;
  throw ConfigError("unsupported autocorrelation kernel '" + name + "'");
}

double autocorrelation(Autocorrelation kind, double t) {
  t = std::abs(t);
  switch (kind) {
    case Autocorrelation::Gaussian: return std::exp(-0.5 * t * t);
    case Autocorrelation::PowerLaw: return (1.0 + t) * std::exp(-t);
  }
  throw ConfigError("unsupported autocorrelation kernel");
}

void RandomMediumSpec::validate() const {
  if (!(correlation_length > 0.0) || !std::isfinite(correlation_length)) {
    throw ConfigError("correlation length must be positive");
  }
  if (!(strength >= 0.0) || !std::isfinite(strength)) {
    throw ConfigError("fluctuation strength must be non-negative");
  }
  if (spacing() > correlation_length / 5.0 * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "lattice spacing " << spacing() << " exceeds l/5 = " << correlation_length / 5.0;
    throw ConfigError(os.str());
  }
}

double autocorrelation_integral(Autocorrelation kind) {
  auto f = [kind](double t) { return autocorrelation_rate(kind, t); };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-14, &err);
}

EffectiveAperture effective_aperture(const RandomMediumSpec& spec, double range) {
  spec.validate();
  if (!(range > 0.0)) {
    throw ConfigError("range must be positive");
  }
  const double integral = autocorrelation_integral(spec.kind);
  const double radicand = -1.0 - (2.0 * range / (3.0 * spec.correlation_length)) * integral;
  if (radicand < 0.0) {
    throw DomainError("effective aperture undefined: range is too short relative to the "
                      "correlation length");
  }
  return {spec.strength * range * std::sqrt(radicand), integral, range};
}

std::vector<std::string> validity_warnings(const RandomMediumSpec& spec, double range,
                                           const WaveContext& ctx) {
  std::vector<std::string> out;
  const double l = spec.correlation_length;
  const double s2 = spec.strength * spec.strength;
  const double lam = ctx.wavelength();
  if (s2 > 0.0 && s2 * range * range * range / (l * l * l) >= lam * lam / (s2 * l * range)) {
    out.push_back("random phase model outside its regime: sigma^2 L^3 / l^3 is not small "
                  "against lambda^2 / (sigma^2 l L)");
  }
  if (lam >= l) {
    out.push_back("random phase model outside its regime: wavelength not smaller than the "
                  "correlation length");
  }
  return out;
}

Region bounding_region(const std::vector<Point>& points) {
  if (points.empty()) {
    throw ConfigError("cannot bound an empty point set");
  }
  Region r{points[0].x(), points[0].x(), points[0].y(), points[0].y()};
  for (const auto& p : points) {
    r.x_min = std::min(r.x_min, p.x());
    r.x_max = std::max(r.x_max, p.x());
    r.y_min = std::min(r.y_min, p.y());
    r.y_max = std::max(r.y_max, p.y());
  }
  return r;
}

Region propagation_region(const ArrayGeometry& geom, const ImageWindow& window) {
  std::vector<Point> pts = geom.positions();
  pts.push_back(window.point(0, 0));
  pts.push_back(window.point(window.rows() - 1, window.cols() - 1));
  return bounding_region(pts);
}

RandomFieldRealization::RandomFieldRealization(Point origin, double spacing, RMat values,
                                               std::uint64_t seed, double correlation_length)
    : origin_(std::move(origin)),
      spacing_(spacing),
      values_(std::move(values)),
      seed_(seed),
      correlation_length_(correlation_length) {
  if (!(spacing > 0.0) || values_.rows() < 2 || values_.cols() < 2) {
    throw ConfigError("field lattice needs positive spacing and at least 2x2 nodes");
  }
}

bool RandomFieldRealization::contains(const Point& p) const {
  const double u = (p.x() - origin_.x()) / spacing_;
  const double v = (p.y() - origin_.y()) / spacing_;
  return u >= 0.0 && v >= 0.0 && u <= static_cast<double>(values_.rows() - 1) &&
         v <= static_cast<double>(values_.cols() - 1);
}

double RandomFieldRealization::operator()(const Point& p) const {
  const double u = (p.x() - origin_.x()) / spacing_;
  const double v = (p.y() - origin_.y()) / spacing_;
  const auto nu = values_.rows() - 1, nv = values_.cols() - 1;
  if (!(u >= 0.0 && v >= 0.0 && u <= static_cast<double>(nu) && v <= static_cast<double>(nv))) {
    throw DomainError("point outside the sampled medium");
  }
  const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), nu - 1);
  const auto j = std::min<Eigen::Index>(static_cast<Eigen::Index>(v), nv - 1);
  const double fu = u - static_cast<double>(i), fv = v - static_cast<double>(j);
  return (1 - fu) * (1 - fv) * values_(i, j) + fu * (1 - fv) * values_(i + 1, j) +
         (1 - fu) * fv * values_(i, j + 1) + fu * fv * values_(i + 1, j + 1);
}

RandomFieldRealization sample_field(const RandomMediumSpec& spec, const Region& region,
                                    std::uint64_t seed, std::uint64_t index) {
  spec.validate();
  const double h = spec.spacing();
  const double l = spec.correlation_length;
  const auto nx = static_cast<std::size_t>(std::ceil((region.x_max - region.x_min) / h)) + 2;
  const auto ny = static_cast<std::size_t>(std::ceil((region.y_max - region.y_min) / h)) + 2;
  const auto pad = static_cast<std::size_t>(std::ceil(kPaddingLengths * l / h));
  const std::size_t tx = fft_size(nx + 2 * pad);
  const std::size_t ty = fft_size(ny + 2 * pad);
  const std::size_t total = tx * ty;

  // Covariance on the torus, row-major in (x, y), then its spectrum.
  fftw_complex* buf = fftw_alloc_complex(total);
  auto wrap = [](std::size_t i, std::size_t n) {
    return static_cast<double>(std::min(i, n - i));
  };
  for (std::size_t i = 0; i < tx; ++i) {
    for (std::size_t j = 0; j < ty; ++j) {
      const double d = h * std::hypot(wrap(i, tx), wrap(j, ty));
      buf[i * ty + j][0] = autocorrelation(spec.kind, d / l);
      buf[i * ty + j][1] = 0.0;
    }
  }
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_dft_2d(static_cast<int>(tx), static_cast<int>(ty), buf, buf, FFTW_FORWARD,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::vector<double> amp(total);
  for (std::size_t k = 0; k < total; ++k) {
    amp[k] = std::sqrt(std::max(buf[k][0], 0.0) / static_cast<double>(total));
  }
  std::mt19937_64 rng = make_rng(seed, kMediumStream, index);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 0; k < total; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    buf[k][0] = amp[k] * re;
    buf[k][1] = amp[k] * im;
  }
  fftw_execute(plan);
  RMat values(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(ny));
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = buf[i * ty + j][0];
    }
  }
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return RandomFieldRealization(Point(region.x_min - 0.5 * h, region.y_min - 0.5 * h), h,
                                std::move(values), seed, l);
}

RandomFieldRealization constant_field(const Region& region, double spacing, double value,
                                      double correlation_length) {
  const auto nx = static_cast<Eigen::Index>(std::ceil((region.x_max - region.x_min) / spacing)) + 2;
  const auto ny = static_cast<Eigen::Index>(std::ceil((region.y_max - region.y_min) / spacing)) + 2;
  return RandomFieldRealization(Point(region.x_min - 0.5 * spacing, region.y_min - 0.5 * spacing),
                                spacing, RMat::Constant(nx, ny, value), 0, correlation_length);
}

double phase_line_integral(const RandomFieldRealization& field, const Point& x, const Point& y,
                           double step) {
  if (!field.contains(x) || !field.contains(y)) {
    throw DomainError("propagation path leaves the sampled medium");
  }
  const double len = (y - x).norm();
  if (len == 0.0) {
    return field(x);
  }
  const double h = step > 0.0 ? step : field.correlation_length() / 10.0;
  const auto n = static_cast<std::size_t>(std::ceil(len / h));
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    sum += field(x + s * (y - x));
  }
  return sum / static_cast<double>(n);
}

Complex green_random(const RandomFieldRealization& field, const Point& x, const Point& y,
                     const WaveContext& ctx, const RandomMediumSpec& spec) {
  const Complex g0 = green_homogeneous(x, y, ctx);
  if (spec.strength == 0.0) {
    return g0;
  }
  const double nu = phase_line_integral(field, x, y);
  return g0 * std::polar(1.0, spec.strength * ctx.wavenumber() * (x - y).norm() * nu);
}

GreenKernel random_kernel(const RandomFieldRealization& field, const WaveContext& ctx,
                          const RandomMediumSpec& spec) {
  return [&field, ctx, spec](const Point& x, const Point& y) {
    return green_random(field, x, y, ctx, spec);
  };
}

CVec green_vector_random(const RandomFieldRealization& field, const ArrayGeometry& geom,
                         const Point& y, const WaveContext& ctx, const RandomMediumSpec& spec) {
  CVec g(static_cast<Eigen::Index>(geom.size()));
  for (std::size_t i = 0; i < geom.size(); ++i) {
    g(static_cast<Eigen::Index>(i)) = green_random(field, geom.position(i), y, ctx, spec);
  }
  return g;
}

ResponseMatrix response_matrix_random(const RandomFieldRealization& field,
                                      const ArrayGeometry& geom, const ImageWindow& window,
                                      const ReflectivityVector& rho, const WaveContext& ctx,
                                      const RandomMediumSpec& spec) {
  if (rho.size() != window.size()) {
    throw ConfigError("reflectivity length does not match the image window");
  }
  const auto n = static_cast<Eigen::Index>(geom.size());
  CMat p = CMat::Zero(n, n);
  for (auto j : rho.support()) {
    const CVec g = green_vector_random(field, geom, window.point(j), ctx, spec);
    p.noalias() += rho[j] * (g * g.transpose());
  }
  // Vectorized outer products can differ from their transposes in the last bit.
  p = (0.5 * (p + p.transpose())).eval();
  return ResponseMatrix(std::move(p), ResponseModel::RandomMedium);
}

MonteCarloEstimate estimate_stability_ratio(const ArrayGeometry& geom, const Point& y1,
                                            const Point& y2, const WaveContext& ctx,
                                            const RandomMediumSpec& spec,
                                            std::size_t realizations, StabilityMode mode) {
  if (realizations < 100) {
    throw ConfigError("stability estimates need at least 100 realizations");
  }
  spec.validate();
  if (spec.strength == 0.0) {
    return {0.0, 0.0, realizations};
  }
  std::vector<Point> pts = geom.positions();
  pts.push_back(y1);
  pts.push_back(y2);
  const Region region = bounding_region(pts);
  const CVec g01 = green_vector(geom, y1, ctx);
  const CVec g02 = green_vector(geom, y2, ctx);
  const double denom = g01.squaredNorm() * g02.squaredNorm();
  std::vector<Complex> samples;
  samples.reserve(realizations);
  for (std::size_t r = 0; r < realizations; ++r) {
    const auto field = sample_field(spec, region, spec.seed, r);
    const CVec g2 = green_vector_random(field, geom, y2, ctx, spec);
    if (mode == StabilityMode::Self) {
      const CVec g1 = green_vector_random(field, geom, y1, ctx, spec);
      samples.push_back(g1.dot(g2));  // g1^H g2
    } else {
      samples.push_back(g01.dot(g2));
    }
  }
  Complex mean = 0.0;
  for (auto s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  const double rn = static_cast<double>(samples.size());
  std::vector<double> dev(samples.size());
  double var = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    dev[k] = std::norm(samples[k] - mean);
    var += dev[k];
  }
  var /= (rn - 1.0);
  double spread = 0.0;
  for (double d : dev) spread += (d * rn / (rn - 1.0) - var) * (d * rn / (rn - 1.0) - var);
  spread /= (rn - 1.0);
  return {var / denom, std::sqrt(spread / rn) / denom, samples.size()};
}

MonteCarloEstimate estimate_second_moment(const Point& x, const Point& y1, const Point& y2,
                                          const WaveContext& ctx, const RandomMediumSpec& spec,
                                          std::size_t realizations) {
  if (realizations < 2) {
    throw ConfigError("second-moment estimate needs at least 2 realizations");
  }
  spec.validate();
  const Region region = bounding_region({x, y1, y2});
  const Complex ref = green_homogeneous(x, y1, ctx) * std::conj(green_homogeneous(x, y2, ctx));
  std::vector<Complex> z;
  z.reserve(realizations);
  for (std::size_t r = 0; r < realizations; ++r) {
    const auto field = sample_field(spec, region, spec.seed, r);
    z.push_back(green_random(field, x, y1, ctx, spec) *
                std::conj(green_random(field, x, y2, ctx, spec)));
  }
  Complex mean = 0.0;
  for (auto v : z) mean += v;
  mean /= static_cast<double>(z.size());
  double var = 0.0;
  for (auto v : z) var += std::norm(v - mean);
  var /= static_cast<double>(z.size() - 1);
  return {std::abs(mean) / std::abs(ref),
          std::sqrt(var / static_cast<double>(z.size())) / std::abs(ref), z.size()};
}

double second_moment_prediction(double separation, double range, const WaveContext& ctx,
                                const RandomMediumSpec& spec) {
  const double ae = effective_aperture(spec, range).aperture;
  const double k = ctx.wavenumber();
  return std::exp(-k * k * ae * ae * separation * separation / (2.0 * range * range));
}

double stability_bound(double separation, double aperture, double range,
                       const WaveContext& ctx, const RandomMediumSpec& spec) {
  if (!(aperture > 0.0)) {
    throw DomainError("stability bound needs a positive aperture");
  }
  const double ae = effective_aperture(spec, range).aperture;
  const double k = ctx.wavenumber();
  const double l = spec.correlation_length;
  const double decay = 1.0 - std::exp(-k * k * separation * separation * ae * ae / (range * range));
  return decay * l * l / (range * range * std::log1p(aperture * aperture / (4.0 * range * range)));
}

double paraxial_ratio(const ArrayGeometry& geom, double xi, double eta, double range,
                      const WaveContext& ctx, const RandomMediumSpec& spec) {
  const double a = geom.aperture();
  if (!(a > 0.0) || a > range / 5.0) {
    throw DomainError("paraxial prediction needs 0 < aperture <= range / 5");
  }
  const double ae = effective_aperture(spec, range).aperture;
  const double k = ctx.wavenumber();
  const double l = spec.correlation_length;
  const double lam = ctx.wavelength();
  const double sep2 = xi * xi + eta * eta;
  const double decay = 1.0 - std::exp(-k * k * ae * ae * sep2 / (range * range));
  const double s = lam * range;
  return 256.0 * kPi * kPi * decay * (l / a) * (l / a) * normalized_sinc(xi * a / s) *
         normalized_sinc(eta * a / s) * normalized_sinc(xi * l / s) * normalized_sinc(eta * l / s);
}

}  // namespace sparseimg
