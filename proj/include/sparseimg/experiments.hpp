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

#ifndef SPARSEIMG_EXPERIMENTS_HPP
#define SPARSEIMG_EXPERIMENTS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparseimg/foldy_lax.hpp"
#include "sparseimg/geometry.hpp"
#include "sparseimg/imaging.hpp"
#include "sparseimg/random_medium.hpp"
#include "sparseimg/types.hpp"

namespace sparseimg {

/// Random-number stream identifiers shared by all scenario code.
enum Stream : std::uint64_t {
  kStreamPhases = 1,
  kStreamNoise = 2,
  kStreamMedium = 3,
  kStreamIlluminations = 4,
};

struct NoiseSpec {
  /// ||E||_F / ||B||_F.
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

struct NoisyData {
  CMat data;
  double noise_norm = 0.0;
  CMat noise;
};

/// Adds circular complex Gaussian noise rescaled to fraction * ||B||_F.
NoisyData add_noise(const CMat& b, const NoiseSpec& spec);

struct TrialReport {
  std::string method;
  std::string scenario;
  std::uint64_t seed = 0;
  double aperture = 0.0;
  bool support_exact = false;
  double precision = 0.0;
  double recall = 0.0;
  /// Relative l2 error on the true support; NaN for methods without a
  /// reflectivity estimate.
  double reflectivity_error = 0.0;
  bool converged = true;
  std::size_t iterations = 0;
  std::size_t recovered = 0;
  std::string error;
  double wall_seconds = 0.0;
};

struct SupportScore {
  bool exact;
  double precision;
  double recall;
};

SupportScore score_support(const std::vector<std::size_t>& recovered,
                           const std::vector<std::size_t>& truth);

struct ScattererSpec {
  std::size_t row;
  std::size_t col;
  double magnitude;
  /// Empty means a phase drawn from the scenario seed.
  std::optional<double> phase;
};

enum class ForwardModel { FoldyLax, Born, RandomMedium };

/// Everything a scenario file describes. Lengths are in wavelengths.
struct ScenarioConfig {
  std::string id = "scenario";
  double wavelength = 1.0;
  std::size_t array_count = 1;
  double pitch = 1.0;
  std::vector<double> apertures;
  double range = 100.0;
  std::size_t rows = 1;
  std::size_t cols = 1;
  double spacing = 1.0;
  std::vector<ScattererSpec> scatterers;
  ForwardModel model = ForwardModel::FoldyLax;
  RandomMediumSpec medium;
  SolverParams solver;
  double delta_factor = 1.0;
  std::optional<double> hybrid_delta;
  /// Coherence used for the detection floor; unset selects the relative
  /// support threshold.
  std::optional<double> coherence;
  std::vector<std::string> methods;
  double noise = 0.0;
  std::size_t illuminations = 5;
  std::size_t optimal_count = 3;
  /// "central" or "random".
  std::string km_illumination = "central";
  std::size_t km_count = 1;
  std::optional<std::size_t> rank;
  double rank_threshold = 0.05;
  std::size_t realizations = 20;
  std::vector<double> deltas{0.0};
  double condition_cap = kDefaultConditionCap;
  /// Original file text, copied into run directories.
  std::string source;
};

/// Parses an INI scenario file. Lengths may carry an "l" suffix meaning
/// multiples of the medium correlation length.
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& text);

/// Builds the pieces of a scenario for one seed and aperture.
struct ScenarioSetup {
  WaveContext ctx;
  ArrayGeometry array;
  ImageWindow window;
  ReflectivityVector rho;
  SensingMatrix sensing;
};

ScenarioSetup build_setup(const ScenarioConfig& cfg, std::uint64_t seed,
                          std::optional<double> aperture = std::nullopt);

/// Noiseless response matrix of the configured forward model. Random-medium
/// scenarios draw the medium from the seed.
ResponseMatrix forward_response(const ScenarioConfig& cfg, const ScenarioSetup& setup,
                                std::uint64_t seed);

struct TrialOutput {
  std::vector<TrialReport> reports;
  std::vector<ImagingResult> results;
};

/// Runs every configured method once. With out_dir set, writes
/// out_dir/<id>/<seed>/ with the config snapshot, report.csv, per-method
/// support CSVs, image grids and PGMs, and timing.csv.
TrialOutput run_scenario(const ScenarioConfig& cfg, std::uint64_t seed,
                         const std::optional<std::string>& out_dir = std::nullopt,
                         std::optional<double> aperture = std::nullopt);

/// Same as run_scenario but images a recorded N x N response matrix instead of
/// simulating one. The config still supplies geometry, truth for scoring,
/// noise and methods.
TrialOutput run_scenario_on_response(const ScenarioConfig& cfg, std::uint64_t seed,
                                     const CMat& response,
                                     const std::optional<std::string>& out_dir = std::nullopt);

struct StabilityRow {
  double aperture;
  std::string method;
  double success_rate;
  double mean_precision;
  double mean_recall;
  std::size_t trials;
};

/// Success rates per aperture and method over seeds 1..realizations.
std::vector<StabilityRow> monte_carlo_stability(const ScenarioConfig& cfg,
                                                std::size_t realizations);

void write_reports_csv(const std::string& path, const std::vector<TrialReport>& reports);
void write_stability_csv(const std::string& path, const std::vector<StabilityRow>& rows);

struct CoherenceRow {
  std::size_t sources;
  double delta;
  double epsilon;
  double margin;
  bool has_support;
  double support_epsilon;
  double support_margin;
  /// NaN when (M - 1) * epsilon >= 1.
  double error_bound;
  bool certified;
};

std::vector<CoherenceRow> coherence_table(const ScenarioConfig& cfg, std::uint64_t seed);
void write_coherence_csv(const std::string& path, const std::vector<CoherenceRow>& rows,
                         const CoherenceResult& full);

}  // namespace sparseimg

#endif  // SPARSEIMG_EXPERIMENTS_HPP
