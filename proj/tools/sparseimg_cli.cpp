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

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sparseimg/experiments.hpp"
#include "sparseimg/greens.hpp"
#include "sparseimg/io.hpp"
#include "sparseimg/random_medium.hpp"

namespace fs = std::filesystem;
using namespace sparseimg;

namespace {

struct Options {
  std::string config;
  std::uint64_t seed = 1;
  std::string out = "runs";
  std::vector<std::string> methods;
  std::optional<std::size_t> realizations;
  std::optional<double> aperture;
  std::string data;
};

ScenarioConfig load(const Options& o) {
  ScenarioConfig cfg = load_scenario(o.config);
  if (!o.methods.empty()) cfg.methods = o.methods;
  if (cfg.model == ForwardModel::RandomMedium && cfg.medium.strength > 0.0) {
    for (const auto& w : validity_warnings(cfg.medium, cfg.range, WaveContext(cfg.wavelength))) {
      std::cerr << "warning: " << w << '\n';
    }
  }
  return cfg;
}

void print_reports(const std::vector<TrialReport>& reports) {
  std::cout << "method    exact  precision  recall    refl_err      iters   error\n";
  for (const auto& r : reports) {
    std::cout << std::left << std::setw(9) << r.method << ' ' << std::setw(6)
              << (r.support_exact ? "yes" : "no") << ' ' << std::setw(10) << r.precision << ' '
              << std::setw(9) << r.recall << ' ' << std::setw(13) << r.reflectivity_error << ' '
              << std::setw(7) << r.iterations << ' ' << r.error << '\n';
  }
}

int cmd_simulate(const Options& o) {
  const ScenarioConfig cfg = load(o);
  const ScenarioSetup s = build_setup(cfg, o.seed, o.aperture);
  const ResponseMatrix resp = forward_response(cfg, s, o.seed);
  const fs::path dir = fs::path(o.out) / cfg.id / std::to_string(o.seed);
  fs::create_directories(dir);
  nlohmann::json h{{"N", resp.size()},
                   {"provenance", to_string(resp.model())},
                   {"seed", o.seed},
                   {"scenario", cfg.id}};
  write_complex_csv((dir / "response.csv").string(), resp.matrix(), h);
  if (cfg.noise > 0.0) {
    const NoisyData d = add_noise(resp.matrix(), NoiseSpec{cfg.noise, o.seed, 1});
    h["noise"] = cfg.noise;
    h["noise_norm"] = d.noise_norm;
    write_complex_csv((dir / "response_noisy.csv").string(), d.data, h);
  }
  ImagingResult truth;
  truth.method = "truth";
  truth.support = s.rho.support();
  truth.reflectivity = s.rho.values();
  write_support_csv((dir / "truth.csv").string(), truth, s.window);
  std::cout << "wrote " << (dir / "response.csv").string() << " (" << resp.size() << "x"
            << resp.size() << ", " << s.rho.count() << " scatterers)\n";
  return 0;
}

int cmd_image(const Options& o) {
  const ScenarioConfig cfg = load(o);
  TrialOutput t;
  if (!o.data.empty()) {
    const LoadedMatrix m = read_complex_csv(o.data);
    t = run_scenario_on_response(cfg, o.seed, m.matrix, o.out);
  } else {
    t = run_scenario(cfg, o.seed, o.out, o.aperture);
  }
  print_reports(t.reports);
  return 0;
}

int cmd_stability(const Options& o) {
  const ScenarioConfig cfg = load(o);
  const std::size_t r = o.realizations.value_or(cfg.realizations);
  const auto rows = monte_carlo_stability(cfg, r);
  const fs::path dir = fs::path(o.out) / cfg.id;
  fs::create_directories(dir);
  write_stability_csv((dir / "stability.csv").string(), rows);
  std::cout << "aperture   method    success   precision  recall     trials\n";
  for (const auto& row : rows) {
    std::cout << std::left << std::setw(10) << row.aperture << ' ' << std::setw(9) << row.method
              << ' ' << std::setw(9) << row.success_rate << ' ' << std::setw(10)
              << row.mean_precision << ' ' << std::setw(10) << row.mean_recall << ' '
              << row.trials << '\n';
  }
  return 0;
}

int cmd_coherence(const Options& o) {
  const ScenarioConfig cfg = load(o);
  const ScenarioSetup s = build_setup(cfg, o.seed);
  const CoherenceResult full = mutual_coherence(s.sensing);
  const auto rows = coherence_table(cfg, o.seed);
  const fs::path dir = fs::path(o.out) / cfg.id;
  fs::create_directories(dir);
  write_coherence_csv((dir / "coherence.csv").string(), rows, full);
  std::cout << "coherence " << full.epsilon << " between grid points " << full.first << " and "
            << full.second << '\n';
  std::cout << "sources  delta        support_eps  support_margin  error_bound  certified\n";
  for (const auto& r : rows) {
    std::cout << std::left << std::setw(8) << r.sources << ' ' << std::setw(12) << r.delta << ' '
              << std::setw(12) << (r.has_support ? r.support_epsilon : full.epsilon) << ' '
              << std::setw(15) << (r.has_support ? r.support_margin : r.margin) << ' '
              << std::setw(12) << r.error_bound << ' ' << (r.certified ? "yes" : "no") << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse array imaging of point scatterers"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--methods", o.methods, "methods to run (smv, mmv, mmv-opt, hybrid, music, km)")
        ->delimiter(',');
  };
  auto* simulate = app.add_subcommand("simulate", "write the simulated response matrix");
  common(simulate);
  simulate->add_option("--aperture", o.aperture, "override the array aperture");
  auto* image = app.add_subcommand("image", "run imaging methods on a scenario");
  common(image);
  image->add_option("--aperture", o.aperture, "override the array aperture");
  image->add_option("--data", o.data, "image this response matrix instead of simulating")
      ->check(CLI::ExistingFile);
  auto* stability = app.add_subcommand("stability", "Monte-Carlo success rates per aperture");
  common(stability);
  stability->add_option("--realizations", o.realizations, "number of seeds");
  auto* coherence = app.add_subcommand("coherence", "mutual coherence and recovery certificates");
  common(coherence);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(o);
    if (image->parsed()) return cmd_image(o);
    if (stability->parsed()) return cmd_stability(o);
    if (coherence->parsed()) return cmd_coherence(o);
  } catch (const Error& e) {
    std::cerr << nlohmann::json{{"error", e.kind()}, {"message", e.what()}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 3;
  }
  return 1;
}
