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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "fixtures.hpp"
#include "sparseimg/experiments.hpp"
#include "sparseimg/io.hpp"

using namespace sparseimg;
namespace fs = std::filesystem;

namespace {

std::string scenario(const std::string& name) {
  return std::string(SPARSEIMG_SCENARIO_DIR) + "/" + name;
}

fs::path scratch_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() /
                     ("sparseimg_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kMinimal = R"(
[array]
count = 20
pitch = 1
[window]
range = 40
rows = 5
cols = 5
spacing = 1
[scatterers]
a = 1 1 1.0 0.5
b = 3 4 2.0 random
[experiment]
id = tiny
methods = smv, km
)";

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("noise injection") {
    std::mt19937_64 rng(1);
    const CMat b = fixtures::random_gaussian(12, 4, rng);
    const auto none = add_noise(b, NoiseSpec{0.0, 3, 0});
    CHECK(none.data == b);
    CHECK(none.noise_norm == 0.0);
    const auto half = add_noise(b, NoiseSpec{0.5, 3, 0});
    CHECK(half.noise_norm / b.norm() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK((half.data - b - half.noise).norm() <= 1e-15 * b.norm());
    const auto again = add_noise(b, NoiseSpec{0.5, 3, 0});
    CHECK(again.noise == half.noise);
    const auto other = add_noise(b, NoiseSpec{0.5, 3, 1});
    CHECK(other.noise != half.noise);
    CHECK_THROWS_AS(add_noise(b, NoiseSpec{-0.1, 3, 0}), ConfigError);
  }

  TEST_CASE("support scores") {
    const auto exact = score_support({4, 2, 9}, {2, 4, 9});
    CHECK(exact.exact);
    CHECK(exact.precision == 1.0);
    CHECK(exact.recall == 1.0);
    const auto part = score_support({2, 5}, {2, 4, 9});
    CHECK_FALSE(part.exact);
    CHECK(part.precision == 0.5);
    CHECK(part.recall == doctest::Approx(1.0 / 3.0));
    const auto none = score_support({}, {1});
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(score_support({}, {}).exact);
  }

  TEST_CASE("scenario parsing") {
    const auto cfg = parse_scenario(kMinimal);
    CHECK(cfg.id == "tiny");
    CHECK(cfg.array_count == 20);
    CHECK(cfg.scatterers.size() == 2);
    CHECK(cfg.scatterers[0].phase.has_value());
    CHECK_FALSE(cfg.scatterers[1].phase.has_value());
    CHECK(cfg.methods == std::vector<std::string>{"smv", "km"});

    const auto rm = load_scenario(scenario("random_medium.ini"));
    CHECK(rm.model == ForwardModel::RandomMedium);
    CHECK(rm.apertures == std::vector<double>{500.0, 2000.0});
    CHECK(rm.range == 1000.0);
    CHECK(rm.medium.strength == doctest::Approx(0.001));
  }

  TEST_CASE("malformed scenarios are configuration errors") {
    CHECK_THROWS_AS(parse_scenario("[bogus]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("[array]\ncolour = red\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("[array]\ncount = -3\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("[window]\nrows = 3\ncols = 3\n[scatterers]\na = 5 0 1\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_scenario("[experiment]\nmethods = smv, magic\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("[medium]\nmodel = ether\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("[scatterers]\na = 1 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("this is not an ini file ["), ConfigError);
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.ini"), ConfigError);
  }

  TEST_CASE("setup draws phases from the seed") {
    const auto cfg = parse_scenario(kMinimal);
    const auto a = build_setup(cfg, 4);
    const auto b = build_setup(cfg, 4);
    const auto c = build_setup(cfg, 5);
    CHECK(a.rho.values() == b.rho.values());
    CHECK(a.rho.values() != c.rho.values());
    CHECK(std::arg(a.rho[a.window.index(1, 1)]) == doctest::Approx(0.5));
    CHECK(a.rho.support() == c.rho.support());
  }

  TEST_CASE("noiseless desk scenario is recovered exactly") {
    const auto cfg = load_scenario(scenario("smv_desk.ini"));
    const auto out = run_scenario(cfg, 1);
    REQUIRE(out.reports.size() == 1);
    CHECK(out.reports[0].support_exact);
    CHECK(out.reports[0].reflectivity_error <= 1e-3);
  }

  TEST_CASE("desk coherence certificate is positive") {
    const auto cfg = load_scenario(scenario("smv_desk.ini"));
    const auto rows = coherence_table(cfg, 1);
    REQUIRE_FALSE(rows.empty());
    for (const auto& r : rows) {
      CHECK(r.has_support);
      CHECK(r.support_margin > 0.0);
    }
  }

  TEST_CASE("toy coherence reports") {
    SensingMatrix eye;
    eye.matrix = CMat::Identity(6, 6);
    for (int j = 0; j < 6; ++j) eye.grid.emplace_back(j, 10.0);
    for (std::size_t m = 1; m <= 5; ++m) {
      const auto rep = coherence_report(eye, m);
      CHECK(rep.full.epsilon == 0.0);
      CHECK(rep.margin == 0.5);
    }
    SensingMatrix dup = eye;
    dup.matrix.col(3) = dup.matrix.col(1);
    const auto rep = coherence_report(dup, 2);
    CHECK(rep.full.epsilon == doctest::Approx(1.0));
    CHECK(rep.margin < 0.0);
  }

  TEST_CASE("empty scenario runs every method without a crash") {
    const auto cfg = load_scenario(scenario("empty.ini"));
    const auto out = run_scenario(cfg, 1);
    REQUIRE(out.reports.size() == 6);
    for (std::size_t k = 0; k < out.reports.size(); ++k) {
      INFO(out.reports[k].method);
      CHECK(out.reports[k].error.empty());
      CHECK(out.results[k].support.empty());
      CHECK(out.reports[k].support_exact);
      if (out.results[k].image.size() > 0) {
        CHECK(out.results[k].image.maxCoeff() == out.results[k].image.minCoeff());
      }
    }
  }

  TEST_CASE("solver radius follows the injected noise") {
    auto cfg = load_scenario(scenario("smv_desk.ini"));
    cfg.noise = 0.05;
    const std::uint64_t seed = 3;
    const auto out = run_scenario(cfg, seed);
    const auto s = build_setup(cfg, seed);
    const auto resp = forward_response(cfg, s, seed);
    const CVec f = CVec::Unit(static_cast<Eigen::Index>(s.array.size()),
                              static_cast<Eigen::Index>(s.array.size() / 2));
    const auto noisy = add_noise(CMat(simulate_data(resp, f)), NoiseSpec{cfg.noise, seed, 0});
    CHECK(cfg.delta_factor >= 1.0);
    CHECK(out.results[0].solver.delta ==
          doctest::Approx(cfg.delta_factor * noisy.noise_norm).epsilon(1e-12));
    CHECK(out.results[0].solver.residual <= out.results[0].solver.delta + 1e-8);
  }

  TEST_CASE("random single-element illuminations tolerate moderate noise") {
    auto cfg = load_scenario(scenario("random_mmv.ini"));
    REQUIRE(cfg.illuminations == 5);
    for (double level : {0.10, 0.20}) {
      cfg.noise = level;
      int exact = 0;
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto out = run_scenario(cfg, seed);
        exact += out.reports.at(0).support_exact ? 1 : 0;
      }
      MESSAGE("noise " << level << ": " << exact << "/10 exact");
      CHECK(exact >= 7);
    }
  }

  TEST_CASE("run directory and byte-identical reports") {
    const auto dir = scratch_dir("runs");
    const auto cfg = parse_scenario(kMinimal);
    run_scenario(cfg, 2, dir.string());
    const auto first = slurp(dir / "tiny" / "2" / "report.csv");
    for (const char* f : {"config.ini", "report.csv", "timing.csv", "response.csv", "smv_support.csv",
                          "km_image.csv", "km_image.pgm"}) {
      CHECK(fs::exists(dir / "tiny" / "2" / f));
    }
    run_scenario(cfg, 2, dir.string());
    CHECK(slurp(dir / "tiny" / "2" / "report.csv") == first);
    CHECK_FALSE(first.empty());
    fs::remove_all(dir);
  }

  TEST_CASE("response CSV round trip and offline imaging") {
    const auto dir = scratch_dir("csv");
    std::mt19937_64 rng(5);
    const CMat m = fixtures::random_gaussian(7, 7, rng) * 1e-3;
    const nlohmann::json h{{"N", 7}, {"provenance", "born"}, {"seed", 5}};
    write_complex_csv((dir / "m.csv").string(), m, h);
    const auto back = read_complex_csv((dir / "m.csv").string());
    CHECK(back.matrix == m);
    CHECK(back.header["provenance"] == "born");
    CHECK_THROWS_AS(read_complex_csv((dir / "missing.csv").string()), ConfigError);

    const auto cfg = parse_scenario(kMinimal);
    const auto s = build_setup(cfg, 1);
    const auto resp = forward_response(cfg, s, 1);
    const auto direct = run_scenario(cfg, 1);
    const auto offline = run_scenario_on_response(cfg, 1, resp.matrix());
    REQUIRE(direct.results.size() == offline.results.size());
    for (std::size_t k = 0; k < direct.results.size(); ++k) {
      CHECK(direct.results[k].support == offline.results[k].support);
    }
    CHECK_THROWS_AS(run_scenario_on_response(cfg, 1, m), ConfigError);
    fs::remove_all(dir);
  }

  TEST_CASE("grid outputs") {
    const auto dir = scratch_dir("grid");
    RVec img(6);
    img << 0.0, 1.0, 2.0, 3.0, 4.0, 2.0;
    write_grid_csv((dir / "g.csv").string(), img, 2, 3);
    write_pgm((dir / "g.pgm").string(), img, 2, 3);
    const std::string pgm = slurp(dir / "g.pgm");
    CHECK(pgm.rfind("P5", 0) == 0);
    CHECK(static_cast<unsigned char>(pgm.back()) == 128);
    CHECK_THROWS_AS(write_grid_csv((dir / "bad.csv").string(), img, 4, 4), ConfigError);
    fs::remove_all(dir);
  }

  TEST_CASE("stability table needs ten realizations") {
    const auto cfg = load_scenario(scenario("random_medium.ini"));
    CHECK_THROWS_AS(monte_carlo_stability(cfg, 9), ConfigError);
  }

  TEST_CASE("homogeneous limit of the random-medium experiment") {
    auto cfg = load_scenario(scenario("random_medium.ini"));
    cfg.medium.strength = 0.0;
    cfg.methods = {"hybrid", "music"};
    const auto rows = monte_carlo_stability(cfg, 10);
    for (const auto& r : rows) {
      MESSAGE(r.method << " at aperture " << r.aperture << ": " << r.success_rate);
      CHECK(r.success_rate == 1.0);
    }
  }
}
