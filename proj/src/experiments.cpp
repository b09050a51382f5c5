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

#include "sparseimg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "sparseimg/io.hpp"

namespace sparseimg {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_number(const std::string& text, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (trim(text.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': '" + text + "' is not a number");
}

// Length in wavelengths; a trailing "l" means multiples of the correlation
// length, a trailing "lambda" is accepted and ignored.
double to_length(std::string text, const std::string& key, double corr) {
  text = trim(text);
  if (text.size() > 6 && text.substr(text.size() - 6) == "lambda") {
    return to_number(text.substr(0, text.size() - 6), key);
  }
  if (!text.empty() && text.back() == 'l') {
    return to_number(text.substr(0, text.size() - 1), key) * corr;
  }
  return to_number(text, key);
}

double to_fraction(std::string text, const std::string& key) {
  text = trim(text);
  if (!text.empty() && text.back() == '%') {
    return to_number(text.substr(0, text.size() - 1), key) / 100.0;
  }
  return to_number(text, key);
}

std::size_t to_count(const std::string& text, const std::string& key) {
  const double v = to_number(text, key);
  if (v < 0 || v != std::floor(v)) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }

 private:
  const pt::ptree& tree_;
};

const std::set<std::string>& known_methods() {
  static const std::set<std::string> m{"smv", "mmv", "mmv-opt", "hybrid", "music", "km"};
  return m;
}

CMat unit_columns(std::size_t n, const std::vector<std::size_t>& elements) {
  CMat f = CMat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(elements.size()));
  for (std::size_t c = 0; c < elements.size(); ++c) {
    f(static_cast<Eigen::Index>(elements[c]), static_cast<Eigen::Index>(c)) = 1.0;
  }
  return f;
}

std::vector<std::size_t> random_elements(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (count > n) {
    throw ConfigError("cannot pick " + std::to_string(count) + " distinct elements out of " +
                      std::to_string(n));
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  auto rng = make_rng(seed, kStreamIlluminations);
  // Partial Fisher-Yates with an explicit draw so the result does not depend
  // on the library's shuffle implementation.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

double reflectivity_error(const ImagingResult& r, const ReflectivityVector& truth) {
  if (truth.count() == 0) {
    return r.support.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  }
  double num = 0.0, den = 0.0;
  for (auto j : truth.support()) {
    const Complex t = truth[j];
    const Complex e = r.reflectivity.size() ? r.reflectivity(static_cast<Eigen::Index>(j)) : 0.0;
    num += std::norm(e - t);
    den += std::norm(t);
  }
  return std::sqrt(num / den);
}

std::string report_header() {
  return "scenario,seed,aperture,method,support_exact,precision,recall,reflectivity_error,"
         "converged,iterations,recovered,error";
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string report_line(const TrialReport& r) {
  std::ostringstream os;
  os << r.scenario << ',' << r.seed << ',' << format_double(r.aperture) << ',' << r.method << ','
     << (r.support_exact ? 1 : 0) << ',' << format_double(r.precision) << ','
     << format_double(r.recall) << ',' << format_double(r.reflectivity_error) << ','
     << (r.converged ? 1 : 0) << ',' << r.iterations << ',' << r.recovered << ','
     << csv_escape(r.error);
  return os.str();
}

}  // namespace

NoisyData add_noise(const CMat& b, const NoiseSpec& spec) {
  if (spec.fraction < 0.0) {
    throw ConfigError("noise fraction must be non-negative");
  }
  NoisyData out{b, 0.0, CMat::Zero(b.rows(), b.cols())};
  if (spec.fraction == 0.0 || b.size() == 0) {
    return out;
  }
  auto rng = make_rng(spec.seed, kStreamNoise, spec.index);
  std::normal_distribution<double> normal(0.0, 1.0);
  CMat e(b.rows(), b.cols());
  for (Eigen::Index j = 0; j < e.cols(); ++j) {
    for (Eigen::Index i = 0; i < e.rows(); ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      e(i, j) = Complex(re, im);
    }
  }
  const double target = spec.fraction * b.norm();
  const double en = e.norm();
  if (en > 0.0) e *= target / en;
  out.noise = e;
  out.data = b + e;
  out.noise_norm = e.norm();
  return out;
}

SupportScore score_support(const std::vector<std::size_t>& recovered,
                           const std::vector<std::size_t>& truth) {
  const std::set<std::size_t> r(recovered.begin(), recovered.end());
  const std::set<std::size_t> t(truth.begin(), truth.end());
  std::size_t hit = 0;
  for (auto j : r) hit += t.count(j);
  const double precision = r.empty() ? (t.empty() ? 1.0 : 0.0) : double(hit) / double(r.size());
  const double recall = t.empty() ? 1.0 : double(hit) / double(t.size());
  return {r == t, precision, recall};
}

ScenarioConfig parse_scenario(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed scenario file: ") + e.what());
  }
  const Reader r(tree);
  ScenarioConfig cfg;
  cfg.source = text;

  static const std::map<std::string, std::set<std::string>> allowed{
      {"wave", {"wavelength"}},
      {"array", {"count", "pitch", "aperture", "apertures"}},
      {"window", {"range", "rows", "cols", "spacing"}},
      {"scatterers", {}},
      {"medium", {"model", "sigma", "correlation_length", "kernel", "lattice_spacing"}},
      {"solver",
       {"beta", "beta_fraction", "tolerance", "max_iterations", "support_threshold",
        "delta_factor", "hybrid_delta", "coherence", "condition_cap"}},
      {"experiment",
       {"id", "methods", "noise", "illuminations", "optimal_count", "km_illumination", "km_count",
        "rank", "rank_threshold", "realizations", "deltas"}},
  };
  for (const auto& [section, child] : tree) {
    const auto it = allowed.find(section);
    if (it == allowed.end()) {
      throw ConfigError("unknown section [" + section + "]");
    }
    if (section == "scatterers") continue;
    for (const auto& kv : child) {
      if (!it->second.count(kv.first)) {
        throw ConfigError("unknown key '" + kv.first + "' in [" + section + "]");
      }
    }
  }

  if (auto v = r.get("medium", "correlation_length")) {
    cfg.medium.correlation_length = to_number(*v, "correlation_length");
  }
  const double l = cfg.medium.correlation_length;
  auto len = [&](const std::string& sec, const std::string& key, double& dst) {
    if (auto v = r.get(sec, key)) dst = to_length(*v, key, l);
  };

  if (auto v = r.get("wave", "wavelength")) cfg.wavelength = to_number(*v, "wavelength");

  if (auto v = r.get("array", "count")) cfg.array_count = to_count(*v, "count");
  len("array", "pitch", cfg.pitch);
  if (auto v = r.get("array", "aperture")) {
    cfg.pitch = pitch_for_aperture(cfg.array_count, to_length(*v, "aperture", l));
  }
  if (auto v = r.get("array", "apertures")) {
    for (const auto& item : split(*v, ',')) cfg.apertures.push_back(to_length(item, "apertures", l));
  }

  len("window", "range", cfg.range);
  if (auto v = r.get("window", "rows")) cfg.rows = to_count(*v, "rows");
  if (auto v = r.get("window", "cols")) cfg.cols = to_count(*v, "cols");
  len("window", "spacing", cfg.spacing);

  if (const auto sec = tree.get_child_optional("scatterers")) {
    for (const auto& kv : *sec) {
      std::istringstream is(kv.second.data());
      std::vector<std::string> parts;
      std::string tok;
      while (is >> tok) parts.push_back(tok);
      if (parts.size() < 3 || parts.size() > 4) {
        throw ConfigError("scatterer '" + kv.first + "' must be 'row col magnitude [phase|random]'");
      }
      ScattererSpec s{to_count(parts[0], kv.first), to_count(parts[1], kv.first),
                      to_number(parts[2], kv.first), std::nullopt};
      if (parts.size() == 4 && parts[3] != "random") {
        s.phase = to_number(parts[3], kv.first);
      }
      cfg.scatterers.push_back(s);
    }
  }

  if (auto v = r.get("medium", "model")) {
    if (*v == "foldy-lax") cfg.model = ForwardModel::FoldyLax;
    else if (*v == "born") cfg.model = ForwardModel::Born;
    else if (*v == "random") cfg.model = ForwardModel::RandomMedium;
    else throw ConfigError("unknown forward model '" + *v + "'");
  }
  if (auto v = r.get("medium", "sigma")) cfg.medium.strength = to_fraction(*v, "sigma");
  if (auto v = r.get("medium", "kernel")) cfg.medium.kind = autocorrelation_from_string(*v);
  len("medium", "lattice_spacing", cfg.medium.lattice_spacing);

  if (auto v = r.get("solver", "beta")) cfg.solver.beta = to_number(*v, "beta");
  if (auto v = r.get("solver", "beta_fraction")) cfg.solver.beta_fraction = to_number(*v, "beta_fraction");
  if (auto v = r.get("solver", "tolerance")) cfg.solver.tolerance = to_number(*v, "tolerance");
  if (auto v = r.get("solver", "max_iterations")) cfg.solver.max_iterations = to_count(*v, "max_iterations");
  if (auto v = r.get("solver", "support_threshold")) {
    cfg.solver.support_threshold = to_number(*v, "support_threshold");
  }
  if (auto v = r.get("solver", "delta_factor")) cfg.delta_factor = to_number(*v, "delta_factor");
  if (auto v = r.get("solver", "hybrid_delta")) cfg.hybrid_delta = to_fraction(*v, "hybrid_delta");
  if (auto v = r.get("solver", "coherence")) cfg.coherence = to_number(*v, "coherence");
  if (auto v = r.get("solver", "condition_cap")) cfg.condition_cap = to_number(*v, "condition_cap");

  if (auto v = r.get("experiment", "id")) cfg.id = *v;
  if (auto v = r.get("experiment", "methods")) cfg.methods = split(*v, ',');
  if (auto v = r.get("experiment", "noise")) cfg.noise = to_fraction(*v, "noise");
  if (auto v = r.get("experiment", "illuminations")) cfg.illuminations = to_count(*v, "illuminations");
  if (auto v = r.get("experiment", "optimal_count")) cfg.optimal_count = to_count(*v, "optimal_count");
  if (auto v = r.get("experiment", "km_illumination")) cfg.km_illumination = *v;
  if (auto v = r.get("experiment", "km_count")) cfg.km_count = to_count(*v, "km_count");
  if (auto v = r.get("experiment", "rank")) cfg.rank = to_count(*v, "rank");
  if (auto v = r.get("experiment", "rank_threshold")) cfg.rank_threshold = to_number(*v, "rank_threshold");
  if (auto v = r.get("experiment", "realizations")) cfg.realizations = to_count(*v, "realizations");
  if (auto v = r.get("experiment", "deltas")) {
    cfg.deltas.clear();
    for (const auto& item : split(*v, ',')) cfg.deltas.push_back(to_number(item, "deltas"));
  }

  if (cfg.array_count == 0) throw ConfigError("[array] count must be positive");
  if (cfg.km_illumination != "central" && cfg.km_illumination != "random") {
    throw ConfigError("km_illumination must be 'central' or 'random'");
  }
  if (cfg.id.empty() || cfg.id.find('/') != std::string::npos) {
    throw ConfigError("experiment id must be a non-empty name without '/'");
  }
  for (const auto& m : cfg.methods) {
    if (!known_methods().count(m)) throw ConfigError("unknown method '" + m + "'");
  }
  for (const auto& s : cfg.scatterers) {
    if (s.row >= cfg.rows || s.col >= cfg.cols) {
      throw ConfigError("scatterer at (" + std::to_string(s.row) + ", " + std::to_string(s.col) +
                        ") lies outside the " + std::to_string(cfg.rows) + "x" +
                        std::to_string(cfg.cols) + " window");
    }
  }
  cfg.medium.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read scenario file '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

ScenarioSetup build_setup(const ScenarioConfig& cfg, std::uint64_t seed,
                          std::optional<double> aperture) {
  WaveContext ctx(cfg.wavelength);
  const double pitch = aperture ? pitch_for_aperture(cfg.array_count, *aperture) : cfg.pitch;
  ArrayGeometry array = build_linear_array(cfg.array_count, pitch);
  ImageWindow window(cfg.range, cfg.rows, cfg.cols, cfg.spacing);
  auto rng = make_rng(seed, kStreamPhases);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  std::vector<ScattererEntry> entries;
  for (const auto& s : cfg.scatterers) {
    const double p = phase(rng);  // drawn for every scatterer to keep streams aligned
    entries.push_back({window.index(s.row, s.col), std::polar(s.magnitude, s.phase.value_or(p))});
  }
  ReflectivityVector rho = place_scatterers(window, entries);
  SensingMatrix sensing = sensing_matrix(array, window, ctx);
  return {ctx, std::move(array), window, std::move(rho), std::move(sensing)};
}

ResponseMatrix forward_response(const ScenarioConfig& cfg, const ScenarioSetup& s,
                                std::uint64_t seed) {
  switch (cfg.model) {
    case ForwardModel::FoldyLax:
      return response_matrix_foldy_lax(s.sensing, s.rho, cfg.condition_cap);
    case ForwardModel::Born:
      return response_matrix_born(s.sensing, s.rho);
    case ForwardModel::RandomMedium: {
      if (cfg.medium.strength == 0.0) {
        return ResponseMatrix(born_matrix(s.sensing.matrix, s.rho.values()),
                              ResponseModel::RandomMedium);
      }
      const auto field =
          sample_field(cfg.medium, propagation_region(s.array, s.window), seed, 0);
      return response_matrix_random(field, s.array, s.window, s.rho, s.ctx, cfg.medium);
    }
  }
  throw ConfigError("unknown forward model");
}

namespace {

std::size_t response_rank(const ScenarioConfig& cfg, const ResponseMatrix& resp) {
  return select_rank(resp.singular_values(), cfg.rank_threshold, cfg.rank);
}

ImagingResult run_method(const std::string& method, const ScenarioConfig& cfg,
                         const ScenarioSetup& s, const ResponseMatrix& clean,
                         std::uint64_t seed) {
  const std::size_t n = s.array.size();
  const std::size_t m_true = s.rho.count();
  ImagingOptions opts;
  opts.solver = cfg.solver;

  // Nothing scattered: subspace methods have no signal space to work with.
  const bool silent = clean.singular_values()(0) == 0.0;
  if (silent && (method == "mmv-opt" || method == "hybrid" || method == "music")) {
    ImagingResult r;
    r.method = method;
    r.reflectivity = CVec::Zero(s.sensing.cols());
    r.image = RVec::Zero(s.sensing.cols());
    return r;
  }

  // Fixed illuminations: noise goes on the recorded data.
  auto data_for = [&](const CMat& f) {
    return add_noise(simulate_data(clean, f), NoiseSpec{cfg.noise, seed, 0});
  };
  // Illuminations derived from the SVD: noise goes on the response matrix.
  auto noisy_response = [&]() {
    const NoisyData pn = add_noise(clean.matrix(), NoiseSpec{cfg.noise, seed, 1});
    return std::pair{ResponseMatrix(pn.data, clean.model()), pn.noise};
  };
  auto floor_for = [&](double delta) {
    if (!cfg.coherence || delta <= 0.0) return 0.0;
    return noisy_recovery_bound(delta, m_true, *cfg.coherence).detection_floor;
  };

  if (method == "smv") {
    const CMat f = unit_columns(n, {n / 2});
    const NoisyData d = data_for(f);
    opts.solver.delta = cfg.delta_factor * d.noise_norm;
    opts.detection_floor = floor_for(opts.solver.delta);
    return image_smv(d.data.col(0), f.col(0), s.sensing, opts);
  }
  if (method == "mmv") {
    const CMat f = unit_columns(n, random_elements(n, cfg.illuminations, seed));
    const NoisyData d = data_for(f);
    opts.solver.delta = cfg.delta_factor * d.noise_norm;
    opts.detection_floor = floor_for(opts.solver.delta);
    return image_mmv(d.data, f, s.sensing, opts);
  }
  if (method == "mmv-opt") {
    const auto [resp, noise] = noisy_response();
    const CMat f = optimal_illuminations(resp, cfg.optimal_count);
    opts.solver.delta = cfg.delta_factor * (noise * f).norm();
    opts.detection_floor = floor_for(opts.solver.delta);
    ImagingResult r = image_mmv(resp.matrix() * f, f, s.sensing, opts);
    r.method = "mmv-opt";
    return r;
  }
  if (method == "hybrid") {
    const auto [resp, noise] = noisy_response();
    HybridOptions h;
    h.solver = cfg.solver;
    const bool fluctuating =
        cfg.model == ForwardModel::RandomMedium && cfg.medium.strength > 0.0;
    const double def = fluctuating ? 0.1 : (cfg.noise > 0 ? 0.02 : 0.0);
    h.delta_fraction = cfg.hybrid_delta.value_or(def);
    return image_hybrid_l1(resp, s.sensing, response_rank(cfg, resp), h);
  }
  if (method == "music") {
    const auto [resp, noise] = noisy_response();
    return image_music(resp, s.sensing, response_rank(cfg, resp));
  }
  if (method == "km") {
    const CMat f = cfg.km_illumination == "central"
                       ? unit_columns(n, {n / 2})
                       : unit_columns(n, random_elements(n, cfg.km_count, seed));
    const NoisyData d = data_for(f);
    return image_km(d.data, f, s.sensing, m_true);
  }
  throw ConfigError("unknown method '" + method + "'");
}

}  // namespace

namespace {

TrialOutput run_trial(const ScenarioConfig& cfg, std::uint64_t seed,
                      const std::optional<std::string>& out_dir, std::optional<double> aperture,
                      const CMat* loaded) {
  TrialOutput out;
  const ScenarioSetup s = build_setup(cfg, seed, aperture);
  std::optional<ResponseMatrix> clean;
  std::string forward_error;
  if (loaded) {
    if (loaded->rows() != static_cast<Eigen::Index>(s.array.size()) ||
        loaded->cols() != loaded->rows()) {
      throw ConfigError("loaded response is " + std::to_string(loaded->rows()) + "x" +
                        std::to_string(loaded->cols()) + " but the array has " +
                        std::to_string(s.array.size()) + " elements");
    }
    clean.emplace(*loaded, ResponseModel::Loaded);
  } else {
    try {
      clean.emplace(forward_response(cfg, s, seed));
    } catch (const Error& e) {
      forward_error = e.kind() + ": " + e.what();
    }
  }
  for (const auto& method : cfg.methods) {
    TrialReport rep;
    rep.method = method;
    rep.scenario = cfg.id;
    rep.seed = seed;
    rep.aperture = s.array.aperture();
    const auto t0 = std::chrono::steady_clock::now();
    ImagingResult res;
    res.method = method;
    if (!clean) {
      rep.error = forward_error;
    } else {
      try {
        res = run_method(method, cfg, s, *clean, seed);
      } catch (const Error& e) {
        rep.error = e.kind() + ": " + e.what();
      }
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (rep.error.empty()) {
      const SupportScore sc = score_support(res.support, s.rho.support());
      rep.support_exact = sc.exact;
      rep.precision = sc.precision;
      rep.recall = sc.recall;
      rep.recovered = res.support.size();
      rep.reflectivity_error = (method == "km" || method == "music")
                                   ? std::numeric_limits<double>::quiet_NaN()
                                   : reflectivity_error(res, s.rho);
      rep.converged = res.solver.converged;
      rep.iterations = res.solver.iterations;
    } else {
      rep.converged = false;
      rep.reflectivity_error = std::numeric_limits<double>::quiet_NaN();
    }
    out.reports.push_back(rep);
    out.results.push_back(std::move(res));
  }

  if (out_dir) {
    namespace fs = std::filesystem;
    fs::path dir = fs::path(*out_dir) / cfg.id / std::to_string(seed);
    if (aperture) dir /= "aperture_" + format_double(*aperture);
    fs::create_directories(dir);
    {
      std::ofstream snap(dir / "config.ini");
      snap << cfg.source;
    }
    write_reports_csv((dir / "report.csv").string(), out.reports);
    {
      std::ofstream t(dir / "timing.csv");
      t << "method,wall_seconds\n";
      for (const auto& r : out.reports) t << r.method << ',' << format_double(r.wall_seconds) << '\n';
    }
    if (clean) {
      nlohmann::json h{{"N", clean->size()},
                       {"provenance", to_string(clean->model())},
                       {"seed", seed},
                       {"scenario", cfg.id}};
      write_complex_csv((dir / "response.csv").string(), clean->matrix(), h);
    }
    for (const auto& r : out.results) {
      if (r.reflectivity.size() == 0 && r.image.size() == 0) continue;
      write_support_csv((dir / (r.method + "_support.csv")).string(), r, s.window);
      if (r.image.size() > 0) {
        write_grid_csv((dir / (r.method + "_image.csv")).string(), r.image, s.window.rows(),
                       s.window.cols());
        write_pgm((dir / (r.method + "_image.pgm")).string(), r.image, s.window.rows(),
                  s.window.cols());
      } else {
        write_grid_csv((dir / (r.method + "_image.csv")).string(), r.reflectivity.cwiseAbs(),
                       s.window.rows(), s.window.cols());
      }
    }
  }
  return out;
}

}  // namespace

TrialOutput run_scenario(const ScenarioConfig& cfg, std::uint64_t seed,
                         const std::optional<std::string>& out_dir,
                         std::optional<double> aperture) {
  return run_trial(cfg, seed, out_dir, aperture, nullptr);
}

TrialOutput run_scenario_on_response(const ScenarioConfig& cfg, std::uint64_t seed,
                                     const CMat& response,
                                     const std::optional<std::string>& out_dir) {
  return run_trial(cfg, seed, out_dir, std::nullopt, &response);
}

std::vector<StabilityRow> monte_carlo_stability(const ScenarioConfig& cfg,
                                                std::size_t realizations) {
  if (realizations < 10) {
    throw ConfigError("Monte-Carlo tables need at least 10 realizations");
  }
  std::vector<std::optional<double>> apertures;
  for (double a : cfg.apertures) apertures.emplace_back(a);
  if (apertures.empty()) apertures.emplace_back(std::nullopt);
  std::vector<StabilityRow> rows;
  for (const auto& a : apertures) {
    std::map<std::string, StabilityRow> acc;
    double aperture = 0.0;
    std::vector<TrialOutput> trials(realizations);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
      for (std::size_t i = next++; i < realizations; i = next++) {
        try {
          trials[i] = run_scenario(cfg, i + 1, std::nullopt, a);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const std::size_t workers =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, realizations);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    // Aggregate in seed order so sums do not depend on scheduling.
    for (const TrialOutput& t : trials) {
      for (const auto& r : t.reports) {
        aperture = r.aperture;
        auto& row = acc.try_emplace(r.method, StabilityRow{0, r.method, 0, 0, 0, 0}).first->second;
        row.success_rate += r.support_exact ? 1.0 : 0.0;
        row.mean_precision += r.precision;
        row.mean_recall += r.recall;
        ++row.trials;
      }
    }
    for (const auto& m : cfg.methods) {
      auto it = acc.find(m);
      if (it == acc.end()) continue;
      StabilityRow row = it->second;
      row.aperture = aperture;
      row.success_rate /= double(row.trials);
      row.mean_precision /= double(row.trials);
      row.mean_recall /= double(row.trials);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_reports_csv(const std::string& path, const std::vector<TrialReport>& reports) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << report_header() << '\n';
  for (const auto& r : reports) out << report_line(r) << '\n';
}

void write_stability_csv(const std::string& path, const std::vector<StabilityRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "aperture,method,success_rate,mean_precision,mean_recall,trials\n";
  for (const auto& r : rows) {
    out << format_double(r.aperture) << ',' << r.method << ',' << format_double(r.success_rate)
        << ',' << format_double(r.mean_precision) << ',' << format_double(r.mean_recall) << ','
        << r.trials << '\n';
  }
}

std::vector<CoherenceRow> coherence_table(const ScenarioConfig& cfg, std::uint64_t seed) {
  const ScenarioSetup s = build_setup(cfg, seed);
  const CoherenceResult full = mutual_coherence(s.sensing);
  std::optional<CoherenceResult> sup;
  if (s.rho.count() >= 2) sup = mutual_coherence(s.sensing.matrix, s.rho.support());
  const std::size_t top = std::max<std::size_t>(s.rho.count(), 1);
  std::vector<CoherenceRow> rows;
  for (std::size_t m = 1; m <= top; ++m) {
    for (double delta : cfg.deltas) {
      CoherenceRow row{};
      row.sources = m;
      row.delta = delta;
      row.epsilon = full.epsilon;
      row.margin = exact_recovery_margin(full.epsilon, m);
      row.has_support = sup.has_value();
      row.support_epsilon = sup ? sup->epsilon : std::numeric_limits<double>::quiet_NaN();
      row.support_margin = sup ? exact_recovery_margin(sup->epsilon, m)
                               : std::numeric_limits<double>::quiet_NaN();
      const double eps = sup ? sup->epsilon : full.epsilon;
      try {
        row.error_bound = noisy_recovery_bound(delta, m, eps).error_bound;
      } catch (const DomainError&) {
        row.error_bound = std::numeric_limits<double>::quiet_NaN();
      }
      row.certified = (sup ? row.support_margin : row.margin) > 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_coherence_csv(const std::string& path, const std::vector<CoherenceRow>& rows,
                         const CoherenceResult& full) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << "sources,delta,epsilon,pair_first,pair_second,margin,support_epsilon,support_margin,"
         "error_bound,verdict\n";
  for (const auto& r : rows) {
    out << r.sources << ',' << format_double(r.delta) << ',' << format_double(r.epsilon) << ','
        << full.first << ',' << full.second << ',' << format_double(r.margin) << ','
        << format_double(r.support_epsilon) << ',' << format_double(r.support_margin) << ','
        << format_double(r.error_bound) << ',' << (r.certified ? "certified" : "not certified")
        << '\n';
  }
}

}  // namespace sparseimg
