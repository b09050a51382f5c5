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

#include "sparseimg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace sparseimg {

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) {
    throw ConfigError("cannot write '" + path + "'");
  }
  return out;
}

double parse_double(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("malformed number '" + s + "' in '" + path + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_complex_csv(const std::string& path, const CMat& mat, const nlohmann::json& header) {
  auto out = open_out(path);
  nlohmann::json h = header;
  h["rows"] = mat.rows();
  h["cols"] = mat.cols();
  out << "# " << h.dump() << '\n';
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      if (j) out << ',';
      out << format_double(mat(i, j).real()) << ',' << format_double(mat(i, j).imag());
    }
    out << '\n';
  }
}

LoadedMatrix read_complex_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw ConfigError("'" + path + "' lacks the '# {json}' header line");
  }
  LoadedMatrix out;
  try {
    out.header = nlohmann::json::parse(line.substr(2));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad header in '" + path + "': " + e.what());
  }
  const auto rows = out.header.at("rows").get<Eigen::Index>();
  const auto cols = out.header.at("cols").get<Eigen::Index>();
  out.matrix.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw ConfigError("'" + path + "' ends after " + std::to_string(i) + " rows");
    }
    std::stringstream ss(line);
    std::string re, im;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!std::getline(ss, re, ',') || !std::getline(ss, im, ',')) {
        throw ConfigError("row " + std::to_string(i) + " of '" + path + "' is short");
      }
      out.matrix(i, j) = Complex(parse_double(re, path), parse_double(im, path));
    }
  }
  return out;
}

void write_support_csv(const std::string& path, const ImagingResult& result,
                       const ImageWindow& window) {
  auto out = open_out(path);
  out << "index,row,col,re,im,abs,flag\n";
  std::vector<std::pair<std::size_t, std::string>> rows;
  for (auto j : result.support) rows.emplace_back(j, "ok");
  for (auto j : result.screened) rows.emplace_back(j, "screened");
  std::sort(rows.begin(), rows.end());
  for (const auto& [j, flag] : rows) {
    const auto [r, c] = window.row_col(j);
    const Complex v = result.reflectivity.size() > 0
                          ? result.reflectivity(static_cast<Eigen::Index>(j))
                          : Complex(0.0);
    out << j << ',' << r << ',' << c << ',' << format_double(v.real()) << ','
        << format_double(v.imag()) << ',' << format_double(std::abs(v)) << ',' << flag << '\n';
  }
}

void write_grid_csv(const std::string& path, const RVec& image, std::size_t rows,
                    std::size_t cols) {
  if (static_cast<std::size_t>(image.size()) != rows * cols) {
    throw ConfigError("image size does not match the grid");
  }
  auto out = open_out(path);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out << ',';
      out << format_double(image(static_cast<Eigen::Index>(r * cols + c)));
    }
    out << '\n';
  }
}

void write_pgm(const std::string& path, const RVec& image, std::size_t rows, std::size_t cols) {
  if (static_cast<std::size_t>(image.size()) != rows * cols) {
    throw ConfigError("image size does not match the grid");
  }
  auto out = open_out(path, true);
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  const double top = image.size() ? image.maxCoeff() : 0.0;
  for (Eigen::Index k = 0; k < image.size(); ++k) {
    const double v = top > 0.0 ? std::clamp(image(k) / top, 0.0, 1.0) : 0.0;
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
  }
}

}  // namespace sparseimg
