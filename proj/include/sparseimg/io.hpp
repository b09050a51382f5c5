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

#ifndef SPARSEIMG_IO_HPP
#define SPARSEIMG_IO_HPP

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparseimg/geometry.hpp"
#include "sparseimg/imaging.hpp"
#include "sparseimg/types.hpp"

namespace sparseimg {

/// Shortest round-trip decimal representation.
std::string format_double(double v);

/// Complex matrix as CSV: one matrix row per line with re,im pairs. The
/// first line is "# " followed by a JSON object describing the matrix.
void write_complex_csv(const std::string& path, const CMat& mat, const nlohmann::json& header);

struct LoadedMatrix {
  CMat matrix;
  nlohmann::json header;
};

LoadedMatrix read_complex_csv(const std::string& path);

/// index,row,col,re,im,abs,flag for every support and screened point.
void write_support_csv(const std::string& path, const ImagingResult& result,
                       const ImageWindow& window);

/// Row-major grid of values, one image row per line.
void write_grid_csv(const std::string& path, const RVec& image, std::size_t rows,
                    std::size_t cols);

/// Binary portable graymap scaled so the maximum maps to 255.
void write_pgm(const std::string& path, const RVec& image, std::size_t rows, std::size_t cols);

}  // namespace sparseimg

#endif  // SPARSEIMG_IO_HPP
