// Copyright 2026 The qscmc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QSCMC_IO_HPP
#define QSCMC_IO_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qscmc/qstate.hpp"

/**
 * \file
 * \brief Sample dumps.
 *
 * CSV layout: `# key: value` header lines, one column-name line, then one row per state:
 * d^2 columns `re_i_j` followed by d^2 columns `im_i_j` (row-major, zero-based), then any
 * extra columns. Every number is written with 17 significant digits, so reading a dump
 * back reproduces each double exactly.
 *
 * Binary layout (`samples.bin`): the ASCII magic `QSCMCBIN`, then little-endian uint64
 * dimension and count, then count * d^2 (re, im) pairs in row-major order.
 */

namespace qscmc {

struct SampleDump {
  /// Ordered header entries (dims, pipeline, seed, git describe, config hash, ...).
  std::vector<std::pair<std::string, std::string>> header;
  std::size_t dim = 0;
  std::vector<CMatrix> states;
  std::vector<std::string> extra_names;
  /// One row per state, one value per extra column.
  std::vector<std::vector<double>> extra;

  /// Header value for `key`, or an empty string.
  std::string header_value(const std::string& key) const;
};

/// \throws InvalidInput when rows and extras disagree in size.
void write_sample_csv(const SampleDump& dump, const std::filesystem::path& path);
/// \throws InvalidInput for malformed files.
SampleDump read_sample_csv(const std::filesystem::path& path);

void write_sample_bin(const SampleDump& dump, const std::filesystem::path& path);
/// States only; header and extras are not stored in the binary form.
SampleDump read_sample_bin(const std::filesystem::path& path);

/// Column names `re_i_j` then `im_i_j` for dimension d.
std::vector<std::string> state_column_names(std::size_t dim);

/// Number formatted with 17 significant digits.
std::string format_double(double value);

/// Writes `content` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace qscmc

#endif  // QSCMC_IO_HPP
