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

#include "qscmc/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qscmc/error.hpp"

namespace qscmc {

namespace {

constexpr char kMagic[8] = {'Q', 'S', 'C', 'M', 'C', 'B', 'I', 'N'};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) {
    out.push_back(field);
  }
  if (!line.empty() && line.back() == sep) {
    out.emplace_back();
  }
  return out;
}

double parse_double(const std::string& s) {
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    if (s == "inf") {
      return INFINITY;
    }
    if (s == "-inf") {
      return -INFINITY;
    }
    if (s == "nan") {
      return NAN;
    }
    throw InvalidInput("malformed number '" + s + "'");
  }
  return value;
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) {
    bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) {
    throw InvalidInput("truncated binary sample file");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  }
  return v;
}

}  // namespace

std::string SampleDump::header_value(const std::string& key) const {
  for (const auto& [k, v] : header) {
    if (k == key) {
      return v;
    }
  }
  return {};
}

std::string format_double(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buffer[40];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
  return std::string(buffer, ptr);
}

std::vector<std::string> state_column_names(std::size_t dim) {
  std::vector<std::string> names;
  names.reserve(2 * dim * dim);
  for (const char* part : {"re", "im"}) {
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        names.push_back(std::string(part) + "_" + std::to_string(i) + "_" + std::to_string(j));
      }
    }
  }
  return names;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InvalidInput("cannot open " + path.string() + " for writing");
  }
  out << content;
}

void write_sample_csv(const SampleDump& dump, const std::filesystem::path& path) {
  if (!dump.extra.empty() && dump.extra.size() != dump.states.size()) {
    throw InvalidInput("extra columns must have one row per state");
  }
  std::ostringstream out;
  for (const auto& [key, value] : dump.header) {
    out << "# " << key << ": " << value << '\n';
  }
  const auto names = state_column_names(dump.dim);
  for (std::size_t c = 0; c < names.size(); ++c) {
    out << (c ? "," : "") << names[c];
  }
  for (const auto& name : dump.extra_names) {
    out << ',' << name;
  }
  out << '\n';
  for (std::size_t r = 0; r < dump.states.size(); ++r) {
    const CMatrix& m = dump.states[r];
    if (static_cast<std::size_t>(m.rows()) != dump.dim || m.rows() != m.cols()) {
      throw InvalidInput("state dimension does not match the dump dimension");
    }
    bool first = true;
    for (int part = 0; part < 2; ++part) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          out << (first ? "" : ",") << format_double(part == 0 ? m(i, j).real() : m(i, j).imag());
          first = false;
        }
      }
    }
    if (!dump.extra.empty()) {
      if (dump.extra[r].size() != dump.extra_names.size()) {
        throw InvalidInput("extra row has the wrong number of values");
      }
      for (double v : dump.extra[r]) {
        out << ',' << format_double(v);
      }
    }
    out << '\n';
  }
  write_text(path, out.str());
}

SampleDump read_sample_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInput("cannot open " + path.string());
  }
  SampleDump dump;
  std::string line;
  std::vector<std::string> columns;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) {
        throw InvalidInput("malformed header line: " + line);
      }
      dump.header.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
      continue;
    }
    columns = split(line, ',');
    break;
  }
  std::size_t state_columns = 0;
  while (state_columns < columns.size() &&
         (columns[state_columns].rfind("re_", 0) == 0 || columns[state_columns].rfind("im_", 0) == 0)) {
    ++state_columns;
  }
  const auto dim = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(state_columns) / 2.0)));
  if (2 * dim * dim != state_columns || state_columns == 0) {
    throw InvalidInput("column header does not describe square states");
  }
  dump.dim = dim;
  dump.extra_names.assign(columns.begin() + static_cast<std::ptrdiff_t>(state_columns), columns.end());
  const std::size_t d2 = dim * dim;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != columns.size()) {
      throw InvalidInput("row has " + std::to_string(fields.size()) + " fields, expected " +
                         std::to_string(columns.size()));
    }
    CMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < d2; ++k) {
      m(static_cast<Eigen::Index>(k / dim), static_cast<Eigen::Index>(k % dim)) =
          Complex(parse_double(fields[k]), parse_double(fields[d2 + k]));
    }
    dump.states.push_back(std::move(m));
    if (!dump.extra_names.empty()) {
      std::vector<double> row;
      for (std::size_t c = state_columns; c < fields.size(); ++c) {
        row.push_back(parse_double(fields[c]));
      }
      dump.extra.push_back(std::move(row));
    }
  }
  return dump;
}

void write_sample_bin(const SampleDump& dump, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InvalidInput("cannot open " + path.string() + " for writing");
  }
  out.write(kMagic, sizeof(kMagic));
  write_u64(out, dump.dim);
  write_u64(out, dump.states.size());
  for (const CMatrix& m : dump.states) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double pair[2] = {m(i, j).real(), m(i, j).imag()};
        out.write(reinterpret_cast<const char*>(pair), sizeof(pair));
      }
    }
  }
}

SampleDump read_sample_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InvalidInput("cannot open " + path.string());
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw InvalidInput("not a qscmc binary sample file");
  }
  SampleDump dump;
  dump.dim = read_u64(in);
  const std::uint64_t count = read_u64(in);
  const auto d = static_cast<Eigen::Index>(dump.dim);
  for (std::uint64_t n = 0; n < count; ++n) {
    CMatrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        double pair[2];
        in.read(reinterpret_cast<char*>(pair), sizeof(pair));
        if (!in) {
          throw InvalidInput("truncated binary sample file");
        }
        m(i, j) = Complex(pair[0], pair[1]);
      }
    }
    dump.states.push_back(std::move(m));
  }
  return dump;
}

}  // namespace qscmc
