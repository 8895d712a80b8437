// Copyright 2026 The pathqp Authors
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

// Matrix Market coordinate I/O (real general / real symmetric).

#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pathqp/csc_matrix.hpp"
#include "pathqp/errors.hpp"

namespace pathqp::mm {

enum class Symmetry { general, symmetric };

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace detail

/// Reads a coordinate matrix. Symmetric files store one triangle; the other
/// is mirrored on load. Duplicate entries are summed.
inline CscMatrix<double> read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("matrix market: empty stream");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket") throw InputError("matrix market: missing %%MatrixMarket banner");
  object = detail::lower(object);
  format = detail::lower(format);
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);
  if (object != "matrix" || format != "coordinate") {
    throw InputError("matrix market: only 'matrix coordinate' is supported");
  }
  if (field != "real" && field != "integer" && field != "double") {
    throw InputError("matrix market: unsupported field '" + field + "'");
  }
  Symmetry sym;
  if (symmetry == "general") {
    sym = Symmetry::general;
  } else if (symmetry == "symmetric") {
    sym = Symmetry::symmetric;
  } else {
    throw InputError("matrix market: unsupported symmetry '" + symmetry + "'");
  }

  do {
    if (!std::getline(in, line)) throw InputError("matrix market: missing size line");
  } while (line.empty() || line[0] == '%');

  std::size_t rows = 0, cols = 0, entries = 0;
  {
    std::istringstream sz(line);
    if (!(sz >> rows >> cols >> entries)) throw InputError("matrix market: bad size line");
  }
  if (sym == Symmetry::symmetric && rows != cols) {
    throw InputError("matrix market: symmetric matrix must be square");
  }

  std::vector<Triplet<double>> trip;
  trip.reserve(sym == Symmetry::symmetric ? 2 * entries : entries);
  std::size_t read_entries = 0;
  while (read_entries < entries && std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    std::istringstream es(line);
    std::size_t r = 0, c = 0;
    double v = 0.0;
    if (!(es >> r >> c >> v)) throw InputError("matrix market: bad entry line '" + line + "'");
    if (r == 0 || c == 0 || r > rows || c > cols) {
      throw InputError("matrix market: entry index out of range in '" + line + "'");
    }
    trip.push_back({r - 1, c - 1, v});
    if (sym == Symmetry::symmetric && r != c) trip.push_back({c - 1, r - 1, v});
    ++read_entries;
  }
  if (read_entries != entries) {
    throw InputError("matrix market: expected " + std::to_string(entries) + " entries, found " +
                     std::to_string(read_entries));
  }
  return CscMatrix<double>::from_triplets(rows, cols, std::move(trip));
}

inline CscMatrix<double> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open matrix file '" + path + "'");
  return read(in);
}

/// Writes a coordinate matrix. With Symmetry::symmetric only entries with
/// row >= col are emitted; the caller guarantees the matrix is symmetric.
inline void write(std::ostream& out, const CscMatrix<double>& a,
                  Symmetry sym = Symmetry::general) {
  const auto trip = a.triplets();
  std::size_t count = 0;
  for (const auto& t : trip) {
    if (sym == Symmetry::general || t.row >= t.col) ++count;
  }
  out << "%%MatrixMarket matrix coordinate real "
      << (sym == Symmetry::general ? "general" : "symmetric") << "\n";
  out << a.rows() << " " << a.cols() << " " << count << "\n";
  char buf[64];
  for (const auto& t : trip) {
    if (sym == Symmetry::symmetric && t.row < t.col) continue;
    std::snprintf(buf, sizeof(buf), "%.17g", t.value);
    out << (t.row + 1) << " " << (t.col + 1) << " " << buf << "\n";
  }
}

inline void write_file(const std::string& path, const CscMatrix<double>& a,
                       Symmetry sym = Symmetry::general) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write matrix file '" + path + "'");
  write(out, a, sym);
}

}  // namespace pathqp::mm
