// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "multires/errors.hpp"

namespace multires {

/// Shortest round-trip decimal form of a double ('.' decimal point, no
/// locale). Identical doubles format identically, which is what the
/// byte-level determinism contract of the experiment CSVs relies on.
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_num(int v) { return std::to_string(v); }
inline std::string csv_num(long long v) { return std::to_string(v); }
inline std::string csv_num(std::size_t v) { return std::to_string(v); }

// Comma-separated writer with a mandatory header row. Cells are written
// verbatim; callers only pass plain numbers and identifier-like labels.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw StoreError("cannot open " + path.string() + " for writing");
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  void close() { out_.close(); }

 private:
  std::ofstream out_;
};

}  // namespace multires
