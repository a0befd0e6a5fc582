#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "chlab/diagnostics.hpp"

namespace chlab {

/// Shortest decimal string that round-trips to the same binary64 value.
std::string format_double(double v);

/// Comma-separated file whose first lines are "# key = value" comments.
class CsvWriter {
 public:
  CsvWriter(const std::string& path,
            const std::vector<std::pair<std::string, std::string>>& header,
            const std::vector<std::string>& columns);

  void row(const std::vector<std::string>& cells);
  void row(const std::vector<double>& values);
  /// Appends the truncation marker line for interrupted runs.
  void mark_truncated(const std::string& reason);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::size_t ncols_;
};

/// Column order of the diagnostics CSV.
const std::vector<std::string>& diagnostics_columns();
std::vector<std::string> diagnostics_cells(const DiagnosticsRecord& r);

/// CHSNAP1: one ASCII header line "CHSNAP1 ndim n1 [n2 n3] L1 [L2 L3] t",
/// then the phi block and the sigma block as little-endian binary64, x fastest.
void write_snapshot(const std::string& path, const ScalarField& phi, const ScalarField& sigma,
                    double t);

struct Snapshot {
  ScalarField phi;
  ScalarField sigma;
  double t = 0.0;
};

/// Throws IoError on a missing file, bad magic or truncated payload.
Snapshot read_snapshot(const std::string& path);

}  // namespace chlab
