#include "chlab/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <sstream>

#include "chlab/errors.hpp"

namespace chlab {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& header,
                     const std::vector<std::string>& columns)
    : out_(path, std::ios::binary | std::ios::trunc), ncols_(columns.size()) {
  if (!out_) throw IoError("cannot open " + path + " for writing");
  for (const auto& [k, v] : header) out_ << "# " << k << " = " << v << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != ncols_) throw std::invalid_argument("csv: wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row(cells);
}

void CsvWriter::mark_truncated(const std::string& reason) {
  out_ << "# TRUNCATED " << reason << '\n';
  out_.flush();
}

const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> cols{
      "t",     "phi_mean", "sigma_mean", "E",     "F",           "D",
      "energy_balance_residual",        "min_phi", "max_phi", "delta",
      "newton_iters", "htilde_sup"};
  return cols;
}

std::vector<std::string> diagnostics_cells(const DiagnosticsRecord& r) {
  return {format_double(r.t),
          format_double(r.phi_mean),
          format_double(r.sigma_mean),
          format_double(r.E),
          format_double(r.F),
          format_double(r.D),
          format_double(r.energy_balance_residual),
          format_double(r.min_phi),
          format_double(r.max_phi),
          format_double(r.delta),
          std::to_string(r.newton_iters),
          format_double(r.htilde_sup)};
}

namespace {

void write_le(std::ofstream& out, std::span<const double> values) {
  for (double v : values) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
    out.write(reinterpret_cast<const char*>(bytes), 8);
  }
}

bool read_le(std::ifstream& in, std::span<double> values) {
  for (double& v : values) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) return false;
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    v = std::bit_cast<double>(bits);
  }
  return true;
}

}  // namespace

void write_snapshot(const std::string& path, const ScalarField& phi, const ScalarField& sigma,
                    double t) {
  require_same_grid(phi, sigma);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const Grid& g = phi.grid();
  out << "CHSNAP1 " << g.ndim();
  for (int n : g.n_per_axis()) out << ' ' << n;
  for (double l : g.lengths()) out << ' ' << format_double(l);
  out << ' ' << format_double(t) << '\n';
  write_le(out, phi.values());
  write_le(out, sigma.values());
  if (!out) throw IoError("write failed for " + path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot " + path);
  std::string header;
  if (!std::getline(in, header)) throw IoError("snapshot " + path + ": missing header");
  std::istringstream hs(header);
  std::string magic;
  int ndim = 0;
  hs >> magic >> ndim;
  if (magic != "CHSNAP1") throw IoError("snapshot " + path + ": bad magic '" + magic + "'");
  if (!hs || ndim < 1 || ndim > 3) throw IoError("snapshot " + path + ": bad ndim");
  std::vector<int> n(ndim);
  std::vector<double> len(ndim);
  double t = 0.0;
  for (int& v : n) hs >> v;
  for (double& v : len) hs >> v;
  hs >> t;
  if (!hs) throw IoError("snapshot " + path + ": malformed header");
  Grid grid = [&] {
    try {
      return Grid(n, len);
    } catch (const std::invalid_argument& e) {
      throw IoError("snapshot " + path + ": " + e.what());
    }
  }();
  ScalarField phi(grid);
  ScalarField sigma(grid);
  if (!read_le(in, phi.values()) || !read_le(in, sigma.values())) {
    throw IoError("snapshot " + path + ": truncated payload");
  }
  return {std::move(phi), std::move(sigma), t};
}

}  // namespace chlab
