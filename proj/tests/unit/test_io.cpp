#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "chlab/errors.hpp"
#include "chlab/io.hpp"
#include "dense_oracle.hpp"

namespace ch = chlab;
namespace fs = std::filesystem;
using ch::Grid;
using ch::ScalarField;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "chlab_test_io";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("format_double round trips") {
  for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -1.7976931348623157e308,
                   std::nextafter(1.0, 2.0)}) {
    const std::string s = ch::format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(ch::format_double(0.5) == "0.5");
  CHECK(ch::format_double(2.0) == "2");
}

TEST_CASE("csv writer") {
  const fs::path p = scratch("a.csv");
  {
    ch::CsvWriter w(p.string(), {{"command", "run"}, {"model.A", "1"}}, {"t", "x"});
    w.row(std::vector<double>{0.0, 0.25});
    w.row(std::vector<std::string>{"1", "abc"});
    CHECK_THROWS_AS(w.row(std::vector<double>{1.0}), std::invalid_argument);
    w.mark_truncated("interrupted");
  }
  CHECK(slurp(p) == "# command = run\n# model.A = 1\nt,x\n0,0.25\n1,abc\n# TRUNCATED interrupted\n");
  CHECK_THROWS_AS(ch::CsvWriter("/nonexistent_dir_chlab/x.csv", {}, {"t"}), ch::IoError);
}

TEST_CASE("diagnostics cells follow the column order") {
  ch::DiagnosticsRecord r;
  r.t = 1.5;
  r.newton_iters = 7;
  r.htilde_sup = 0.25;
  const auto cells = ch::diagnostics_cells(r);
  REQUIRE(cells.size() == ch::diagnostics_columns().size());
  CHECK(ch::diagnostics_columns().front() == "t");
  CHECK(cells.front() == "1.5");
  CHECK(cells[10] == "7");
  CHECK(cells[11] == "0.25");
}

TEST_CASE("snapshot round trip is bit exact") {
  for (const Grid& g : {Grid::line(9, 1.5), Grid({5, 4}, {1.0, 0.3}), Grid({3, 4, 5}, {1.0, 2.0, 3.0})}) {
    const ScalarField phi = oracle::random_field(g, 1, -1.0, 1.0);
    const ScalarField sigma = oracle::random_field(g, 2, -5.0, 5.0);
    const fs::path p = scratch("s.chsnap");
    const double t = 0.1 + 1.0 / 3.0;
    ch::write_snapshot(p.string(), phi, sigma, t);
    const auto snap = ch::read_snapshot(p.string());
    CHECK(snap.t == t);
    CHECK(snap.phi.grid() == g);
    for (std::size_t i = 0; i < phi.size(); ++i) {
      CHECK(snap.phi[i] == phi[i]);
      CHECK(snap.sigma[i] == sigma[i]);
    }
    // header line then 2 N binary64 values
    const std::string bytes = slurp(p);
    const auto nl = bytes.find('\n');
    CHECK(bytes.compare(0, 8, "CHSNAP1 ") == 0);
    CHECK(bytes.size() - nl - 1 == 16 * phi.size());
  }
}

TEST_CASE("snapshot header layout and little-endian payload") {
  const Grid g = Grid::line(3, 2.0);
  const fs::path p = scratch("h.chsnap");
  ch::write_snapshot(p.string(), ScalarField(g, std::vector<double>{1.0, 0.5, -2.0}), ScalarField(g), 0.25);
  const std::string bytes = slurp(p);
  const std::string head = "CHSNAP1 1 3 2 0.25\n";
  REQUIRE(bytes.compare(0, head.size(), head) == 0);
  // 1.0 = 0x3FF0000000000000
  const std::string one = bytes.substr(head.size(), 8);
  CHECK(static_cast<unsigned char>(one[6]) == 0xF0);
  CHECK(static_cast<unsigned char>(one[7]) == 0x3F);
}

TEST_CASE("snapshot errors") {
  const Grid g = Grid::line(9, 1.0);
  const fs::path p = scratch("bad.chsnap");
  CHECK_THROWS_AS(ch::read_snapshot((scratch("") / "missing.chsnap").string()), ch::IoError);

  { std::ofstream(p, std::ios::binary) << "CHSNAP2 1 9 1 0\n"; }
  CHECK_THROWS_AS(ch::read_snapshot(p.string()), ch::IoError);

  { std::ofstream(p, std::ios::binary) << "CHSNAP1 1 9 1 0\n" << std::string(8 * 17, '\0'); }
  CHECK_THROWS_AS(ch::read_snapshot(p.string()), ch::IoError);

  { std::ofstream(p, std::ios::binary) << "CHSNAP1 2 9\n"; }
  CHECK_THROWS_AS(ch::read_snapshot(p.string()), ch::IoError);

  { std::ofstream(p, std::ios::binary) << "CHSNAP1 1 9 -1 0\n" << std::string(8 * 18, '\0'); }
  CHECK_THROWS_AS(ch::read_snapshot(p.string()), ch::IoError);

  CHECK_THROWS_AS(ch::write_snapshot(p.string(), ScalarField(g), ScalarField(Grid::line(5, 1.0)), 0.0),
                  ch::GridMismatch);
}
