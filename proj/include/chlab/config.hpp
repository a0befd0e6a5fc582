#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "chlab/dynamics.hpp"
#include "chlab/errors.hpp"
#include "chlab/steady.hpp"

namespace chlab {

class ParseError : public Error {
 public:
  ParseError(const std::string& source, unsigned long line, const std::string& message);
  unsigned long line() const noexcept { return line_; }

 private:
  unsigned long line_;
};

/// Carries every violated constraint, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

enum class InitProfile { Random, SingleMode, File };

struct GridSection {
  int ndim = 1;
  std::vector<int> n{65};
  std::vector<double> lengths{1.0};
};

struct TimeSection {
  double dt = 1e-3;
  double t_end = 1.0;
  Scheme scheme = Scheme::ExactLog;
  std::vector<double> kappa_schedule{0.2, 0.1, 0.05, 0.025};
  double newton_tol = 1e-10;
  int newton_max_iters = 50;
  double barrier_margin = 1e-12;
};

struct InitSection {
  double phi_mean = 0.0;
  double phi_amp = 0.1;
  double sigma_mean = 0.0;
  double sigma_amp = 0.0;
  std::uint64_t seed = 1;
  InitProfile profile = InitProfile::Random;
  int mode = 1;  // cosine index along x for single_mode(k)
  std::string file;
};

struct OutputSection {
  std::string directory = "chlab_out";
  int csv_every = 1;
  int snapshot_every = 0;  // 0: final snapshot only
};

struct CompareSection {
  double eta = 1e-3;  // sup-norm of the mean-free phi perturbation
};

struct BarrierSection {
  double delta0 = 0.0;  // 0: use 1 - ||phi0||_inf
};

/// Fully resolved experiment configuration (INI-style file, sections
/// [grid] [model] [time] [init] [output] [steady] [compare] [barrier]).
struct RunConfig {
  GridSection grid;
  ModelParams model;
  TimeSection time;
  InitSection init;
  OutputSection output;
  SteadyTolerances steady;
  CompareSection compare;
  BarrierSection barrier;

  Grid make_grid() const;
  SolverConfig solver() const;

  /// (section.key, value) pairs in a fixed order, values as written back to a config file.
  std::vector<std::pair<std::string, std::string>> resolved() const;
  /// Constraint violations of the whole configuration.
  std::vector<std::string> violations() const;
};

/// Parses INI text. Throws ParseError (with line) or ValidationError.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

/// Serializes back to INI text that parse_config accepts.
std::string to_ini(const RunConfig& cfg);

}  // namespace chlab
