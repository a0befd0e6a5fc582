#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chlab/config.hpp"

namespace chlab {

/// splitmix64 output for a 64-bit input.
std::uint64_t splitmix64(std::uint64_t x);

/// Uniform value in [-1, 1) for (seed, stream, node index). Depends only on
/// the global node index, not on how the grid is traversed.
double node_uniform(std::uint64_t seed, std::uint64_t stream, std::size_t index);

/// Mean-free pseudo-random field with sup norm exactly `amp` (zero field for amp = 0).
ScalarField random_fluctuation(const Grid& grid, std::uint64_t seed, std::uint64_t stream,
                               double amp);

/// cos(pi k x / L_x), constant along the other axes.
ScalarField cosine_mode(const Grid& grid, int k);

/// Initial state from the [init] section. Exact-log runs pass phi through
/// admit_initial_phi. Throws ValidationError when a snapshot grid does not match [grid].
State build_initial_state(const RunConfig& cfg);

/// Rates of a cosine mode measured from the one-step amplification matrix of
/// the stepper about the constant state (c0, sigma_bar). `raw` is log(eig G)/dt
/// at the configured dt; `measured` is its Richardson extrapolation from dt and dt/2.
struct ModeRates {
  int k = 0;
  double q = 0.0;  // discrete symbol of -Delta_h for the mode
  std::array<std::complex<double>, 2> raw;
  std::array<std::complex<double>, 2> measured;
  std::array<std::complex<double>, 2> theory;  // dispersion_rates at q
  double rel_err = 0.0;                        // max_i |measured_i - theory_i| / |theory_i|
};

ModeRates measure_mode_rates(const Grid& grid, const ModelParams& mp, const SolverConfig& cfg,
                             int k, double sigma_bar = 0.0, double amplitude = 1e-6);

enum class Command { Run, Steady, Dispersion, Continuation, Compare, Barrier };

const char* to_string(Command c);
std::optional<Command> parse_command(const std::string& s);

struct CommandOptions {
  std::string out_dir;  // empty: cfg.output.directory
  bool strict = false;
  StopRequested stop;
};

struct CommandResult {
  int exit_code = 0;
  bool interrupted = false;
  bool check_failed = false;
  std::string check_message;
  std::string summary_path;
};

/// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitCheck = 4;
inline constexpr int kExitInterrupted = 130;

int exit_code_for(ErrorKind kind);

/// Runs one experiment and writes its artifacts into the output directory.
/// Solver errors are rethrown after the partial outputs are marked truncated.
CommandResult run_command(Command cmd, const RunConfig& cfg, const CommandOptions& opts);

}  // namespace chlab
