#include "chlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "chlab/diagnostics.hpp"
#include "chlab/io.hpp"
#include "chlab/neumann.hpp"

namespace chlab {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double node_uniform(std::uint64_t seed, std::uint64_t stream, std::size_t index) {
  const std::uint64_t key = splitmix64(seed ^ splitmix64(stream));
  const std::uint64_t z = splitmix64(key + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index));
  // 53 random bits mapped onto [-1, 1)
  return static_cast<double>(z >> 11) * 0x1.0p-52 - 1.0;
}

ScalarField random_fluctuation(const Grid& grid, std::uint64_t seed, std::uint64_t stream,
                               double amp) {
  ScalarField f(grid);
  if (amp == 0.0) return f;
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = node_uniform(seed, stream, i);
  f = remove_mean(std::move(f));
  const double s = f.sup_norm();
  if (s > 0.0) f *= amp / s;
  return f;
}

ScalarField cosine_mode(const Grid& grid, int k) {
  ScalarField f(grid);
  const double L = grid.lengths()[0];
  for (std::size_t i = 0; i < f.size(); ++i) {
    const int ix = grid.axis_index(i, 0);
    f[i] = std::cos(M_PI * k * grid.coordinate(0, ix) / L);
  }
  return f;
}

namespace {

// random streams
constexpr std::uint64_t kStreamPhi = 1;
constexpr std::uint64_t kStreamSigma = 2;
constexpr std::uint64_t kStreamCompare = 3;

ScalarField profile_fluctuation(const RunConfig& cfg, const Grid& grid, std::uint64_t stream,
                                double amp) {
  if (cfg.init.profile == InitProfile::SingleMode) {
    ScalarField f = remove_mean(cosine_mode(grid, cfg.init.mode));
    f *= amp;
    return f;
  }
  return random_fluctuation(grid, cfg.init.seed, stream, amp);
}

}  // namespace

State build_initial_state(const RunConfig& cfg) {
  const Grid grid = cfg.make_grid();
  ScalarField phi(grid);
  ScalarField sigma(grid);
  if (cfg.init.profile == InitProfile::File) {
    Snapshot snap = read_snapshot(cfg.init.file);
    if (!(snap.phi.grid() == grid)) {
      throw ValidationError({"init.file: snapshot grid does not match the [grid] section"});
    }
    phi = std::move(snap.phi);
    sigma = std::move(snap.sigma);
  } else {
    phi = profile_fluctuation(cfg, grid, kStreamPhi, cfg.init.phi_amp);
    phi += cfg.init.phi_mean;
    sigma = profile_fluctuation(cfg, grid, kStreamSigma, cfg.init.sigma_amp);
    sigma += cfg.init.sigma_mean;
  }
  if (cfg.time.scheme == Scheme::ExactLog) phi = admit_initial_phi(std::move(phi));
  return State::initial(std::move(phi), std::move(sigma), 0.0);
}

namespace {

std::array<std::complex<double>, 2> sorted_pair(std::complex<double> a, std::complex<double> b) {
  if (b.real() > a.real() || (b.real() == a.real() && b.imag() > a.imag())) std::swap(a, b);
  return {a, b};
}

/// Eigenvalue logs of the one-step amplification matrix divided by dt.
std::array<std::complex<double>, 2> one_step_rates(const Grid& grid, const ModelParams& mp,
                                                   const SolverConfig& cfg, const ScalarField& v,
                                                   double sigma_bar, double amplitude) {
  const double vv = inner(v, v);
  // central differences in the amplitude cancel the quadratic response
  double G[2][2];
  for (int col = 0; col < 2; ++col) {
    double coef[2][2];
    for (int s = 0; s < 2; ++s) {
      const double a = s == 0 ? amplitude : -amplitude;
      ScalarField phi(grid, mp.c0);
      ScalarField sigma(grid, sigma_bar);
      (col == 0 ? phi : sigma).axpy(a, v);
      const State next = advance(State::initial(phi, sigma), mp, cfg);
      ScalarField dphi = next.phi;
      dphi += -mp.c0;
      ScalarField dsig = next.sigma;
      dsig += -sigma_bar;
      coef[s][0] = inner(dphi, v) / vv;
      coef[s][1] = inner(dsig, v) / vv;
    }
    G[0][col] = (coef[0][0] - coef[1][0]) / (2.0 * amplitude);
    G[1][col] = (coef[0][1] - coef[1][1]) / (2.0 * amplitude);
  }
  const std::complex<double> tr = G[0][0] + G[1][1];
  const std::complex<double> det = G[0][0] * G[1][1] - G[0][1] * G[1][0];
  const std::complex<double> root = std::sqrt(tr * tr - 4.0 * det);
  const std::complex<double> big = 0.5 * (tr + (tr.real() >= 0.0 ? root : -root));
  const std::complex<double> small = big != 0.0 ? det / big : 0.0;
  return sorted_pair(std::log(big) / cfg.dt, std::log(small) / cfg.dt);
}

}  // namespace

ModeRates measure_mode_rates(const Grid& grid, const ModelParams& mp, const SolverConfig& cfg,
                             int k, double sigma_bar, double amplitude) {
  if (k < 1 || k >= grid.n_per_axis()[0]) {
    throw std::invalid_argument("measure_mode_rates: mode index out of range");
  }
  const ScalarField v = cosine_mode(grid, k);
  SolverConfig c = cfg;
  c.newton_tol = std::min(cfg.newton_tol, 1e-14);
  c.linear_rel_tol = std::min(cfg.linear_rel_tol, 1e-12);

  ModeRates out;
  out.k = k;
  out.q = grid.axis_eigenvalues(0)[k];
  out.raw = one_step_rates(grid, mp, c, v, sigma_bar, amplitude);
  c.dt = 0.5 * cfg.dt;
  const auto half = one_step_rates(grid, mp, c, v, sigma_bar, amplitude);
  // Richardson extrapolation removes the first-order time-step bias
  for (int i = 0; i < 2; ++i) out.measured[i] = 2.0 * half[i] - out.raw[i];
  out.measured = sorted_pair(out.measured[0], out.measured[1]);
  const auto th = dispersion_rates(mp, out.q);
  out.theory = sorted_pair(th[0], th[1]);
  for (int i = 0; i < 2; ++i) {
    const double scale = std::abs(out.theory[i]);
    const double err = std::abs(out.measured[i] - out.theory[i]);
    out.rel_err = std::max(out.rel_err, scale > 0.0 ? err / scale : err);
  }
  return out;
}

const char* to_string(Command c) {
  switch (c) {
    case Command::Run: return "run";
    case Command::Steady: return "steady";
    case Command::Dispersion: return "dispersion";
    case Command::Continuation: return "continuation";
    case Command::Compare: return "compare";
    case Command::Barrier: return "barrier";
  }
  return "run";
}

std::optional<Command> parse_command(const std::string& s) {
  for (Command c : {Command::Run, Command::Steady, Command::Dispersion, Command::Continuation,
                    Command::Compare, Command::Barrier}) {
    if (s == to_string(c)) return c;
  }
  return std::nullopt;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
    case ErrorKind::IoError:
      return kExitConfig;
    case ErrorKind::Interrupted:
      return kExitInterrupted;
    default:
      return kExitSolver;
  }
}

namespace {

using Header = std::vector<std::pair<std::string, std::string>>;

json record_json(const DiagnosticsRecord& r) {
  return {{"t", r.t},
          {"phi_mean", r.phi_mean},
          {"sigma_mean", r.sigma_mean},
          {"E", r.E},
          {"F", r.F},
          {"D", r.D},
          {"energy_balance_residual", r.energy_balance_residual},
          {"min_phi", r.min_phi},
          {"max_phi", r.max_phi},
          {"delta", r.delta},
          {"newton_iters", r.newton_iters},
          {"htilde_sup", r.htilde_sup}};
}

json steady_json(const SteadyReport& s) {
  return {{"residual_phi", s.residual_phi},     {"residual_sigma", s.residual_sigma},
          {"mean_phi_err", s.mean_phi_err},     {"mean_sigma_err", s.mean_sigma_err},
          {"delta_inf", s.delta_inf},           {"rate", s.rate},
          {"t_final", s.t_final},               {"steps", s.steps},
          {"converged", s.converged},           {"wall_time", s.wall_time}};
}

/// Shared plumbing of one command: output directory, headers, stop flag, summary.
class Session {
 public:
  Session(Command cmd, const RunConfig& cfg, const CommandOptions& opts)
      : cmd_(cmd), cfg_(cfg), opts_(opts), clock0_(std::chrono::steady_clock::now()) {
    dir_ = opts.out_dir.empty() ? fs::path(cfg.output.directory) : fs::path(opts.out_dir);
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    header_.emplace_back("command", to_string(cmd));
    for (auto& kv : cfg.resolved()) header_.push_back(kv);
    std::ofstream ini(path("config.ini"), std::ios::binary | std::ios::trunc);
    if (!ini) throw IoError("cannot write " + path("config.ini"));
    ini << "; command = " << to_string(cmd) << '\n' << to_ini(cfg);
    summary_["command"] = to_string(cmd);
    json conf = json::object();
    for (auto& [k, v] : cfg.resolved()) conf[k] = v;
    summary_["config"] = conf;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  const Header& header() const { return header_; }
  json& summary() { return summary_; }

  StopRequested stop() {
    return [this] {
      if (!interrupted_ && opts_.stop && opts_.stop()) interrupted_ = true;
      return interrupted_;
    };
  }
  bool interrupted() const { return interrupted_; }

  CommandResult finish(bool check_failed = false, const std::string& check_message = {}) {
    CommandResult r;
    r.interrupted = interrupted_;
    r.check_failed = check_failed;
    r.check_message = check_message;
    r.summary_path = path("summary.json");
    if (interrupted_) {
      r.exit_code = kExitInterrupted;
    } else if (check_failed && opts_.strict) {
      r.exit_code = kExitCheck;
    }
    summary_["interrupted"] = interrupted_;
    summary_["check"] = {{"passed", !check_failed}, {"message", check_message}};
    summary_["exit_code"] = r.exit_code;
    write_summary();
    return r;
  }

  /// Records a failure in the summary before the error propagates.
  void fail(const Error& e) {
    summary_["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
    summary_["exit_code"] = exit_code_for(e.kind());
    summary_["interrupted"] = false;
    write_summary();
  }

 private:
  void write_summary() {
    summary_["timing"] = {
        {"wall_seconds",
         std::chrono::duration<double>(std::chrono::steady_clock::now() - clock0_).count()}};
    std::ofstream out(path("summary.json"), std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path("summary.json"));
    out << summary_.dump(2) << '\n';
  }

  Command cmd_;
  const RunConfig& cfg_;
  const CommandOptions& opts_;
  std::chrono::steady_clock::time_point clock0_;
  fs::path dir_;
  Header header_;
  json summary_;
  bool interrupted_ = false;
};

/// Diagnostics CSV that writes every `every`-th step and always the last one.
class DiagnosticsLog {
 public:
  DiagnosticsLog(const Session& s, int every, const std::string& name = "diagnostics.csv")
      : csv_(s.path(name), s.header(), diagnostics_columns()), every_(every) {}

  void add(const DiagnosticsRecord& r, long step) {
    last_ = r;
    last_step_ = step;
    if (step % every_ == 0) {
      csv_.row(diagnostics_cells(r));
      written_ = step;
    }
  }

  void close(const std::string& truncation = {}) {
    if (last_step_ >= 0 && written_ != last_step_) csv_.row(diagnostics_cells(last_));
    written_ = last_step_;
    if (!truncation.empty()) csv_.mark_truncated(truncation);
    csv_.flush();
  }

  const DiagnosticsRecord& last() const { return last_; }

 private:
  CsvWriter csv_;
  int every_;
  DiagnosticsRecord last_;
  long last_step_ = -1;
  long written_ = -1;
};

std::string snapshot_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "snap_%08ld.chsnap", step);
  return buf;
}

ModelParams run_model(const RunConfig& cfg) {
  ModelParams mp = cfg.model;
  if (cfg.time.scheme == Scheme::Regularized) mp.potential.kappa = cfg.time.kappa_schedule.back();
  return mp;
}

bool exact_with_eps(const RunConfig& cfg) {
  return cfg.time.scheme == Scheme::ExactLog && cfg.model.eps > 0.0;
}

/// Runs `body`; on a library error marks the partial output and records the failure.
template <class Body>
CommandResult guarded(Session& s, Body&& body, const std::function<void(const std::string&)>& truncate) {
  try {
    return body();
  } catch (const Error& e) {
    truncate(std::string(to_string(e.kind())) + ": " + e.what());
    s.fail(e);
    throw;
  }
}

CommandResult cmd_run(const RunConfig& cfg, const CommandOptions& opts) {
  Session s(Command::Run, cfg, opts);
  const ModelParams mp = run_model(cfg);
  const SolverConfig solver = cfg.solver();
  const bool with_h = exact_with_eps(cfg);
  DiagnosticsLog log(s, cfg.output.csv_every);
  State state = build_initial_state(cfg);
  log.add(make_record(state, mp, with_h), 0);
  if (cfg.output.snapshot_every > 0) {
    write_snapshot(s.path(snapshot_name(0)), state.phi, state.sigma, state.t);
  }
  double max_energy_increase = -std::numeric_limits<double>::infinity();
  double prev_E = log.last().E;

  auto truncate = [&](const std::string& why) { log.close(why); };
  return guarded(s, [&] {
    State final_state = run(
        state, mp, solver, cfg.time.t_end,
        [&](const State& st) {
          const DiagnosticsRecord rec = make_record(st, mp, with_h);
          max_energy_increase = std::max(max_energy_increase, rec.E - prev_E);
          prev_E = rec.E;
          log.add(rec, st.step_index);
          if (cfg.output.snapshot_every > 0 && st.step_index % cfg.output.snapshot_every == 0) {
            write_snapshot(s.path(snapshot_name(st.step_index)), st.phi, st.sigma, st.t);
          }
        },
        s.stop());
    log.close(s.interrupted() ? "interrupted" : "");
    write_snapshot(s.path("final.chsnap"), final_state.phi, final_state.sigma, final_state.t);
    s.summary()["final"] = record_json(log.last());
    s.summary()["steps"] = final_state.step_index;
    s.summary()["max_energy_increase"] = max_energy_increase;
    return s.finish();
  }, truncate);
}

CommandResult cmd_steady(const RunConfig& cfg, const CommandOptions& opts) {
  Session s(Command::Steady, cfg, opts);
  const ModelParams mp = run_model(cfg);
  DiagnosticsLog log(s, cfg.output.csv_every);
  State state = build_initial_state(cfg);
  log.add(make_record(state, mp, false), 0);
  auto truncate = [&](const std::string& why) { log.close(why); };
  return guarded(s, [&] {
    RelaxResult rr = relax_to_steady(state, mp, cfg.solver(), cfg.steady, s.stop());
    for (std::size_t i = 0; i < rr.history.size(); ++i) {
      log.add(rr.history[i], static_cast<long>(i + 1));
    }
    log.close(s.interrupted() ? "interrupted" : "");
    write_snapshot(s.path("final.chsnap"), rr.state.phi, rr.state.sigma, rr.state.t);
    s.summary()["final"] = record_json(log.last());
    s.summary()["steady"] = steady_json(rr.report);
    const bool failed = !rr.report.converged;
    return s.finish(failed, failed ? "SteadyNotReached" : "");
  }, truncate);
}

CommandResult cmd_dispersion(const RunConfig& cfg, const CommandOptions& opts) {
  Session s(Command::Dispersion, cfg, opts);
  const ModelParams mp = run_model(cfg);
  const SolverConfig solver = cfg.solver();
  const Grid grid = cfg.make_grid();
  CsvWriter csv(s.path("dispersion.csv"), s.header(),
                {"k", "q", "q_dt", "theory_re_1", "theory_im_1", "theory_re_2", "theory_im_2",
                 "measured_re_1", "measured_im_1", "measured_re_2", "measured_im_2", "one_step_re_1",
                 "one_step_re_2", "rel_err"});
  auto truncate = [&](const std::string& why) { csv.mark_truncated(why); };
  return guarded(s, [&] {
    const auto stop = s.stop();
    double worst = 0.0;
    int checked = 0;
    json modes = json::array();
    for (int k = 1; k < grid.n_per_axis()[0]; ++k) {
      if (stop()) break;
      const ModeRates m = measure_mode_rates(grid, mp, solver, k, cfg.init.sigma_mean);
      const double q_dt = m.q * solver.dt;
      csv.row({std::to_string(k), format_double(m.q), format_double(q_dt),
               format_double(m.theory[0].real()), format_double(m.theory[0].imag()),
               format_double(m.theory[1].real()), format_double(m.theory[1].imag()),
               format_double(m.measured[0].real()), format_double(m.measured[0].imag()),
               format_double(m.measured[1].real()), format_double(m.measured[1].imag()),
               format_double(m.raw[0].real()), format_double(m.raw[1].real()),
               format_double(m.rel_err)});
      if (q_dt <= 0.01) {
        ++checked;
        worst = std::max(worst, m.rel_err);
      }
      modes.push_back({{"k", k}, {"q", m.q}, {"rel_err", m.rel_err}});
    }
    if (s.interrupted()) csv.mark_truncated("interrupted");
    csv.flush();
    s.summary()["modes"] = modes;
    s.summary()["checked_modes"] = checked;
    s.summary()["max_rel_err_checked"] = worst;
    const bool failed = worst > 0.02;
    return s.finish(failed, failed ? "DispersionMismatch" : "");
  }, truncate);
}

CommandResult cmd_continuation(const RunConfig& cfg, const CommandOptions& opts) {
  Session s(Command::Continuation, cfg, opts);
  RunConfig exact_cfg = cfg;
  exact_cfg.time.scheme = Scheme::ExactLog;
  const State state0 = build_initial_state(exact_cfg);
  CsvWriter csv(s.path("continuation.csv"), s.header(),
                {"kappa", "err_l2", "err_linf", "min_phi", "max_phi", "newton_iters"});
  auto truncate = [&](const std::string& why) { csv.mark_truncated(why); };
  return guarded(s, [&] {
    const auto stop = s.stop();
    SolverConfig solver = exact_cfg.solver();
    long iters = 0;
    auto count = [&](const State& st) { iters += st.stats.newton_iters; };
    const State ref = run(state0, cfg.model, solver, cfg.time.t_end, count, stop);
    write_snapshot(s.path("exact.chsnap"), ref.phi, ref.sigma, ref.t);
    s.summary()["exact"] = {{"newton_iters", iters}, {"t", ref.t}};

    solver.scheme = Scheme::Regularized;
    std::vector<double> errs;
    json legs = json::array();
    for (std::size_t i = 0; i < cfg.time.kappa_schedule.size() && !stop(); ++i) {
      ModelParams mp = cfg.model;
      mp.potential.kappa = cfg.time.kappa_schedule[i];
      iters = 0;
      const State leg = run(state0, mp, solver, cfg.time.t_end, count, stop);
      if (s.interrupted()) break;
      const ScalarField diff = leg.phi - ref.phi;
      const double e2 = l2_norm(diff);
      const double einf = diff.sup_norm();
      errs.push_back(e2);
      csv.row({format_double(mp.potential.kappa), format_double(e2), format_double(einf),
               format_double(leg.phi.min()), format_double(leg.phi.max()), std::to_string(iters)});
      char name[32];
      std::snprintf(name, sizeof(name), "kappa_%02zu.chsnap", i);
      write_snapshot(s.path(name), leg.phi, leg.sigma, leg.t);
      legs.push_back({{"kappa", mp.potential.kappa}, {"err_l2", e2}, {"err_linf", einf}});
    }
    if (s.interrupted()) csv.mark_truncated("interrupted");
    csv.flush();
    bool monotone = true;
    for (std::size_t i = 1; i < errs.size(); ++i) monotone = monotone && errs[i] <= errs[i - 1];
    // identically zero errors: the regularization never activated
    const double ratio = errs.size() >= 2 && errs.front() > 0.0 ? errs.back() / errs.front() : 0.0;
    s.summary()["legs"] = legs;
    s.summary()["monotone"] = monotone;
    s.summary()["final_over_first"] = ratio;
    const bool failed = errs.size() < 2 || !monotone || ratio > 0.5;
    return s.finish(failed, failed ? "ContinuationNotConverging" : "");
  }, truncate);
}

CommandResult cmd_compare(const RunConfig& cfg, const CommandOptions& opts) {
  Session s(Command::Compare, cfg, opts);
  const ModelParams mp = run_model(cfg);
  const SolverConfig solver = cfg.solver();
  State a = build_initial_state(cfg);
  ScalarField phi_b = a.phi;
  phi_b.axpy(1.0, random_fluctuation(a.grid(), cfg.init.seed, kStreamCompare, cfg.compare.eta));
  if (cfg.time.scheme == Scheme::ExactLog) phi_b = admit_initial_phi(std::move(phi_b));
  State b = State::initial(std::move(phi_b), a.sigma, a.t);

  DiagnosticsLog log(s, cfg.output.csv_every);
  CsvWriter csv(s.path("compare.csv"), s.header(),
                {"t", "d_phi", "d_sigma", "d_total", "amplification"});
  auto truncate = [&](const std::string& why) {
    log.close(why);
    csv.mark_truncated(why);
  };
  return guarded(s, [&] {
    const auto stop = s.stop();
    const bool with_h = exact_with_eps(cfg);
    const DualDistance d0 = dual_distance(a, b, mp);
    double max_amp = d0.d_total > 0.0 ? 1.0 : 0.0;
    auto emit = [&](const State& x, const DualDistance& d) {
      const double amp = d0.d_total > 0.0 ? d.d_total / d0.d_total : 0.0;
      max_amp = std::max(max_amp, amp);
      csv.row({format_double(x.t), format_double(d.d_phi), format_double(d.d_sigma),
               format_double(d.d_total), format_double(amp)});
    };
    log.add(make_record(a, mp, with_h), 0);
    emit(a, d0);
    DualDistance d = d0;
    const double span = (cfg.time.t_end - a.t) / solver.dt;
    const long steps = span <= 0.0 ? 0 : static_cast<long>(std::ceil(span - 1e-9));
    const double t0 = a.t;
    for (long k = 1; k <= steps && !stop(); ++k) {
      a = advance(a, mp, solver);
      b = advance(b, mp, solver);
      a.t = b.t = t0 + static_cast<double>(k) * solver.dt;
      d = dual_distance(a, b, mp);
      log.add(make_record(a, mp, with_h), k);
      if (k % cfg.output.csv_every == 0 || k == steps) {
        emit(a, d);
      }
    }
    const std::string mark = s.interrupted() ? "interrupted" : "";
    log.close(mark);
    if (!mark.empty()) csv.mark_truncated(mark);
    csv.flush();
    write_snapshot(s.path("final_a.chsnap"), a.phi, a.sigma, a.t);
    write_snapshot(s.path("final_b.chsnap"), b.phi, b.sigma, b.t);
    s.summary()["final"] = record_json(log.last());
    s.summary()["d0"] = d0.d_total;
    s.summary()["d_final"] = d.d_total;
    s.summary()["amplification_final"] = d0.d_total > 0.0 ? d.d_total / d0.d_total : 0.0;
    s.summary()["amplification_max"] = max_amp;
    return s.finish();
  }, truncate);
}

CommandResult cmd_barrier(const RunConfig& cfg, const CommandOptions& opts) {
  if (cfg.time.scheme != Scheme::ExactLog || !(cfg.model.eps > 0.0)) {
    throw ValidationError({"barrier: requires scheme = exact-log and eps > 0"});
  }
  Session s(Command::Barrier, cfg, opts);
  const ModelParams mp = cfg.model;
  const SolverConfig solver = cfg.solver();
  DiagnosticsLog log(s, cfg.output.csv_every);
  State state = build_initial_state(cfg);
  std::vector<BarrierSample> samples{barrier_sample(state, mp)};
  log.add(make_record(state, mp, true), 0);
  auto truncate = [&](const std::string& why) { log.close(why); };
  return guarded(s, [&] {
    const State final_state = run(
        state, mp, solver, cfg.time.t_end,
        [&](const State& st) {
          DiagnosticsRecord rec = make_record(st, mp, true);
          samples.push_back({st.t, rec.min_phi, rec.max_phi, rec.htilde_sup});
          log.add(rec, st.step_index);
        },
        s.stop());
    log.close(s.interrupted() ? "interrupted" : "");
    write_snapshot(s.path("final.chsnap"), final_state.phi, final_state.sigma, final_state.t);

    const double delta0 =
        cfg.barrier.delta0 > 0.0 ? cfg.barrier.delta0 : 1.0 - state.phi.sup_norm();
    const BarrierTrace tr = barrier_check(samples, mp, delta0, solver.dt);
    CsvWriter csv(s.path("barrier.csv"), s.header(),
                  {"t", "min_phi", "max_phi", "y_minus", "y_plus"});
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      if (static_cast<long>(i) % cfg.output.csv_every != 0 && i + 1 != tr.t.size()) continue;
      csv.row(std::vector<double>{tr.t[i], tr.min_phi[i], tr.max_phi[i], tr.y_minus[i],
                                  tr.y_plus[i]});
    }
    if (s.interrupted()) csv.mark_truncated("interrupted");
    csv.flush();
    s.summary()["final"] = record_json(log.last());
    s.summary()["barrier"] = {{"C_h", tr.C_h},          {"delta0", tr.delta0},
                              {"delta", tr.delta},      {"holds", tr.holds},
                              {"violations", tr.violations}, {"worst_excess", tr.worst_excess}};
    return s.finish(!tr.holds, tr.holds ? "" : "SandwichViolated");
  }, truncate);
}

}  // namespace

CommandResult run_command(Command cmd, const RunConfig& cfg, const CommandOptions& opts) {
  if (cmd == Command::Compare && cfg.time.scheme == Scheme::ExactLog &&
      cfg.init.profile != InitProfile::File &&
      !(std::abs(cfg.init.phi_mean) + cfg.init.phi_amp + cfg.compare.eta <= 1.0 - 1e-6)) {
    throw ValidationError({"compare: |phi_mean| + phi_amp + eta must be <= 1 - 1e-6"});
  }
  switch (cmd) {
    case Command::Run: return cmd_run(cfg, opts);
    case Command::Steady: return cmd_steady(cfg, opts);
    case Command::Dispersion: return cmd_dispersion(cfg, opts);
    case Command::Continuation: return cmd_continuation(cfg, opts);
    case Command::Compare: return cmd_compare(cfg, opts);
    case Command::Barrier: return cmd_barrier(cfg, opts);
  }
  return {};
}

}  // namespace chlab
