#include "chlab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "chlab/io.hpp"

namespace chlab {

namespace pt = boost::property_tree;

ParseError::ParseError(const std::string& source, unsigned long line, const std::string& message)
    : Error(ErrorKind::ParseError,
            source + ":" + std::to_string(line) + ": " + message),
      line_(line) {}

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(ErrorKind::ValidationError, "invalid configuration: " + join(violations, "; ")),
      violations_(std::move(violations)) {}

namespace {

const char* profile_name(InitProfile p) {
  switch (p) {
    case InitProfile::Random: return "random";
    case InitProfile::SingleMode: return "single_mode";
    case InitProfile::File: return "file";
  }
  return "random";
}

template <class T>
std::string list_to_string(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

/// Reads typed values out of the ptree and collects every problem.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  void real(const std::string& key, double& dst) {
    if (auto s = raw(key)) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(*s, &pos);
        if (pos != s->size()) throw std::invalid_argument("trailing");
        dst = v;
      } catch (const std::exception&) {
        problems_.push_back(key + ": expected a real number, got '" + *s + "'");
      }
    }
  }

  void integer(const std::string& key, int& dst) {
    if (auto s = raw(key)) {
      try {
        std::size_t pos = 0;
        const long v = std::stol(*s, &pos);
        if (pos != s->size()) throw std::invalid_argument("trailing");
        dst = static_cast<int>(v);
      } catch (const std::exception&) {
        problems_.push_back(key + ": expected an integer, got '" + *s + "'");
      }
    }
  }

  void u64(const std::string& key, std::uint64_t& dst) {
    if (auto s = raw(key)) {
      try {
        std::size_t pos = 0;
        if (!s->empty() && (*s)[0] == '-') throw std::invalid_argument("negative");
        const unsigned long long v = std::stoull(*s, &pos);
        if (pos != s->size()) throw std::invalid_argument("trailing");
        dst = v;
      } catch (const std::exception&) {
        problems_.push_back(key + ": expected an unsigned 64-bit integer, got '" + *s + "'");
      }
    }
  }

  void text(const std::string& key, std::string& dst) {
    if (auto s = raw(key)) dst = *s;
  }

  void reals(const std::string& key, std::vector<double>& dst) {
    if (auto s = raw(key)) {
      std::vector<double> out;
      for (const auto& item : split_list(*s)) {
        try {
          std::size_t pos = 0;
          out.push_back(std::stod(item, &pos));
          if (pos != item.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          problems_.push_back(key + ": expected a list of reals, got '" + *s + "'");
          return;
        }
      }
      dst = std::move(out);
    }
  }

  void integers(const std::string& key, std::vector<int>& dst) {
    if (auto s = raw(key)) {
      std::vector<int> out;
      for (const auto& item : split_list(*s)) {
        try {
          std::size_t pos = 0;
          out.push_back(std::stoi(item, &pos));
          if (pos != item.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
          problems_.push_back(key + ": expected a list of integers, got '" + *s + "'");
          return;
        }
      }
      dst = std::move(out);
    }
  }

  void add_problem(std::string p) { problems_.push_back(std::move(p)); }

  /// Keys present in the file but never read.
  void check_unknown() {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) {
        problems_.push_back("key '" + section + "' must belong to a [section]");
        continue;
      }
      for (const auto& [key, value] : body) {
        const std::string full = section + "." + key;
        if (!seen_.count(full)) problems_.push_back("unknown key [" + section + "] " + key);
      }
    }
  }

  std::vector<std::string>& problems() { return problems_; }

 private:
  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    auto node = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!node) return std::nullopt;
    std::string s = *node;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(0, 1);
    return s;
  }

  const pt::ptree& tree_;
  std::set<std::string> seen_;
  std::vector<std::string> problems_;
};

}  // namespace

Grid RunConfig::make_grid() const { return Grid(grid.n, grid.lengths); }

SolverConfig RunConfig::solver() const {
  SolverConfig s;
  s.dt = time.dt;
  s.scheme = time.scheme;
  s.newton_tol = time.newton_tol;
  s.newton_max_iters = time.newton_max_iters;
  s.barrier_margin = time.barrier_margin;
  s.kappa_schedule = time.kappa_schedule;
  return s;
}

std::vector<std::pair<std::string, std::string>> RunConfig::resolved() const {
  std::vector<std::pair<std::string, std::string>> kv;
  auto put = [&](const std::string& k, const std::string& v) { kv.emplace_back(k, v); };
  auto num = [&](const std::string& k, double v) { put(k, format_double(v)); };
  put("grid.ndim", std::to_string(grid.ndim));
  put("grid.n", list_to_string(grid.n));
  put("grid.lengths", list_to_string(grid.lengths));
  num("model.A", model.A);
  num("model.B", model.B);
  num("model.eps", model.eps);
  num("model.chi", model.chi);
  num("model.alpha", model.alpha);
  num("model.c0", model.c0);
  num("model.theta", model.potential.theta);
  num("model.theta0", model.potential.theta0);
  num("model.a0", model.potential.a0);
  num("time.dt", time.dt);
  num("time.t_end", time.t_end);
  put("time.scheme", to_string(time.scheme));
  put("time.kappa_schedule", list_to_string(time.kappa_schedule));
  num("time.newton_tol", time.newton_tol);
  put("time.newton_max_iters", std::to_string(time.newton_max_iters));
  num("time.barrier_margin", time.barrier_margin);
  num("init.phi_mean", init.phi_mean);
  num("init.phi_amp", init.phi_amp);
  num("init.sigma_mean", init.sigma_mean);
  num("init.sigma_amp", init.sigma_amp);
  put("init.seed", std::to_string(init.seed));
  put("init.profile", profile_name(init.profile));
  put("init.mode", std::to_string(init.mode));
  put("init.file", init.file);
  put("output.directory", output.directory);
  put("output.csv_every", std::to_string(output.csv_every));
  put("output.snapshot_every", std::to_string(output.snapshot_every));
  num("steady.tol_rate", steady.rate);
  num("steady.tol_residual", steady.residual);
  num("steady.t_max", steady.t_max);
  num("compare.eta", compare.eta);
  num("barrier.delta0", barrier.delta0);
  return kv;
}

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> out = model.violations();

  if (grid.ndim < 1 || grid.ndim > 3) out.emplace_back("grid.ndim must be 1, 2 or 3");
  if (static_cast<int>(grid.n.size()) != grid.ndim) {
    out.emplace_back("grid.n must list one node count per axis");
  }
  if (static_cast<int>(grid.lengths.size()) != grid.ndim) {
    out.emplace_back("grid.lengths must list one length per axis");
  }
  for (int n : grid.n) {
    if (n < 3) out.emplace_back("grid.n entries must be >= 3");
  }
  for (double l : grid.lengths) {
    if (!(l > 0.0)) out.emplace_back("grid.lengths entries must be > 0");
  }

  for (auto& v : solver().violations()) out.push_back("time: " + v);
  if (!(time.t_end >= 0.0)) out.emplace_back("time.t_end must be >= 0");
  for (double k : time.kappa_schedule) {
    if (!(k < model.potential.a0)) {
      out.emplace_back("time.kappa_schedule entries must lie in (0, a0)");
      break;
    }
  }
  if (time.scheme == Scheme::Regularized && time.kappa_schedule.empty()) {
    out.emplace_back("time.kappa_schedule must be non-empty for the regularized scheme");
  }

  if (!(init.phi_amp >= 0.0)) out.emplace_back("init.phi_amp must be >= 0");
  if (!(init.sigma_amp >= 0.0)) out.emplace_back("init.sigma_amp must be >= 0");
  if (init.profile != InitProfile::File && time.scheme == Scheme::ExactLog &&
      !(std::abs(init.phi_mean) + init.phi_amp <= 1.0 - 1e-6)) {
    out.emplace_back("init: |phi_mean| + phi_amp must be <= 1 - 1e-6 for the exact-log scheme");
  }
  if (init.profile == InitProfile::SingleMode && !grid.n.empty() &&
      (init.mode < 1 || init.mode >= grid.n[0])) {
    out.emplace_back("init.mode must lie in [1, n_x)");
  }
  if (init.profile == InitProfile::File && init.file.empty()) {
    out.emplace_back("init.file is required for profile = file");
  }

  if (output.csv_every < 1) out.emplace_back("output.csv_every must be >= 1");
  if (output.snapshot_every < 0) out.emplace_back("output.snapshot_every must be >= 0");
  if (!(steady.rate > 0.0)) out.emplace_back("steady.tol_rate must be > 0");
  if (!(steady.residual > 0.0)) out.emplace_back("steady.tol_residual must be > 0");
  if (!(steady.t_max > 0.0)) out.emplace_back("steady.t_max must be > 0");
  if (!(compare.eta >= 0.0)) out.emplace_back("compare.eta must be >= 0");
  if (!(barrier.delta0 >= 0.0 && barrier.delta0 < 1.0)) {
    out.emplace_back("barrier.delta0 must lie in [0, 1)");
  }
  return out;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  pt::ptree tree;
  {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ParseError(source, e.line(), e.message());
    }
  }

  RunConfig cfg;
  Reader rd(tree);
  rd.integer("grid.ndim", cfg.grid.ndim);
  rd.integers("grid.n", cfg.grid.n);
  rd.reals("grid.lengths", cfg.grid.lengths);
  // a single value applies to every axis
  if (cfg.grid.ndim >= 1 && cfg.grid.ndim <= 3) {
    if (cfg.grid.n.size() == 1) cfg.grid.n.assign(cfg.grid.ndim, cfg.grid.n[0]);
    if (cfg.grid.lengths.size() == 1) cfg.grid.lengths.assign(cfg.grid.ndim, cfg.grid.lengths[0]);
  }

  rd.real("model.A", cfg.model.A);
  rd.real("model.B", cfg.model.B);
  rd.real("model.eps", cfg.model.eps);
  rd.real("model.chi", cfg.model.chi);
  rd.real("model.alpha", cfg.model.alpha);
  rd.real("model.c0", cfg.model.c0);
  rd.real("model.theta", cfg.model.potential.theta);
  rd.real("model.theta0", cfg.model.potential.theta0);
  rd.real("model.a0", cfg.model.potential.a0);

  rd.real("time.dt", cfg.time.dt);
  rd.real("time.t_end", cfg.time.t_end);
  std::string scheme = to_string(cfg.time.scheme);
  rd.text("time.scheme", scheme);
  if (auto s = parse_scheme(scheme)) {
    cfg.time.scheme = *s;
  } else {
    rd.add_problem("time.scheme must be 'exact-log' or 'regularized', got '" + scheme + "'");
  }
  rd.reals("time.kappa_schedule", cfg.time.kappa_schedule);
  rd.real("time.newton_tol", cfg.time.newton_tol);
  rd.integer("time.newton_max_iters", cfg.time.newton_max_iters);
  rd.real("time.barrier_margin", cfg.time.barrier_margin);

  rd.real("init.phi_mean", cfg.init.phi_mean);
  rd.real("init.phi_amp", cfg.init.phi_amp);
  rd.real("init.sigma_mean", cfg.init.sigma_mean);
  rd.real("init.sigma_amp", cfg.init.sigma_amp);
  rd.u64("init.seed", cfg.init.seed);
  rd.integer("init.mode", cfg.init.mode);
  rd.text("init.file", cfg.init.file);
  std::string profile = profile_name(cfg.init.profile);
  rd.text("init.profile", profile);
  static const std::regex mode_re(R"(single_mode\(\s*(-?\d+)\s*\))");
  std::smatch m;
  if (profile == "random") {
    cfg.init.profile = InitProfile::Random;
  } else if (profile == "file") {
    cfg.init.profile = InitProfile::File;
  } else if (profile == "single_mode") {
    cfg.init.profile = InitProfile::SingleMode;
  } else if (std::regex_match(profile, m, mode_re)) {
    cfg.init.profile = InitProfile::SingleMode;
    cfg.init.mode = std::stoi(m[1].str());
  } else {
    rd.add_problem("init.profile must be random, single_mode(k) or file, got '" + profile + "'");
  }

  rd.text("output.directory", cfg.output.directory);
  rd.integer("output.csv_every", cfg.output.csv_every);
  rd.integer("output.snapshot_every", cfg.output.snapshot_every);

  rd.real("steady.tol_rate", cfg.steady.rate);
  rd.real("steady.tol_residual", cfg.steady.residual);
  rd.real("steady.t_max", cfg.steady.t_max);
  rd.real("compare.eta", cfg.compare.eta);
  rd.real("barrier.delta0", cfg.barrier.delta0);

  rd.check_unknown();
  std::vector<std::string> problems = std::move(rd.problems());
  for (auto& v : cfg.violations()) problems.push_back(std::move(v));
  if (!problems.empty()) throw ValidationError(std::move(problems));
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string to_ini(const RunConfig& cfg) {
  std::ostringstream os;
  std::string section;
  for (const auto& [key, value] : cfg.resolved()) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) os << '\n';
      os << '[' << sec << "]\n";
      section = sec;
    }
    if (value.empty()) continue;
    os << key.substr(dot + 1) << " = " << value << '\n';
  }
  return os.str();
}

}  // namespace chlab
