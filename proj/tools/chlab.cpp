#include <atomic>
#include <csignal>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "chlab/config.hpp"
#include "chlab/experiments.hpp"

namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

int report_error(const chlab::Error& e) {
  const int code = chlab::exit_code_for(e.kind());
  nlohmann::json j = {{"error", chlab::to_string(e.kind())},
                      {"message", e.what()},
                      {"exit_code", code}};
  if (const auto* v = dynamic_cast<const chlab::ValidationError*>(&e)) {
    j["violations"] = v->violations();
  }
  if (const auto* p = dynamic_cast<const chlab::ParseError*>(&e)) j["line"] = p->line();
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chlab: viscous Cahn-Hilliard-Oono-chemotaxis laboratory"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  bool strict = false;
  std::uint64_t seed = 0;
  app.add_option("command", command, "run | steady | dispersion | continuation | compare | barrier")
      ->required()
      ->check(CLI::IsMember({"run", "steady", "dispersion", "continuation", "compare", "barrier"}));
  app.add_option("--config", config_path, "INI configuration file")->required();
  app.add_option("--out", out_dir, "output directory (overrides [output] directory)");
  app.add_flag("--strict", strict, "exit with code 4 when the command's check fails");
  auto* seed_opt = app.add_option("--seed", seed, "overrides [init] seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : chlab::kExitConfig;
  }

  std::signal(SIGINT, on_sigint);
  try {
    chlab::RunConfig cfg = chlab::load_config(config_path);
    if (seed_opt->count() > 0) cfg.init.seed = seed;
    chlab::CommandOptions opts;
    opts.out_dir = out_dir;
    opts.strict = strict;
    opts.stop = [] { return g_interrupted.load(); };
    const chlab::CommandResult r = chlab::run_command(*chlab::parse_command(command), cfg, opts);
    if (r.interrupted) {
      return report_error(chlab::Interrupted("interrupted; partial outputs marked truncated"));
    }
    if (r.check_failed) {
      std::cerr << nlohmann::json{{"check", r.check_message}, {"strict", strict},
                                  {"exit_code", r.exit_code}}.dump()
                << '\n';
    }
    std::cout << r.summary_path << '\n';
    return r.exit_code;
  } catch (const chlab::Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", "InternalError"}, {"message", e.what()},
                                {"exit_code", chlab::kExitSolver}}.dump()
              << '\n';
    return chlab::kExitSolver;
  }
}
