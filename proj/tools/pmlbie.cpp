#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pmlbie/cli.hpp"

int main(int argc, char** argv) {
  using namespace pmlbie;
  CLI::App app{"PML boundary integral solver for half-space and two-layer scattering"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir = "out";
  int threads = 0;
  const std::pair<const char*, const char*> subs[] = {
      {"solve", "single solve, error on the test screen"},
      {"convergence", "sweep over the N list"},
      {"pml-sweep", "sweep over PML thicknesses T / lambda"},
      {"field", "solve and evaluate the field on a grid"},
      {"selftest", "quick invariant checks of every module"},
  };
  for (const auto& [name, help] : subs) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config", config_path, "JSON run configuration (defaults when omitted)");
    s->add_option("--out", out_dir, "output directory")->capture_default_str();
    s->add_option("--threads", threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  const cli::Experiment exp = cli::experiment_from_string(app.get_subcommands().front()->get_name());
  cli::RunConfig cfg;
  try {
    cfg = config_path.empty() ? cli::parse_config(nlohmann::json::object()) : cli::load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  const cli::RunResult r = cli::run(exp, cfg, out_dir, threads, std::cerr);
  if (r.status != 0) std::cerr << "error: " << r.message << "\n";
  return r.status;
}
