#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "ipfasst/error.hpp"
#include "ipfasst/experiments.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kNotConverged = 3, kIo = 4 };

const std::map<std::string, std::string> kDescriptions{
    {"damping", "spectral radius of the scalar sweep over lambda*dt"},
    {"order-study", "exact-solve SDC errors against the step count"},
    {"vcycle-study", "IPFASST error and residual per iteration for several V-cycle budgets"},
    {"weak-scaling", "IPFASST per-iteration error with N_x = N_t = P growing together"},
    {"strong-3d", "3D IPFASST against serial ISDC, iterations and V-cycles per step"},
    {"single-run", "one SDC, MLSDC or PFASST run, one row per step"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run SDC / MLSDC / PFASST experiments on the heat equation"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  int threads = 0;
  std::vector<std::string> overrides;
  for (const auto& name : ipfasst::experiment_names()) {
    auto* sub = app.add_subcommand(name, kDescriptions.at(name));
    sub->add_option("--config", config_path, "flat key=value config file");
    sub->add_option("--out", out_path, "CSV output path (default: stdout)");
    sub->add_option("--threads", threads, "workers for independent runs")->check(CLI::PositiveNumber);
    sub->add_option("--set", overrides, "override a config key, key=value")->allow_extra_args(false);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();
  if (!out_path.empty()) overrides.push_back("out=" + out_path);
  if (threads > 0) overrides.push_back("threads=" + std::to_string(threads));

  ipfasst::ExperimentConfig cfg;
  try {
    cfg = ipfasst::load_config(config_path, overrides, experiment);
  } catch (const ipfasst::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ipfasst::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }

  ipfasst::Table table;
  try {
    table = ipfasst::run_experiment(cfg);
  } catch (const ipfasst::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ipfasst::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ipfasst::NonConvergence& e) {
    std::cerr << "not converged: " << e.what() << '\n';
    return kNotConverged;
  }

  if (cfg.out.empty()) {
    ipfasst::write_csv(std::cout, table, cfg);
  } else {
    std::ofstream out(cfg.out);
    if (out) ipfasst::write_csv(out, table, cfg);
    if (!out) {
      std::cerr << "error: cannot write '" << cfg.out << "'\n";
      return kIo;
    }
  }
  if (!table.all_ok()) {
    std::cerr << "warning: some runs did not converge (see status column)\n";
    return kNotConverged;
  }
  return kOk;
}
