#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "flowent/cli_config.hpp"

namespace {

// Flags mirror config keys (underscores become hyphens). A --config file is
// applied first so explicit flags always win.
void add_common_options(CLI::App* cmd, flowent::RunConfig& cfg) {
  cmd->add_option("--g", cfg.g, "weak-link amplitude");
  cmd->add_option("--u", cfg.u, "interaction strength");
  cmd->add_option("--mu", cfg.mu, "chemical potential");
  cmd->add_option("--lambda", cfg.lambda, "UV cutoff");
  cmd->add_option("--l-values", cfg.l_values, "subsystem lengths")
      ->delimiter(',');
  cmd->add_option("--b-values", cfg.b_values, "flow times")->delimiter(',');
  cmd->add_option("--windows", cfg.windows, "exclusion windows")
      ->delimiter(',');
  cmd->add_option("--alpha", cfg.alpha, "regularization exponent");
  cmd->add_option("--eps0", cfg.eps0, "scaled-energy bandwidth bound");
  cmd->add_option("--modes", cfg.modes,
                  "modes per subsystem (0 = max(8 l, 512))");
  cmd->add_option("--total-sites", cfg.total_sites,
                  "oracle chain length (fixed-total mode)");
  cmd->add_option("--site-ratio", cfg.site_ratio,
                  "oracle chain length = ratio * l when > 0");
  cmd->add_option("--n-y", cfg.n_y, "transverse channels");
  cmd->add_flag("--spinless", cfg.spinless,
                "count one spin species instead of two");
  cmd->add_flag("--regularized", cfg.regularized,
                "probe the regularized correction instead");
  cmd->add_option("--rel-tol", cfg.rel_tol, "quadrature relative tolerance");
  cmd->add_option("--abs-tol", cfg.abs_tol, "quadrature absolute tolerance");
  cmd->add_option("--max-subdivisions", cfg.max_subdivisions,
                  "quadrature subdivision budget");
  cmd->add_option("--workers", cfg.workers, "worker threads for sweeps");
  cmd->add_option("--min-l", cfg.min_l, "fit: drop points with l < min-l");
  cmd->add_option("--model", cfg.fit_model,
                  "fit model: log_l | inverse_l | power_law");
  cmd->add_option("--in", cfg.input_path, "fit: input CSV path");
  cmd->add_option("--out", cfg.out_path, "output path");
}

}  // namespace

int main(int argc, char** argv) {
  flowent::RunConfig cfg;

  // The config file must be applied before CLI11 writes flag values, so it
  // is located by hand first.
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    std::string path;
    if (arg == "--config" && i + 1 < argc) {
      path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      path = arg.substr(9);
    } else {
      continue;
    }
    std::ifstream in(path);
    if (!in) {
      std::cerr << "error: cannot open config file " << path << "\n";
      return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      cfg = flowent::parse_config(ss.str(), cfg);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }

  CLI::App app{"min-entanglement flow for weak-link fermion chains"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value config file")
      ->expected(1);

  const char* names[] = {"free-scan", "oracle-scan", "twod-scan",
                         "residue",   "correction",  "divergence-probe",
                         "fit"};
  const char* blurbs[] = {
      "min-entropy S(l) from the disentangling flow",
      "exact correlation-matrix S(l) on a finite chain",
      "channel-summed S(l) for the 2D strip",
      "quasiparticle weight h and residue Z against flow time",
      "interaction correction delta_S(l), regularized",
      "pole scan of the correction against exclusion window",
      "least-squares scaling fit of a scan CSV"};
  for (int i = 0; i < 7; ++i) {
    auto* cmd = app.add_subcommand(names[i], blurbs[i]);
    cmd->fallthrough();  // lets --config appear after the subcommand too
    add_common_options(cmd, cfg);
    cmd->callback([&cfg, name = std::string(names[i])] { cfg.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  return flowent::run(cfg);
}
