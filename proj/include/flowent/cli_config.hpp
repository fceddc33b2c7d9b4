#pragma once

// CLI orchestration: flat key=value configs with flag overrides, sweep
// execution over a bounded worker pool, deterministic CSV/JSON emission,
// and a JSON manifest recording every parameter and tolerance.

#include <string>
#include <vector>

#include "flowent/flow_free.hpp"

namespace flowent {

struct RunConfig {
  // free-scan | oracle-scan | twod-scan | residue | correction |
  // divergence-probe | fit
  std::string command;

  double g = 1.0;
  double u = 0.1;
  double mu = 0.0;
  double lambda = 1.0;

  std::vector<double> l_values = {16, 32, 64, 128, 256};
  std::vector<double> b_values = {0.1, 0.2, 0.5, 1, 2, 5, 10, 20, 50, 100};
  std::vector<double> windows = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4};

  double alpha = 0.25;  // regularization exponent
  double eps0 = 2.0;    // bandwidth bound

  int modes = 0;           // flow-scan modes per subsystem; 0 = max(8 l, 512)
  int total_sites = 1024;  // oracle-scan: fixed total chain length
  double site_ratio = 0.0; // oracle-scan: total = ratio * l when > 0
  int n_y = 32;            // transverse channels for twod-scan
  bool spinless = false;   // scans default to spin degeneracy 2
  bool regularized = false;  // divergence-probe variant

  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;

  int workers = 1;
  double min_l = 0.0;               // fit: drop points with l < min_l
  std::string fit_model = "log_l";  // log_l | inverse_l | power_law
  std::string input_path;           // fit: CSV to read
  std::string out_path = "out.csv";
};

// Applies a flat key=value document on top of `base`. Lines may be blank
// or start with '#'. List values are comma-separated. Unknown keys and
// malformed numbers throw std::invalid_argument naming the offending key.
RunConfig parse_config(const std::string& text, RunConfig base = {});

// Executes config.command, writing the CSV (JSON for fit) to out_path and
// a manifest to out_path + ".manifest.json". The manifest's timestamp is
// the only non-deterministic output line; CSV bodies are byte-identical
// across runs and worker counts. Returns 0 on success, 2 on configuration
// errors, 3 on numerical failure (message on stderr either way).
int run(const RunConfig& config);

}  // namespace flowent
