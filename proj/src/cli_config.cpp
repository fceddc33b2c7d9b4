#include "flowent/cli_config.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "flowent/correction.hpp"
#include "flowent/hubbard_flow.hpp"
#include "flowent/oracle.hpp"

namespace flowent {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed value for key '" + key + "': " +
                                value);
  }
  if (pos != value.size())
    throw std::invalid_argument("malformed value for key '" + key + "': " +
                                value);
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(value, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed value for key '" + key + "': " +
                                value);
  }
  if (pos != value.size())
    throw std::invalid_argument("malformed value for key '" + key + "': " +
                                value);
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("malformed value for key '" + key + "': " +
                              value);
}

std::vector<double> parse_list(const std::string& key,
                               const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw std::invalid_argument("malformed value for key '" + key + "': " +
                                  value);
    out.push_back(parse_double(key, item));
  }
  if (out.empty())
    throw std::invalid_argument("malformed value for key '" + key + "': " +
                                value);
  return out;
}

void apply_key(RunConfig& cfg, const std::string& key,
               const std::string& value) {
  if (key == "command") cfg.command = value;
  else if (key == "g") cfg.g = parse_double(key, value);
  else if (key == "u") cfg.u = parse_double(key, value);
  else if (key == "mu") cfg.mu = parse_double(key, value);
  else if (key == "lambda") cfg.lambda = parse_double(key, value);
  else if (key == "l_values") cfg.l_values = parse_list(key, value);
  else if (key == "b_values") cfg.b_values = parse_list(key, value);
  else if (key == "windows") cfg.windows = parse_list(key, value);
  else if (key == "alpha") cfg.alpha = parse_double(key, value);
  else if (key == "eps0") cfg.eps0 = parse_double(key, value);
  else if (key == "modes") cfg.modes = parse_int(key, value);
  else if (key == "total_sites") cfg.total_sites = parse_int(key, value);
  else if (key == "site_ratio") cfg.site_ratio = parse_double(key, value);
  else if (key == "n_y") cfg.n_y = parse_int(key, value);
  else if (key == "spinless") cfg.spinless = parse_bool(key, value);
  else if (key == "regularized") cfg.regularized = parse_bool(key, value);
  else if (key == "rel_tol") cfg.rel_tol = parse_double(key, value);
  else if (key == "abs_tol") cfg.abs_tol = parse_double(key, value);
  else if (key == "max_subdivisions")
    cfg.max_subdivisions = parse_int(key, value);
  else if (key == "workers") cfg.workers = parse_int(key, value);
  else if (key == "min_l") cfg.min_l = parse_double(key, value);
  else if (key == "fit_model") cfg.fit_model = value;
  else if (key == "in") cfg.input_path = value;
  else if (key == "out") cfg.out_path = value;
  else
    throw std::invalid_argument("unknown config key '" + key + "'");
}

// Runs fn(0..n-1) on `workers` threads pulling indices from a shared
// counter. Results must be written into pre-sized slots so the output
// order is independent of scheduling. The first captured exception is
// rethrown after all threads join.
template <typename Fn>
void parallel_for(int n, int workers, const Fn& fn) {
  if (n <= 0) return;
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

QuadratureConfig quad_config(const RunConfig& cfg) {
  QuadratureConfig qc;
  qc.rel_tol = cfg.rel_tol;
  qc.abs_tol = cfg.abs_tol;
  qc.max_subdivisions = cfg.max_subdivisions;
  return qc;
}

FitModel to_fit_model(const std::string& name) {
  if (name == "log_l") return FitModel::log_l;
  if (name == "inverse_l") return FitModel::inverse_l;
  if (name == "power_law") return FitModel::power_law;
  throw std::invalid_argument("unknown fit model '" + name + "'");
}

const char* fit_model_name(FitModel m) {
  switch (m) {
    case FitModel::log_l: return "log_l";
    case FitModel::inverse_l: return "inverse_l";
    case FitModel::power_law: return "power_law";
  }
  return "log_l";
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open output path " + path);
  out << body;
  if (!out) throw std::invalid_argument("failed writing output path " + path);
}

std::string csv_two(const char* header,
                    const std::vector<std::pair<double, double>>& rows) {
  std::string body = header;
  body += '\n';
  for (const auto& [x, y] : rows) {
    body += fmt17(x);
    body += ',';
    body += fmt17(y);
    body += '\n';
  }
  return body;
}

nlohmann::json fit_json(const FitResult& fit) {
  return {{"model", fit_model_name(fit.model)},
          {"slope", fit.slope},
          {"intercept", fit.intercept},
          {"residual_rms", fit.residual_rms}};
}

nlohmann::json manifest_skeleton(const RunConfig& cfg) {
  nlohmann::json m;
  m["command"] = cfg.command;
  m["parameters"] = {{"g", cfg.g},
                     {"u", cfg.u},
                     {"mu", cfg.mu},
                     {"lambda", cfg.lambda},
                     {"l_values", cfg.l_values},
                     {"b_values", cfg.b_values},
                     {"windows", cfg.windows},
                     {"alpha", cfg.alpha},
                     {"eps0", cfg.eps0},
                     {"modes", cfg.modes},
                     {"total_sites", cfg.total_sites},
                     {"site_ratio", cfg.site_ratio},
                     {"n_y", cfg.n_y},
                     {"spinless", cfg.spinless},
                     {"regularized", cfg.regularized},
                     {"min_l", cfg.min_l},
                     {"fit_model", cfg.fit_model},
                     {"workers", cfg.workers}};
  m["tolerances"] = {{"rel_tol", cfg.rel_tol},
                     {"abs_tol", cfg.abs_tol},
                     {"max_subdivisions", cfg.max_subdivisions}};
  m["output"] = cfg.out_path;
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  m["timestamp_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  return m;
}

void write_manifest(const RunConfig& cfg, nlohmann::json manifest) {
  write_text(cfg.out_path + ".manifest.json", manifest.dump(2) + "\n");
}

int modes_for(const RunConfig& cfg, double l) {
  if (cfg.modes > 0) return cfg.modes;
  const double wanted = std::max(8.0 * l, 512.0);
  return static_cast<int>(wanted);
}

LatticeModel scan_model(const RunConfig& cfg, int n_modes) {
  LatticeModel model;
  model.n_sites_a = n_modes;
  model.n_sites_b = n_modes;
  model.g = cfg.g;
  model.u = 0.0;
  model.mu = cfg.mu;
  model.spinful = !cfg.spinless;
  model.validate();
  return model;
}

void require_l_values(const RunConfig& cfg) {
  if (cfg.l_values.empty())
    throw std::invalid_argument("l_values must not be empty");
  for (double l : cfg.l_values)
    if (!(l > 1.0))
      throw std::invalid_argument("l_values entries must exceed 1");
}

int run_free_scan(const RunConfig& cfg) {
  require_l_values(cfg);
  const auto qc = quad_config(cfg);
  std::vector<std::pair<double, double>> rows(cfg.l_values.size());
  parallel_for(static_cast<int>(cfg.l_values.size()), cfg.workers, [&](int i) {
    const double l = cfg.l_values[i];
    const auto model = scan_model(cfg, modes_for(cfg, l));
    rows[i] = {l, min_entropy_flow(model, cfg.lambda, l, qc)};
  });
  write_text(cfg.out_path, csv_two("l,S_nats", rows));
  write_manifest(cfg, manifest_skeleton(cfg));
  return 0;
}

int run_oracle_scan(const RunConfig& cfg) {
  require_l_values(cfg);
  const int degeneracy = cfg.spinless ? 1 : 2;
  std::vector<std::pair<double, double>> rows(cfg.l_values.size());
  parallel_for(static_cast<int>(cfg.l_values.size()), cfg.workers, [&](int i) {
    const int l = static_cast<int>(cfg.l_values[i]);
    const int total = cfg.site_ratio > 0.0
                          ? static_cast<int>(cfg.site_ratio * l)
                          : cfg.total_sites;
    if (total <= l)
      throw std::invalid_argument(
          "oracle-scan needs more total sites than subsystem sites");
    LatticeModel model;
    model.n_sites_a = l;
    model.n_sites_b = total - l;
    model.g = cfg.g;
    model.u = 0.0;
    model.mu = cfg.mu;
    model.spinful = false;  // one species; degeneracy applied below
    model.validate();
    const auto corr = ground_state_correlations(model);
    const auto spectrum = subsystem_spectrum(corr, l);
    rows[i] = {static_cast<double>(l), degeneracy * min_entropy(spectrum)};
  });
  write_text(cfg.out_path, csv_two("l,S_nats", rows));
  write_manifest(cfg, manifest_skeleton(cfg));
  return 0;
}

int run_twod_scan(const RunConfig& cfg) {
  require_l_values(cfg);
  if (cfg.n_y < 1)
    throw std::invalid_argument("n_y must be at least 1");
  const auto qc = quad_config(cfg);
  std::vector<std::pair<double, double>> rows(cfg.l_values.size());
  parallel_for(static_cast<int>(cfg.l_values.size()), cfg.workers, [&](int i) {
    const double l = cfg.l_values[i];
    const auto model = scan_model(cfg, modes_for(cfg, l));
    rows[i] = {l, min_entropy_2d(model, cfg.n_y, cfg.lambda, l, qc)};
  });
  write_text(cfg.out_path, csv_two("l,S_nats", rows));
  write_manifest(cfg, manifest_skeleton(cfg));
  return 0;
}

int run_residue(const RunConfig& cfg) {
  if (cfg.b_values.empty())
    throw std::invalid_argument("b_values must not be empty");
  const auto curve = residue_curve(cfg.u, cfg.mu, cfg.b_values,
                                   quad_config(cfg));
  std::string body = "B,h_fermi,Z\n";
  for (const auto& p : curve.points) {
    body += fmt17(p.b_time);
    body += ',';
    body += fmt17(p.h_fermi);
    body += ',';
    body += fmt17(p.z);
    body += '\n';
  }
  write_text(cfg.out_path, body);
  write_manifest(cfg, manifest_skeleton(cfg));
  return 0;
}

int run_correction(const RunConfig& cfg) {
  require_l_values(cfg);
  auto inp = make_correction_input(cfg.g, cfg.u, cfg.mu, cfg.lambda,
                                   cfg.l_values.front());
  RegularizationSchedule sched;
  sched.alpha = cfg.alpha;
  sched.eps0 = cfg.eps0;
  sched.validate();
  const auto qc = quad_config(cfg);

  auto sorted = cfg.l_values;
  std::sort(sorted.begin(), sorted.end());
  const double pref = correction_prefactor(inp);
  std::vector<std::pair<double, double>> rows(sorted.size());
  parallel_for(static_cast<int>(sorted.size()), cfg.workers, [&](int i) {
    auto local = inp;
    local.l = sorted[i];
    rows[i] = {sorted[i], pref * delta_s_regularized(local, sched, qc)};
  });

  write_text(cfg.out_path, csv_two("l,delta_S", rows));
  auto manifest = manifest_skeleton(cfg);
  if (rows.size() >= 4) {
    // Subtracting the largest-l value isolates the decaying part; its 1/l
    // fit is the reported finite-size trend.
    EntropyScan diffs;
    for (const auto& [l, v] : rows)
      diffs.points.emplace_back(l, v - rows.back().second);
    manifest["fit"] = fit_json(fit_scaling(diffs, FitModel::inverse_l));
  }
  write_manifest(cfg, manifest);
  return 0;
}

int run_divergence_probe(const RunConfig& cfg) {
  if (cfg.windows.empty())
    throw std::invalid_argument("windows must not be empty");
  require_l_values(cfg);
  const double l = *std::max_element(cfg.l_values.begin(),
                                     cfg.l_values.end());
  auto inp = make_correction_input(cfg.g, cfg.u, cfg.mu, cfg.lambda, l);
  const auto qc = quad_config(cfg);

  std::vector<std::pair<double, double>> rows;
  if (cfg.regularized) {
    RegularizationSchedule sched;
    sched.alpha = cfg.alpha;
    sched.eps0 = cfg.eps0;
    sched.validate();
    const double pref = correction_prefactor(inp);
    rows.resize(cfg.windows.size());
    parallel_for(static_cast<int>(cfg.windows.size()), cfg.workers,
                 [&](int i) {
                   const double delta = cfg.windows[i];
                   rows[i] = {delta, pref * delta_s_regularized(
                                         inp, sched, qc, delta)};
                 });
  } else {
    rows = delta_s_unregularized(inp, cfg.windows, qc);
  }
  write_text(cfg.out_path, csv_two("delta,value", rows));
  write_manifest(cfg, manifest_skeleton(cfg));
  return 0;
}

int run_fit(const RunConfig& cfg) {
  if (cfg.input_path.empty())
    throw std::invalid_argument("fit requires an input CSV path (key 'in')");
  std::ifstream in(cfg.input_path);
  if (!in)
    throw std::invalid_argument("cannot open input path " + cfg.input_path);

  EntropyScan scan;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (first) {
      first = false;  // header
      continue;
    }
    std::stringstream ss(line);
    std::string xs, ys;
    if (!std::getline(ss, xs, ',') || !std::getline(ss, ys, ','))
      throw std::invalid_argument("malformed CSV row: " + line);
    const double x = parse_double("in", trim(xs));
    const double y = parse_double("in", trim(ys));
    if (x >= cfg.min_l) scan.points.emplace_back(x, y);
  }
  const auto fit = fit_scaling(scan, to_fit_model(cfg.fit_model));

  nlohmann::json out = fit_json(fit);
  out["points_used"] = scan.points.size();
  write_text(cfg.out_path, out.dump(2) + "\n");
  auto manifest = manifest_skeleton(cfg);
  manifest["fit"] = fit_json(fit);
  write_manifest(cfg, manifest);
  return 0;
}

}  // namespace

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("malformed config line: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("malformed config line: " + line);
    apply_key(base, key, value);
  }
  return base;
}

int run(const RunConfig& config) {
  try {
    if (config.command == "free-scan") return run_free_scan(config);
    if (config.command == "oracle-scan") return run_oracle_scan(config);
    if (config.command == "twod-scan") return run_twod_scan(config);
    if (config.command == "residue") return run_residue(config);
    if (config.command == "correction") return run_correction(config);
    if (config.command == "divergence-probe")
      return run_divergence_probe(config);
    if (config.command == "fit") return run_fit(config);
    std::cerr << "error: unknown command '" << config.command << "'\n";
    return 2;
  } catch (const NonConvergence& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace flowent
