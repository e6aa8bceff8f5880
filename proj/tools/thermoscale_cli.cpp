// thermoscale: scaling curves, fits, reset simulation and verification suites
// for the thermal-initialization fidelity model.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "thermoscale/cli/commands.hpp"

namespace cli = thermoscale::cli;

namespace {

cli::json load_config(const std::string& path) {
  if (path.empty()) return cli::json::object();
  std::ifstream in(path);
  if (!in) throw thermoscale::ParseError(path + ": cannot open config file");
  try {
    return cli::json::parse(in);
  } catch (const cli::json::parse_error& e) {
    throw thermoscale::ParseError(path + ": " + e.what());
  }
}

int emit(const cli::Report& report, const cli::GlobalConfig& g) {
  const std::string text = report.render(g.format);
  if (g.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(g.out, std::ios::binary);
    if (!out) throw thermoscale::ParseError(g.out + ": cannot open output file");
    out << text;
  }
  return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermal initialization fidelity toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  // Global flags. Values set on the command line override the config file.
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out, format;
  std::size_t dense_cap = 0;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--out", out, "Write output here instead of stdout");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--dense-cap", dense_cap, "Largest register (qubits) for dense suites");

  auto* curve = app.add_subcommand("scaling-curve", "Fidelity (1+e^-x)^-n over a range of n");
  cli::ScalingCurveConfig curve_cfg;
  double curve_x = 0.0, curve_eta = 0.0;
  curve->add_option("--x", curve_x, "beta * dE");
  curve->add_option("--eta", curve_eta, "Single-qubit error rate");
  curve->add_option("--n-min", curve_cfg.n_min);
  curve->add_option("--n-max", curve_cfg.n_max);
  curve->add_flag("--log-grid", curve_cfg.log_grid, "Log-spaced n values");
  curve->add_option("--points", curve_cfg.points, "Points on a log grid");

  auto* fit = app.add_subcommand("fit", "Fit beta * dE to a fidelity-vs-n CSV");
  cli::FitConfig fit_cfg;
  fit->add_option("csv", fit_cfg.csv_path, "CSV with header n,fidelity[,stderr]");
  fit->add_option("--frequency-ghz", fit_cfg.frequencies_ghz,
                  "Qubit frequency; repeat for several qubits (averaged)");
  fit->add_flag("--weighted", fit_cfg.weighted, "Weight rows by 1/stderr^2");
  fit->add_option("--bootstrap", fit_cfg.bootstrap, "Residual bootstrap resamples (>= 100)");

  auto* reset = app.add_subcommand("reset-sim", "Conditional reset protocol simulation");
  cli::ResetConfig reset_cfg;
  auto& rp = reset_cfg.params;
  reset->add_option("--n-qubits", rp.n_qubits);
  reset->add_option("--rounds", rp.rounds);
  reset->add_option("--p-readout", rp.p_readout);
  reset->add_option("--p-gate", rp.p_gate);
  reset->add_option("--delay-us", rp.delay_us);
  reset->add_option("--t1-us", rp.t1_us);
  reset->add_option("--x-env", rp.x_env);
  reset->add_option("--p-init", rp.p_init);
  reset->add_option("--shots", reset_cfg.shots, "Monte-Carlo shots (0: exact only)");

  auto* verify = app.add_subcommand("verify", "Run property suites");
  cli::VerifyConfig verify_cfg;
  verify->add_option("--suite", verify_cfg.suite)
      ->check(CLI::IsMember({"invariance", "scaling", "bounds", "depolarizing", "coherence",
                             "resetsim", "all"}));
  verify->add_option("--instances", verify_cfg.instances);
  bool verify_strict = false;
  verify->add_flag("--strict", verify_strict, "Accepted for symmetry; verify always fails on violations");

  auto* audit = app.add_subcommand("bound-audit", "Audit F_P F_I <= F <= min(F_P, F_I)");
  cli::AuditConfig audit_cfg;
  double audit_x = 0.0;
  std::size_t audit_n = 0;
  audit->add_option("--family", audit_cfg.family)
      ->check(CLI::IsMember({"unital", "random-kraus", "replacement"}));
  audit->add_option("--instances", audit_cfg.instances);
  audit->add_option("--x", audit_x, "Fix beta * dE (default: random per instance)");
  audit->add_option("--n", audit_n, "Fix register size (default: random 1..3)");
  audit->add_flag("--strict", audit_cfg.strict, "Exit 1 on findings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kInputError;
  }

  try {
    const cli::json file = load_config(config_path);
    cli::GlobalConfig g;
    cli::from_config(file, g);
    if (const auto env = cli::dense_cap_from_env()) g.dense_cap = *env;
    if (app.count("--seed")) g.seed = seed;
    if (app.count("--out")) g.out = out;
    if (app.count("--format")) g.format = format;
    if (app.count("--dense-cap")) g.dense_cap = dense_cap;
    cli::validate(g);

    // Config-file sections first, then flags given on the command line.
    if (*curve) {
      cli::ScalingCurveConfig c;
      cli::apply_section(file, "scaling_curve", c);
      if (curve->count("--x")) c.x = curve_x;
      if (curve->count("--eta")) c.eta = curve_eta;
      if (curve->count("--n-min")) c.n_min = curve_cfg.n_min;
      if (curve->count("--n-max")) c.n_max = curve_cfg.n_max;
      if (curve->count("--log-grid")) c.log_grid = true;
      if (curve->count("--points")) c.points = curve_cfg.points;
      return emit(cli::scaling_curve(c, g), g);
    }
    if (*fit) {
      cli::FitConfig c;
      cli::apply_section(file, "fit", c);
      if (fit->count("csv")) c.csv_path = fit_cfg.csv_path;
      if (fit->count("--frequency-ghz")) c.frequencies_ghz = fit_cfg.frequencies_ghz;
      if (fit->count("--weighted")) c.weighted = true;
      if (fit->count("--bootstrap")) c.bootstrap = fit_cfg.bootstrap;
      return emit(cli::fit(c, g), g);
    }
    if (*reset) {
      cli::ResetConfig c;
      cli::apply_section(file, "reset_sim", c);
      if (reset->count("--n-qubits")) c.params.n_qubits = rp.n_qubits;
      if (reset->count("--rounds")) c.params.rounds = rp.rounds;
      if (reset->count("--p-readout")) c.params.p_readout = rp.p_readout;
      if (reset->count("--p-gate")) c.params.p_gate = rp.p_gate;
      if (reset->count("--delay-us")) c.params.delay_us = rp.delay_us;
      if (reset->count("--t1-us")) c.params.t1_us = rp.t1_us;
      if (reset->count("--x-env")) c.params.x_env = rp.x_env;
      if (reset->count("--p-init")) c.params.p_init = rp.p_init;
      if (reset->count("--shots")) c.shots = reset_cfg.shots;
      return emit(cli::reset_sim(c, g), g);
    }
    if (*verify) {
      cli::VerifyConfig c;
      cli::apply_section(file, "verify", c);
      if (verify->count("--suite")) c.suite = verify_cfg.suite;
      if (verify->count("--instances")) c.instances = verify_cfg.instances;
      return emit(cli::verify(c, g), g);
    }
    cli::AuditConfig c;
    cli::apply_section(file, "bound_audit", c);
    if (audit->count("--family")) c.family = audit_cfg.family;
    if (audit->count("--instances")) c.instances = audit_cfg.instances;
    if (audit->count("--x")) c.x = audit_x;
    if (audit->count("--n")) c.n = audit_n;
    if (audit->count("--strict")) c.strict = true;
    return emit(cli::bound_audit(c, g), g);
  } catch (const std::exception& e) {
    std::cerr << "thermoscale: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
}
