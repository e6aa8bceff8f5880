#pragma once

// Command implementations behind the `thermoscale` executable. Each command
// takes a resolved configuration and returns a Report: a JSON document, an
// equivalent CSV table and an exit code. Argument parsing lives in the
// executable; everything here is deterministic given (config, seed).
//
// Exit codes: 0 success, 1 property violations, 2 input error,
// 3 numerical failure.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermoscale/thermoscale.hpp"

namespace thermoscale::cli {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kViolations = 1, kInputError = 2, kNumericalError = 3 };

struct Report {
  json document;
  std::string csv;
  int exit_code = kOk;

  std::string render(const std::string& format) const {
    return format == "csv" ? csv : document.dump(2) + "\n";
  }
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct GlobalConfig {
  std::uint64_t seed = 0;
  std::string out;  // empty: standard output
  std::string format = "json";
  std::size_t dense_cap = kDefaultDenseCap;
};

struct ScalingCurveConfig {
  std::optional<double> x;
  std::optional<double> eta;
  std::uint64_t n_min = 1;
  std::uint64_t n_max = 100;
  bool log_grid = false;
  std::size_t points = 50;
};

struct FitConfig {
  std::string csv_path;
  std::vector<double> frequencies_ghz;
  bool weighted = false;
  std::size_t bootstrap = 0;  // 0: no bootstrap
};

struct ResetConfig {
  ResetParams params;
  std::uint64_t shots = 0;  // 0: exact recursion only
};

struct VerifyConfig {
  std::string suite = "all";
  std::size_t instances = 100;
};

struct AuditConfig {
  std::string family = "unital";
  std::size_t instances = 100;
  std::optional<double> x;
  std::optional<std::size_t> n;
  bool strict = false;
};

// Linear grids longer than this must use --log-grid.
inline constexpr std::uint64_t kMaxLinearRows = 1'000'000;

inline void validate(const GlobalConfig& g) {
  if (g.format != "json" && g.format != "csv") {
    throw DomainError("format must be `json` or `csv`, got `" + g.format + "`");
  }
  if (g.dense_cap == 0 || g.dense_cap > 14) throw DomainError("dense cap must be in 1..14");
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <typename T>
void read_if(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

inline void from_config(const json& j, GlobalConfig& g) {
  read_if(j, "seed", g.seed);
  read_if(j, "out", g.out);
  read_if(j, "format", g.format);
  read_if(j, "dense_cap", g.dense_cap);
}

inline void from_config(const json& j, ScalingCurveConfig& c) {
  read_if(j, "x", c.x);
  read_if(j, "eta", c.eta);
  read_if(j, "n_min", c.n_min);
  read_if(j, "n_max", c.n_max);
  read_if(j, "log_grid", c.log_grid);
  read_if(j, "points", c.points);
}

inline void from_config(const json& j, FitConfig& c) {
  read_if(j, "csv", c.csv_path);
  read_if(j, "frequency_ghz", c.frequencies_ghz);
  read_if(j, "weighted", c.weighted);
  read_if(j, "bootstrap", c.bootstrap);
}

inline void from_config(const json& j, ResetParams& p) {
  read_if(j, "n_qubits", p.n_qubits);
  read_if(j, "rounds", p.rounds);
  read_if(j, "p_readout", p.p_readout);
  read_if(j, "p_gate", p.p_gate);
  read_if(j, "delay_us", p.delay_us);
  read_if(j, "t1_us", p.t1_us);
  read_if(j, "x_env", p.x_env);
  read_if(j, "p_init", p.p_init);
}

inline void from_config(const json& j, ResetConfig& c) {
  from_config(j, c.params);
  read_if(j, "shots", c.shots);
}

inline void from_config(const json& j, VerifyConfig& c) {
  read_if(j, "suite", c.suite);
  read_if(j, "instances", c.instances);
}

inline void from_config(const json& j, AuditConfig& c) {
  read_if(j, "family", c.family);
  read_if(j, "instances", c.instances);
  read_if(j, "x", c.x);
  read_if(j, "n", c.n);
  read_if(j, "strict", c.strict);
}

// Reads the section of a config file that belongs to one command; global
// keys sit at the top level.
template <typename Config>
void apply_section(const json& file, const char* section, Config& c) {
  if (file.contains(section)) from_config(file.at(section), c);
}

inline json to_json(const GlobalConfig& g) {
  return json{{"seed", g.seed}, {"format", g.format}, {"dense_cap", g.dense_cap}};
}

inline json to_json(const ResetParams& p) {
  return json{{"n_qubits", p.n_qubits}, {"rounds", p.rounds},   {"p_readout", p.p_readout},
              {"p_gate", p.p_gate},     {"delay_us", p.delay_us}, {"t1_us", p.t1_us},
              {"x_env", p.x_env},       {"p_init", p.p_init}};
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

// Shortest round-trip representation.
inline std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline json header(const char* command, const GlobalConfig& g, json config) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  config["global"] = to_json(g);
  j["config"] = std::move(config);
  return j;
}

// ---------------------------------------------------------------------------
// scaling-curve
// ---------------------------------------------------------------------------

inline std::vector<std::uint64_t> curve_grid(const ScalingCurveConfig& c) {
  if (c.n_max < c.n_min) throw DomainError("n_max must be >= n_min");
  std::vector<std::uint64_t> ns;
  if (!c.log_grid) {
    if (c.n_max - c.n_min >= kMaxLinearRows) {
      throw DomainError("linear grid longer than " + std::to_string(kMaxLinearRows) +
                        " rows; use --log-grid");
    }
    for (std::uint64_t n = c.n_min; n <= c.n_max; ++n) ns.push_back(n);
    return ns;
  }
  if (c.points < 2) throw DomainError("log grid needs at least 2 points");
  if (c.n_max == 0) return {0};
  const double lo = std::log(static_cast<double>(std::max<std::uint64_t>(c.n_min, 1)));
  const double hi = std::log(static_cast<double>(c.n_max));
  if (c.n_min == 0) ns.push_back(0);
  for (std::size_t i = 0; i < c.points; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(c.points - 1);
    const auto n = static_cast<std::uint64_t>(std::llround(std::exp(t)));
    const std::uint64_t clamped = std::clamp(n, std::max<std::uint64_t>(c.n_min, 1), c.n_max);
    if (ns.empty() || ns.back() != clamped) ns.push_back(clamped);
  }
  return ns;
}

inline Report scaling_curve(const ScalingCurveConfig& c, const GlobalConfig& g) {
  if (c.x.has_value() == c.eta.has_value()) {
    throw DomainError("scaling-curve: give exactly one of --x and --eta");
  }
  const double x = c.x ? *c.x : x_from_error_rate(*c.eta);
  if (c.x) thermoscale::detail::require_model_x(x, "scaling-curve");
  const auto ns = curve_grid(c);

  json config{{"x", optional_json(c.x)},         {"eta", optional_json(c.eta)},
              {"n_min", c.n_min},                {"n_max", c.n_max},
              {"log_grid", c.log_grid},          {"points", c.points}};
  Report r{header("scaling-curve", g, std::move(config)), "n,fidelity\n", kOk};
  r.document["x"] = x;
  r.document["eta"] = error_rate_from_x(x);
  json rows = json::array();
  for (auto n : ns) {
    const double f = scaling_fidelity(x, n);
    rows.push_back({{"n", n}, {"fidelity", f}, {"log_fidelity", log_scaling_fidelity(x, n)}});
    r.csv += std::to_string(n) + "," + fmt(f) + "\n";
  }
  r.document["rows"] = std::move(rows);
  return r;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

inline Report fit(const FitConfig& c, const GlobalConfig& g) {
  if (c.csv_path.empty()) throw DomainError("fit: a CSV path is required");
  const ScalingDataset d = load_csv(c.csv_path);
  const FitResult res = fit_scaling(d, c.weighted);

  json config{{"csv", c.csv_path},
              {"frequency_ghz", c.frequencies_ghz},
              {"weighted", c.weighted},
              {"bootstrap", c.bootstrap}};
  Report r{header("fit", g, std::move(config)), "n,fidelity,predicted,residual\n", kOk};
  auto& doc = r.document;
  doc["x_hat"] = res.x_hat;
  doc["x_stderr"] = res.x_stderr;
  doc["r_squared"] = res.r_squared;
  if (c.frequencies_ghz.empty()) {
    doc["temperature_mK"] = nullptr;
  } else {
    const double t = temperature_from_x(res.x_hat, c.frequencies_ghz);
    doc["temperature_mK"] = std::isfinite(t) ? json(t) : json("unbounded");
  }
  doc["method"] = res.method;
  doc["weights"] = c.weighted ? "inverse-variance" : "uniform";
  doc["r_squared_definition"] = "unweighted";
  doc["n_rows"] = res.n_rows;
  doc["ss_res"] = res.ss_res;
  doc["ss_tot"] = res.ss_tot;
  doc["at_bound"] = res.at_bound;
  doc["residuals"] = res.residuals;
  if (c.bootstrap > 0) {
    doc["bootstrap_stderr"] = bootstrap_stderr(d, c.bootstrap, g.seed, c.weighted);
    doc["bootstrap_resamples"] = c.bootstrap;
  }
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const auto& row = d.rows[i];
    r.csv += std::to_string(row.n) + "," + fmt(row.fidelity) + "," +
             fmt(scaling_fidelity(res.x_hat, row.n)) + "," + fmt(res.residuals[i]) + "\n";
  }
  return r;
}

// ---------------------------------------------------------------------------
// reset-sim
// ---------------------------------------------------------------------------

inline Report reset_sim(const ResetConfig& c, const GlobalConfig& g) {
  const ResetTrace exact = run_protocol(c.params);
  json config = to_json(c.params);
  config["shots"] = c.shots;
  Report r{header("reset-sim", g, std::move(config)), "", kOk};
  r.document["fixed_point_p_excited"] = fixed_point(c.params);
  r.document["plateau"] = exact.plateau;

  std::optional<MonteCarloTrace> mc;
  if (c.shots > 0) mc = monte_carlo(c.params, c.shots, g.seed);
  r.csv = mc ? "round,fidelity,stderr\n" : "round,fidelity\n";
  json rounds = json::array();
  for (std::size_t k = 0; k < exact.per_round.size(); ++k) {
    const auto& e = exact.per_round[k];
    json row{{"round", e.round}, {"fidelity", e.fidelity}, {"p_excited", e.p_excited}};
    if (mc) {
      const auto& m = mc->per_round[k];
      row["mc_fidelity"] = m.fidelity;
      row["mc_stderr"] = m.std_error;
      r.csv += std::to_string(k) + "," + fmt(m.fidelity) + "," + fmt(m.std_error) + "\n";
    } else {
      r.csv += std::to_string(k) + "," + fmt(e.fidelity) + "\n";
    }
    rounds.push_back(std::move(row));
  }
  r.document["rounds"] = std::move(rounds);
  return r;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct SuiteReport {
  std::string name;
  std::size_t checked = 0;
  std::size_t failed = 0;
  double max_deviation = 0.0;
  double max_violation = 0.0;  // largest deviation beyond tolerance, 0 if none
  double tolerance = 0.0;
  json details = json::object();

  bool ok() const { return failed == 0; }

  // Records one check of |deviation| <= tolerance.
  void check(double deviation, double tol) {
    ++checked;
    tolerance = tol;
    max_deviation = std::max(max_deviation, deviation);
    if (!(deviation <= tol)) {
      ++failed;
      max_violation = std::max(max_violation, deviation);
    }
  }

  json to_json() const {
    json j{{"suite", name},         {"checked", checked},
           {"passed", checked - failed}, {"failed", failed},
           {"tolerance", tolerance}, {"max_deviation", max_deviation},
           {"max_violation", max_violation}, {"ok", ok()}};
    if (!details.empty()) j["details"] = details;
    return j;
  }
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"invariance", "scaling",   "bounds",
                                              "depolarizing", "coherence", "resetsim"};
  return names;
}

namespace detail {

inline KrausChannel random_unital_channel(std::size_t n, Rng& rng) {
  const std::size_t d = register_dim(n);
  if (rng.bernoulli(0.5) && n <= kDepolarizingKrausMaxQubits) {
    return noisy_gate(depolarizing(rng.uniform(0.0, depolarizing_max_lambda(n)), n),
                      haar_random_unitary(d, rng));
  }
  const std::size_t k = 1 + rng.index(4);
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& v : p) total += (v = rng.uniform(0.05, 1.0));
  for (auto& v : p) v /= total;
  std::vector<UnitaryOp> us;
  for (std::size_t i = 0; i < k; ++i) us.push_back(haar_random_unitary(d, rng));
  return mixed_unitary(p, us);
}

inline std::vector<complex> random_valid_eps(std::size_t n, double x, Rng& rng) {
  std::vector<complex> eps(n);
  for (auto& e : eps) {
    const double r = std::sqrt(std::exp(-x) * rng.uniform());
    e = std::polar(r, rng.uniform(0.0, 2.0 * std::numbers::pi));
  }
  return eps;
}

}  // namespace detail

inline SuiteReport suite_invariance(std::size_t instances, Rng rng, std::size_t cap) {
  SuiteReport s{"invariance"};
  const std::size_t max_qubits = std::min<std::size_t>(4, cap);
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t d = register_dim(1 + rng.index(max_qubits));
    const auto rho = random_density_matrix(d, rng, 1 + rng.index(d));
    const auto sigma = random_density_matrix(d, rng, 1 + rng.index(d));
    const auto u = haar_random_unitary(d, rng);
    const double before = uhlmann(rho, sigma);
    const double after = uhlmann(apply_unitary(u, rho), apply_unitary(u, sigma));
    s.check(std::abs(after - before), 1e-8);
  }
  return s;
}

inline SuiteReport suite_scaling(std::size_t cap) {
  SuiteReport s{"scaling"};
  const std::size_t max_qubits = std::min<std::size_t>(6, cap);
  for (std::size_t n = 1; n <= max_qubits; ++n) {
    for (double x : {0.0, 0.5, 2.48, 4.35, 10.0}) {
      const double dense = uhlmann(to_dense(thermal_register(x, n), cap), target_register(n, cap));
      s.check(std::abs(dense - scaling_fidelity(x, n)), 1e-10);
    }
  }
  s.details["n_max"] = max_qubits;
  return s;
}

inline SuiteReport suite_bounds(std::size_t instances, Rng rng, std::size_t cap) {
  SuiteReport s{"bounds"};
  const std::size_t max_qubits = std::min<std::size_t>(3, cap);
  const double xs[] = {0.5, 2.0, 4.35};
  std::size_t lower_failed = 0;
  std::size_t unital_failed = 0;
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t n = 1 + rng.index(max_qubits);
    const std::size_t d = register_dim(n);
    const auto c = random_kraus_channel(d, 1 + rng.index(4), rng);
    const auto u = haar_random_unitary(d, rng);
    const auto r = bound_check(c, u, xs[t % 3], n, cap);
    s.check(r.lower_violation(), kBoundTolerance);
    lower_failed += r.lower_ok ? 0 : 1;
  }
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t n = 1 + rng.index(max_qubits);
    const auto c = detail::random_unital_channel(n, rng);
    const auto u = haar_random_unitary(register_dim(n), rng);
    const auto r = bound_check(c, u, rng.uniform(0.0, 6.0), n, cap);
    s.check(std::max(0.0, r.f_composite - r.f_i), kBoundTolerance);
    unital_failed += r.upper_fi_ok ? 0 : 1;
  }
  s.details["lower_bound_random_kraus"] = {{"instances", instances},
                                           {"passed", instances - lower_failed}};
  s.details["upper_bound_unital"] = {{"instances", instances},
                                     {"passed", instances - unital_failed}};
  return s;
}

inline SuiteReport suite_depolarizing(std::size_t instances, Rng rng) {
  SuiteReport s{"depolarizing"};
  for (std::size_t n = 1; n <= kDepolarizingDenseMaxQubits; ++n) {
    const double max_lambda = depolarizing_max_lambda(n);
    for (double lambda : {0.0, 0.25, 0.5, 0.75, 1.0, 0.5 * (1.0 + max_lambda), max_lambda}) {
      for (double x : {0.0, 0.5, 2.48, 4.35, 10.0}) {
        const auto r = depolarizing_inequality_check(x, n, lambda);
        s.check(std::max({r.dense_error(), std::max(0.0, r.closed_form - r.f_i),
                          std::max(0.0, r.dense.value_or(0.0) - r.f_i)}),
                1e-10);
      }
    }
  }
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t n = 1 + rng.index(kDepolarizingDenseMaxQubits);
    const double lambda = rng.uniform(0.0, depolarizing_max_lambda(n));
    const auto u = haar_random_unitary(register_dim(n), rng);
    const auto r = depolarizing_inequality_check(rng.uniform(0.0, 10.0), n, lambda, &u);
    s.check(std::max({r.dense_error(), std::max(0.0, r.closed_form - r.f_i),
                      std::max(0.0, r.dense.value_or(0.0) - r.f_i)}),
            1e-10);
  }
  return s;
}

inline SuiteReport suite_coherence(std::size_t instances, Rng rng, std::size_t cap) {
  SuiteReport s{"coherence"};
  const std::size_t max_qubits = std::min<std::size_t>(4, cap);
  for (std::size_t t = 0; t < instances; ++t) {
    const std::size_t n = 1 + rng.index(max_qubits);
    const double x = rng.uniform(0.0, 8.0);
    const auto rho = coherent_register(x, detail::random_valid_eps(n, x, rng), cap);
    s.check(std::abs(overlap_fidelity(rho, target_register(n, cap)) - scaling_fidelity(x, n)), 1e-12);
  }
  return s;
}

inline SuiteReport suite_resetsim(std::size_t instances, Rng rng) {
  SuiteReport s{"resetsim"};
  std::size_t mc_checked = 0;
  for (std::size_t t = 0; t < instances; ++t) {
    ResetParams p;
    p.n_qubits = 1 + rng.index(7);
    p.rounds = 20;
    p.p_readout = rng.uniform(0.0, 0.1);
    p.p_gate = rng.uniform(0.0, 0.2);
    p.delay_us = rng.bernoulli(0.5) ? rng.uniform(0.0, 500.0) : 0.0;
    p.t1_us = rng.uniform(20.0, 200.0);
    p.x_env = rng.uniform(1.0, 16.0);
    const double star = fixed_point(p);
    s.check(std::abs(reset_round(star, p) - star), 1e-12);
    const auto trace = run_protocol(p);
    // monotone rise from p_init = 1/2 > p*
    double dip = 0.0;
    for (std::size_t k = 1; k < trace.per_round.size(); ++k) {
      dip = std::max(dip, trace.per_round[k - 1].fidelity - trace.per_round[k].fidelity);
    }
    s.check(dip, 1e-15);
    // plateau ordering in register size
    ResetParams bigger = p;
    bigger.n_qubits = p.n_qubits + 1;
    s.check(star > 0.0 ? std::max(0.0, run_protocol(bigger).plateau - trace.plateau) : 0.0, 0.0);
    if (t < 3) {
      ++mc_checked;
      p.rounds = 6;
      const auto exact = run_protocol(p);
      const std::uint64_t shots = 20000;
      const auto mc = monte_carlo(p, shots, rng.split(t).seed());
      double worst = 0.0;
      for (std::size_t k = 0; k < exact.per_round.size(); ++k) {
        const double f = exact.per_round[k].fidelity;
        const double sigma = std::sqrt(f * (1.0 - f) / static_cast<double>(shots));
        const double dev = std::abs(mc.per_round[k].fidelity - f);
        worst = std::max(worst, sigma > 0.0 ? dev / sigma : (dev > 0.0 ? INFINITY : 0.0));
      }
      s.details["monte_carlo_max_sigma_" + std::to_string(t)] = worst;
      // a 4-sigma gate on the worst of 7 rounds keeps the false-alarm rate small
      s.check(worst, 4.0);
    }
  }
  s.details["monte_carlo_runs"] = mc_checked;
  return s;
}

inline Report verify(const VerifyConfig& c, const GlobalConfig& g) {
  const auto& names = suite_names();
  std::vector<std::string> run;
  if (c.suite == "all") {
    run = names;
  } else if (std::find(names.begin(), names.end(), c.suite) != names.end()) {
    run = {c.suite};
  } else {
    throw DomainError("verify: unknown suite `" + c.suite + "`");
  }
  const Rng root(g.seed);
  json config{{"suite", c.suite}, {"instances", c.instances}};
  Report r{header("verify", g, std::move(config)), "suite,checked,passed,failed,max_deviation,ok\n",
           kOk};
  json suites = json::array();
  bool all_ok = true;
  for (const auto& name : run) {
    // every suite draws from its own stream, independent of which others run
    const auto index = static_cast<std::uint64_t>(std::find(names.begin(), names.end(), name) - names.begin());
    const Rng rng = root.split(index);
    SuiteReport s;
    if (name == "invariance") s = suite_invariance(c.instances, rng, g.dense_cap);
    else if (name == "scaling") s = suite_scaling(g.dense_cap);
    else if (name == "bounds") s = suite_bounds(c.instances, rng, g.dense_cap);
    else if (name == "depolarizing") s = suite_depolarizing(c.instances, rng);
    else if (name == "coherence") s = suite_coherence(c.instances, rng, g.dense_cap);
    else s = suite_resetsim(c.instances, rng);
    all_ok = all_ok && s.ok();
    suites.push_back(s.to_json());
    r.csv += s.name + "," + std::to_string(s.checked) + "," + std::to_string(s.checked - s.failed) +
             "," + std::to_string(s.failed) + "," + fmt(s.max_deviation) + "," +
             (s.ok() ? "true" : "false") + "\n";
  }
  r.document["suites"] = std::move(suites);
  r.document["ok"] = all_ok;
  r.exit_code = all_ok ? kOk : kViolations;
  return r;
}

// ---------------------------------------------------------------------------
// bound-audit
// ---------------------------------------------------------------------------

inline json to_json(const BoundReport& b) {
  return json{{"f_composite", b.f_composite}, {"f_i", b.f_i},
              {"f_p", b.f_p},                 {"lower", b.lower},
              {"upper", b.upper},             {"lower_ok", b.lower_ok},
              {"upper_ok", b.upper_ok},       {"upper_fi_ok", b.upper_fi_ok},
              {"upper_fp_ok", b.upper_fp_ok}, {"channel_unital", b.channel_unital}};
}

inline Report bound_audit(const AuditConfig& c, const GlobalConfig& g) {
  if (c.family != "unital" && c.family != "random-kraus" && c.family != "replacement") {
    throw DomainError("bound-audit: unknown family `" + c.family +
                      "` (expected unital, random-kraus or replacement)");
  }
  if (c.instances == 0) throw DomainError("bound-audit: instances must be >= 1");
  if (c.n) {
    if (*c.n == 0) throw DomainError("bound-audit: n must be >= 1");
    require_dense_cap(*c.n, g.dense_cap, "bound-audit");
    if (c.family == "unital" && *c.n > 14) throw DomainError("bound-audit: n too large");
  }
  if (c.x) thermoscale::detail::require_model_x(*c.x, "bound-audit");

  Rng rng(g.seed);
  const std::size_t max_qubits = std::min<std::size_t>(3, g.dense_cap);
  std::size_t lower_ok = 0, upper_ok = 0, upper_fi_ok = 0, upper_fp_ok = 0, unital = 0;
  std::size_t missing_replacement_violation = 0;
  std::optional<BoundReport> worst_upper, worst_lower;
  std::optional<std::size_t> worst_upper_n, worst_lower_n;
  std::optional<double> worst_upper_x, worst_lower_x;
  for (std::size_t t = 0; t < c.instances; ++t) {
    const std::size_t n = c.n ? *c.n : 1 + rng.index(max_qubits);
    const double x = c.x ? *c.x : rng.uniform(0.1, 6.0);
    const std::size_t d = register_dim(n);
    const auto u = haar_random_unitary(d, rng);
    KrausChannel ch;
    if (c.family == "unital") ch = detail::random_unital_channel(n, rng);
    else if (c.family == "random-kraus") ch = random_kraus_channel(d, 1 + rng.index(4), rng);
    else ch = replacement_channel(thermoscale::detail::prepared_state(u));
    const BoundReport b = bound_check(ch, u, x, n, g.dense_cap);
    lower_ok += b.lower_ok;
    upper_ok += b.upper_ok;
    upper_fi_ok += b.upper_fi_ok;
    upper_fp_ok += b.upper_fp_ok;
    unital += b.channel_unital;
    if (c.family == "replacement" && b.f_i < 1.0 && b.upper_ok) ++missing_replacement_violation;
    if (!worst_upper || b.upper_violation() > worst_upper->upper_violation()) {
      worst_upper = b;
      worst_upper_n = n;
      worst_upper_x = x;
    }
    if (!worst_lower || b.lower_violation() > worst_lower->lower_violation()) {
      worst_lower = b;
      worst_lower_n = n;
      worst_lower_x = x;
    }
  }
  const double total = static_cast<double>(c.instances);
  json config{{"family", c.family}, {"instances", c.instances}, {"x", optional_json(c.x)},
              {"n", optional_json(c.n)}, {"strict", c.strict}};
  Report r{header("bound-audit", g, std::move(config)), "", kOk};
  auto& doc = r.document;
  const double rates[] = {static_cast<double>(lower_ok) / total, static_cast<double>(upper_ok) / total,
                          static_cast<double>(upper_fi_ok) / total,
                          static_cast<double>(upper_fp_ok) / total, static_cast<double>(unital) / total};
  doc["lower_ok_rate"] = rates[0];
  doc["upper_ok_rate"] = rates[1];
  doc["upper_fi_ok_rate"] = rates[2];
  doc["upper_fp_ok_rate"] = rates[3];
  doc["unital_rate"] = rates[4];
  json worst_u = to_json(*worst_upper);
  worst_u["n"] = *worst_upper_n;
  worst_u["x"] = *worst_upper_x;
  worst_u["upper_violation"] = worst_upper->upper_violation();
  json worst_l = to_json(*worst_lower);
  worst_l["n"] = *worst_lower_n;
  worst_l["x"] = *worst_lower_x;
  worst_l["lower_violation"] = worst_lower->lower_violation();
  doc["worst_upper"] = std::move(worst_u);
  doc["worst_lower"] = std::move(worst_l);

  // Findings that contradict what is provable for the family.
  json findings = json::array();
  if (lower_ok != c.instances) findings.push_back("lower bound violated");
  if (c.family == "unital" && upper_fi_ok != c.instances) {
    findings.push_back("unital channel exceeded F_I");
  }
  if (missing_replacement_violation > 0) {
    findings.push_back("replacement channel did not exceed F_I although F_I < 1");
  }
  doc["findings"] = findings;
  r.csv = "family,instances,lower_ok_rate,upper_ok_rate,upper_fi_ok_rate,upper_fp_ok_rate,unital_rate\n" +
          c.family + "," + std::to_string(c.instances);
  for (double rate : rates) r.csv += "," + fmt(rate);
  r.csv += "\n";
  r.exit_code = (c.strict && !findings.empty()) ? kViolations : kOk;
  return r;
}

// ---------------------------------------------------------------------------
// Dense cap from the environment
// ---------------------------------------------------------------------------

inline std::optional<std::size_t> dense_cap_from_env() {
  const char* v = std::getenv("THERMOSCALE_DENSE_CAP");
  if (!v || !*v) return std::nullopt;
  std::size_t cap = 0;
  const std::string s(v);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), cap);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw DomainError("THERMOSCALE_DENSE_CAP must be a positive integer, got `" + s + "`");
  }
  return cap;
}

// Maps a library exception to the exit-code contract.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const FitError*>(&e) || dynamic_cast<const ConvergenceError*>(&e)) {
    return kNumericalError;
  }
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e) || dynamic_cast<const InvalidStateError*>(&e)) {
    return kInputError;
  }
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return kInputError;
  return kNumericalError;
}

}  // namespace thermoscale::cli
