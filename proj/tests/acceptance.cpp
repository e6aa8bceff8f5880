// Acceptance runner. One line per criterion: "criterion N: PASS|FAIL ...".
// With --criterion N only that criterion runs; the exit status is non-zero
// when any criterion that ran failed. Tolerances are fixed here on purpose.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermoscale/thermoscale.hpp"

namespace ts = thermoscale;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::uint64_t> range(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> v(hi - lo + 1);
  std::iota(v.begin(), v.end(), lo);
  return v;
}

// 1. Dense Uhlmann fidelity of the thermal register against |0...0> agrees
// with the closed form.
Outcome scaling_oracle() {
  constexpr double kTol = 1e-10;
  constexpr double kMaxSeconds = 10.0;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::size_t n = 1; n <= 6; ++n) {
    for (double x : {0.0, 0.5, 2.48, 4.35, 10.0}) {
      const double dense = ts::uhlmann(ts::to_dense(ts::thermal_register(x, n), 6), ts::target_register(n, 6));
      worst = std::max(worst, std::abs(dense - ts::scaling_fidelity(x, n)));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= kTol && secs < kMaxSeconds,
          fmt("max |dense - closed form| = %.3g (tol %.0e), %.2f s", worst, kTol, secs)};
}

// 2. Fidelities at x = 4.35 against 30-digit values, and the quoted
// "almost 99%" and "around 92%".
Outcome numeric_echo() {
  constexpr double kTol = 1e-15;
  constexpr double kF1 = 0.98725765053588839;
  constexpr double kF7 = 0.91414177329913675;
  const double f1 = ts::scaling_fidelity(4.35, 1);
  const double f7 = ts::scaling_fidelity(4.35, 7);
  const bool exact = std::abs(f1 - kF1) <= kTol && std::abs(f7 - kF7) <= kTol;
  const bool phrases = f1 > 0.98 && f1 < 0.99 && std::abs(f7 - 0.92) <= 0.01;
  return {exact && phrases,
          fmt("F(1) = %.6f (quoted 0.9873), F(7) = %.6f (quoted 0.9142), max dev from reference %.2g", f1, f7,
              std::max(std::abs(f1 - kF1), std::abs(f7 - kF7)))};
}

// 3. Effective temperature at 5 GHz.
Outcome temperature() {
  constexpr double kReference = 56.80;
  constexpr double kRelTol = 0.05;
  const double t = ts::temperature_from_x(4.35, 5.0);
  const double rel = std::abs(t - kReference) / kReference;
  return {std::abs(t - 55.2) < 0.05 && rel <= kRelTol,
          fmt("T = %.3f mK, %.2f%% from %.2f mK (tol %.0f%%)", t, 100 * rel, kReference, 100 * kRelTol)};
}

// 4. Single-qubit error rate needed for 90% at N = 1000.
Outcome threshold() {
  const double a = ts::scaling_fidelity(ts::x_from_error_rate(1e-4), 1000);
  const double b = ts::scaling_fidelity(ts::x_from_error_rate(2e-4), 1000);
  const bool pass = std::abs(a - 0.9048) <= 5e-5 && a >= 0.90 && std::abs(b - 0.8187) <= 5e-5 && b < 0.90;
  return {pass, fmt("eta 1e-4: %.6f, eta 2e-4: %.6f", a, b)};
}

// 5. 24-qubit register at eta = 5e-3.
Outcome ghz_echo() {
  const double f = ts::scaling_fidelity(ts::x_from_error_rate(5e-3), 24);
  return {std::abs(f - 0.8867) <= 5e-5 && std::abs(f - 0.90) <= 0.02, fmt("F = %.6f", f)};
}

// 6. Synthetic fit round trip: coverage of the 2-sigma interval.
Outcome fit_round_trip() {
  constexpr double kNoise = 0.005;
  constexpr std::size_t kRepetitions = 100;
  constexpr double kMinCoverage = 0.95;
  constexpr double kMaxSeconds = 60.0;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::vector<std::uint64_t>> grids{range(1, 7), range(12, 53)};
  bool pass = true;
  std::string detail;
  std::uint64_t combo = 0;
  for (double x_true : {2.48, 4.35}) {
    for (const auto& ns : grids) {
      std::size_t covered = 0;
      for (std::uint64_t seed = 0; seed < kRepetitions; ++seed) {
        ts::Rng rng = ts::Rng(seed).split(combo);
        const auto fit = ts::fit_scaling(ts::synthesize(x_true, ns, kNoise, rng));
        if (std::abs(fit.x_hat - x_true) <= 2.0 * fit.x_stderr) ++covered;
      }
      const double rate = static_cast<double>(covered) / kRepetitions;
      pass = pass && rate >= kMinCoverage;
      detail += fmt("x=%.2f n=%llu..%llu: %.0f%%; ", x_true, static_cast<unsigned long long>(ns.front()),
                    static_cast<unsigned long long>(ns.back()), 100 * rate);
      ++combo;
    }
  }
  const double secs = seconds_since(t0);
  return {pass && secs < kMaxSeconds, detail + fmt("need >= %.0f%%, %.2f s", 100 * kMinCoverage, secs)};
}

// 7. Unitary invariance of the Uhlmann fidelity.
Outcome invariance() {
  constexpr double kTol = 1e-8;
  ts::Rng rng(7);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t d = ts::register_dim(1 + rng.index(4));
    const auto rho = ts::random_density_matrix(d, rng, 1 + rng.index(d));
    const auto sigma = ts::random_density_matrix(d, rng, 1 + rng.index(d));
    const auto u = ts::haar_random_unitary(d, rng);
    const double before = ts::uhlmann(rho, sigma);
    const double after = ts::uhlmann(ts::apply_unitary(u, rho), ts::apply_unitary(u, sigma));
    worst = std::max(worst, std::abs(after - before));
  }
  return {worst <= kTol, fmt("500 instances, max deviation %.3g (tol %.0e)", worst, kTol)};
}

ts::KrausChannel random_unital(std::size_t n, ts::Rng& rng) {
  const std::size_t d = ts::register_dim(n);
  if (rng.bernoulli(0.5)) {
    return ts::noisy_gate(ts::depolarizing(rng.uniform(0.0, ts::depolarizing_max_lambda(n)), n),
                          ts::haar_random_unitary(d, rng));
  }
  const std::size_t k = 1 + rng.index(4);
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& v : p) total += (v = rng.uniform(0.05, 1.0));
  for (auto& v : p) v /= total;
  std::vector<ts::UnitaryOp> us;
  for (std::size_t i = 0; i < k; ++i) us.push_back(ts::haar_random_unitary(d, rng));
  return ts::mixed_unitary(p, us);
}

// 8. F_P F_I <= F for any channel, F <= F_I for unital channels, and the
// replacement channel breaks F <= F_I.
Outcome bounds() {
  constexpr double kTol = 1e-9;
  ts::Rng rng(8);
  std::size_t lower_ok = 0, unital_ok = 0, replacement_ok = 0, replacement_total = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.index(3);
    const std::size_t d = ts::register_dim(n);
    const auto c = ts::random_kraus_channel(d, 1 + rng.index(4), rng);
    const auto r = ts::bound_check(c, ts::haar_random_unitary(d, rng), rng.uniform(0.0, 8.0), n);
    lower_ok += r.lower_violation() <= kTol;
  }
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.index(3);
    const auto c = random_unital(n, rng);
    const auto r = ts::bound_check(c, ts::haar_random_unitary(ts::register_dim(n), rng), rng.uniform(0.0, 8.0), n);
    unital_ok += r.f_composite - r.f_i <= kTol;
  }
  for (double x : {0.1, 0.5, 1.0, 2.48, 4.35, 8.0, 10.0}) {
    for (std::size_t n = 1; n <= 3; ++n) {
      const auto u = ts::haar_random_unitary(ts::register_dim(n), rng);
      const auto c = ts::replacement_channel(ts::detail::prepared_state(u));
      const auto r = ts::bound_check(c, u, x, n);
      ++replacement_total;
      replacement_ok += std::abs(r.f_composite - 1.0) <= 1e-12 && r.f_composite > r.f_i + kTol && !r.upper_ok;
    }
  }
  return {lower_ok == 1000 && unital_ok == 1000 && replacement_ok == replacement_total,
          fmt("lower %zu/1000, unital upper %zu/1000, replacement violation reported %zu/%zu", lower_ok,
              unital_ok, replacement_ok, replacement_total)};
}

// 9. Depolarizing closed form against dense evaluation, lambda up to its
// largest admissible value.
Outcome depolarizing() {
  constexpr double kTol = 1e-10;
  ts::Rng rng(9);
  double worst = 0.0;
  bool below = true;
  std::size_t cases = 0, beyond_one = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const double top = ts::depolarizing_max_lambda(n);
    for (double lambda : {0.0, 0.1, 0.5, 0.9, 1.0, 0.5 * (1.0 + top), top}) {
      for (double x : {0.0, 0.5, 2.48, 4.35, 10.0}) {
        const auto u = ts::haar_random_unitary(ts::register_dim(n), rng);
        for (const ts::UnitaryOp* gate : {static_cast<const ts::UnitaryOp*>(nullptr), &u}) {
          const auto r = ts::depolarizing_inequality_check(x, n, lambda, gate);
          worst = std::max(worst, r.dense_error());
          below = below && r.closed_form <= r.f_i + 1e-12 && *r.dense <= r.f_i + kTol;
          ++cases;
          beyond_one += lambda > 1.0;
        }
      }
    }
  }
  return {worst <= kTol && below && beyond_one > 0,
          fmt("%zu cases (%zu with lambda > 1), max |dense - closed form| %.3g, never above F_I: %s", cases,
              beyond_one, worst, below ? "yes" : "no")};
}

// 10. Off-diagonal coherence leaves the fidelity with |0...0> unchanged.
Outcome coherence() {
  constexpr double kTol = 1e-12;
  ts::Rng rng(10);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.index(4);
    const double x = rng.uniform(0.0, 8.0);
    std::vector<ts::complex> eps(n);
    for (auto& e : eps) {
      e = std::polar(std::sqrt(std::exp(-x) * rng.uniform()), rng.uniform(0.0, 2.0 * std::numbers::pi));
    }
    const auto rho = ts::coherent_register(x, eps);
    worst = std::max(worst, std::abs(ts::uhlmann(rho, ts::target_register(n)) - ts::scaling_fidelity(x, n)));
  }
  return {worst <= kTol, fmt("100 instances, max deviation %.3g (tol %.0e)", worst, kTol)};
}

ts::ResetParams shipped_preset() {
  std::ifstream in(std::string(THERMOSCALE_CONFIG_DIR) + "/reset_preset.json");
  const auto j = nlohmann::json::parse(in).at("reset_sim");
  ts::ResetParams p;
  p.n_qubits = j.at("n_qubits");
  p.rounds = j.at("rounds");
  p.p_readout = j.at("p_readout");
  p.p_gate = j.at("p_gate");
  p.delay_us = j.at("delay_us");
  p.t1_us = j.at("t1_us");
  p.x_env = j.at("x_env");
  p.p_init = j.at("p_init");
  return p;
}

// 11. Reset protocol: fixed point, Monte Carlo agreement, plateau ordering and
// the shape of the shipped preset.
Outcome reset() {
  constexpr double kFixedTol = 1e-12;
  constexpr std::uint64_t kShots = 100000;
  constexpr double kSigmas = 3.0;
  ts::Rng rng(11);

  // p* = b / (1 - a) for the affine round p -> a p + b read off at p = 0, 1
  double fixed_worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    ts::ResetParams p;
    p.p_readout = rng.uniform(0.0, 0.3);
    p.p_gate = rng.uniform(0.0, 1.0);
    p.delay_us = t % 2 ? rng.uniform(0.0, 400.0) : 0.0;
    p.t1_us = rng.uniform(20.0, 200.0);
    p.x_env = rng.uniform(0.5, 16.0);
    const double b = ts::reset_round(0.0, p);
    const double a = ts::reset_round(1.0, p) - b;
    double star = b / (1.0 - a);
    if (p.delay_us == 0.0) star = p.p_readout;
    fixed_worst = std::max(fixed_worst, std::abs(ts::fixed_point(p) - star));
  }

  const ts::ResetParams preset = shipped_preset();
  const auto exact = ts::run_protocol(preset);
  const auto mc = ts::monte_carlo(preset, kShots, 2024);
  double worst_z = 0.0;
  bool mc_ok = true;
  for (std::size_t k = 0; k < exact.per_round.size(); ++k) {
    const double f = exact.per_round[k].fidelity;
    const double sigma = std::sqrt(f * (1.0 - f) / kShots);
    const double diff = std::abs(mc.per_round[k].fidelity - f);
    mc_ok = mc_ok && diff <= kSigmas * sigma + 1e-12;
    if (sigma > 0) worst_z = std::max(worst_z, diff / sigma);
  }

  bool ordered = true;
  double prev = 2.0;
  for (std::size_t n = 1; n <= 10; ++n) {
    ts::ResetParams p = preset;
    p.n_qubits = n;
    const double plateau = ts::run_protocol(p).plateau;
    ordered = ordered && plateau < prev;
    prev = plateau;
  }

  bool rises = exact.per_round.back().fidelity > exact.per_round.front().fidelity;
  for (std::size_t k = 1; k < exact.per_round.size(); ++k) {
    rises = rises && exact.per_round[k].fidelity >= exact.per_round[k - 1].fidelity * (1.0 - 1e-15);
  }
  const bool settles = std::abs(exact.per_round.back().fidelity - exact.plateau) <= 1e-9;

  return {fixed_worst <= kFixedTol && mc_ok && ordered && rises && settles,
          fmt("fixed point dev %.3g; MC %llu shots worst %.2f sigma over %zu rounds; plateau ordered: %s; "
              "preset monotone to plateau %.6f: %s",
              fixed_worst, static_cast<unsigned long long>(kShots), worst_z, exact.per_round.size(),
              ordered ? "yes" : "no", exact.plateau, rises && settles ? "yes" : "no")};
}

// 12. Large registers: no overflow or NaN, monotone in n, log value exact.
Outcome stability() {
  constexpr double x = 4.35;
  constexpr double kLogReference = -12824.22950543118;  // -1e6 log1p(e^-4.35), 30-digit arithmetic
  constexpr double kRelTol = 1e-12;
  const double log_f = ts::log_scaling_fidelity(x, 1000000);
  const double f = ts::scaling_fidelity(x, 1000000);
  const double expected = std::exp(kLogReference);  // below the smallest subnormal
  bool monotone = true, finite = true;
  double prev_f = 1.0, prev_log = 0.0;
  for (std::uint64_t n = 1; n <= 1000000; n = n < 1000 ? n + 1 : n + n / 100) {
    const double v = ts::scaling_fidelity(x, n);
    const double lv = ts::log_scaling_fidelity(x, n);
    finite = finite && std::isfinite(v) && std::isfinite(lv) && v >= 0.0 && v <= 1.0;
    monotone = monotone && v <= prev_f && lv < prev_log;
    prev_f = v;
    prev_log = lv;
  }
  const double rel = std::abs(log_f - kLogReference) / std::abs(kLogReference);
  return {rel <= kRelTol && f == expected && finite && monotone,
          fmt("log F(1e6) = %.11f (rel dev %.2g), F(1e6) = %g, finite: %s, monotone: %s", log_f, rel, f,
              finite ? "yes" : "no", monotone ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"scaling-law oracle", scaling_oracle}, {"numeric echo at x = 4.35", numeric_echo},
      {"temperature", temperature},           {"error-rate threshold", threshold},
      {"24-qubit echo", ghz_echo},            {"fit round trip", fit_round_trip},
      {"unitary invariance", invariance},     {"fidelity bounds", bounds},
      {"depolarizing suite", depolarizing},   {"coherence robustness", coherence},
      {"reset simulator", reset},             {"numerical stability", stability}};

  std::size_t only = 0;
  if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) {
    only = std::strtoul(argv[2], nullptr, 10);
    if (only < 1 || only > criteria.size()) {
      std::fprintf(stderr, "acceptance: criterion must be 1..%zu\n", criteria.size());
      return 2;
    }
  } else if (argc != 1) {
    std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
    return 2;
  }

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && only != i + 1) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu: %s %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
