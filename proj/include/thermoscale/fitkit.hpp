#pragma once

// Fits the one-parameter law F(n; x) = (1 + e^{-x})^{-n} to fidelity-vs-size
// data and converts the fitted x = beta * dE into an effective temperature.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "thermoscale/error.hpp"
#include "thermoscale/fidelity.hpp"
#include "thermoscale/rng.hpp"

namespace thermoscale {

class FitError : public Error {
 public:
  using Error::Error;
};

struct ScalingRow {
  std::uint64_t n = 0;
  double fidelity = 0.0;
  std::optional<double> std_error;
};

struct ScalingDataset {
  std::vector<ScalingRow> rows;

  std::size_t distinct_sizes() const {
    std::set<std::uint64_t> ns;
    for (const auto& r : rows) ns.insert(r.n);
    return ns.size();
  }
};

// ---------------------------------------------------------------------------
// CSV ingestion: header `n,fidelity[,stderr]`, blank lines and `#` comments
// skipped. A repeated header (e.g. concatenated files) is skipped if it
// matches the first one.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::istringstream in(s);
  in.imbue(std::locale::classic());
  in >> out;
  return in && in.peek() == std::char_traits<char>::eof();
}

inline bool parse_count(const std::string& s, std::uint64_t& out) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return false;
  std::istringstream in(s);
  in >> out;
  return static_cast<bool>(in);
}

}  // namespace detail

inline ScalingDataset parse_csv(std::istream& in, const std::string& source = "<input>") {
  ScalingDataset d;
  std::vector<std::string> header;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError(source + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    auto fields = detail::split_fields(body);
    if (header.empty()) {
      if (fields.size() < 2 || fields.size() > 3 || fields[0] != "n" || fields[1] != "fidelity" ||
          (fields.size() == 3 && fields[2] != "stderr")) {
        throw fail("expected header `n,fidelity[,stderr]`");
      }
      header = std::move(fields);
      continue;
    }
    if (!fields.empty() && fields[0] == "n") {
      if (fields != header) throw fail("header does not match the first header");
      continue;
    }
    if (fields.size() != header.size()) {
      throw fail("expected " + std::to_string(header.size()) + " fields, got " +
                 std::to_string(fields.size()));
    }
    ScalingRow row;
    if (!detail::parse_count(fields[0], row.n) || row.n == 0) {
      throw fail("n must be a positive integer, got `" + fields[0] + "`");
    }
    if (!detail::parse_double(fields[1], row.fidelity)) {
      throw fail("fidelity `" + fields[1] + "` is not a number");
    }
    if (!(row.fidelity > 0.0 && row.fidelity <= 1.0)) {
      throw fail("fidelity " + fields[1] + " outside (0, 1]");
    }
    if (header.size() == 3 && !fields[2].empty()) {
      double se = 0.0;
      if (!detail::parse_double(fields[2], se) || !(se > 0.0) || !std::isfinite(se)) {
        throw fail("stderr `" + fields[2] + "` must be a positive number");
      }
      row.std_error = se;
    }
    d.rows.push_back(row);
  }
  if (d.rows.empty()) throw ParseError(source + ": no rows");
  return d;
}

inline ScalingDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  return parse_csv(in, path);
}

// ---------------------------------------------------------------------------
// Model and fit
// ---------------------------------------------------------------------------

inline std::vector<double> predict(double x, std::span<const std::uint64_t> n_values) {
  std::vector<double> out;
  out.reserve(n_values.size());
  for (auto n : n_values) out.push_back(scaling_fidelity(x, n));
  return out;
}

// dF/dx = n F / (1 + e^{x})
inline double scaling_fidelity_dx(double x, std::uint64_t n) {
  return static_cast<double>(n) * scaling_fidelity(x, n) / (1.0 + std::exp(x));
}

inline constexpr double kFitLowerBound = 1e-6;
inline constexpr double kFitUpperBound = 50.0;

struct FitResult {
  double x_hat = 0.0;
  double x_stderr = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;  // observed - predicted
  std::optional<double> temperature_mK;
  double ss_res = 0.0;           // unweighted
  double ss_tot = 0.0;           // unweighted, about the mean
  double weighted_ss_res = 0.0;  // the minimized objective
  bool weighted = false;
  bool at_bound = false;  // optimum sits on the search interval edge
  std::size_t n_rows = 0;
  std::string method = "grid+brent+bisection";
};

namespace detail {

struct Objective {
  std::span<const ScalingRow> rows;
  std::vector<double> weights;

  double value(double x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double r = scaling_fidelity(x, rows[i].n) - rows[i].fidelity;
      s += weights[i] * r * r;
    }
    return s;
  }

  double derivative(double x) const {
    double g = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double r = scaling_fidelity(x, rows[i].n) - rows[i].fidelity;
      g += 2.0 * weights[i] * r * scaling_fidelity_dx(x, rows[i].n);
    }
    return g;
  }
};

// x0 = -ln(mean(F^{-1/n} - 1)), from inverting the model row by row.
inline double linearized_guess(std::span<const ScalingRow> rows) {
  double acc = 0.0;
  for (const auto& r : rows) {
    acc += std::pow(r.fidelity, -1.0 / static_cast<double>(r.n)) - 1.0;
  }
  const double mean = acc / static_cast<double>(rows.size());
  if (!(mean > 0.0) || !std::isfinite(mean)) return kFitUpperBound;
  return std::clamp(-std::log(mean), kFitLowerBound, kFitUpperBound);
}

// Brent's minimizer (golden section with parabolic steps) on [a, b].
template <typename F>
double brent_minimize(F&& f, double a, double b, double tol = 1e-12, int max_iter = 200) {
  constexpr double golden = 0.3819660112501051;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-15;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    bool golden_step = true;
    if (std::abs(e) > tol1) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < m ? tol1 : -tol1;
        golden_step = false;
      }
    }
    if (golden_step) {
      e = (x < m ? b : a) - x;
      d = golden * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      (u < x ? b : a) = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      (u < x ? a : b) = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return x;
}

inline FitResult fit_rows(std::span<const ScalingRow> rows, bool weighted) {
  if (rows.size() < 2) throw FitError("fit: need at least 2 rows");
  {
    std::set<std::uint64_t> ns;
    for (const auto& r : rows) {
      if (r.n == 0) throw FitError("fit: n must be positive");
      if (!std::isfinite(r.fidelity)) throw FitError("fit: non-finite fidelity");
      ns.insert(r.n);
    }
    if (ns.size() < 2) throw FitError("fit: need at least 2 distinct register sizes");
  }
  const double mean = std::accumulate(rows.begin(), rows.end(), 0.0,
                                      [](double s, const ScalingRow& r) { return s + r.fidelity; }) /
                      static_cast<double>(rows.size());
  double ss_tot = 0.0;
  for (const auto& r : rows) ss_tot += (r.fidelity - mean) * (r.fidelity - mean);
  if (!(ss_tot > 0.0)) throw FitError("fit: all fidelities are equal; R^2 undefined");

  Objective obj{rows, std::vector<double>(rows.size(), 1.0)};
  if (weighted) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].std_error) obj.weights[i] = 1.0 / (*rows[i].std_error * *rows[i].std_error);
    }
  }

  // Coarse log-spaced scan (plus the linearized guess) to bracket the minimum.
  constexpr std::size_t kGrid = 400;
  std::vector<double> grid(kGrid);
  const double ratio = std::log(kFitUpperBound / kFitLowerBound) / static_cast<double>(kGrid - 1);
  for (std::size_t i = 0; i < kGrid; ++i) grid[i] = kFitLowerBound * std::exp(ratio * static_cast<double>(i));
  grid.back() = kFitUpperBound;
  grid.push_back(linearized_guess(rows));
  std::sort(grid.begin(), grid.end());
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = obj.value(grid[i]);
    if (!std::isfinite(s)) throw FitError("fit: objective is not finite");
    if (s < best_value) {
      best_value = s;
      best = i;
    }
  }
  double lo = grid[best == 0 ? 0 : best - 1];
  double hi = grid[std::min(best + 1, grid.size() - 1)];

  double x = brent_minimize([&](double t) { return obj.value(t); }, lo, hi);

  // Polish on the sign change of dS/dx down to a 1e-12 bracket.
  double g_lo = obj.derivative(lo);
  double g_hi = obj.derivative(hi);
  if (g_lo < 0.0 && g_hi > 0.0) {
    const double g_x = obj.derivative(x);
    if (g_x < 0.0) lo = x;
    else if (g_x > 0.0) hi = x;
    else lo = hi = x;
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, lo); ++iter) {
      const double mid = 0.5 * (lo + hi);
      const double g = obj.derivative(mid);
      if (g == 0.0) {
        lo = hi = mid;
        break;
      }
      (g < 0.0 ? lo : hi) = mid;
    }
    x = 0.5 * (lo + hi);
  }

  FitResult res;
  res.x_hat = x;
  res.weighted = weighted;
  res.n_rows = rows.size();
  res.at_bound = x <= kFitLowerBound * (1.0 + 1e-9) || x >= kFitUpperBound * (1.0 - 1e-9);
  double jtj = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double r = rows[i].fidelity - scaling_fidelity(x, rows[i].n);
    res.residuals.push_back(r);
    res.ss_res += r * r;
    res.weighted_ss_res += obj.weights[i] * r * r;
    const double j = scaling_fidelity_dx(x, rows[i].n);
    jtj += obj.weights[i] * j * j;
  }
  res.ss_tot = ss_tot;
  res.r_squared = 1.0 - res.ss_res / ss_tot;
  const double dof = static_cast<double>(rows.size() - 1);
  res.x_stderr = jtj > 0.0 ? std::sqrt(res.weighted_ss_res / dof / jtj)
                           : std::numeric_limits<double>::infinity();
  return res;
}

}  // namespace detail

inline FitResult fit_scaling(const ScalingDataset& d, bool weighted = false) {
  return detail::fit_rows(d.rows, weighted);
}

// Residual-resampling bootstrap of x_hat; returns the sample standard
// deviation over `resamples` refits.
inline double bootstrap_stderr(const ScalingDataset& d, std::size_t resamples, std::uint64_t seed,
                               bool weighted = false) {
  if (resamples < 100) throw FitError("bootstrap: need at least 100 resamples");
  const FitResult base = fit_scaling(d, weighted);
  std::vector<double> fitted;
  for (const auto& r : d.rows) fitted.push_back(scaling_fidelity(base.x_hat, r.n));
  Rng rng(seed);
  std::vector<ScalingRow> sample = d.rows;
  std::vector<double> estimates;
  estimates.reserve(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < sample.size(); ++i) {
      sample[i].fidelity = fitted[i] + base.residuals[rng.index(base.residuals.size())];
    }
    try {
      estimates.push_back(detail::fit_rows(sample, weighted).x_hat);
    } catch (const FitError&) {
      // a resample whose fidelities all coincide carries no information
    }
  }
  if (estimates.size() < 2) throw FitError("bootstrap: too few usable resamples");
  const double mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) /
                      static_cast<double>(estimates.size());
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  return std::sqrt(var / static_cast<double>(estimates.size() - 1));
}

// Exact SI values.
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kBoltzmann = 1.380649e-23;   // J / K

// T = h f / (k_B x) in millikelvin; x = 0 gives +infinity.
inline double temperature_from_x(double x, double frequency_GHz) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("temperature_from_x: x must be >= 0");
  if (!(frequency_GHz > 0.0) || !std::isfinite(frequency_GHz)) {
    throw DomainError("temperature_from_x: frequency must be > 0");
  }
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  return kPlanck * frequency_GHz * 1e9 / (kBoltzmann * x) * 1e3;
}

// Per-qubit frequencies are averaged into one representative splitting.
inline double temperature_from_x(double x, std::span<const double> frequencies_GHz) {
  if (frequencies_GHz.empty()) throw DomainError("temperature_from_x: no frequencies");
  const double mean = std::accumulate(frequencies_GHz.begin(), frequencies_GHz.end(), 0.0) /
                      static_cast<double>(frequencies_GHz.size());
  return temperature_from_x(x, mean);
}

// Noisy samples of the model, F(n; x) + N(0, noise_sd^2). Values are not
// clipped to (0, 1].
inline ScalingDataset synthesize(double x, std::span<const std::uint64_t> n_values,
                                 double noise_sd, Rng& rng) {
  ScalingDataset d;
  for (auto n : n_values) {
    const double f = scaling_fidelity(x, n) + (noise_sd > 0.0 ? rng.normal(0.0, noise_sd) : 0.0);
    d.rows.push_back({n, f, noise_sd > 0.0 ? std::optional<double>(noise_sd) : std::nullopt});
  }
  return d;
}

}  // namespace thermoscale
