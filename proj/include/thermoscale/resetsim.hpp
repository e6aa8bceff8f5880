#pragma once

// Conditional-reset protocol: K rounds of (measure, NOT if the outcome was
// |1>), optionally followed by a delay during which each qubit relaxes
// toward the environment's thermal population.
//
// Noise model per qubit and round:
//   readout  - the outcome is flipped with probability p_readout
//   gate     - the NOT is perfect with probability 1 - p_gate, otherwise the
//              qubit is fully depolarized (excited with probability 1/2)
//   delay    - with probability r = 1 - exp(-delay / T1) the qubit is
//              replaced by the environment thermal state, p_eq = 1/(1+e^{x_env})
//
// The first measurement removes any coherence of the |+> input, so tracking
// the excited population p of each qubit is exact.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <span>
#include <string>
#include <vector>

#include "thermoscale/error.hpp"
#include "thermoscale/rng.hpp"

namespace thermoscale {

struct ResetParams {
  std::size_t n_qubits = 1;
  std::size_t rounds = 10;
  double p_readout = 0.0;
  double p_gate = 0.0;
  double delay_us = 0.0;
  double t1_us = 100.0;
  double x_env = 16.0;
  double p_init = 0.5;
};

inline void require_valid(const ResetParams& p) {
  auto prob = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError(std::string("reset params: ") + name + " = " + std::to_string(v) +
                        " is not a probability");
    }
  };
  prob(p.p_readout, "p_readout");
  prob(p.p_gate, "p_gate");
  prob(p.p_init, "p_init");
  if (!(p.delay_us >= 0.0) || !std::isfinite(p.delay_us)) {
    throw DomainError("reset params: delay_us must be finite and >= 0");
  }
  if (!(p.t1_us > 0.0)) throw DomainError("reset params: t1_us must be > 0");
  if (!(p.x_env >= 0.0)) throw DomainError("reset params: x_env must be >= 0");
}

// Probability that a qubit relaxes to the environment during one delay.
inline double relaxation_weight(const ResetParams& p) {
  return p.delay_us == 0.0 ? 0.0 : -std::expm1(-p.delay_us / p.t1_us);
}

inline double equilibrium_excited(const ResetParams& p) { return 1.0 / (1.0 + std::exp(p.x_env)); }

// Excited population after the measure + conditional-NOT stage.
inline double gate_stage(double p, const ResetParams& params) {
  const double ro = params.p_readout;
  const double half_g = params.p_gate / 2.0;
  return p * (1.0 - ro) * half_g + p * ro + (1.0 - p) * ro * (1.0 - half_g);
}

inline double relaxation_stage(double p, const ResetParams& params) {
  return p + relaxation_weight(params) * (equilibrium_excited(params) - p);
}

inline double reset_round(double p, const ResetParams& params) {
  return relaxation_stage(gate_stage(p, params), params);
}

// The round map is affine, p -> slope p + offset, with slope <= 1/2.
struct AffineRound {
  double slope = 0.0;
  double offset = 0.0;
};

inline AffineRound affine_round(const ResetParams& params) {
  const double r = relaxation_weight(params);
  const double half_g = params.p_gate / 2.0;
  return AffineRound{(1.0 - r) * half_g,
                     (1.0 - r) * params.p_readout * (1.0 - half_g) +
                         r * equilibrium_excited(params)};
}

inline double fixed_point(const ResetParams& params) {
  const AffineRound a = affine_round(params);
  return a.offset / (1.0 - a.slope);
}

inline double register_fidelity(double p_excited, std::size_t n_qubits) {
  return std::pow(1.0 - p_excited, static_cast<double>(n_qubits));
}

struct ResetRound {
  std::size_t round = 0;
  double p_excited = 0.0;
  double fidelity = 0.0;
};

struct ResetTrace {
  std::vector<ResetRound> per_round;  // rounds + 1 entries, round 0 first
  double plateau = 0.0;               // register fidelity at the fixed point
};

inline ResetTrace run_protocol(const ResetParams& params) {
  require_valid(params);
  ResetTrace t;
  t.per_round.reserve(params.rounds + 1);
  double p = params.p_init;
  t.per_round.push_back({0, p, register_fidelity(p, params.n_qubits)});
  for (std::size_t k = 1; k <= params.rounds; ++k) {
    p = reset_round(p, params);
    t.per_round.push_back({k, p, register_fidelity(p, params.n_qubits)});
  }
  t.plateau = register_fidelity(fixed_point(params), params.n_qubits);
  return t;
}

// Heterogeneous register: one parameter set per qubit (their n_qubits is
// ignored). The number of rounds is taken from the first entry. The
// p_excited column holds the mean over qubits.
inline ResetTrace run_protocol(std::span<const ResetParams> per_qubit) {
  if (per_qubit.empty()) throw DomainError("run_protocol: no qubits");
  for (const auto& q : per_qubit) require_valid(q);
  const std::size_t rounds = per_qubit.front().rounds;
  std::vector<double> p(per_qubit.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = per_qubit[i].p_init;
  auto record = [&](std::size_t k) {
    double f = 1.0;
    double mean = 0.0;
    for (double pi : p) {
      f *= 1.0 - pi;
      mean += pi;
    }
    return ResetRound{k, mean / static_cast<double>(p.size()), f};
  };
  ResetTrace t;
  t.per_round.push_back(record(0));
  for (std::size_t k = 1; k <= rounds; ++k) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = reset_round(p[i], per_qubit[i]);
    t.per_round.push_back(record(k));
  }
  t.plateau = 1.0;
  for (const auto& q : per_qubit) t.plateau *= 1.0 - fixed_point(q);
  return t;
}

struct MonteCarloRound {
  std::size_t round = 0;
  double fidelity = 0.0;
  double std_error = 0.0;
  std::uint64_t ground_count = 0;
};

struct MonteCarloTrace {
  std::vector<MonteCarloRound> per_round;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
};

// Shots are split over a fixed number of shards, shard s drawing from
// Rng(seed).split(s); results do not depend on how many threads run them.
inline constexpr std::size_t kMonteCarloShards = 16;

namespace detail {

inline std::vector<std::uint64_t> simulate_shard(const ResetParams& params, std::uint64_t shots,
                                                 Rng rng) {
  std::vector<std::uint64_t> ground(params.rounds + 1, 0);
  const double r = relaxation_weight(params);
  const double p_eq = equilibrium_excited(params);
  std::vector<unsigned char> excited(params.n_qubits);
  for (std::uint64_t s = 0; s < shots; ++s) {
    bool all_ground = true;
    for (auto& q : excited) {
      q = rng.bernoulli(params.p_init);
      all_ground = all_ground && !q;
    }
    ground[0] += all_ground;
    for (std::size_t k = 1; k <= params.rounds; ++k) {
      all_ground = true;
      for (auto& q : excited) {
        const bool outcome = q ^ rng.bernoulli(params.p_readout);
        if (outcome) {
          if (rng.bernoulli(params.p_gate)) {
            q = rng.bernoulli(0.5);
          } else {
            q ^= 1U;
          }
        }
        if (r > 0.0 && rng.bernoulli(r)) q = rng.bernoulli(p_eq);
        all_ground = all_ground && !q;
      }
      ground[k] += all_ground;
    }
  }
  return ground;
}

}  // namespace detail

inline MonteCarloTrace monte_carlo(const ResetParams& params, std::uint64_t shots,
                                   std::uint64_t seed, bool parallel = true) {
  require_valid(params);
  if (shots == 0) throw DomainError("monte_carlo: shots must be >= 1");
  const Rng root(seed);
  std::vector<std::uint64_t> totals(params.rounds + 1, 0);
  auto shard_shots = [&](std::size_t s) {
    return shots / kMonteCarloShards + (s < shots % kMonteCarloShards ? 1 : 0);
  };
  if (parallel) {
    std::vector<std::future<std::vector<std::uint64_t>>> jobs;
    for (std::size_t s = 0; s < kMonteCarloShards; ++s) {
      jobs.push_back(std::async(std::launch::async, detail::simulate_shard, std::cref(params),
                                shard_shots(s), root.split(s)));
    }
    for (auto& j : jobs) {
      const auto counts = j.get();
      for (std::size_t k = 0; k < totals.size(); ++k) totals[k] += counts[k];
    }
  } else {
    for (std::size_t s = 0; s < kMonteCarloShards; ++s) {
      const auto counts = detail::simulate_shard(params, shard_shots(s), root.split(s));
      for (std::size_t k = 0; k < totals.size(); ++k) totals[k] += counts[k];
    }
  }
  MonteCarloTrace t;
  t.shots = shots;
  t.seed = seed;
  for (std::size_t k = 0; k < totals.size(); ++k) {
    const double f = static_cast<double>(totals[k]) / static_cast<double>(shots);
    t.per_round.push_back({k, f, std::sqrt(f * (1.0 - f) / static_cast<double>(shots)), totals[k]});
  }
  return t;
}

}  // namespace thermoscale
