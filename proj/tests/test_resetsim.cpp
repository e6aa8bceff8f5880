#include <gtest/gtest.h>

#include <cmath>

#include "thermoscale/resetsim.hpp"

namespace ts = thermoscale;

namespace {

ts::ResetParams noisy(double ro, double g) {
  ts::ResetParams p;
  p.p_readout = ro;
  p.p_gate = g;
  return p;
}

}  // namespace

TEST(ResetRound, PerfectResetInOneRound) {
  EXPECT_EQ(ts::reset_round(0.5, ts::ResetParams{}), 0.0);
  EXPECT_EQ(ts::reset_round(1.0, ts::ResetParams{}), 0.0);
}

TEST(ResetRound, AlgebraicExpansion) {
  // p' = 0.005 p + 0.0199 for p_ro = 0.02, p_g = 0.01
  const auto params = noisy(0.02, 0.01);
  for (double p = 0.0; p <= 1.0; p += 0.05) EXPECT_NEAR(ts::reset_round(p, params), 0.005 * p + 0.0199, 1e-15);
  const auto a = ts::affine_round(params);
  EXPECT_NEAR(a.slope, 0.005, 1e-16);
  EXPECT_NEAR(a.offset, 0.0199, 1e-16);
}

TEST(ResetRound, EquilibriumIsFixedUnderRelaxation) {
  ts::ResetParams p;
  p.delay_us = 1e6;
  p.t1_us = 50.0;
  p.x_env = 3.0;
  const double eq = ts::equilibrium_excited(p);
  EXPECT_NEAR(eq, std::exp(-3.0) / (1.0 + std::exp(-3.0)), 1e-16);
  EXPECT_NEAR(ts::relaxation_stage(eq, p), eq, 1e-16);
  EXPECT_NEAR(ts::relaxation_stage(0.3, p), eq, 1e-15);
}

TEST(ResetRound, AffineFormMatchesStages) {
  ts::ResetParams p = noisy(0.03, 0.07);
  p.delay_us = 40.0;
  p.t1_us = 90.0;
  p.x_env = 2.0;
  const auto a = ts::affine_round(p);
  for (double q = 0.0; q <= 1.0; q += 0.1) EXPECT_NEAR(ts::reset_round(q, p), a.slope * q + a.offset, 1e-15);
}

TEST(FixedPoint, Examples) {
  EXPECT_NEAR(ts::fixed_point(noisy(0.02, 0.01)), 0.02, 1e-15);
  EXPECT_EQ(ts::fixed_point(ts::ResetParams{}), 0.0);
  const double p7 = ts::register_fidelity(0.02, 7);
  EXPECT_NEAR(p7, std::pow(0.98, 7), 1e-15);
}

TEST(FixedPoint, IsFixedByTheRound) {
  ts::Rng rng(1);
  for (int t = 0; t < 200; ++t) {
    ts::ResetParams p = noisy(rng.uniform(0.0, 0.5), rng.uniform());
    p.delay_us = rng.uniform(0.0, 500.0);
    p.t1_us = rng.uniform(10.0, 200.0);
    p.x_env = rng.uniform(0.0, 10.0);
    const double star = ts::fixed_point(p);
    EXPECT_NEAR(ts::reset_round(star, p), star, 1e-12);
    EXPECT_GE(star, 0.0);
    EXPECT_LE(star, 1.0);
  }
}

TEST(RunProtocol, ZeroRoundsKeepsInitialState) {
  ts::ResetParams p = noisy(0.02, 0.01);
  p.rounds = 0;
  p.n_qubits = 3;
  const auto t = ts::run_protocol(p);
  ASSERT_EQ(t.per_round.size(), 1u);
  EXPECT_DOUBLE_EQ(t.per_round[0].fidelity, 0.125);
}

TEST(RunProtocol, ConvergesToPlateau) {
  ts::ResetParams p = noisy(0.02, 0.01);
  p.n_qubits = 7;
  p.rounds = 30;
  const auto t = ts::run_protocol(p);
  ASSERT_EQ(t.per_round.size(), 31u);
  EXPECT_NEAR(t.per_round.back().fidelity, t.plateau, 1e-12);
  EXPECT_NEAR(t.plateau, std::pow(0.98, 7), 1e-12);
}

TEST(RunProtocol, MonotoneRiseWhenStartingAboveFixedPoint) {
  ts::Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    ts::ResetParams p = noisy(rng.uniform(0.0, 0.1), rng.uniform(0.0, 0.2));
    p.n_qubits = 1 + rng.index(7);
    p.rounds = 25;
    p.delay_us = rng.uniform(0.0, 300.0);
    p.x_env = rng.uniform(2.0, 16.0);
    p.p_init = 0.5;
    ASSERT_GT(p.p_init, ts::fixed_point(p));
    const auto trace = ts::run_protocol(p);
    for (std::size_t k = 1; k < trace.per_round.size(); ++k) {
      EXPECT_GE(trace.per_round[k].fidelity, trace.per_round[k - 1].fidelity * (1.0 - 1e-15));
    }
  }
}

TEST(RunProtocol, PlateauDecreasesWithRegisterSize) {
  ts::ResetParams p = noisy(0.01, 0.02);
  double prev = 2.0;
  for (std::size_t n = 1; n <= 10; ++n) {
    p.n_qubits = n;
    const double plateau = ts::run_protocol(p).plateau;
    EXPECT_LT(plateau, prev);
    prev = plateau;
  }
}

TEST(RunProtocol, LongerDelayImprovesFidelityWhenEquilibriumIsColder) {
  ts::ResetParams p = noisy(0.05, 0.02);
  p.x_env = 8.0;
  p.t1_us = 100.0;
  ASSERT_LT(ts::equilibrium_excited(p), ts::gate_stage(0.5, p));
  double prev = 1.0;
  for (double delay = 0.0; delay <= 1000.0; delay += 50.0) {
    p.delay_us = delay;
    const double after = ts::reset_round(0.5, p);
    EXPECT_LT(after, prev);
    prev = after;
  }
}

TEST(RunProtocol, HeterogeneousRegisterMatchesHomogeneous) {
  ts::ResetParams p = noisy(0.02, 0.01);
  p.rounds = 8;
  p.n_qubits = 3;
  const std::vector<ts::ResetParams> per(3, p);
  const auto a = ts::run_protocol(p);
  const auto b = ts::run_protocol(std::span<const ts::ResetParams>(per));
  ASSERT_EQ(a.per_round.size(), b.per_round.size());
  for (std::size_t k = 0; k < a.per_round.size(); ++k) {
    EXPECT_NEAR(a.per_round[k].fidelity, b.per_round[k].fidelity, 1e-15);
  }
  EXPECT_NEAR(a.plateau, b.plateau, 1e-15);

  std::vector<ts::ResetParams> mixed{noisy(0.01, 0.0), noisy(0.03, 0.0)};
  const auto m = ts::run_protocol(std::span<const ts::ResetParams>(mixed));
  EXPECT_NEAR(m.plateau, 0.99 * 0.97, 1e-15);
}

TEST(RunProtocol, RejectsInvalidParameters) {
  EXPECT_THROW(ts::run_protocol(noisy(1.5, 0.0)), ts::DomainError);
  EXPECT_THROW(ts::run_protocol(noisy(0.0, -0.1)), ts::DomainError);
  ts::ResetParams p;
  p.t1_us = 0.0;
  EXPECT_THROW(ts::run_protocol(p), ts::DomainError);
  p = ts::ResetParams{};
  p.delay_us = -1.0;
  EXPECT_THROW(ts::run_protocol(p), ts::DomainError);
}

TEST(MonteCarlo, ZeroNoiseAllGroundAfterFirstRound) {
  ts::ResetParams p;
  p.n_qubits = 4;
  p.rounds = 3;
  const auto mc = ts::monte_carlo(p, 2000, 1);
  for (std::size_t k = 1; k <= 3; ++k) {
    EXPECT_EQ(mc.per_round[k].ground_count, 2000u);
    EXPECT_EQ(mc.per_round[k].fidelity, 1.0);
  }
}

TEST(MonteCarlo, DeterministicAndThreadingIndependent) {
  ts::ResetParams p = noisy(0.05, 0.1);
  p.n_qubits = 3;
  p.delay_us = 20.0;
  p.x_env = 3.0;
  const auto a = ts::monte_carlo(p, 10007, 99, true);
  const auto b = ts::monte_carlo(p, 10007, 99, true);
  const auto c = ts::monte_carlo(p, 10007, 99, false);
  for (std::size_t k = 0; k < a.per_round.size(); ++k) {
    EXPECT_EQ(a.per_round[k].ground_count, b.per_round[k].ground_count);
    EXPECT_EQ(a.per_round[k].ground_count, c.per_round[k].ground_count);
  }
  const auto d = ts::monte_carlo(p, 10007, 100);
  bool differs = false;
  for (std::size_t k = 0; k < a.per_round.size(); ++k)
    differs = differs || a.per_round[k].ground_count != d.per_round[k].ground_count;
  EXPECT_TRUE(differs);
}

TEST(MonteCarlo, AgreesWithExactRecursionAcrossGrid) {
  std::uint64_t seed = 500;
  for (double ro : {0.0, 0.02, 0.1}) {
    for (double g : {0.0, 0.05}) {
      for (double delay : {0.0, 80.0}) {
        ts::ResetParams p = noisy(ro, g);
        p.n_qubits = 2;
        p.rounds = 6;
        p.delay_us = delay;
        p.x_env = 2.5;
        const auto exact = ts::run_protocol(p);
        const auto mc = ts::monte_carlo(p, 40000, seed++);
        for (std::size_t k = 0; k <= p.rounds; ++k) {
          // binomial sigma under the exact model; the sample estimate is 0
          // whenever every shot lands in the ground state
          const double f = exact.per_round[k].fidelity;
          const double sigma = std::sqrt(f * (1.0 - f) / 40000.0);
          EXPECT_LE(std::abs(mc.per_round[k].fidelity - f), 3.0 * sigma + 1e-12)
              << "ro=" << ro << " g=" << g << " delay=" << delay << " round=" << k;
        }
      }
    }
  }
}

TEST(MonteCarlo, RejectsZeroShots) {
  EXPECT_THROW(ts::monte_carlo(ts::ResetParams{}, 0, 1), ts::DomainError);
}
