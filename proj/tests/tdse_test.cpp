#include <cmath>
#include <complex>
#include <vector>

#include <gtest/gtest.h>

#include "bohm/scenarios.hpp"
#include "bohm/tdse.hpp"

namespace bohm {
namespace {

using namespace std::complex_literals;

double l2_distance(const WaveFunction& a, const WaveFunction& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) sum += std::norm(a.values()[i] - b.values()[i]);
  return std::sqrt(sum * a.grid().cell_volume());
}

double centroid(const WaveFunction& psi) {
  double m = 0.0;
  for (std::size_t i = 0; i < psi.grid().size(); ++i) m += psi.grid().coordinate(0, i) * std::norm(psi(i));
  return m * psi.grid().cell_volume() / psi.norm2();
}

// Harmonic coherent state (hbar = m = omega = 1) with initial displacement a:
// center a cos t, momentum -a sin t, global phase -t/2 - x_c p_c / 2.
WaveFunction coherent_state(const Grid& g, double a, double t) {
  const double xc = a * std::cos(t);
  const double pc = -a * std::sin(t);
  const double theta = -0.5 * t - 0.5 * xc * pc;
  return WaveFunction::from_function(
      g,
      [&](double x) {
        return std::pow(kPi, -0.25) * std::exp(cplx(-0.5 * (x - xc) * (x - xc), pc * x + theta));
      },
      t);
}

WaveFunction run(const WaveFunction& psi0, const Propagator& prop, std::size_t steps) {
  WaveFunction psi = psi0;
  for (std::size_t s = 0; s < steps; ++s) psi = step(psi, prop);
  return psi;
}

TEST(Step, PlaneWaveAcquiresKineticPhase) {
  const Grid g = Grid::line(8.0 * kPi, 256);
  const auto psi = normalize(WaveFunction::from_function(g, [](double x) { return std::exp(2.0i * x); }));
  const double dt = 1e-3;
  const Propagator prop(Potential(g), {}, dt);
  const auto next = step(psi, prop);
  const cplx phase = std::polar(1.0, -4.0 * dt / 2.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(std::abs(next(i) - phase * psi(i)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(next(i)), std::abs(psi(i)), 1e-12);
  }
  EXPECT_DOUBLE_EQ(next.time(), dt);
}

TEST(Step, ConstantPotentialOffsetOnlyChangesGlobalPhase) {
  const auto s = harmonic(1.0, 1.5);
  std::vector<double> shifted(s.potential.values().begin(), s.potential.values().end());
  for (auto& v : shifted) v += 3.7;
  const Propagator a(s.potential, s.params, 1e-3);
  const Propagator b(Potential(s.grid, shifted), s.params, 1e-3);
  WaveFunction pa = s.psi0;
  WaveFunction pb = s.psi0;
  for (int n = 0; n < 500; ++n) {
    a.advance(pa.values());
    b.advance(pb.values());
  }
  for (std::size_t i = 0; i < s.grid.size(); ++i) EXPECT_NEAR(std::norm(pa(i)), std::norm(pb(i)), 1e-10);
}

TEST(Step, FreeGaussianMatchesAnalyticSolution) {
  const Grid g = Grid::line(40.0, 512);
  const auto psi0 = analytic_free_gaussian(g, 0.0, 1.0, 0.0, 0.0);
  const Propagator prop(Potential(g), {}, 1e-3);
  const auto psi = run(psi0, prop, 2000);
  EXPECT_NEAR(psi.time(), 2.0, 1e-12);
  EXPECT_LE(l2_distance(psi, analytic_free_gaussian(g, 0.0, 1.0, 0.0, 2.0)), 1e-6);
}

TEST(Step, GridMismatchThrows) {
  const Propagator prop(Potential(Grid::line(40.0, 512)), {}, 1e-3);
  EXPECT_THROW(step(WaveFunction(Grid::line(40.0, 256)), prop), GridMismatch);
}

TEST(Propagator, RejectsZeroStepAndFlagsLargePotentialSteps) {
  const auto s = harmonic();
  EXPECT_THROW(Propagator(s.potential, s.params, 0.0), InvalidArgument);
  EXPECT_TRUE(Propagator(s.potential, s.params, 1e-3).stability_advisory_ok());
  EXPECT_FALSE(Propagator(s.potential, s.params, 1e-2).stability_advisory_ok());
}

TEST(Evolve, FrameBookkeeping) {
  const auto s = free_gaussian();
  const Propagator prop(s.potential, s.params, 1e-3);
  const auto two = evolve(s.psi0, prop, 1, 1);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_DOUBLE_EQ(two.start_time(), 0.0);
  EXPECT_DOUBLE_EQ(two.end_time(), 1e-3);

  const auto strided = evolve(s.psi0, prop, 10, 5);
  ASSERT_EQ(strided.size(), 3u);
  EXPECT_DOUBLE_EQ(strided.dt, 5e-3);
  for (std::size_t i = 1; i < strided.size(); ++i) {
    EXPECT_NEAR(strided[i].time() - strided[i - 1].time(), strided.dt, 1e-15);
  }
  EXPECT_THROW(evolve(s.psi0, prop, 0, 1), InvalidArgument);
  EXPECT_THROW(evolve(s.psi0, prop, 10, 3), InvalidArgument);
  EXPECT_THROW(evolve(s.psi0, prop, 10, 0), InvalidArgument);
}

TEST(Evolve, CoherentStateCentroidFollowsClassicalOrbit) {
  const auto s = harmonic(1.0, 2.0);
  const Propagator prop(s.potential, s.params, 1e-3);
  const auto nsteps = static_cast<std::size_t>(std::llround(kPi / 1e-3));
  const auto frames = evolve(s.psi0, prop, nsteps, nsteps);
  ASSERT_EQ(frames.size(), 2u);
  const double t = frames.end_time();
  EXPECT_NEAR(centroid(frames.back()), 2.0 * std::cos(t), 1e-3);
  EXPECT_NEAR(centroid(frames.back()), -2.0, 1e-3);
}

TEST(Evolve, EnergyConservedForFreeGaussian) {
  const auto s = free_gaussian(0.0, 1.0, 0.5);
  const Propagator prop(s.potential, s.params, 1e-3);
  const double e0 = energy(s.psi0, s.potential, s.params);
  // hbar^2 / (8 m sigma^2) + hbar^2 k0^2 / 2m.
  EXPECT_NEAR(e0, 0.125 + 0.125, 1e-10);
  const auto frames = evolve(s.psi0, prop, 10000, 10000);
  EXPECT_LE(std::abs(energy(frames.back(), s.potential, s.params) - e0) / e0, 1e-6);
}

TEST(Evolve, UnitarityOverThousandSteps) {
  for (const auto& s : {free_gaussian(), harmonic(1.0, 2.0), two_slit()}) {
    const Propagator prop(s.potential, s.params, s.run_defaults.dt);
    const auto frames = evolve(s.psi0, prop, 1000, 10);
    for (const auto& f : frames.frames) EXPECT_LE(std::abs(f.norm2() - 1.0), 1e-8) << s.name;
  }
}

TEST(Evolve, ForwardThenBackwardReturnsInitialState) {
  const auto s = harmonic(1.0, 2.0);
  const Propagator forward(s.potential, s.params, 1e-3);
  const auto there = run(s.psi0, forward, 1000);
  const auto back = run(there, forward.reversed(), 1000);
  EXPECT_LE(l2_distance(back, s.psi0), 1e-8);
  EXPECT_NEAR(back.time(), 0.0, 1e-12);
}

TEST(Evolve, StrangSplittingIsSecondOrder) {
  // With V = 0 the kinetic step is exact, so convergence is measured on the
  // harmonic coherent state against its closed form.
  const auto s = harmonic(1.0, 2.0);
  const double horizon = 1.0;
  auto error = [&](double dt) {
    const Propagator prop(s.potential, s.params, dt);
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    return l2_distance(run(s.psi0, prop, steps), coherent_state(s.grid, 2.0, horizon));
  };
  EXPECT_LE(l2_distance(s.psi0, coherent_state(s.grid, 2.0, 0.0)), 1e-12);
  const double coarse = error(0.02);
  const double fine = error(0.01);
  const double ratio = coarse / fine;
  EXPECT_GE(ratio, 3.4);
  EXPECT_LE(ratio, 4.6);
}

TEST(AnalyticFreeGaussian, InitialStateAndSpreading) {
  const Grid g = Grid::line(40.0, 512);
  const auto psi0 = analytic_free_gaussian(g, 0.5, 1.0, 0.0, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double u = g.coordinate(0, i) - 0.5;
    EXPECT_NEAR(std::abs(psi0(i) - std::pow(2.0 * kPi, -0.25) * std::exp(-u * u / 4.0)), 0.0, 1e-15);
  }
  EXPECT_NEAR(free_gaussian_width(1.0, 2.0), std::sqrt(2.0), 1e-15);

  const auto psi2 = analytic_free_gaussian(g, 0.0, 1.0, 0.0, 2.0);
  double var = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) var += g.coordinate(0, i) * g.coordinate(0, i) * std::norm(psi2(i));
  var *= g.cell_volume();
  EXPECT_NEAR(std::sqrt(var), std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(psi2.norm2(), 1.0, 1e-12);
}

TEST(AnalyticFreeGaussian, CenterMovesWithGroupVelocity) {
  const Grid g = Grid::line(40.0, 512);
  const auto psi = analytic_free_gaussian(g, -1.0, 1.0, 2.0, 1.0);
  EXPECT_NEAR(centroid(psi), -1.0 + 2.0, 1e-10);
  EXPECT_THROW(analytic_free_gaussian(g, 0.0, 0.0, 0.0, 1.0), InvalidArgument);
}

TEST(AnalyticFreeGaussian, AgreesWithSolverForMovingPacket) {
  const auto s = free_gaussian(-3.0, 1.0, 1.5);
  const Propagator prop(s.potential, s.params, 1e-3);
  const auto frames = evolve(s.psi0, prop, 2000, 2000);
  EXPECT_LE(l2_distance(frames.back(), analytic_free_gaussian(s.grid, -3.0, 1.0, 1.5, 2.0)), 1e-6);
}

}  // namespace
}  // namespace bohm
