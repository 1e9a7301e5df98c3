#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "bohm/ensemble.hpp"
#include "bohm/scenarios.hpp"

namespace bohm {
namespace {

std::size_t peaks_above(const RealField& rho, double floor_fraction) {
  const double peak = *std::max_element(rho.values.begin(), rho.values.end());
  std::size_t count = 0;
  for (std::size_t i = 1; i + 1 < rho.values.size(); ++i) {
    const double v = rho.values[i];
    if (v > rho.values[i - 1] && v >= rho.values[i + 1] && v >= floor_fraction * peak) ++count;
  }
  return count;
}

double centroid(const WaveFunction& psi) {
  double m = 0.0;
  for (std::size_t i = 0; i < psi.grid().size(); ++i) m += psi.grid().coordinate(0, i) * std::norm(psi(i));
  return m * psi.grid().cell_volume();
}

TEST(TwoSlit, SymmetricAndSeparated) {
  const auto s = two_slit();
  const std::size_t n = s.grid.size();
  for (std::size_t i = 1; i < n; ++i) EXPECT_NEAR(std::abs(s.psi0(i) - s.psi0(n - i)), 0.0, 1e-15);
  const auto rho = density(s.psi0);
  const double peak = *std::max_element(rho.values.begin(), rho.values.end());
  EXPECT_LT(rho.values[n / 2] / peak, 1e-3);
  EXPECT_NEAR(s.psi0.norm2(), 1.0, 1e-12);
  ASSERT_EQ(s.uniform_intervals.size(), 2u);
  EXPECT_DOUBLE_EQ(s.uniform_intervals[0].first, -1.125);
  EXPECT_DOUBLE_EQ(s.uniform_intervals[1].second, 1.125);
}

TEST(TwoSlit, EvolvedDensityShowsFringes) {
  const auto s = two_slit();
  const Propagator prop(s.potential, s.params, s.run_defaults.dt);
  const auto frames = evolve(s.psi0, prop, s.run_defaults.nsteps, s.run_defaults.nsteps);
  EXPECT_GE(peaks_above(density(frames.back()), 1e-3), 5u);
  EXPECT_EQ(peaks_above(density(s.psi0), 1e-3), 2u);
}

TEST(TwoSlit, PreconditionsEnforced) {
  EXPECT_THROW(two_slit(0.4, 0.25), InvalidArgument);
  EXPECT_THROW(two_slit(2.0, 0.25, 64.0, 512), ResolutionError);
  // L = 40, N = 1024 does not resolve s / 8.
  EXPECT_THROW(two_slit(2.0, 0.25, 40.0, 1024), ResolutionError);
}

TEST(FreeGaussian, DefaultsAndPreconditions) {
  const auto s = free_gaussian();
  EXPECT_EQ(s.grid, Grid::line(40.0, 512));
  EXPECT_NEAR(s.psi0.norm2(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.run_defaults.dt, 1e-3);
  EXPECT_EQ(s.run_defaults.n_samples, 10000u);
  EXPECT_THROW(free_gaussian(0.0, 0.2, 0.0, 40.0, 512), ResolutionError);
  EXPECT_THROW(free_gaussian(0.0, 1.0, 0.0, 10.0, 512), ResolutionError);
  // Matches the closed-form oracle at t = 0.
  const auto exact = analytic_free_gaussian(s.grid, 0.0, 1.0, 0.0, 0.0);
  for (std::size_t i = 0; i < s.grid.size(); ++i) EXPECT_NEAR(std::abs(s.psi0(i) - exact(i)), 0.0, 1e-13);
}

TEST(FreeGaussian, DensityStaysEven) {
  const auto s = free_gaussian();
  const Propagator prop(s.potential, s.params, s.run_defaults.dt);
  const auto frames = evolve(s.psi0, prop, 2000, 500);
  const std::size_t n = s.grid.size();
  // Parity is exact in exact arithmetic; allow FFT roundoff relative to the peak.
  for (const auto& f : frames.frames) {
    const auto rho = density(f);
    const double peak = *std::max_element(rho.values.begin(), rho.values.end());
    for (std::size_t i = 1; i < n; ++i) EXPECT_NEAR(rho.values[i], rho.values[n - i], 1e-12 * peak);
  }
}

TEST(FreeGaussian, TrajectoriesScaleWithWidth) {
  const auto s = free_gaussian();
  const Propagator prop(s.potential, s.params, s.run_defaults.dt);
  const FrameField field(evolve(s.psi0, prop, 2000, 1), s.params);
  for (double q0 : {-1.5, 0.5, 1.0, 2.0}) {
    const auto traj = integrate(field, Configuration::at(q0));
    EXPECT_NEAR(traj.final_point()[0] / q0, std::sqrt(2.0), 1e-3 * std::sqrt(2.0));
  }
}

TEST(Harmonic, GroundStateAndDefaults) {
  const auto s = harmonic();
  EXPECT_EQ(s.grid, Grid::line(20.0, 256));
  // Ground-state density sd sqrt(hbar / 2 m omega) = 1/sqrt(2).
  double var = 0.0;
  for (std::size_t i = 0; i < s.grid.size(); ++i) var += std::pow(s.grid.coordinate(0, i), 2) * std::norm(s.psi0(i));
  EXPECT_NEAR(var * s.grid.cell_volume(), 0.5, 1e-12);
  EXPECT_NEAR(s.potential.values()[s.grid.size() / 2 + 10], 0.5 * std::pow(s.grid.coordinate(0, s.grid.size() / 2 + 10), 2), 1e-15);
  EXPECT_THROW(harmonic(0.0), InvalidArgument);
  EXPECT_THROW(harmonic(1.0, 8.0), ResolutionError);
  EXPECT_THROW(harmonic(400.0), ResolutionError);
}

TEST(Harmonic, CoherentStateMovesRigidly) {
  const auto s = harmonic(1.0, 2.0);
  const Propagator prop(s.potential, s.params, s.run_defaults.dt);
  const FrameField field(evolve(s.psi0, prop, s.run_defaults.nsteps, 10), s.params);
  const auto starts = sample(s.psi0, 20, 3).samples;
  for (const auto& q0 : starts) {
    const auto traj = integrate(field, q0, 10);
    for (std::size_t k = 0; k < traj.size(); k += 25) {
      const double t = traj.times[k];
      EXPECT_NEAR(traj.points[k][0], q0[0] - 2.0 + 2.0 * std::cos(t), 1e-3) << "q0 " << q0[0] << " t " << t;
    }
  }
}

TEST(Harmonic, CentroidPeriod) {
  for (double omega : {1.0, 2.0}) {
    const auto s = harmonic(omega, 1.5);
    const double dt = 1e-3;
    const Propagator prop(s.potential, s.params, dt);
    const double period = 2.0 * kPi / omega;
    const auto steps = static_cast<std::size_t>(std::ceil(1.1 * period / dt));
    const auto frames = evolve(s.psi0, prop, steps, 1);
    // Maximum of the centroid after half a period, refined by a parabola.
    std::size_t best = 0;
    double best_value = -1e300;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (frames[i].time() < 0.5 * period) continue;
      const double c = centroid(frames[i]);
      if (c > best_value) {
        best_value = c;
        best = i;
      }
    }
    ASSERT_GT(best, 0u);
    ASSERT_LT(best + 1, frames.size());
    const double a = centroid(frames[best - 1]);
    const double b = best_value;
    const double c = centroid(frames[best + 1]);
    const double shift = 0.5 * (a - c) / (a - 2.0 * b + c);
    const double t_max = frames[best].time() + shift * dt;
    EXPECT_NEAR(t_max, period, 1e-3) << "omega " << omega;
  }
}

TEST(Scenarios, ConstructionIsDeterministic) {
  const auto a = two_slit();
  const auto b = two_slit();
  EXPECT_TRUE(std::equal(a.psi0.values().begin(), a.psi0.values().end(), b.psi0.values().begin()));
  const auto m1 = measurement_setup();
  const auto m2 = measurement_setup();
  const auto s1 = measurement_state(m1, 0.5);
  const auto s2 = measurement_state(m2, 0.5);
  EXPECT_TRUE(std::equal(s1.values().begin(), s1.values().end(), s2.values().begin()));
}

TEST(Scenarios, MeasurementResolutionChecks) {
  MeasurementParams p;
  p.points_y = 32;
  EXPECT_THROW(measurement_setup(p), ResolutionError);
  MeasurementParams q;
  q.length_x = 10.0;
  EXPECT_THROW(measurement_setup(q), ResolutionError);
}

}  // namespace
}  // namespace bohm
