#pragma once

// Preset experiments: free Gaussian, harmonic oscillator, two-slit transverse
// model, and the two-outcome pointer measurement.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "bohm/core.hpp"
#include "bohm/subsystem.hpp"

namespace bohm {

struct RunDefaults {
  double dt = 1e-3;
  std::size_t nsteps = 1000;
  std::size_t stride = 1;
  std::size_t n_samples = 10000;
};

struct Scenario {
  std::string name;
  Grid grid;
  WaveFunction psi0;
  Potential potential;
  PhysicalParams params;
  RunDefaults run_defaults;
  /// Intervals for the uniform-in-slits initial ensemble (two-slit only).
  std::vector<std::pair<double, double>> uniform_intervals;
};

inline constexpr double kBoundaryDensity = 1e-12;

namespace detail {

inline void check_boundary(const WaveFunction& psi, const std::string& what) {
  const Grid& g = psi.grid();
  // The first and last node along each axis border the periodic seam.
  double edge = 0.0;
  const std::size_t n0 = g.points(0);
  if (g.dim() == 1) {
    edge = std::max(std::norm(psi(0)), std::norm(psi(n0 - 1)));
  } else {
    const std::size_t n1 = g.points(1);
    for (std::size_t i = 0; i < n0; ++i) edge = std::max({edge, std::norm(psi(i, 0)), std::norm(psi(i, n1 - 1))});
    for (std::size_t j = 0; j < n1; ++j) edge = std::max({edge, std::norm(psi(0, j)), std::norm(psi(n0 - 1, j))});
  }
  if (edge >= kBoundaryDensity) {
    throw ResolutionError(what + ": density at the periodic boundary is not below 1e-12; enlarge the domain");
  }
}

// Unit-norm Gaussian on the line whose density has the given mean and standard deviation.
inline WaveFunction gaussian(const Grid& line, double center, double sigma, double k0 = 0.0) {
  return normalize(WaveFunction::from_function(line, [&](double x) {
    const double u = x - center;
    return std::exp(cplx(-u * u / (4.0 * sigma * sigma), k0 * u));
  }));
}

}  // namespace detail

/// Free Gaussian with density N(x0, sigma0^2) and momentum hbar k0, V = 0.
inline Scenario free_gaussian(double x0 = 0.0, double sigma0 = 1.0, double k0 = 0.0, double length = 40.0,
                              std::size_t points = 512) {
  const Grid grid = Grid::line(length, points);
  if (!(sigma0 >= 4.0 * grid.spacing(0))) throw ResolutionError("free_gaussian: sigma0 must be at least 4 dx");
  Scenario s{"free_gaussian", grid, detail::gaussian(grid, x0, sigma0, k0), Potential(grid), {}, {}, {}};
  detail::check_boundary(s.psi0, s.name);
  s.run_defaults = {1e-3, 2000, 1, 10000};
  return s;
}

/// V = m omega^2 x^2 / 2 with the ground state displaced by `displacement`
/// (a coherent state; zero displacement gives the stationary ground state).
inline Scenario harmonic(double omega = 1.0, double displacement = 0.0, double length = 20.0,
                         std::size_t points = 256) {
  if (!(omega > 0.0)) throw InvalidArgument("harmonic: omega must be positive");
  const Grid grid = Grid::line(length, points);
  const PhysicalParams params;
  const double sigma = std::sqrt(params.hbar / (2.0 * params.mass[0] * omega));
  if (!(sigma >= 4.0 * grid.spacing(0))) throw ResolutionError("harmonic: ground-state width not resolved");
  const double k = 0.5 * params.mass[0] * omega * omega;
  Scenario s{"harmonic", grid, detail::gaussian(grid, displacement, sigma),
             Potential::from_function(grid, [k](double x) { return k * x * x; }), params, {}, {}};
  detail::check_boundary(s.psi0, s.name);
  s.run_defaults = {1e-3, 5000, 1, 10000};
  return s;
}

/// Transverse two-slit model: equal-weight Gaussians centered at +-d/2 whose
/// densities have standard deviation s/2, V = 0. The longitudinal coordinate
/// is treated as time.
inline Scenario two_slit(double separation = 2.0, double slit_width = 0.25, double length = 64.0,
                         std::size_t points = 2048) {
  if (!(slit_width > 0.0) || !(separation > 2.0 * slit_width)) {
    throw InvalidArgument("two_slit: need separation > 2 * slit_width > 0");
  }
  const Grid grid = Grid::line(length, points);
  if (grid.spacing(0) > slit_width / 8.0) throw ResolutionError("two_slit: grid spacing must be <= slit_width / 8");
  const double half = 0.5 * separation;
  const double sigma = 0.5 * slit_width;
  auto psi0 = normalize(WaveFunction::from_function(grid, [&](double x) {
    const double a = (x - half) / sigma;
    const double b = (x + half) / sigma;
    return cplx(std::exp(-0.25 * a * a) + std::exp(-0.25 * b * b), 0.0);
  }));
  Scenario s{"two_slit", grid, std::move(psi0), Potential(grid), {}, {}, {}};
  detail::check_boundary(s.psi0, s.name);
  s.run_defaults = {2.5e-4, 4000, 4, 10000};
  s.uniform_intervals = {{-half - 0.5 * slit_width, -half + 0.5 * slit_width},
                         {half - 0.5 * slit_width, half + 0.5 * slit_width}};
  return s;
}

/// Interior local maxima of a 1D density that reach floor_fraction of its peak.
inline std::size_t count_maxima(const RealField& rho, double floor_fraction) {
  const auto& v = rho.values;
  if (v.size() < 3) return 0;
  const double peak = *std::max_element(v.begin(), v.end());
  std::size_t count = 0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] >= floor_fraction * peak) ++count;
  }
  return count;
}

/// Parameters of the default two-mode measurement.
struct MeasurementParams {
  double mode_separation = 8.0;
  double mode_width = 0.5;     ///< standard deviation of each |psi_alpha|^2
  double p1 = 0.3;             ///< |c_1|^2; c = (sqrt(p1), sqrt(1 - p1))
  double pointer_width = 0.2;  ///< standard deviation of |Phi0|^2
  double coupling = 1.0;
  double duration = 1.0;
  double length_x = 20.0;
  std::size_t points_x = 256;
  double length_y = 8.0;
  std::size_t points_y = 256;
};

/// Two Gaussian modes at -+separation/2 with eigenvalues -1 and +1 and a
/// Gaussian pointer centered at y = 0.
inline MeasurementSetup measurement_setup(const MeasurementParams& p = {}) {
  if (!(p.p1 >= 0.0 && p.p1 <= 1.0)) throw InvalidArgument("measurement: p1 must lie in [0, 1]");
  const Grid grid = Grid::plane(p.length_x, p.points_x, p.length_y, p.points_y);
  const Grid xs = Grid::line(p.length_x, p.points_x);
  const Grid ys = Grid::line(p.length_y, p.points_y);
  if (!(p.mode_width >= 4.0 * xs.spacing(0))) throw ResolutionError("measurement: mode width not resolved");
  if (!(p.pointer_width >= 4.0 * ys.spacing(0))) throw ResolutionError("measurement: pointer width not resolved");
  MeasurementSetup setup{grid,
                         {detail::gaussian(xs, -0.5 * p.mode_separation, p.mode_width),
                          detail::gaussian(xs, 0.5 * p.mode_separation, p.mode_width)},
                         {-1.0, 1.0},
                         {cplx(std::sqrt(p.p1), 0.0), cplx(std::sqrt(1.0 - p.p1), 0.0)},
                         detail::gaussian(ys, 0.0, p.pointer_width),
                         p.pointer_width,
                         p.coupling,
                         p.duration};
  setup.validate();
  detail::check_boundary(measurement_state(setup, 0.0), "measurement");
  detail::check_boundary(measurement_state(setup, setup.duration), "measurement");
  return setup;
}

}  // namespace bohm
