#pragma once

// Quantum-equilibrium sampling from |psi|^2, ensemble transport along
// Bohmian trajectories, and the equivariance check.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "bohm/core.hpp"
#include "bohm/guidance.hpp"
#include "bohm/interpolate.hpp"
#include "bohm/parallel.hpp"
#include "bohm/random.hpp"
#include "bohm/stats.hpp"
#include "bohm/tdse.hpp"

namespace bohm {

/// Margin added to the 99% KS critical value for solver and integrator error
/// in 1D equivariance checks; with n = 1e4 the threshold is 0.03.
inline constexpr double kEquivarianceMargin = 0.0137;

/// Uniform envelope height relative to the largest grid density. Interpolated
/// densities exceed the grid maximum by O(dx^2) on resolved grids.
inline constexpr double kEnvelopeFactor = 1.25;

inline constexpr double kMinAcceptance = 1e-6;

struct Ensemble {
  std::vector<Configuration> samples;
  std::uint64_t seed = 0;
  std::shared_ptr<const WaveFunction> source;

  std::size_t size() const { return samples.size(); }
};

/// n independent draws from |psi|^2 by rejection against a uniform envelope.
/// Sample i uses its own stream derived from (seed, i).
inline Ensemble sample(const WaveFunction& psi, std::size_t n, std::uint64_t seed,
                       std::size_t workers = worker_count()) {
  if (n < 1) throw InvalidArgument("sample needs n >= 1");
  const Grid& g = psi.grid();
  double max_density = 0.0;
  for (const auto& v : psi.values()) max_density = std::max(max_density, std::norm(v));
  if (!(max_density > 0.0)) throw ZeroNorm();
  const double envelope = kEnvelopeFactor * max_density;
  double volume = 1.0;
  for (int a = 0; a < g.dim(); ++a) volume *= g.extent(a);
  const double acceptance = psi.norm2() / (volume * envelope);
  if (acceptance < kMinAcceptance) {
    throw EnvelopeFailure("rejection sampling acceptance rate below 1e-6");
  }

  Ensemble out;
  out.seed = seed;
  out.source = std::make_shared<const WaveFunction>(psi);
  out.samples.resize(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        auto rng = sample_stream(seed, i);
        while (true) {
          Configuration q;
          q.dim = g.dim();
          for (int a = 0; a < g.dim(); ++a) q[a] = (uniform01(rng) - 0.5) * g.extent(a);
          const double u = uniform01(rng) * envelope;
          const double rho = std::norm(interpolate(psi, q));
          if (rho > envelope) throw EnvelopeFailure("interpolated density exceeds the sampling envelope");
          if (u < rho) {
            out.samples[i] = wrap(g, q);
            return;
          }
        }
      },
      workers);
  return out;
}

/// n draws uniform over a union of intervals on the line (weighted by length).
inline std::vector<Configuration> sample_uniform_intervals(std::span<const std::pair<double, double>> intervals,
                                                           std::size_t n, std::uint64_t seed) {
  double total = 0.0;
  for (const auto& [lo, hi] : intervals) {
    if (!(hi > lo)) throw InvalidArgument("intervals must have positive length");
    total += hi - lo;
  }
  std::vector<Configuration> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = sample_stream(seed, i);
    double pick = uniform01(rng) * total;
    std::size_t k = 0;
    while (k + 1 < intervals.size() && pick >= intervals[k].second - intervals[k].first) {
      pick -= intervals[k].second - intervals[k].first;
      ++k;
    }
    out[i] = Configuration::at(intervals[k].first + pick);
  }
  return out;
}

/// Trajectories of every start point through a frame field, ordered by id.
inline std::vector<Trajectory> propagate(const FrameField& field, std::span<const Configuration> starts,
                                         std::size_t substeps = 1, std::size_t workers = worker_count()) {
  std::vector<Trajectory> out(starts.size());
  parallel_for(
      starts.size(), [&](std::size_t i) { out[i] = integrate(field, starts[i], substeps, i); }, workers);
  return out;
}

/// Final positions only; same arithmetic as propagate().
inline std::vector<Configuration> transport(const FrameField& field, std::span<const Configuration> starts,
                                            std::size_t substeps = 1, std::size_t workers = worker_count()) {
  std::vector<Configuration> out(starts.size());
  parallel_for(
      starts.size(),
      [&](std::size_t i) {
        Configuration q = wrap(field.grid(), starts[i]);
        const double h = field.frame_dt() / static_cast<double>(substeps);
        double min_spacing = field.grid().spacing(0);
        if (field.grid().dim() == 2) min_spacing = std::min(min_spacing, field.grid().spacing(1));
        const double cap = h != 0.0 ? min_spacing / std::abs(h) : 0.0;
        for (std::size_t k = 0; k + 1 < field.size(); ++k) {
          const double start = field.time(k);
          for (std::size_t s = 0; s < substeps; ++s) q = rk4_step(field, start + static_cast<double>(s) * h, q, h, cap);
          q = wrap(field.grid(), q);
        }
        out[i] = q;
      },
      workers);
  return out;
}

/// Compares sample positions with |psi|^2: KS (1D, critical + margin) or
/// chi-square with round(sqrt(n)) bins (2D).
inline StatReport compare_with_density(std::span<const Configuration> positions, const WaveFunction& psi,
                                       double margin = kEquivarianceMargin) {
  const auto rho = density(psi);
  if (psi.grid().dim() == 1) {
    std::vector<double> xs(positions.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = positions[i][0];
    return ks_report(ks_against_density(xs, rho), xs.size(), margin);
  }
  const auto bins = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(positions.size()))));
  return chi_square_report(positions, rho, std::max<std::size_t>(bins, 2));
}

struct EquivarianceOptions {
  std::size_t stride = 1;
  std::size_t substeps = 1;
  double margin = kEquivarianceMargin;
  double node_eps = kDefaultNodeEps;
};

/// Samples |psi0|^2, transports the samples to time T along Bohmian
/// trajectories and compares them with |psi_T|^2.
inline StatReport equivariance_check(const WaveFunction& psi0, const Propagator& prop, double horizon,
                                     std::size_t n, std::uint64_t seed, const EquivarianceOptions& opt = {}) {
  if (horizon < 0.0) throw InvalidArgument("equivariance horizon must be >= 0");
  const Ensemble ens = sample(psi0, n, seed);
  if (horizon == 0.0) return compare_with_density(ens.samples, psi0, opt.margin);
  const auto nsteps = static_cast<std::size_t>(std::llround(horizon / std::abs(prop.dt())));
  if (nsteps == 0) throw InvalidArgument("horizon shorter than one time step");
  const auto frames = evolve(psi0, prop, nsteps, opt.stride);
  const FrameField field(frames, prop.params(), opt.node_eps);
  const auto final_positions = transport(field, ens.samples, opt.substeps);
  return compare_with_density(final_positions, frames.back(), opt.margin);
}

}  // namespace bohm
