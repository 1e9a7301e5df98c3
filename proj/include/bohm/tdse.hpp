#pragma once

// Time evolution under i hbar dpsi/dt = H psi with H = -sum hbar^2/(2 m) lap + V,
// integrated by symmetric (Strang) split-step Fourier steps.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "bohm/core.hpp"
#include "bohm/fft.hpp"

namespace bohm {

/// One Strang step exp(-iV dt/2hbar) exp(-iT dt/hbar) exp(-iV dt/2hbar).
///
/// dt may be negative (backward evolution) but not zero.
class Propagator {
 public:
  Propagator(Potential potential, PhysicalParams params, double dt)
      : potential_(std::move(potential)), params_(params), dt_(dt) {
    params_.validate();
    if (dt_ == 0.0 || !std::isfinite(dt_)) throw InvalidArgument("time step must be finite and nonzero");
    const Grid& g = grid();
    half_potential_phase_.resize(g.size());
    const auto v = potential_.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      half_potential_phase_[i] = std::polar(1.0, -0.5 * v[i] * dt_ / params_.hbar);
    }
    kinetic_phase_.resize(g.size());
    const std::size_t n0 = g.points(0);
    const std::size_t n1 = g.dim() == 1 ? 1 : g.points(1);
    for (std::size_t i = 0; i < n0; ++i) {
      const double kx = g.wave_number(0, i);
      for (std::size_t j = 0; j < n1; ++j) {
        double t = kx * kx / (2.0 * params_.mass[0]);
        if (g.dim() == 2) {
          const double ky = g.wave_number(1, j);
          t += ky * ky / (2.0 * params_.mass[1]);
        }
        // hbar^2 k^2 / 2m divided by hbar.
        kinetic_phase_[i * n1 + j] = std::polar(1.0, -params_.hbar * t * dt_);
      }
    }
  }

  const Grid& grid() const { return potential_.grid(); }
  const Potential& potential() const { return potential_; }
  const PhysicalParams& params() const { return params_; }
  double dt() const { return dt_; }

  /// Advisory only: phase accuracy degrades when dt max|V| / hbar >= 0.1.
  bool stability_advisory_ok() const { return std::abs(dt_) * potential_.max_abs() / params_.hbar < 0.1; }

  Propagator reversed() const { return Propagator(potential_, params_, -dt_); }

  /// Advances grid values by one step in place.
  void advance(std::span<cplx> values) const {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] *= half_potential_phase_[i];
    fft::forward(values, grid().shape());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] *= kinetic_phase_[i];
    fft::inverse(values, grid().shape());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] *= half_potential_phase_[i];
  }

 private:
  Potential potential_;
  PhysicalParams params_;
  double dt_;
  std::vector<cplx> half_potential_phase_;
  std::vector<cplx> kinetic_phase_;
};

inline WaveFunction step(const WaveFunction& psi, const Propagator& prop) {
  if (!(psi.grid() == prop.grid())) throw GridMismatch();
  WaveFunction out = psi;
  prop.advance(out.values());
  out.set_time(psi.time() + prop.dt());
  return out;
}

/// Snapshots psi(t0), psi(t0 + dt), ... with uniform spacing dt.
struct FrameSequence {
  std::vector<WaveFunction> frames;
  double dt = 0.0;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  const WaveFunction& operator[](std::size_t i) const { return frames[i]; }
  const WaveFunction& front() const { return frames.front(); }
  const WaveFunction& back() const { return frames.back(); }
  const Grid& grid() const { return frames.front().grid(); }
  double start_time() const { return frames.front().time(); }
  double end_time() const { return frames.back().time(); }
};

/// Runs nsteps steps and keeps every stride-th state, including the first and
/// the last. nsteps must be a multiple of stride so spacing stays uniform.
inline FrameSequence evolve(const WaveFunction& psi0, const Propagator& prop, std::size_t nsteps,
                            std::size_t stride = 1) {
  if (nsteps < 1 || stride < 1) throw InvalidArgument("evolve needs nsteps >= 1 and stride >= 1");
  if (nsteps % stride != 0) throw InvalidArgument("nsteps must be a multiple of stride");
  if (!(psi0.grid() == prop.grid())) throw GridMismatch();

  FrameSequence seq;
  seq.dt = static_cast<double>(stride) * prop.dt();
  seq.frames.reserve(nsteps / stride + 1);
  seq.frames.push_back(psi0);
  WaveFunction work = psi0;
  const double t0 = psi0.time();
  for (std::size_t n = 1; n <= nsteps; ++n) {
    prop.advance(work.values());
    if (n % stride == 0) {
      work.set_time(t0 + static_cast<double>(n) * prop.dt());
      seq.frames.push_back(work);
    }
  }
  return seq;
}

/// Closed-form free-particle Gaussian on the line (axis 0 mass).
///
/// |psi(x, 0)|^2 is a normal density with mean x0 and standard deviation
/// sigma0; the carrier momentum is hbar k0. The width grows as
/// sigma(t) = sigma0 sqrt(1 + (hbar t / 2 m sigma0^2)^2).
inline WaveFunction analytic_free_gaussian(const Grid& grid, double x0, double sigma0, double k0, double t,
                                           const PhysicalParams& params = {}) {
  if (!(sigma0 > 0.0)) throw InvalidArgument("sigma0 must be positive");
  if (grid.dim() != 1) throw InvalidArgument("free Gaussian oracle is one-dimensional");
  const double m = params.mass[0];
  const double hbar = params.hbar;
  const cplx spread(1.0, hbar * t / (2.0 * m * sigma0 * sigma0));
  const cplx prefactor = std::pow(2.0 * kPi * sigma0 * sigma0, -0.25) / std::sqrt(spread);
  const double center = x0 + hbar * k0 * t / m;
  const double omega = hbar * k0 * k0 / (2.0 * m);
  return WaveFunction::from_function(
      grid,
      [&](double x) {
        const double u = x - center;
        return prefactor * std::exp(-u * u / (4.0 * sigma0 * sigma0 * spread) + cplx(0.0, k0 * (x - x0) - omega * t));
      },
      t);
}

inline double free_gaussian_width(double sigma0, double t, const PhysicalParams& params = {}) {
  const double tau = params.hbar * t / (2.0 * params.mass[0] * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + tau * tau);
}

/// <psi|H|psi> / <psi|psi>, kinetic part evaluated spectrally.
inline double energy(const WaveFunction& psi, const Potential& potential, const PhysicalParams& params) {
  if (!(psi.grid() == potential.grid())) throw GridMismatch();
  const Grid& g = psi.grid();
  std::vector<cplx> spectrum(psi.values().begin(), psi.values().end());
  fft::forward(spectrum, g.shape());
  const std::size_t n0 = g.points(0);
  const std::size_t n1 = g.dim() == 1 ? 1 : g.points(1);
  double kinetic = 0.0;
  for (std::size_t i = 0; i < n0; ++i) {
    const double kx = g.wave_number(0, i);
    for (std::size_t j = 0; j < n1; ++j) {
      double t = kx * kx / (2.0 * params.mass[0]);
      if (g.dim() == 2) {
        const double ky = g.wave_number(1, j);
        t += ky * ky / (2.0 * params.mass[1]);
      }
      kinetic += params.hbar * params.hbar * t * std::norm(spectrum[i * n1 + j]);
    }
  }
  kinetic *= g.cell_volume() / static_cast<double>(g.size());
  double pot = 0.0;
  const auto v = potential.values();
  const auto values = psi.values();
  for (std::size_t i = 0; i < values.size(); ++i) pot += v[i] * std::norm(values[i]);
  pot *= g.cell_volume();
  return (kinetic + pot) / psi.norm2();
}

/// Exact propagator for the pointer coupling H = lambda a(x) p_y on a 2D grid
/// with kinetic terms switched off: each x-row is translated in y by
/// lambda a(x) dt per step.
class CouplingPropagator {
 public:
  CouplingPropagator(const Grid& grid, std::vector<double> pointer_rate, double coupling, double dt)
      : grid_(grid), dt_(dt) {
    if (grid.dim() != 2) throw InvalidArgument("coupling propagator needs a 2D grid");
    if (pointer_rate.size() != grid.points(0)) throw InvalidArgument("need one pointer rate per x grid point");
    const std::size_t nx = grid.points(0);
    const std::size_t ny = grid.points(1);
    phase_.resize(grid.size());
    for (std::size_t i = 0; i < nx; ++i) {
      const double shift = coupling * pointer_rate[i] * dt;
      for (std::size_t j = 0; j < ny; ++j) phase_[i * ny + j] = std::polar(1.0, -grid.wave_number(1, j) * shift);
    }
  }

  double dt() const { return dt_; }
  const Grid& grid() const { return grid_; }

  void advance(std::span<cplx> values) const {
    fft::forward(values, grid_.shape(), fft::Axes::Last);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] *= phase_[i];
    fft::inverse(values, grid_.shape(), fft::Axes::Last);
  }

 private:
  Grid grid_;
  double dt_;
  std::vector<cplx> phase_;
};

}  // namespace bohm
