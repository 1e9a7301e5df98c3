#pragma once

// Guiding equation dQ/dt = (hbar/m) Im(grad psi / psi)(Q) and trajectory
// integration through a sequence of wave-function frames.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "bohm/core.hpp"
#include "bohm/interpolate.hpp"
#include "bohm/tdse.hpp"

namespace bohm {

using Velocity = std::array<double, 2>;

inline constexpr double kDefaultNodeEps = 1e-12;

/// psi and grad psi at one configuration.
struct LocalWave {
  cplx psi{};
  std::array<cplx, 2> grad{};
};

/// Bohmian velocity field of a single frame, evaluable off-grid.
///
/// psi and its spectral gradient are interpolated separately and combined
/// afterwards; the denominator is regularized as |psi|^2 + eps max|psi|^2.
class VelocityField {
 public:
  explicit VelocityField(WaveFunction frame, PhysicalParams params = {}, double node_eps = kDefaultNodeEps)
      : frame_(std::move(frame)), params_(params), node_eps_(node_eps), grad_(gradient(frame_)) {
    params_.validate();
    if (node_eps_ < 0.0) throw InvalidArgument("node regularization must be nonnegative");
    for (const auto& v : frame_.values()) max_density_ = std::max(max_density_, std::norm(v));
  }

  const WaveFunction& frame() const { return frame_; }
  const Grid& grid() const { return frame_.grid(); }
  const PhysicalParams& params() const { return params_; }
  double node_eps() const { return node_eps_; }
  double max_density() const { return max_density_; }
  const VectorField& grad() const { return grad_; }

  LocalWave local(const Configuration& q) const { return local(PointStencil<>(grid(), q)); }

  /// Same as local(q) with a stencil built for this field's grid.
  LocalWave local(const PointStencil<>& stencil) const {
    LocalWave out;
    out.psi = stencil.apply(frame_.values());
    for (int a = 0; a < grid().dim(); ++a) {
      out.grad[static_cast<std::size_t>(a)] = stencil.apply(grad_.components[static_cast<std::size_t>(a)]);
    }
    return out;
  }

  /// Regularized guiding equation from local values.
  Velocity from_local(const LocalWave& w, double max_density) const {
    const double denom = std::norm(w.psi) + node_eps_ * max_density;
    Velocity v{0.0, 0.0};
    if (denom <= 0.0) return v;
    for (int a = 0; a < grid().dim(); ++a) {
      const auto ua = static_cast<std::size_t>(a);
      v[ua] = params_.hbar / params_.mass[ua] * (std::conj(w.psi) * w.grad[ua]).imag() / denom;
    }
    return v;
  }

  Velocity operator()(const Configuration& q) const { return from_local(local(q), max_density_); }

  /// Velocity component along an axis at every grid node.
  std::vector<double> on_grid(int axis) const {
    const auto ua = static_cast<std::size_t>(axis);
    const auto psi = frame_.values();
    const auto& d = grad_.components[ua];
    std::vector<double> out(psi.size());
    const double floor = node_eps_ * max_density_;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const double denom = std::norm(psi[i]) + floor;
      out[i] = denom > 0.0 ? params_.hbar / params_.mass[ua] * (std::conj(psi[i]) * d[i]).imag() / denom : 0.0;
    }
    return out;
  }

 private:
  WaveFunction frame_;
  PhysicalParams params_;
  double node_eps_;
  VectorField grad_;
  double max_density_ = 0.0;
};

inline Velocity velocity(const VelocityField& field, const Configuration& q) { return field(q); }

namespace detail {

// d(arg psi)/dx at a grid node from the locally unwrapped phase, eighth-order
// centered differences. Phase increments between neighbours are taken as
// principal arguments, so the phase needs no global unwrapping.
inline double phase_derivative(const WaveFunction& psi, std::size_t i0, std::size_t i1, int axis) {
  static constexpr std::array<double, 4> coeff{4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  const Grid& g = psi.grid();
  const auto n = static_cast<std::ptrdiff_t>(g.points(axis));
  auto at = [&](std::ptrdiff_t offset) {
    const auto base = static_cast<std::ptrdiff_t>(axis == 0 ? i0 : i1);
    const auto k = static_cast<std::size_t>(((base + offset) % n + n) % n);
    return axis == 0 ? psi(k, i1) : psi(i0, k);
  };
  // increments[k] = phase(k) - phase(k-1) for k in [-3, 4].
  std::array<double, 8> inc{};
  for (std::ptrdiff_t k = -3; k <= 4; ++k) inc[static_cast<std::size_t>(k + 3)] = std::arg(at(k) * std::conj(at(k - 1)));
  double sum = 0.0;
  for (std::size_t k = 1; k <= 4; ++k) {
    // phase(k) - phase(-k) = sum of increments from -k+1 to k.
    double diff = 0.0;
    for (auto j = 1 - static_cast<std::ptrdiff_t>(k); j <= static_cast<std::ptrdiff_t>(k); ++j) {
      diff += inc[static_cast<std::size_t>(j + 3)];
    }
    sum += coeff[k - 1] * diff;
  }
  return sum / g.spacing(axis);
}

}  // namespace detail

/// grad S / m from the polar form psi = R exp(iS/hbar), independent of the
/// ratio formula used by velocity(). Throws NearNode where the density is
/// below 1e-6 of its maximum.
inline Velocity velocity_polar(const VelocityField& field, const Configuration& q) {
  const Grid& g = field.grid();
  const LocalWave w = field.local(q);
  if (std::norm(w.psi) < 1e-6 * field.max_density()) {
    throw NearNode("polar velocity requested where |psi|^2 < 1e-6 max|psi|^2");
  }
  const auto& psi = field.frame();
  const auto& params = field.params();
  const AxisStencil<kDefaultStencil> sx(g, 0, q[0]);
  Velocity v{0.0, 0.0};
  for (int axis = 0; axis < g.dim(); ++axis) {
    double value = 0.0;
    if (g.dim() == 1) {
      for (std::size_t a = 0; a < kDefaultStencil; ++a) {
        value += sx.weight[a] * detail::phase_derivative(psi, sx.index[a], 0, axis);
      }
    } else {
      const AxisStencil<kDefaultStencil> sy(g, 1, q[1]);
      for (std::size_t a = 0; a < kDefaultStencil; ++a) {
        for (std::size_t b = 0; b < kDefaultStencil; ++b) {
          value += sx.weight[a] * sy.weight[b] * detail::phase_derivative(psi, sx.index[a], sy.index[b], axis);
        }
      }
    }
    v[static_cast<std::size_t>(axis)] = params.hbar * value / params.mass[static_cast<std::size_t>(axis)];
  }
  return v;
}

/// Time series of configurations for one sample.
struct Trajectory {
  std::size_t id = 0;
  std::vector<double> times;
  std::vector<Configuration> points;

  std::size_t size() const { return times.size(); }
  const Configuration& final_point() const { return points.back(); }
};

/// Velocity field over a frame sequence, linear in complex amplitude between
/// adjacent frames.
class FrameField {
 public:
  explicit FrameField(const FrameSequence& seq, PhysicalParams params = {}, double node_eps = kDefaultNodeEps) {
    if (seq.empty()) throw InvalidArgument("frame sequence is empty");
    fields_.reserve(seq.size());
    for (const auto& f : seq.frames) fields_.emplace_back(f, params, node_eps);
    start_ = seq.start_time();
    frame_dt_ = seq.size() > 1 ? seq.dt : 0.0;
  }

  std::size_t size() const { return fields_.size(); }
  const Grid& grid() const { return fields_.front().grid(); }
  double start_time() const { return start_; }
  double frame_dt() const { return frame_dt_; }
  double time(std::size_t i) const { return start_ + static_cast<double>(i) * frame_dt_; }
  const VelocityField& frame(std::size_t i) const { return fields_[i]; }

  Velocity operator()(double t, const Configuration& q) const {
    if (fields_.size() == 1) return fields_.front()(q);
    const double s = (t - start_) / frame_dt_;
    const auto last = static_cast<double>(fields_.size() - 1);
    const double clamped = std::clamp(s, 0.0, last);
    auto k = static_cast<std::size_t>(std::floor(clamped));
    if (k + 1 >= fields_.size()) k = fields_.size() - 2;
    const double w = clamped - static_cast<double>(k);
    constexpr double snap = 1e-12;
    if (w < snap) return fields_[k](q);
    if (w > 1.0 - snap) return fields_[k + 1](q);
    const PointStencil<> stencil(grid(), q);
    const LocalWave a = fields_[k].local(stencil);
    const LocalWave b = fields_[k + 1].local(stencil);
    LocalWave mix;
    mix.psi = (1.0 - w) * a.psi + w * b.psi;
    for (std::size_t i = 0; i < 2; ++i) mix.grad[i] = (1.0 - w) * a.grad[i] + w * b.grad[i];
    const double max_density = (1.0 - w) * fields_[k].max_density() + w * fields_[k + 1].max_density();
    return fields_[k].from_local(mix, max_density);
  }

 private:
  std::vector<VelocityField> fields_;
  double start_ = 0.0;
  double frame_dt_ = 0.0;
};

/// One classical RK4 step of dq/dt = field(t, q), each stage velocity clamped
/// to |v| <= speed_cap.
template <class Field>
Configuration rk4_step(const Field& field, double t, const Configuration& q, double h, double speed_cap) {
  auto eval = [&](double time, const Configuration& at) {
    Velocity v = field(time, at);
    const double speed = std::hypot(v[0], v[1]);
    if (speed > speed_cap) {
      const double s = speed_cap / speed;
      v[0] *= s;
      v[1] *= s;
    }
    return v;
  };
  auto shifted = [&](const Velocity& v, double scale) {
    Configuration r = q;
    for (int a = 0; a < q.dim; ++a) r[a] += scale * v[static_cast<std::size_t>(a)];
    return r;
  };
  const Velocity k1 = eval(t, q);
  const Velocity k2 = eval(t + 0.5 * h, shifted(k1, 0.5 * h));
  const Velocity k3 = eval(t + 0.5 * h, shifted(k2, 0.5 * h));
  const Velocity k4 = eval(t + h, shifted(k3, h));
  Configuration out = q;
  for (int a = 0; a < q.dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    out[a] += h / 6.0 * (k1[ua] + 2.0 * k2[ua] + 2.0 * k3[ua] + k4[ua]);
  }
  return out;
}

/// Integrates over `intervals` output intervals of length `interval`, taking
/// `substeps` RK4 steps per interval. Points are recorded at interval
/// boundaries and wrapped into the grid's fundamental domain.
template <class Field>
Trajectory integrate_field(const Field& field, const Grid& grid, const Configuration& q0, double t0,
                           double interval, std::size_t intervals, std::size_t substeps, std::size_t id = 0) {
  if (substeps < 1) throw InvalidArgument("substeps must be >= 1");
  Trajectory traj;
  traj.id = id;
  traj.times.reserve(intervals + 1);
  traj.points.reserve(intervals + 1);
  Configuration q = wrap(grid, q0);
  traj.times.push_back(t0);
  traj.points.push_back(q);
  const double h = interval / static_cast<double>(substeps);
  double min_spacing = grid.spacing(0);
  if (grid.dim() == 2) min_spacing = std::min(min_spacing, grid.spacing(1));
  const double speed_cap = h != 0.0 ? min_spacing / std::abs(h) : std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < intervals; ++n) {
    const double start = t0 + static_cast<double>(n) * interval;
    for (std::size_t s = 0; s < substeps; ++s) {
      q = rk4_step(field, start + static_cast<double>(s) * h, q, h, speed_cap);
    }
    q = wrap(grid, q);
    traj.times.push_back(t0 + static_cast<double>(n + 1) * interval);
    traj.points.push_back(q);
  }
  return traj;
}

inline Trajectory integrate(const FrameField& field, const Configuration& q0, std::size_t substeps = 1,
                            std::size_t id = 0) {
  return integrate_field(field, field.grid(), q0, field.start_time(), field.frame_dt(), field.size() - 1, substeps,
                         id);
}

inline Trajectory integrate(const FrameSequence& frames, const Configuration& q0, const PhysicalParams& params = {},
                            std::size_t substeps = 1) {
  return integrate(FrameField(frames, params), q0, substeps);
}

/// L1 norm of d(rho)/dt + div(rho v) at the middle of three consecutive states
/// spaced dt apart; the time derivative is a centered difference, the
/// divergence is spectral and v comes from VelocityField.
inline double continuity_residual(const WaveFunction& prev, const WaveFunction& mid, const WaveFunction& next,
                                  double dt, const PhysicalParams& params = {}) {
  const Grid& g = mid.grid();
  if (!(prev.grid() == g) || !(next.grid() == g)) throw GridMismatch();
  const VelocityField field(mid, params);
  const auto rho = density(mid);
  std::vector<double> residual(g.size());
  const auto a = prev.values();
  const auto c = next.values();
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = (std::norm(c[i]) - std::norm(a[i])) / (2.0 * dt);
  for (int axis = 0; axis < g.dim(); ++axis) {
    const auto v = field.on_grid(axis);
    std::vector<cplx> flux(g.size());
    for (std::size_t i = 0; i < flux.size(); ++i) flux[i] = rho.values[i] * v[i];
    const auto div = spectral_derivative(flux, g, axis);
    for (std::size_t i = 0; i < residual.size(); ++i) residual[i] += div[i].real();
  }
  double l1 = 0.0;
  for (double r : residual) l1 += std::abs(r);
  return l1 * g.cell_volume();
}

/// Residual at every interior frame of a sequence.
inline std::vector<double> continuity_residuals(const FrameSequence& seq, const PhysicalParams& params = {}) {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < seq.size(); ++i) {
    out.push_back(continuity_residual(seq[i - 1], seq[i], seq[i + 1], seq.dt, params));
  }
  return out;
}

}  // namespace bohm
