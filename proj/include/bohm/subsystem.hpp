#pragma once

// Conditional wave functions and the ideal (von Neumann) measurement on the
// (x, y) = (system, pointer) configuration plane.
//
// The coupling is H = lambda a(x) p_y with kinetic terms switched off, where
// a(x) is the coarse-grained position observable whose eigenfunctions are the
// system modes. Its exact solution translates the pointer packet attached to
// mode alpha by lambda alpha t, and its guiding velocity J/rho is
// (0, lambda a(x)).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bohm/core.hpp"
#include "bohm/ensemble.hpp"
#include "bohm/fft.hpp"
#include "bohm/guidance.hpp"
#include "bohm/interpolate.hpp"
#include "bohm/parallel.hpp"
#include "bohm/stats.hpp"
#include "bohm/tdse.hpp"

namespace bohm {

/// Pointer supports are truncated at this many pointer widths.
inline constexpr double kSupportWidths = 4.0;
inline constexpr double kFidelityThreshold = 0.999;
inline constexpr double kMaxUnclassifiedFraction = 1e-3;
inline constexpr double kFcpThreshold = 0.05;
inline constexpr std::size_t kMinConditionalSamples = 100;

struct MeasurementSetup {
  Grid grid;                        ///< 2D: axis 0 system x, axis 1 pointer y.
  std::vector<WaveFunction> modes;  ///< orthonormal eigenfunctions on the x line
  std::vector<double> eigenvalues;
  std::vector<cplx> coeffs;
  WaveFunction pointer0;            ///< ready state on the y line
  double pointer_width = 0.0;       ///< standard deviation of |pointer0|^2
  double coupling = 1.0;            ///< pointer displacement per unit time per unit eigenvalue
  double duration = 1.0;

  Grid system_grid() const { return Grid::line(grid.extent(0), grid.points(0)); }
  Grid pointer_grid() const { return Grid::line(grid.extent(1), grid.points(1)); }
  std::size_t mode_count() const { return modes.size(); }

  double pointer_center(std::size_t mode, double t) const { return coupling * eigenvalues[mode] * t; }

  /// a(x) = sum alpha |psi_alpha|^2 / sum |psi_alpha|^2 from interpolated modes.
  double observable_at(double x) const {
    const Configuration q = Configuration::at(x);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t a = 0; a < modes.size(); ++a) {
      const double w = std::norm(interpolate(modes[a], q));
      num += eigenvalues[a] * w;
      den += w;
    }
    return den > 0.0 ? num / den : 0.0;
  }

  /// a(x) at every x node.
  std::vector<double> observable_on_grid() const {
    std::vector<double> out(grid.points(0));
    for (std::size_t i = 0; i < out.size(); ++i) {
      double num = 0.0;
      double den = 0.0;
      for (std::size_t a = 0; a < modes.size(); ++a) {
        const double w = std::norm(modes[a](i));
        num += eigenvalues[a] * w;
        den += w;
      }
      out[i] = den > 0.0 ? num / den : 0.0;
    }
    return out;
  }

  void validate() const {
    if (grid.dim() != 2) throw InvalidArgument("measurement setup needs a 2D grid");
    if (modes.empty()) throw InvalidArgument("measurement setup needs at least one mode");
    if (eigenvalues.size() != modes.size() || coeffs.size() != modes.size()) {
      throw InvalidArgument("modes, eigenvalues and coefficients must have equal length");
    }
    const Grid sys = system_grid();
    for (std::size_t a = 0; a < modes.size(); ++a) {
      if (!(modes[a].grid() == sys)) throw GridMismatch();
      if (std::abs(modes[a].norm2() - 1.0) > 1e-10) throw InvalidArgument("modes must have unit norm");
      for (std::size_t b = a + 1; b < modes.size(); ++b) {
        if (std::abs(inner(modes[a], modes[b])) > 1e-10) throw InvalidArgument("modes must be orthogonal");
        if (eigenvalues[a] == eigenvalues[b]) throw InvalidArgument("eigenvalues must be distinct");
      }
    }
    double weight = 0.0;
    for (const auto& c : coeffs) weight += std::norm(c);
    if (std::abs(weight - 1.0) > 1e-12) throw InvalidArgument("sum |c|^2 must equal 1");
    if (!(pointer0.grid() == pointer_grid())) throw GridMismatch();
    if (std::abs(pointer0.norm2() - 1.0) > 1e-10) throw InvalidArgument("pointer packet must have unit norm");
    if (!(pointer_width > 0.0) || !(duration > 0.0) || coupling == 0.0) {
      throw InvalidArgument("pointer width, duration and coupling must be positive");
    }
    for (std::size_t a = 0; a < modes.size(); ++a) {
      for (std::size_t b = a + 1; b < modes.size(); ++b) {
        const double gap = std::abs(coupling * (eigenvalues[a] - eigenvalues[b])) * duration;
        if (gap < 2.0 * kSupportWidths * pointer_width) {
          throw InvalidArgument("pointer packets are not separated by 8 pointer widths at the end of the measurement");
        }
      }
    }
  }
};

namespace detail {

// pointer0 translated by `shift` along y, exactly for band-limited packets.
inline std::vector<cplx> shifted_pointer(const WaveFunction& pointer0, double shift) {
  const Grid& g = pointer0.grid();
  std::vector<cplx> work(pointer0.values().begin(), pointer0.values().end());
  fft::forward(work, g.shape());
  for (std::size_t j = 0; j < work.size(); ++j) work[j] *= std::polar(1.0, -g.wave_number(0, j) * shift);
  fft::inverse(work, g.shape());
  return work;
}

}  // namespace detail

/// Psi_t(x, y) = sum_alpha c_alpha psi_alpha(x) Phi0(y - lambda alpha t).
inline WaveFunction measurement_state(const MeasurementSetup& setup, double t) {
  if (t < 0.0 || t > setup.duration * (1.0 + 1e-12)) throw InvalidArgument("measurement time outside [0, T_meas]");
  const Grid& g = setup.grid;
  const std::size_t nx = g.points(0);
  const std::size_t ny = g.points(1);
  WaveFunction psi(g, t);
  auto out = psi.values();
  for (std::size_t a = 0; a < setup.mode_count(); ++a) {
    const auto pointer = detail::shifted_pointer(setup.pointer0, setup.pointer_center(a, t));
    const auto mode = setup.modes[a].values();
    for (std::size_t i = 0; i < nx; ++i) {
      const cplx amp = setup.coeffs[a] * mode[i];
      if (amp == cplx(0.0)) continue;
      for (std::size_t j = 0; j < ny; ++j) out[i * ny + j] += amp * pointer[j];
    }
  }
  return psi;
}

/// psi(x) = Psi(x, Y): the x-slice at the environment configuration Y,
/// interpolated along y. The result is a ray representative; pass
/// `normalized = true` for the unit-norm member.
inline WaveFunction conditional_wavefunction(const WaveFunction& joint, double y, bool normalized = false) {
  const Grid& g = joint.grid();
  if (g.dim() != 2) throw InvalidArgument("conditional wave function needs a 2D state");
  const Grid line = Grid::line(g.extent(0), g.points(0));
  const AxisStencil<kDefaultStencil> sy(g, 1, y);
  WaveFunction out(line, joint.time());
  auto v = out.values();
  const auto src = joint.values();
  const std::size_t ny = g.points(1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    cplx sum = 0.0;
    for (std::size_t b = 0; b < kDefaultStencil; ++b) sum += sy.weight[b] * src[i * ny + sy.index[b]];
    v[i] = sum;
  }
  if (std::sqrt(out.norm2()) < 1e-14) throw NullSlice("conditional wave function vanishes at Y = " + std::to_string(y));
  return normalized ? normalize(out) : out;
}

/// Guiding velocity (0, lambda a(x)) of the pointer coupling.
class MeasurementField {
 public:
  explicit MeasurementField(const MeasurementSetup& setup) : setup_(&setup) {}

  Velocity operator()(double /*t*/, const Configuration& q) const {
    return {0.0, setup_->coupling * setup_->observable_at(q[0])};
  }

 private:
  const MeasurementSetup* setup_;
};

struct Outcome {
  std::optional<std::size_t> label;  ///< mode index, empty when unclassified
  double pointer_position = 0.0;
  double weight = 0.0;               ///< |c_label|^2
};

struct MeasurementRun {
  Outcome outcome;
  Trajectory trajectory;
  std::optional<WaveFunction> conditional;  ///< unnormalized conditional wave function at T_meas
};

struct MeasurementResult {
  std::vector<MeasurementRun> runs;
  std::vector<std::size_t> counts;  ///< runs per mode
  std::size_t unclassified = 0;

  std::size_t classified() const { return runs.size() - unclassified; }

  /// Outcome frequency over all runs; these plus unclassified_fraction() sum to 1.
  double frequency(std::size_t mode) const {
    return runs.empty() ? 0.0 : static_cast<double>(counts[mode]) / static_cast<double>(runs.size());
  }

  /// Outcome frequency among classified runs (unclassified runs excluded).
  double classified_frequency(std::size_t mode) const {
    return classified() == 0 ? 0.0 : static_cast<double>(counts[mode]) / static_cast<double>(classified());
  }

  double unclassified_fraction() const {
    return runs.empty() ? 0.0 : static_cast<double>(unclassified) / static_cast<double>(runs.size());
  }
};

/// Mode whose truncated pointer support contains y at time t.
inline std::optional<std::size_t> classify(const MeasurementSetup& setup, double y, double t) {
  const Grid pg = setup.pointer_grid();
  for (std::size_t a = 0; a < setup.mode_count(); ++a) {
    const double d = pg.wrap(0, y - setup.pointer_center(a, t));
    if (std::abs(d) <= kSupportWidths * setup.pointer_width) return a;
  }
  return std::nullopt;
}

/// Samples (X0, Y0) from |Psi0|^2, integrates through [0, T_meas] with
/// `steps` RK4 steps, classifies by Y_T and records the conditional wave
/// function at T_meas.
inline MeasurementResult run_measurement(const MeasurementSetup& setup, std::size_t n, std::uint64_t seed,
                                         std::size_t steps = 50, std::size_t workers = worker_count()) {
  setup.validate();
  if (n < 1 || steps < 1) throw InvalidArgument("run_measurement needs n >= 1 and steps >= 1");
  const WaveFunction initial = measurement_state(setup, 0.0);
  const WaveFunction final_state = measurement_state(setup, setup.duration);
  const Ensemble ens = sample(initial, n, seed, workers);
  const MeasurementField field(setup);
  const double h = setup.duration / static_cast<double>(steps);

  MeasurementResult result;
  result.runs.resize(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        auto& run = result.runs[i];
        run.trajectory = integrate_field(field, setup.grid, ens.samples[i], 0.0, h, steps, 1, i);
        const double y = run.trajectory.final_point()[1];
        run.outcome.pointer_position = y;
        run.outcome.label = classify(setup, y, setup.duration);
        if (run.outcome.label) run.outcome.weight = std::norm(setup.coeffs[*run.outcome.label]);
        try {
          run.conditional = conditional_wavefunction(final_state, y);
        } catch (const NullSlice&) {
          run.conditional.reset();
        }
      },
      workers);

  result.counts.assign(setup.mode_count(), 0);
  for (const auto& run : result.runs) {
    if (run.outcome.label) {
      ++result.counts[*run.outcome.label];
    } else {
      ++result.unclassified;
    }
  }
  return result;
}

/// |<normalized conditional wave function, psi_a>| for the run's outcome a.
inline double collapse_fidelity(const MeasurementRun& run, const MeasurementSetup& setup) {
  if (!run.outcome.label || !run.conditional) throw InvalidArgument("collapse fidelity needs a classified run");
  return std::abs(inner(normalize(*run.conditional), setup.modes[*run.outcome.label]));
}

/// Fidelity per run; empty for unclassified runs.
inline std::vector<std::optional<double>> collapse_fidelity(const MeasurementResult& result,
                                                            const MeasurementSetup& setup) {
  std::vector<std::optional<double>> out(result.runs.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& run = result.runs[i];
    if (run.outcome.label && run.conditional) out[i] = collapse_fidelity(run, setup);
  }
  return out;
}

namespace detail {

inline StatReport conditional_ks(const std::vector<double>& xs, const WaveFunction& mode, double threshold) {
  if (xs.size() < kMinConditionalSamples) {
    throw InsufficientSamples("conditional KS needs at least " + std::to_string(kMinConditionalSamples) +
                              " samples, got " + std::to_string(xs.size()));
  }
  return ks_report_fixed(ks_against_density(xs, density(mode)), xs.size(), threshold);
}

}  // namespace detail

/// KS of {X_T : outcome = a} against |psi_a|^2.
inline StatReport fcp_check(const MeasurementResult& result, const MeasurementSetup& setup, std::size_t mode,
                            double threshold = kFcpThreshold) {
  std::vector<double> xs;
  for (const auto& run : result.runs) {
    if (run.outcome.label == mode) xs.push_back(run.trajectory.final_point()[0]);
  }
  return detail::conditional_ks(xs, setup.modes[mode], threshold);
}

/// The same KS test on the two halves of outcome class a split by the sign of
/// Y_T - lambda a T_meas. Both halves passing means the pointer position
/// carries no information about X beyond the outcome label.
inline std::pair<StatReport, StatReport> fcp_split_check(const MeasurementResult& result,
                                                         const MeasurementSetup& setup, std::size_t mode,
                                                         double threshold = kFcpThreshold) {
  std::vector<double> below;
  std::vector<double> above;
  const Grid pg = setup.pointer_grid();
  const double center = setup.pointer_center(mode, setup.duration);
  for (const auto& run : result.runs) {
    if (run.outcome.label != mode) continue;
    const auto& q = run.trajectory.final_point();
    (pg.wrap(0, q[1] - center) < 0.0 ? below : above).push_back(q[0]);
  }
  return {detail::conditional_ks(below, setup.modes[mode], threshold),
          detail::conditional_ks(above, setup.modes[mode], threshold)};
}

/// Born-rule comparison for one outcome.
struct BornEntry {
  std::size_t count = 0;
  double frequency = 0.0;  ///< among classified runs
  double expected = 0.0;   ///< |c_a|^2
  double tolerance = 0.0;  ///< 3 binomial standard deviations
  bool pass = false;
};

inline std::vector<BornEntry> born_check(const MeasurementResult& result, const MeasurementSetup& setup) {
  std::vector<BornEntry> out(setup.mode_count());
  const auto n = static_cast<double>(result.classified());
  for (std::size_t a = 0; a < out.size(); ++a) {
    auto& e = out[a];
    e.count = result.counts[a];
    e.frequency = result.classified_frequency(a);
    e.expected = std::norm(setup.coeffs[a]);
    e.tolerance = n > 0.0 ? 3.0 * std::sqrt(e.expected * (1.0 - e.expected) / n) : 0.0;
    e.pass = n > 0.0 && std::abs(e.frequency - e.expected) <= e.tolerance;
  }
  return out;
}

/// Samples |Psi0|^2 and compares the transported ensemble with |Psi_t|^2 by
/// chi-square (round(sqrt(n)) bins).
inline StatReport measurement_equivariance(const MeasurementSetup& setup, double t, std::size_t n,
                                           std::uint64_t seed, std::size_t steps = 25,
                                           std::size_t workers = worker_count()) {
  setup.validate();
  const Ensemble ens = sample(measurement_state(setup, 0.0), n, seed, workers);
  const MeasurementField field(setup);
  std::vector<Configuration> moved(n);
  const double h = t / static_cast<double>(steps);
  parallel_for(
      n,
      [&](std::size_t i) {
        moved[i] = integrate_field(field, setup.grid, ens.samples[i], 0.0, h, steps, 1, i).final_point();
      },
      workers);
  return compare_with_density(moved, measurement_state(setup, t));
}

/// L2 distance at T_meas between the split-step solution of the coupling
/// Hamiltonian and the closed-form pointer-translation state.
inline double coupling_cross_check(const MeasurementSetup& setup, std::size_t steps) {
  const CouplingPropagator prop(setup.grid, setup.observable_on_grid(), setup.coupling,
                                setup.duration / static_cast<double>(steps));
  WaveFunction psi = measurement_state(setup, 0.0);
  for (std::size_t s = 0; s < steps; ++s) prop.advance(psi.values());
  const WaveFunction exact = measurement_state(setup, setup.duration);
  double sum = 0.0;
  for (std::size_t i = 0; i < psi.values().size(); ++i) sum += std::norm(psi.values()[i] - exact.values()[i]);
  return std::sqrt(sum * setup.grid.cell_volume());
}

}  // namespace bohm
