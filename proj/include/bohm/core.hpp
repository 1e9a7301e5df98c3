#pragma once

// Grids, wave functions, configurations and their elementary algebra.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "bohm/error.hpp"
#include "bohm/fft.hpp"

namespace bohm {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Periodic uniform lattice on [-L/2, L/2) in one or two dimensions.
///
/// Axis 0 is x (the system coordinate), axis 1 is y (the pointer or second
/// coordinate). Values are stored row-major: index = i0 * N1 + i1.
class Grid {
 public:
  static Grid line(double length, std::size_t points) { return Grid(1, {length, 1.0}, {points, 1}); }

  static Grid plane(double length_x, std::size_t points_x, double length_y, std::size_t points_y) {
    return Grid(2, {length_x, length_y}, {points_x, points_y});
  }

  int dim() const { return dim_; }
  double extent(int axis) const { return extent_[static_cast<std::size_t>(axis)]; }
  std::size_t points(int axis) const { return points_[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const { return extent(axis) / static_cast<double>(points(axis)); }
  std::size_t size() const { return dim_ == 1 ? points_[0] : points_[0] * points_[1]; }

  /// Volume element dx^d.
  double cell_volume() const { return dim_ == 1 ? spacing(0) : spacing(0) * spacing(1); }

  double coordinate(int axis, std::size_t i) const {
    return -0.5 * extent(axis) + static_cast<double>(i) * spacing(axis);
  }

  /// Wave number of FFT bin j: 2*pi*j/L for j < N/2, 2*pi*(j - N)/L otherwise.
  double wave_number(int axis, std::size_t j) const {
    const auto n = static_cast<std::ptrdiff_t>(points(axis));
    auto signed_j = static_cast<std::ptrdiff_t>(j);
    if (signed_j >= n / 2) signed_j -= n;
    return 2.0 * kPi * static_cast<double>(signed_j) / extent(axis);
  }

  /// Reduces a coordinate into the fundamental domain [-L/2, L/2).
  double wrap(int axis, double x) const {
    const double length = extent(axis);
    double r = x - length * std::floor((x + 0.5 * length) / length);
    if (r >= 0.5 * length) r -= length;
    return r;
  }

  std::size_t index(std::size_t i0, std::size_t i1 = 0) const { return dim_ == 1 ? i0 : i0 * points_[1] + i1; }

  fft::Shape shape() const { return {dim_, {points_[0], dim_ == 1 ? 1 : points_[1]}}; }

  bool operator==(const Grid&) const = default;

 private:
  Grid(int dim, std::array<double, 2> extent, std::array<std::size_t, 2> points)
      : dim_(dim), extent_(extent), points_(points) {
    for (int axis = 0; axis < dim_; ++axis) {
      const auto n = points_[static_cast<std::size_t>(axis)];
      const auto length = extent_[static_cast<std::size_t>(axis)];
      if (n < 16 || (n & (n - 1)) != 0) {
        throw InvalidArgument("grid points per dimension must be a power of two >= 16");
      }
      if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("grid extent must be positive");
    }
  }

  int dim_;
  std::array<double, 2> extent_;
  std::array<std::size_t, 2> points_;
};

/// A point in configuration space (x) or (x, y).
struct Configuration {
  std::array<double, 2> coords{0.0, 0.0};
  int dim = 1;

  static Configuration at(double x) { return {{x, 0.0}, 1}; }
  static Configuration at(double x, double y) { return {{x, y}, 2}; }

  double operator[](int axis) const { return coords[static_cast<std::size_t>(axis)]; }
  double& operator[](int axis) { return coords[static_cast<std::size_t>(axis)]; }

  bool operator==(const Configuration&) const = default;
};

inline Configuration wrap(const Grid& grid, Configuration q) {
  for (int axis = 0; axis < grid.dim(); ++axis) q[axis] = grid.wrap(axis, q[axis]);
  return q;
}

/// hbar and the mass attached to each configuration axis.
struct PhysicalParams {
  double hbar = 1.0;
  std::array<double, 2> mass{1.0, 1.0};

  void validate() const {
    if (!(hbar > 0.0)) throw InvalidArgument("hbar must be positive");
    if (!(mass[0] > 0.0) || !(mass[1] > 0.0)) throw InvalidArgument("masses must be positive");
  }
};

/// Real scalar field sampled on a grid (densities, residuals).
struct RealField {
  Grid grid;
  std::vector<double> values;

  double integral() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum * grid.cell_volume();
  }
};

/// Complex vector field; components[a] holds the derivative along axis a.
struct VectorField {
  Grid grid;
  std::array<std::vector<cplx>, 2> components;
};

class WaveFunction {
 public:
  explicit WaveFunction(Grid grid, double time = 0.0) : grid_(grid), values_(grid.size()), time_(time) {}

  WaveFunction(Grid grid, std::vector<cplx> values, double time = 0.0)
      : grid_(grid), values_(std::move(values)), time_(time) {
    if (values_.size() != grid_.size()) throw InvalidArgument("value count does not match grid size");
  }

  /// Samples f(x) (1D) or f(x, y) (2D) at every grid point.
  template <class F>
  static WaveFunction from_function(const Grid& grid, F&& f, double time = 0.0) {
    WaveFunction psi(grid, time);
    if constexpr (std::is_invocable_v<F, double>) {
      if (grid.dim() != 1) throw InvalidArgument("one-argument function sampled on a 2D grid");
      for (std::size_t i = 0; i < grid.points(0); ++i) psi.values_[i] = f(grid.coordinate(0, i));
    } else {
      if (grid.dim() != 2) throw InvalidArgument("two-argument function sampled on a 1D grid");
      for (std::size_t i = 0; i < grid.points(0); ++i) {
        const double x = grid.coordinate(0, i);
        for (std::size_t j = 0; j < grid.points(1); ++j) psi.values_[grid.index(i, j)] = f(x, grid.coordinate(1, j));
      }
    }
    return psi;
  }

  const Grid& grid() const { return grid_; }
  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  cplx operator()(std::size_t i0, std::size_t i1 = 0) const { return values_[grid_.index(i0, i1)]; }
  cplx& operator()(std::size_t i0, std::size_t i1 = 0) { return values_[grid_.index(i0, i1)]; }

  /// Sum |psi|^2 dx^d.
  double norm2() const {
    double sum = 0.0;
    for (const auto& v : values_) sum += std::norm(v);
    return sum * grid_.cell_volume();
  }

 private:
  Grid grid_;
  std::vector<cplx> values_;
  double time_;
};

class Potential {
 public:
  explicit Potential(Grid grid) : grid_(grid), values_(grid.size(), 0.0) {}

  Potential(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw InvalidArgument("potential size does not match grid");
    for (double v : values_) {
      if (!std::isfinite(v)) throw InvalidArgument("potential values must be finite");
    }
  }

  template <class F>
  static Potential from_function(const Grid& grid, F&& f) {
    std::vector<double> values(grid.size());
    if constexpr (std::is_invocable_v<F, double>) {
      for (std::size_t i = 0; i < grid.points(0); ++i) values[i] = f(grid.coordinate(0, i));
    } else {
      for (std::size_t i = 0; i < grid.points(0); ++i) {
        for (std::size_t j = 0; j < grid.points(1); ++j) {
          values[grid.index(i, j)] = f(grid.coordinate(0, i), grid.coordinate(1, j));
        }
      }
    }
    return Potential(grid, std::move(values));
  }

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  Grid grid_;
  std::vector<double> values_;
};

inline WaveFunction normalize(const WaveFunction& psi) {
  const double n2 = psi.norm2();
  if (!(n2 > 1e-300)) throw ZeroNorm();
  WaveFunction out = psi;
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& v : out.values()) v *= scale;
  return out;
}

/// <psi|phi> = sum conj(psi) phi dx^d.
inline cplx inner(const WaveFunction& psi, const WaveFunction& phi) {
  if (!(psi.grid() == phi.grid())) throw GridMismatch();
  cplx sum = 0.0;
  const auto a = psi.values();
  const auto b = phi.values();
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::conj(a[i]) * b[i];
  return sum * psi.grid().cell_volume();
}

inline RealField density(const WaveFunction& psi) {
  RealField rho{psi.grid(), std::vector<double>(psi.grid().size())};
  const auto v = psi.values();
  for (std::size_t i = 0; i < v.size(); ++i) rho.values[i] = std::norm(v[i]);
  return rho;
}

/// Spectral derivative of grid data along one axis: inverse FFT of (i k) FFT(f).
/// The Nyquist bin is dropped so that real even data stays real odd.
inline std::vector<cplx> spectral_derivative(std::span<const cplx> data, const Grid& grid, int axis) {
  std::vector<cplx> work(data.begin(), data.end());
  const auto shape = grid.shape();
  fft::forward(work, shape);
  const std::size_t n0 = grid.points(0);
  const std::size_t n1 = grid.dim() == 1 ? 1 : grid.points(1);
  const std::size_t nyquist = grid.points(axis) / 2;
  for (std::size_t i = 0; i < n0; ++i) {
    for (std::size_t j = 0; j < n1; ++j) {
      const std::size_t bin = axis == 0 ? i : j;
      auto& c = work[i * n1 + j];
      c = bin == nyquist ? cplx(0.0) : c * cplx(0.0, grid.wave_number(axis, bin));
    }
  }
  fft::inverse(work, shape);
  return work;
}

inline VectorField gradient(const WaveFunction& psi) {
  VectorField out{psi.grid(), {}};
  for (int axis = 0; axis < psi.grid().dim(); ++axis) {
    out.components[static_cast<std::size_t>(axis)] = spectral_derivative(psi.values(), psi.grid(), axis);
  }
  return out;
}

}  // namespace bohm
