#pragma once

// Periodic Lagrange interpolation of grid data at off-grid points.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

#include "bohm/core.hpp"

namespace bohm {

/// Stencil width used by default. Six points (quintic) keep the relative
/// velocity error near 1e-7 on the default grids; cubic gives ~1.5e-6.
inline constexpr std::size_t kDefaultStencil = 6;

/// Grid indices and Lagrange weights of a P-point stencil along one axis.
template <std::size_t P>
struct AxisStencil {
  static_assert(P % 2 == 0 && P >= 2, "stencil width must be even");
  std::array<std::size_t, P> index{};
  std::array<double, P> weight{};

  AxisStencil(const Grid& grid, int axis, double x) {
    static const std::array<double, P> inv_denom = [] {
      std::array<double, P> out{};
      for (std::size_t a = 0; a < P; ++a) {
        double d = 1.0;
        for (std::size_t b = 0; b < P; ++b) {
          if (b != a) d *= static_cast<double>(a) - static_cast<double>(b);
        }
        out[a] = 1.0 / d;
      }
      return out;
    }();
    const double h = grid.spacing(axis);
    const double u = (x + 0.5 * grid.extent(axis)) / h;
    const double base = std::floor(u);
    // Offset of x from the first stencil node, in units of h.
    const double t = u - base + static_cast<double>(P / 2) - 1.0;
    const auto n = static_cast<std::ptrdiff_t>(grid.points(axis));
    const auto first = static_cast<std::ptrdiff_t>(base) - static_cast<std::ptrdiff_t>(P / 2) + 1;
    std::array<double, P> left{};
    std::array<double, P> right{};
    left[0] = 1.0;
    right[P - 1] = 1.0;
    for (std::size_t a = 1; a < P; ++a) left[a] = left[a - 1] * (t - static_cast<double>(a - 1));
    for (std::size_t a = P - 1; a > 0; --a) right[a - 1] = right[a] * (t - static_cast<double>(a));
    for (std::size_t a = 0; a < P; ++a) {
      weight[a] = left[a] * right[a] * inv_denom[a];
      auto i = (first + static_cast<std::ptrdiff_t>(a)) % n;
      if (i < 0) i += n;
      index[a] = static_cast<std::size_t>(i);
    }
  }
};

/// Tensor-product stencil at a configuration; reusable across several fields
/// sampled on the same grid.
template <std::size_t P = kDefaultStencil>
class PointStencil {
 public:
  PointStencil(const Grid& grid, const Configuration& q)
      : grid_(grid), x_(grid, 0, q[0]), y_(grid, grid.dim() == 2 ? 1 : 0, grid.dim() == 2 ? q[1] : 0.0) {}

  template <class T>
  T apply(std::span<const T> data) const {
    T sum{};
    if (grid_.dim() == 1) {
      for (std::size_t a = 0; a < P; ++a) sum += x_.weight[a] * data[x_.index[a]];
      return sum;
    }
    const std::size_t ny = grid_.points(1);
    for (std::size_t a = 0; a < P; ++a) {
      T row{};
      const std::size_t offset = x_.index[a] * ny;
      for (std::size_t b = 0; b < P; ++b) row += y_.weight[b] * data[offset + y_.index[b]];
      sum += x_.weight[a] * row;
    }
    return sum;
  }

  template <class T>
  T apply(const std::vector<T>& data) const {
    return apply(std::span<const T>(data));
  }

 private:
  Grid grid_;
  AxisStencil<P> x_;
  AxisStencil<P> y_;
};

/// Value of psi at an arbitrary configuration.
template <std::size_t P = kDefaultStencil>
cplx interpolate(const WaveFunction& psi, const Configuration& q) {
  return PointStencil<P>(psi.grid(), q).apply(psi.values());
}

}  // namespace bohm
