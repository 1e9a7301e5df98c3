#pragma once

// Goodness-of-fit statistics comparing samples against grid densities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "bohm/core.hpp"

namespace bohm {

/// Asymptotic 99% quantile of the Kolmogorov distribution (sqrt(n) D_n).
inline constexpr double kKs99 = 1.63;

inline double ks_critical_99(std::size_t n) { return kKs99 / std::sqrt(static_cast<double>(n)); }

/// Result of one statistical comparison. `kind` is "ks" or "chi2"; the
/// threshold is critical + margin and `pass` compares against it.
struct StatReport {
  std::string kind = "ks";
  double ks = 0.0;
  double chi2 = 0.0;
  std::size_t bins = 0;
  std::size_t n = 0;
  double critical = 0.0;
  double margin = 0.0;
  double threshold = 0.0;
  bool pass = false;

  double statistic() const { return kind == "ks" ? ks : chi2; }
};

/// sup |F_n(x) - F(x)| for the empirical CDF F_n of the samples.
template <class Cdf>
double ks_statistic(std::span<const double> samples, Cdf&& cdf) {
  if (samples.empty()) throw InvalidArgument("ks_statistic needs at least one sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const auto di = static_cast<double>(i);
    d = std::max({d, (di + 1.0) / n - f, f - di / n});
  }
  return d;
}

/// KS report with an explicit margin for integration error on top of the 99%
/// critical value.
inline StatReport ks_report(double ks, std::size_t n, double margin) {
  StatReport r;
  r.kind = "ks";
  r.ks = ks;
  r.n = n;
  r.critical = ks_critical_99(n);
  r.margin = margin;
  r.threshold = r.critical + margin;
  r.pass = ks <= r.threshold;
  return r;
}

/// KS report against a fixed threshold (margin = threshold - critical).
inline StatReport ks_report_fixed(double ks, std::size_t n, double threshold) {
  return ks_report(ks, n, threshold - ks_critical_99(n));
}

/// CDF of a 1D grid density on [-L/2, L/2), taking the density piecewise
/// linear between nodes (periodically closed), normalized to total mass 1.
class GridCdf {
 public:
  explicit GridCdf(const RealField& rho) : grid_(rho.grid), rho_(rho.values) {
    if (grid_.dim() != 1) throw InvalidArgument("GridCdf needs a 1D density");
    const std::size_t n = rho_.size();
    const double h = grid_.spacing(0);
    cumulative_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      cumulative_[i + 1] = cumulative_[i] + 0.5 * h * (rho_[i] + rho_[(i + 1) % n]);
    }
    total_ = cumulative_[n];
    if (!(total_ > 0.0)) throw ZeroNorm();
  }

  double operator()(double x) const {
    const double h = grid_.spacing(0);
    const double u = (grid_.wrap(0, x) + 0.5 * grid_.extent(0)) / h;
    const std::size_t n = rho_.size();
    auto i = std::min(static_cast<std::size_t>(std::floor(u)), n - 1);
    const double f = u - static_cast<double>(i);
    const double a = rho_[i];
    const double b = rho_[(i + 1) % n];
    const double partial = h * (a * f + 0.5 * (b - a) * f * f);
    return std::clamp((cumulative_[i] + partial) / total_, 0.0, 1.0);
  }

 private:
  Grid grid_;
  std::vector<double> rho_;
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

/// KS distance between 1D sample positions and a grid density.
inline double ks_against_density(std::span<const double> samples, const RealField& rho) {
  const GridCdf cdf(rho);
  return ks_statistic(samples, cdf);
}

inline double chi_square_critical_99(std::size_t dof) {
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.99);
}

namespace detail {

inline StatReport chi_square_from_counts(std::span<const double> observed, std::span<const double> expected,
                                         std::size_t n) {
  double chi2 = 0.0;
  std::size_t used = 0;
  for (std::size_t b = 0; b < observed.size(); ++b) {
    if (expected[b] <= 0.0) continue;
    const double e = static_cast<double>(n) * expected[b];
    chi2 += (observed[b] - e) * (observed[b] - e) / e;
    ++used;
  }
  if (used < 2) throw InvalidArgument("chi-square needs at least two populated bins");
  StatReport r;
  r.kind = "chi2";
  r.chi2 = chi2;
  r.bins = used;
  r.n = n;
  r.critical = chi_square_critical_99(used - 1);
  r.threshold = r.critical;
  r.pass = chi2 <= r.threshold;
  return r;
}

}  // namespace detail

/// Pearson chi-square of sample positions against a grid density.
///
/// 1D: `bins` bins of exactly equal probability under the piecewise-linear
/// density of GridCdf. 2D: each sample is assigned to its nearest grid node;
/// nodes are taken in row-major order and grouped into about `bins`
/// consecutive runs of equal expected probability. Degrees of freedom are
/// populated bins - 1.
inline StatReport chi_square_report(std::span<const Configuration> samples, const RealField& rho, std::size_t bins) {
  if (samples.empty()) throw InvalidArgument("chi-square needs samples");
  if (bins < 2) throw InvalidArgument("chi-square needs at least two bins");
  if (rho.grid.dim() == 1) {
    const GridCdf cdf(rho);
    std::vector<double> observed(bins, 0.0);
    const std::vector<double> expected(bins, 1.0 / static_cast<double>(bins));
    for (const auto& q : samples) {
      const auto b = static_cast<std::size_t>(cdf(q[0]) * static_cast<double>(bins));
      observed[std::min(b, bins - 1)] += 1.0;
    }
    return detail::chi_square_from_counts(observed, expected, samples.size());
  }
  const Grid& g = rho.grid;
  const std::size_t cells = g.size();
  double total = 0.0;
  for (double v : rho.values) total += v;
  if (!(total > 0.0)) throw ZeroNorm();

  std::vector<std::size_t> bin_of(cells);
  std::vector<double> expected(bins, 0.0);
  double before = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double p = rho.values[i] / total;
    const double mid = before + 0.5 * p;
    const auto b = std::min(bins - 1, static_cast<std::size_t>(mid * static_cast<double>(bins)));
    bin_of[i] = b;
    expected[b] += p;
    before += p;
  }

  std::vector<double> observed(bins, 0.0);
  for (const auto& q : samples) {
    std::size_t cell = 0;
    for (int axis = 0; axis < g.dim(); ++axis) {
      const double u = (g.wrap(axis, q[axis]) + 0.5 * g.extent(axis)) / g.spacing(axis);
      const auto i = static_cast<std::size_t>(std::llround(u)) % g.points(axis);
      cell = axis == 0 ? i : cell * g.points(1) + i;
    }
    observed[bin_of[cell]] += 1.0;
  }

  return detail::chi_square_from_counts(observed, expected, samples.size());
}

}  // namespace bohm
