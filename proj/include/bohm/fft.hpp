#pragma once

// Thin wrapper over FFTW for the periodic grids used by the simulator.
//
// Convention: forward transforms are unnormalized, inverse transforms are
// scaled by 1/N^d so that inverse(forward(f)) == f. Every spectral identity in
// the library is stated against this convention.

#include <fftw3.h>

#include <array>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

namespace bohm::fft {

using cplx = std::complex<double>;

/// Row-major array shape, rank 1 or 2.
struct Shape {
  int rank = 1;
  std::array<std::size_t, 2> n{1, 1};

  std::size_t size() const { return rank == 1 ? n[0] : n[0] * n[1]; }
  auto operator<=>(const Shape&) const = default;
};

/// Which axes a transform acts on.
enum class Axes { All, Last };

namespace detail {

struct PlanKey {
  Shape shape;
  Axes axes;
  int sign;
  auto operator<=>(const PlanKey&) const = default;
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
// Plans are planned in place with FFTW_ESTIMATE so that the same plan (and so
// the same floating point result) is produced on every run.
inline fftw_plan cached_plan(const PlanKey& key) {
  static std::mutex mutex;
  static std::map<PlanKey, fftw_plan> plans;
  std::lock_guard lock(mutex);
  if (auto it = plans.find(key); it != plans.end()) return it->second;

  std::vector<cplx> scratch(key.shape.size());
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan plan = nullptr;
  if (key.axes == Axes::All || key.shape.rank == 1) {
    if (key.shape.rank == 1) {
      plan = fftw_plan_dft_1d(static_cast<int>(key.shape.n[0]), buf, buf, key.sign, flags);
    } else {
      plan = fftw_plan_dft_2d(static_cast<int>(key.shape.n[0]), static_cast<int>(key.shape.n[1]),
                              buf, buf, key.sign, flags);
    }
  } else {
    // One transform of length n[1] per row.
    int len = static_cast<int>(key.shape.n[1]);
    plan = fftw_plan_many_dft(1, &len, static_cast<int>(key.shape.n[0]), buf, nullptr, 1, len, buf,
                              nullptr, 1, len, key.sign, flags);
  }
  plans.emplace(key, plan);
  return plan;
}

inline void execute(std::span<cplx> data, const Shape& shape, Axes axes, int sign) {
  fftw_plan plan = cached_plan({shape, axes, sign});
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace detail

/// In-place unnormalized forward transform.
inline void forward(std::span<cplx> data, const Shape& shape, Axes axes = Axes::All) {
  detail::execute(data, shape, axes, FFTW_FORWARD);
}

/// In-place inverse transform, scaled so that it inverts forward().
inline void inverse(std::span<cplx> data, const Shape& shape, Axes axes = Axes::All) {
  detail::execute(data, shape, axes, FFTW_BACKWARD);
  std::size_t count = shape.size();
  if (axes == Axes::Last && shape.rank == 2) count = shape.n[1];
  const double scale = 1.0 / static_cast<double>(count);
  for (auto& v : data) v *= scale;
}

}  // namespace bohm::fft
