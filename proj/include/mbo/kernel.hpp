#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mbo/grid.hpp"

namespace mbo {

/// Spectral heat semigroup exp(h * Laplacian) on the periodic grid.
///
/// The multiplier at wave vector k = 2*pi*m/L is exp(-h |k|^2), the Fourier
/// transform of the Gaussian (4 pi h)^{-d/2} exp(-|z|^2 / 4h). The k = 0
/// multiplier is exactly 1, so means are preserved and G_h * 1 = 1 holds to
/// the last bit; the operator is self-adjoint and positive semi-definite.
///
/// The plan is immutable after construction. Copies share the FFT plans, and
/// convolutions on distinct outputs may run concurrently.
class HeatKernelPlan {
 public:
  HeatKernelPlan(const Grid& grid, double h);

  const Grid& grid() const { return grid_; }
  double h() const { return h_; }

  /// Multipliers over the half spectrum in FFT output order.
  std::span<const double> multipliers() const;
  /// Number of complex coefficients in the half spectrum.
  std::size_t spectrum_size() const;

  /// Resolution guidance: sqrt(h) >= 4 dx. Below it thresholding stalls.
  bool well_resolved() const;

  struct Impl;
  const Impl& impl() const { return *impl_; }

 private:
  Grid grid_;
  double h_;
  std::shared_ptr<const Impl> impl_;
};

/// G_h * u for a real field (no clamping).
RealField convolve(const HeatKernelPlan& plan, const RealField& field);

/// G_h * chi for an indicator. The result is clamped to [0, 1]; the largest
/// pre-clamp excursion outside [0, 1] is written to *clamp_excess if given.
RealField convolve(const HeatKernelPlan& plan, const PhaseField& field,
                   double* clamp_excess = nullptr);

/// Components (d/dx_j G_h) * u, j < dim, via the multiplier i k_j exp(-h|k|^2).
/// Nyquist modes of the derivative are zeroed so the result is real.
std::vector<RealField> grad_convolve(const HeatKernelPlan& plan, const RealField& field);
std::vector<RealField> grad_convolve(const HeatKernelPlan& plan, const PhaseField& field);

/// G_h * u together with grad G_h * u from one forward transform.
struct SmoothedField {
  RealField value;
  std::vector<RealField> gradient;
};
SmoothedField convolve_with_gradient(const HeatKernelPlan& plan, const RealField& field);

/// Convolves several fields; work is spread over parallel_threads() threads.
/// Output order matches input order and does not depend on the thread count.
std::vector<RealField> convolve_many(const HeatKernelPlan& plan, std::span<const RealField> fields);

/// Spectral gradient of a smooth field (multiplier i k_j, no smoothing).
std::vector<RealField> spectral_gradient(const Grid& grid, const RealField& field);

/// Thread cap: MBO_THREADS if set and positive, else hardware concurrency.
int parallel_threads();

}  // namespace mbo
