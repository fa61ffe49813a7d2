#include "mbo/kernel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <mutex>
#include <numbers>
#include <thread>

namespace mbo {

namespace {

// FFTW's planner is not thread-safe; execution with the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

// Signed frequency index for position j of an n-point transform.
int signed_frequency(int j, int n) { return (j <= n / 2) ? j : j - n; }

}  // namespace

struct HeatKernelPlan::Impl {
  std::size_t real_size = 0;
  std::size_t spectral_size = 0;
  std::array<int, 3> spectral_cells{1, 1, 1};  // x is halved
  std::vector<double> multiplier;              // exp(-h|k|^2)
  // Per-axis wavenumbers over the half spectrum; zero at Nyquist.
  std::array<std::vector<double>, 3> wavenumber;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  // Spectrum of u; scaled by 1/N so that the inverse is normalized.
  ComplexBuffer forward_transform(std::span<const double> u) const {
    auto in = alloc_real(real_size);
    std::copy(u.begin(), u.end(), in.get());
    auto out = alloc_complex(spectral_size);
    fftw_execute_dft_r2c(forward, in.get(), out.get());
    return out;
  }

  // Inverse of (coeffs * factor) into `dst`. factor is applied per coefficient.
  template <class Factor>
  void inverse_transform(const fftw_complex* coeffs, Factor factor, std::span<double> dst) const {
    auto work = alloc_complex(spectral_size);
    const double scale = 1.0 / static_cast<double>(real_size);
    for (std::size_t q = 0; q < spectral_size; ++q) {
      const std::complex<double> c(coeffs[q][0], coeffs[q][1]);
      const std::complex<double> r = c * factor(q) * scale;
      work[q][0] = r.real();
      work[q][1] = r.imag();
    }
    auto out = alloc_real(real_size);
    fftw_execute_dft_c2r(backward, work.get(), out.get());
    std::copy(out.get(), out.get() + real_size, dst.begin());
  }
};

HeatKernelPlan::HeatKernelPlan(const Grid& grid, double h) : grid_(grid), h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("HeatKernelPlan: h must be > 0");
  auto impl = std::make_shared<Impl>();
  const int d = grid.dim();
  impl->real_size = grid.size();
  impl->spectral_cells = grid.cells();
  impl->spectral_cells[0] = grid.cells(0) / 2 + 1;
  impl->spectral_size = 1;
  for (int a = 0; a < d; ++a) impl->spectral_size *= impl->spectral_cells[a];

  impl->multiplier.resize(impl->spectral_size);
  for (int a = 0; a < 3; ++a) impl->wavenumber[a].assign(impl->spectral_size, 0.0);
  for (std::size_t q = 0; q < impl->spectral_size; ++q) {
    std::size_t rest = q;
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const int na = grid.cells(a);
      const int j = static_cast<int>(rest % impl->spectral_cells[a]);
      rest /= impl->spectral_cells[a];
      const int m = (a == 0) ? j : signed_frequency(j, na);
      const double k = 2.0 * std::numbers::pi * m / grid.side(a);
      k2 += k * k;
      const bool nyquist = (na % 2 == 0) && (j == na / 2);
      impl->wavenumber[a][q] = nyquist ? 0.0 : k;
    }
    impl->multiplier[q] = (q == 0) ? 1.0 : std::exp(-h * k2);
  }

  // FFTW is row-major with the last index fastest; our x axis is fastest.
  std::array<int, 3> dims{};
  for (int a = 0; a < d; ++a) dims[a] = grid.cells(d - 1 - a);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto r = alloc_real(impl->real_size);
    auto c = alloc_complex(impl->spectral_size);
    impl->forward = fftw_plan_dft_r2c(d, dims.data(), r.get(), c.get(), FFTW_ESTIMATE);
    impl->backward = fftw_plan_dft_c2r(d, dims.data(), c.get(), r.get(), FFTW_ESTIMATE);
  }
  if (!impl->forward || !impl->backward) throw std::runtime_error("HeatKernelPlan: FFTW planning failed");
  impl_ = std::move(impl);
}

std::span<const double> HeatKernelPlan::multipliers() const { return impl_->multiplier; }
std::size_t HeatKernelPlan::spectrum_size() const { return impl_->spectral_size; }

bool HeatKernelPlan::well_resolved() const { return std::sqrt(h_) >= 4.0 * grid_.max_dx(); }

RealField convolve(const HeatKernelPlan& plan, const RealField& field) {
  require_same_grid(plan.grid(), field.grid, "convolve");
  const auto& impl = plan.impl();
  auto coeffs = impl.forward_transform(field.values);
  RealField out(field.grid);
  impl.inverse_transform(
      coeffs.get(), [&](std::size_t q) { return std::complex<double>(impl.multiplier[q], 0.0); },
      std::span<double>(out.values));
  return out;
}

RealField convolve(const HeatKernelPlan& plan, const PhaseField& field, double* clamp_excess) {
  RealField out = convolve(plan, RealField::from(field));
  double excess = 0.0;
  for (double& v : out.values) {
    excess = std::max({excess, -v, v - 1.0});
    v = std::clamp(v, 0.0, 1.0);
  }
  if (clamp_excess) *clamp_excess = excess;
  return out;
}

SmoothedField convolve_with_gradient(const HeatKernelPlan& plan, const RealField& field) {
  require_same_grid(plan.grid(), field.grid, "convolve_with_gradient");
  const auto& impl = plan.impl();
  auto coeffs = impl.forward_transform(field.values);
  SmoothedField out{RealField(field.grid), {}};
  impl.inverse_transform(
      coeffs.get(), [&](std::size_t q) { return std::complex<double>(impl.multiplier[q], 0.0); },
      std::span<double>(out.value.values));
  for (int a = 0; a < field.grid.dim(); ++a) {
    RealField comp(field.grid);
    impl.inverse_transform(
        coeffs.get(),
        [&](std::size_t q) {
          return std::complex<double>(0.0, impl.wavenumber[a][q] * impl.multiplier[q]);
        },
        std::span<double>(comp.values));
    out.gradient.push_back(std::move(comp));
  }
  return out;
}

std::vector<RealField> grad_convolve(const HeatKernelPlan& plan, const RealField& field) {
  return convolve_with_gradient(plan, field).gradient;
}

std::vector<RealField> grad_convolve(const HeatKernelPlan& plan, const PhaseField& field) {
  return grad_convolve(plan, RealField::from(field));
}

std::vector<RealField> spectral_gradient(const Grid& grid, const RealField& field) {
  require_same_grid(grid, field.grid, "spectral_gradient");
  // Any h works for the transforms and wavenumbers; the multiplier is unused.
  const HeatKernelPlan plan(grid, 1.0);
  const auto& impl = plan.impl();
  auto coeffs = impl.forward_transform(field.values);
  std::vector<RealField> out;
  for (int a = 0; a < grid.dim(); ++a) {
    RealField comp(grid);
    impl.inverse_transform(
        coeffs.get(), [&](std::size_t q) { return std::complex<double>(0.0, impl.wavenumber[a][q]); },
        std::span<double>(comp.values));
    out.push_back(std::move(comp));
  }
  return out;
}

int parallel_threads() {
  if (const char* env = std::getenv("MBO_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RealField> convolve_many(const HeatKernelPlan& plan, std::span<const RealField> fields) {
  std::vector<RealField> out(fields.size(), RealField(plan.grid()));
  const int threads = std::min<int>(parallel_threads(), static_cast<int>(fields.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < fields.size(); ++i) out[i] = convolve(plan, fields[i]);
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < fields.size(); i += threads) out[i] = convolve(plan, fields[i]);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace mbo
