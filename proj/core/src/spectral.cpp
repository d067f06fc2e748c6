#include "todalab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "todalab/errors.hpp"

namespace todalab {

namespace {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double, FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex, FftwFree>;

struct Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// The FFTW planner is not re-entrant; execution on fresh aligned buffers is.
std::mutex planner_mutex;

const Plans& plans_for(std::size_t n) {
  static std::map<std::size_t, Plans> cache;
  std::lock_guard<std::mutex> lock(planner_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const int ni = static_cast<int>(n);
  RealBuffer r(fftw_alloc_real(n * n));
  ComplexBuffer c(fftw_alloc_complex(n * (n / 2 + 1)));
  Plans p;
  p.forward = fftw_plan_dft_r2c_2d(ni, ni, r.get(), c.get(), FFTW_ESTIMATE);
  p.backward = fftw_plan_dft_c2r_2d(ni, ni, c.get(), r.get(), FFTW_ESTIMATE);
  return cache.emplace(n, p).first->second;
}

// Spectrum of a real field, laid out n x (n/2 + 1).
class Spectrum {
 public:
  explicit Spectrum(const GridField& f)
      : t_(f.torus()),
        n_(t_.n()),
        half_(n_ / 2 + 1),
        c_(fftw_alloc_complex(n_ * half_)) {
    RealBuffer r(fftw_alloc_real(n_ * n_));
    std::copy(f.values().begin(), f.values().end(), r.get());
    fftw_execute_dft_r2c(plans_for(n_).forward, r.get(), c_.get());
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t half() const noexcept { return half_; }
  bool nyquist1(std::size_t i) const noexcept { return i == n_ / 2; }
  bool nyquist2(std::size_t j) const noexcept { return j == n_ / 2; }

  double k1(std::size_t i) const noexcept {
    const double m = i <= n_ / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n_);
    return 2.0 * std::numbers::pi * m / t_.L1();
  }
  double k2(std::size_t j) const noexcept { return 2.0 * std::numbers::pi * static_cast<double>(j) / t_.L2(); }

  std::complex<double> get(std::size_t i, std::size_t j) const noexcept {
    const auto& z = c_.get()[i * half_ + j];
    return {z[0], z[1]};
  }

  // Returns the real field with spectrum symbol(i, j) * get(i, j).
  template <class Symbol>
  GridField apply(Symbol&& symbol) const {
    ComplexBuffer w(fftw_alloc_complex(n_ * half_));
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < half_; ++j) {
        const std::complex<double> z = symbol(i, j) * get(i, j);
        w.get()[i * half_ + j][0] = z.real();
        w.get()[i * half_ + j][1] = z.imag();
      }
    RealBuffer r(fftw_alloc_real(n_ * n_));
    fftw_execute_dft_c2r(plans_for(n_).backward, w.get(), r.get());
    const double scale = 1.0 / static_cast<double>(n_ * n_);
    std::vector<double> out(n_ * n_);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = r.get()[k] * scale;
    return GridField(t_, std::move(out));
  }

 private:
  FlatTorus t_;
  std::size_t n_;
  std::size_t half_;
  ComplexBuffer c_;
};

}  // namespace

GridField laplacian(const GridField& f) {
  const Spectrum s(f);
  return s.apply([&](std::size_t i, std::size_t j) {
    return std::complex<double>(-(s.k1(i) * s.k1(i) + s.k2(j) * s.k2(j)), 0.0);
  });
}

std::array<GridField, 2> gradient(const GridField& f) {
  const Spectrum s(f);
  GridField d1 = s.apply([&](std::size_t i, std::size_t) {
    return std::complex<double>(0.0, s.nyquist1(i) ? 0.0 : s.k1(i));
  });
  GridField d2 = s.apply([&](std::size_t, std::size_t j) {
    return std::complex<double>(0.0, s.nyquist2(j) ? 0.0 : s.k2(j));
  });
  return {std::move(d1), std::move(d2)};
}

GridField gradient_divergence(const GridField& f) {
  const Spectrum s(f);
  return s.apply([&](std::size_t i, std::size_t j) {
    const double a = s.nyquist1(i) ? 0.0 : s.k1(i) * s.k1(i);
    const double b = s.nyquist2(j) ? 0.0 : s.k2(j) * s.k2(j);
    return std::complex<double>(-(a + b), 0.0);
  });
}

GridField solve_poisson(const GridField& rhs) {
  const Spectrum s(rhs);
  return s.apply([&](std::size_t i, std::size_t j) {
    if (i == 0 && j == 0) return std::complex<double>(0.0, 0.0);
    return std::complex<double>(1.0 / (s.k1(i) * s.k1(i) + s.k2(j) * s.k2(j)), 0.0);
  });
}

GridField shifted_inverse(const GridField& f, double tau) {
  if (!(tau > 0)) throw InvalidInput("shifted_inverse: shift must be positive");
  const Spectrum s(f);
  return s.apply([&](std::size_t i, std::size_t j) {
    return std::complex<double>(1.0 / (s.k1(i) * s.k1(i) + s.k2(j) * s.k2(j) + tau), 0.0);
  });
}

}  // namespace todalab
