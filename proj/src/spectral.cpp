// spectral.cpp

#include "incstat/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace incstat {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <class T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter<T>>;

FftwBuffer<double> alloc_real(std::size_t n) {
  return FftwBuffer<double>(fftw_alloc_real(n));
}

FftwBuffer<fftw_complex> alloc_complex(std::size_t n) {
  return FftwBuffer<fftw_complex>(fftw_alloc_complex(n));
}

}  // namespace

struct FourierTransform::Impl {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

std::shared_ptr<const FourierTransform> FourierTransform::get(const TorusGeometry& g) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, std::int64_t>, std::shared_ptr<const FourierTransform>> cache;
  std::lock_guard lock(cache_mutex);
  auto key = std::make_pair(g.dim(), g.side());
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::shared_ptr<const FourierTransform> t(new FourierTransform(g));
  cache.emplace(key, t);
  return t;
}

FourierTransform::FourierTransform(const TorusGeometry& g) : geom_(g), impl_(std::make_unique<Impl>()) {
  const int d = g.dim();
  const std::int64_t L = g.side();
  const std::int64_t last = L / 2 + 1;
  half_ = g.sites() / static_cast<std::size_t>(L) * static_cast<std::size_t>(last);

  std::vector<double> s(static_cast<std::size_t>(L));
  std::vector<std::complex<double>> e(static_cast<std::size_t>(L));
  for (std::int64_t m = 0; m < L; ++m) {
    const double t = std::numbers::pi * static_cast<double>(m) / static_cast<double>(L);
    s[m] = 4.0 * std::sin(t) * std::sin(t);
    e[m] = std::polar(1.0, 2.0 * t) - 1.0;
  }

  omega_.assign(half_, 0.0);
  weight_.assign(half_, 0.0);
  grad_.assign(d, std::vector<std::complex<double>>(half_));
  for (std::size_t h = 0; h < half_; ++h) {
    std::size_t rest = h;
    std::array<std::int64_t, kMaxDim> m{};
    m[d - 1] = static_cast<std::int64_t>(rest % static_cast<std::size_t>(last));
    rest /= static_cast<std::size_t>(last);
    for (int a = d - 2; a >= 0; --a) {
      m[a] = static_cast<std::int64_t>(rest % static_cast<std::size_t>(L));
      rest /= static_cast<std::size_t>(L);
    }
    double w = 0.0;
    for (int a = 0; a < d; ++a) {
      w += s[m[a]];
      grad_[a][h] = e[m[a]];
    }
    omega_[h] = w;
    const bool self_conjugate = m[d - 1] == 0 || (L % 2 == 0 && m[d - 1] == L / 2);
    weight_[h] = self_conjugate ? 1.0 : 2.0;
  }

  std::array<int, kMaxDim> n{};
  for (int a = 0; a < d; ++a) n[a] = static_cast<int>(L);
  auto in = alloc_real(g.sites());
  auto out = alloc_complex(half_);
  std::lock_guard lock(planner_mutex());
  impl_->r2c = fftw_plan_dft_r2c(d, n.data(), in.get(), out.get(), FFTW_ESTIMATE);
  impl_->c2r = fftw_plan_dft_c2r(d, n.data(), out.get(), in.get(), FFTW_ESTIMATE);
  if (!impl_->r2c || !impl_->c2r) throw std::runtime_error("FFTW planning failed");
}

FourierTransform::~FourierTransform() {
  std::lock_guard lock(planner_mutex());
  if (impl_->r2c) fftw_destroy_plan(impl_->r2c);
  if (impl_->c2r) fftw_destroy_plan(impl_->c2r);
}

Spectrum FourierTransform::forward(std::span<const double> f) const {
  if (f.size() != geom_.sites()) throw std::invalid_argument("transform input has wrong size");
  auto in = alloc_real(f.size());
  auto out = alloc_complex(half_);
  std::copy(f.begin(), f.end(), in.get());
  fftw_execute_dft_r2c(impl_->r2c, in.get(), out.get());
  Spectrum F(half_);
  for (std::size_t h = 0; h < half_; ++h) F[h] = {out[h][0], out[h][1]};
  return F;
}

std::vector<double> FourierTransform::inverse(const Spectrum& F) const {
  if (F.size() != half_) throw std::invalid_argument("spectrum has wrong size");
  auto in = alloc_complex(half_);
  auto out = alloc_real(geom_.sites());
  for (std::size_t h = 0; h < half_; ++h) {
    in[h][0] = F[h].real();
    in[h][1] = F[h].imag();
  }
  fftw_execute_dft_c2r(impl_->c2r, in.get(), out.get());
  const double scale = 1.0 / static_cast<double>(geom_.sites());
  std::vector<double> u(geom_.sites());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = out[i] * scale;
  return u;
}

TorusField solve_helmholtz(double mu, const TorusField& f) {
  if (!(mu > 0.0)) {
    throw std::invalid_argument("helmholtz mass must be positive, got " + std::to_string(mu));
  }
  if (f.components() != 1) throw std::invalid_argument("solve_helmholtz expects a scalar field");
  auto ft = FourierTransform::get(f.geometry());
  Spectrum F = ft->forward(f.component(0));
  const auto& omega = ft->laplace_symbol();
  for (std::size_t h = 0; h < F.size(); ++h) F[h] /= mu + omega[h];
  return TorusField(f.geometry(), 1, ft->inverse(F));
}

double helmholtz_residual(double mu, const TorusField& u, const TorusField& f) {
  TorusField lap = laplacian(u);
  double r = 0.0;
  for (std::size_t x = 0; x < u.sites(); ++x) {
    r = std::max(r, std::abs(mu * u.at(x) - lap.at(x) - f.at(x)));
  }
  return r;
}

}  // namespace incstat
