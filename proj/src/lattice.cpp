// lattice.cpp

#include "incstat/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace incstat {

namespace {

std::int64_t wrap(std::int64_t a, std::int64_t L) {
  const std::int64_t r = a % L;
  return r < 0 ? r + L : r;
}

}  // namespace

TorusGeometry::TorusGeometry(int d, std::int64_t L) : d_(d), L_(L) {
  if (d < 1 || d > kMaxDim) {
    throw std::invalid_argument("torus dimension must be 1, 2 or 3, got " + std::to_string(d));
  }
  if (L < 2) throw std::invalid_argument("torus side must be >= 2, got " + std::to_string(L));
  n_ = 1;
  for (int a = d - 1; a >= 0; --a) {
    stride_[a] = n_;
    n_ *= static_cast<std::size_t>(L);
  }
}

std::size_t TorusGeometry::index(const Site& x) const {
  std::size_t idx = 0;
  for (int a = 0; a < d_; ++a) idx += static_cast<std::size_t>(wrap(x[a], L_)) * stride_[a];
  return idx;
}

Site TorusGeometry::coord(std::size_t idx) const {
  Site x{};
  for (int a = 0; a < d_; ++a) {
    x[a] = static_cast<std::int64_t>(idx / stride_[a]);
    idx %= stride_[a];
  }
  return x;
}

std::size_t TorusGeometry::offset(std::size_t idx, const Site& k) const {
  Site x = coord(idx);
  for (int a = 0; a < d_; ++a) x[a] += k[a];
  return index(x);
}

std::size_t TorusGeometry::step(std::size_t idx, int axis, int sign) const {
  const auto L = static_cast<std::size_t>(L_);
  const std::size_t s = stride_[axis];
  const std::size_t c = (idx / s) % L;
  if (sign > 0) return c + 1 == L ? idx + s - L * s : idx + s;
  return c == 0 ? idx + (L - 1) * s : idx - s;
}

Site TorusGeometry::centered(std::size_t idx) const {
  Site x = coord(idx);
  for (int a = 0; a < d_; ++a) {
    if (x[a] >= (L_ + 1) / 2) x[a] -= L_;
  }
  return x;
}

TorusField::TorusField(TorusGeometry g, int components)
    : geom_(g), comps_(components), values_(g.sites() * static_cast<std::size_t>(components), 0.0) {
  if (components < 1) throw std::invalid_argument("field needs at least one component");
}

TorusField::TorusField(TorusGeometry g, int components, std::vector<double> values)
    : geom_(g), comps_(components), values_(std::move(values)) {
  if (components < 1) throw std::invalid_argument("field needs at least one component");
  if (values_.size() != g.sites() * static_cast<std::size_t>(components)) {
    throw std::invalid_argument("field value count does not match components * L^d");
  }
}

std::span<double> TorusField::component(int c) {
  return std::span<double>(values_).subspan(static_cast<std::size_t>(c) * sites(), sites());
}

std::span<const double> TorusField::component(int c) const {
  return std::span<const double>(values_).subspan(static_cast<std::size_t>(c) * sites(), sites());
}

bool TorusField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double TorusField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

TorusField shift(const TorusField& f, std::span<const std::int64_t> k) {
  const auto& g = f.geometry();
  if (static_cast<int>(k.size()) != g.dim()) {
    throw std::invalid_argument("shift vector length " + std::to_string(k.size()) +
                                " does not match dimension " + std::to_string(g.dim()));
  }
  Site kk{};
  std::copy(k.begin(), k.end(), kk.begin());
  TorusField out(g, f.components());
  for (std::size_t x = 0; x < g.sites(); ++x) {
    const std::size_t src = g.offset(x, kk);
    for (int c = 0; c < f.components(); ++c) out.at(x, c) = f.at(src, c);
  }
  return out;
}

TorusField forward_gradient(const TorusField& u) {
  if (u.components() != 1) throw std::invalid_argument("forward_gradient expects a scalar field");
  const auto& g = u.geometry();
  TorusField out(g, g.dim());
  for (int l = 0; l < g.dim(); ++l) {
    auto dst = out.component(l);
    for (std::size_t x = 0; x < g.sites(); ++x) dst[x] = u.at(g.step(x, l, +1)) - u.at(x);
  }
  return out;
}

TorusField backward_divergence(const TorusField& z) {
  const auto& g = z.geometry();
  if (z.components() != g.dim()) {
    throw std::invalid_argument("backward_divergence expects " + std::to_string(g.dim()) +
                                " components, got " + std::to_string(z.components()));
  }
  TorusField out(g, 1);
  auto dst = out.component(0);
  for (int l = 0; l < g.dim(); ++l) {
    auto src = z.component(l);
    for (std::size_t x = 0; x < g.sites(); ++x) dst[x] += src[g.step(x, l, -1)] - src[x];
  }
  return out;
}

TorusField laplacian(const TorusField& u) {
  if (u.components() != 1) throw std::invalid_argument("laplacian expects a scalar field");
  const auto& g = u.geometry();
  TorusField out(g, 1);
  auto dst = out.component(0);
  auto src = u.component(0);
  for (int l = 0; l < g.dim(); ++l) {
    for (std::size_t x = 0; x < g.sites(); ++x) {
      dst[x] += src[g.step(x, l, +1)] + src[g.step(x, l, -1)] - 2.0 * src[x];
    }
  }
  return out;
}

double inner(const TorusField& a, const TorusField& b) {
  if (!(a.geometry() == b.geometry()) || a.components() != b.components()) {
    throw std::invalid_argument("inner product of incompatible fields");
  }
  double s = 0.0;
  auto va = a.values();
  auto vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) s += va[i] * vb[i];
  return s;
}

double site_mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace incstat
