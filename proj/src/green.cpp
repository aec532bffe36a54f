// green.cpp

#include "incstat/green.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "incstat/errors.hpp"
#include "incstat/spectral.hpp"
#include "incstat/stats.hpp"

namespace incstat {

namespace {

void require_positive_mass(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument("Green's function mass must be positive, got " + std::to_string(mu));
  }
}

double green_residual(double mu, const TorusField& G) {
  TorusField delta(G.geometry(), 1);
  delta.at(0) = 1.0;
  return helmholtz_residual(mu, G, delta);
}

}  // namespace

double green_1d_lambda(double mu) {
  require_positive_mass(mu);
  // Smaller root written without cancellation: the product of the roots is 1.
  return 2.0 / (2.0 + mu + std::sqrt(mu * mu + 4.0 * mu));
}

double green_1d_exact(double mu, std::int64_t x) {
  const double lambda = green_1d_lambda(mu);
  const double ax = static_cast<double>(x < 0 ? -x : x);
  return std::pow(lambda, ax) / std::sqrt(mu * mu + 4.0 * mu);
}

double green_1d_periodized(double mu, std::int64_t L, std::int64_t x) {
  if (L < 1) throw std::invalid_argument("period must be positive");
  const double lambda = green_1d_lambda(mu);
  std::int64_t r = x % L;
  if (r < 0) r += L;
  const double c = 1.0 / std::sqrt(mu * mu + 4.0 * mu);
  const double lL = std::pow(lambda, static_cast<double>(L));
  return c * (std::pow(lambda, static_cast<double>(r)) + std::pow(lambda, static_cast<double>(L - r))) /
         (1.0 - lL);
}

GreenTable green_1d_table(double mu, std::int64_t radius) {
  require_positive_mass(mu);
  if (radius < 1) throw std::invalid_argument("truncation radius must be >= 1");
  TorusGeometry g(1, 2 * radius + 1);
  GreenTable t;
  t.mu = mu;
  t.mode = GreenMode::exact_1d;
  t.geometry = g;
  t.values = TorusField(g, 1);
  t.grad = TorusField(g, 1);
  for (std::size_t i = 0; i < g.sites(); ++i) {
    const std::int64_t x = g.centered(i)[0];
    t.values.at(i) = green_1d_exact(mu, x);
    t.grad.at(i) = green_1d_exact(mu, x + 1) - green_1d_exact(mu, x);
  }
  t.wrap_estimate = 0.0;
  // The ring closes at |x| = radius; the residual there is of order lambda^radius.
  t.residual_max = green_residual(mu, t.values);
  return t;
}

GreenTable green_torus(double mu, const TorusGeometry& g) {
  require_positive_mass(mu);
  auto ft = FourierTransform::get(g);
  const auto& omega = ft->laplace_symbol();
  Spectrum F(ft->spectrum_size());
  for (std::size_t h = 0; h < F.size(); ++h) F[h] = 1.0 / (mu + omega[h]);

  GreenTable t;
  t.mu = mu;
  t.mode = GreenMode::torus_spectral;
  t.geometry = g;
  t.values = TorusField(g, 1, ft->inverse(F));
  t.grad = forward_gradient(t.values);
  t.wrap_estimate = std::pow(green_1d_lambda(mu), static_cast<double>(g.side()) / 2.0);
  t.residual_max = green_residual(mu, t.values);
  return t;
}

double grad_green_l2(double mu, const TorusGeometry& g, int axis) {
  require_positive_mass(mu);
  if (axis < 0 || axis >= g.dim()) {
    throw std::invalid_argument("axis " + std::to_string(axis) + " out of range for d=" +
                                std::to_string(g.dim()));
  }
  // Parseval: sum_x |d_i G|^2 = L^-d sum_m |exp(i k_m) - 1|^2 / (mu + omega_m)^2.
  auto ft = FourierTransform::get(g);
  const auto& omega = ft->laplace_symbol();
  const auto& grad = ft->gradient_symbol(axis);
  const auto& w = ft->weight();
  std::vector<double> terms(omega.size());
  for (std::size_t h = 0; h < omega.size(); ++h) {
    const double den = mu + omega[h];
    terms[h] = w[h] * std::norm(grad[h]) / (den * den);
  }
  return order_free_sum(std::move(terms)) / static_cast<double>(g.sites());
}

double grad_green_max(const GreenTable& table) {
  double m = 0.0;
  const int d = table.grad.components();
  for (std::size_t x = 0; x < table.grad.sites(); ++x) {
    double s = 0.0;
    for (int l = 0; l < d; ++l) s += table.grad.at(x, l) * table.grad.at(x, l);
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

DyadicReport dyadic_gradient_norms(const GreenTable& table, double p) {
  if (!(p >= 1.0 && p <= 4.0)) {
    throw std::invalid_argument("dyadic exponent p must lie in [1, 4], got " + std::to_string(p));
  }
  const auto& g = table.geometry;
  const double half = static_cast<double>(g.side()) / 2.0;
  int count = 0;
  while (std::ldexp(1.0, count + 1) <= half) ++count;
  if (count < 3) {
    throw DiagnosticError("torus side " + std::to_string(g.side()) +
                          " admits fewer than 3 dyadic annuli with 2^(i+1) <= L/2");
  }

  DyadicReport rep;
  rep.p = p;
  rep.annuli.resize(static_cast<std::size_t>(count));
  std::vector<std::vector<double>> parts(static_cast<std::size_t>(count));
  const int d = g.dim();
  for (std::size_t x = 0; x < g.sites(); ++x) {
    const Site y = g.centered(x);
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += static_cast<double>(y[a] * y[a]);
    const double r = std::sqrt(r2);
    if (r <= 1.0) continue;
    // 2^i < r <= 2^(i+1)
    int i = static_cast<int>(std::ceil(std::log2(r))) - 1;
    if (std::ldexp(1.0, i) >= r) --i;
    if (std::ldexp(1.0, i + 1) < r) ++i;
    if (i < 0 || i >= count) continue;
    double s = 0.0;
    for (int l = 0; l < d; ++l) s += table.grad.at(x, l) * table.grad.at(x, l);
    parts[static_cast<std::size_t>(i)].push_back(std::pow(std::sqrt(s), p));
  }

  std::vector<double> xs, ys;
  for (int i = 0; i < count; ++i) {
    auto& a = rep.annuli[static_cast<std::size_t>(i)];
    a.index = i;
    a.sites = parts[static_cast<std::size_t>(i)].size();
    a.sum = order_free_sum(std::move(parts[static_cast<std::size_t>(i)]));
    if (a.sum > 0.0) {
      xs.push_back(i);
      ys.push_back(std::log2(a.sum));
    }
  }
  if (xs.size() < 3) throw DiagnosticError("fewer than 3 nonempty dyadic annuli");
  const LinearFit fit = fit_line(xs, ys);
  rep.slope = fit.slope;
  rep.intercept = fit.intercept;
  return rep;
}

}  // namespace incstat
