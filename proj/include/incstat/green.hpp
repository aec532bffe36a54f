// green.hpp
//
// Green's function G_mu of mu - lap: closed form on Z, spectral tables on
// tori, gradient norms and dyadic annulus diagnostics.

#pragma once

#include <optional>
#include <vector>

#include "incstat/lattice.hpp"

namespace incstat {

enum class GreenMode { exact_1d, torus_spectral };

struct GreenTable {
  double mu = 0.0;
  GreenMode mode = GreenMode::torus_spectral;
  TorusGeometry geometry{1, 2};
  TorusField values{TorusGeometry{1, 2}};
  TorusField grad{TorusGeometry{1, 2}};
  // Relative size of the nearest periodic image, lambda^(L/2); 0 in exact mode.
  double wrap_estimate = 0.0;
  // Max-norm of mu G - lap G - delta.
  double residual_max = 0.0;

  double at(std::size_t site) const { return values.at(site); }
};

// Decay rate of the 1d Green's function, the root in (0, 1) of
// lambda^2 - (2 + mu) lambda + 1 = 0.
double green_1d_lambda(double mu);

// G_mu(x) = lambda^|x| / sqrt(mu^2 + 4 mu) on Z.
double green_1d_exact(double mu, std::int64_t x);

// sum_m G_mu(x + m L), the torus Green's function on Z/LZ, in closed form.
double green_1d_periodized(double mu, std::int64_t L, std::int64_t x);

// Exact 1d values on [-radius, radius], stored on a ring of side 2*radius+1
// in minimum-image order. The gradient uses the closed form, not the wrap.
GreenTable green_1d_table(double mu, std::int64_t radius);

GreenTable green_torus(double mu, const TorusGeometry& g);

// sum_x (d_axis G_mu(x))^2 on the torus, axis in [0, d).
double grad_green_l2(double mu, const TorusGeometry& g, int axis);

// max_x |dG_mu(x)| (Euclidean norm of the gradient vector).
double grad_green_max(const GreenTable& table);

struct DyadicAnnulus {
  int index = 0;      // annulus 2^i < |y| <= 2^(i+1)
  double sum = 0.0;   // sum of |dG(y)|^p over the annulus
  std::size_t sites = 0;
};

struct DyadicReport {
  double p = 0.0;
  std::vector<DyadicAnnulus> annuli;
  // Least-squares fit of log2(sum) against i.
  double slope = 0.0;
  double intercept = 0.0;
};

// Annuli are limited to 2^(i+1) <= L/2. Throws DiagnosticError when fewer
// than three fit, std::invalid_argument for p outside [1, 4].
DyadicReport dyadic_gradient_norms(const GreenTable& table, double p);

}  // namespace incstat
