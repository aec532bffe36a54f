// lattice.hpp
//
// Periodic lattice tori (Z mod L)^d and the discrete calculus on them:
// shifts, forward gradient, backward divergence and the 5-point Laplacian.
//
// Sign conventions:
//   (grad u)_l(x) = u(x+e_l) - u(x)
//   (div z)(x)    = sum_l z_l(x-e_l) - z_l(x)      so that <grad u, z> = <u, div z>
//   (-lap u)(x)   = sum_l 2u(x) - u(x+e_l) - u(x-e_l) = div(grad u)(x)

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace incstat {

inline constexpr int kMaxDim = 3;

using Site = std::array<std::int64_t, kMaxDim>;

class TorusGeometry {
 public:
  TorusGeometry(int d, std::int64_t L);

  int dim() const { return d_; }
  std::int64_t side() const { return L_; }
  std::size_t sites() const { return n_; }

  // Row-major: the last axis varies fastest.
  std::size_t index(const Site& x) const;
  Site coord(std::size_t idx) const;

  // Index of the site x + k (k reduced mod L).
  std::size_t offset(std::size_t idx, const Site& k) const;
  // Neighbour x +/- e_axis.
  std::size_t step(std::size_t idx, int axis, int sign) const;

  // Representative of each coordinate in [-L/2, L/2), i.e. the minimum image.
  Site centered(std::size_t idx) const;

  std::size_t stride(int axis) const { return stride_[axis]; }

  bool operator==(const TorusGeometry& o) const { return d_ == o.d_ && L_ == o.L_; }

 private:
  int d_;
  std::int64_t L_;
  std::size_t n_;
  std::array<std::size_t, kMaxDim> stride_{};
};

// Scalar or vector field on a torus; component-major storage
// (component c occupies values[c*sites .. (c+1)*sites)).
class TorusField {
 public:
  TorusField(TorusGeometry g, int components = 1);
  TorusField(TorusGeometry g, int components, std::vector<double> values);

  const TorusGeometry& geometry() const { return geom_; }
  int components() const { return comps_; }
  std::size_t sites() const { return geom_.sites(); }

  std::span<double> component(int c);
  std::span<const double> component(int c) const;
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  double& at(std::size_t site, int c = 0) { return values_[c * sites() + site]; }
  double at(std::size_t site, int c = 0) const { return values_[c * sites() + site]; }

  bool all_finite() const;
  double max_abs() const;

 private:
  TorusGeometry geom_;
  int comps_;
  std::vector<double> values_;
};

// output(x) = f(x + k), componentwise.
TorusField shift(const TorusField& f, std::span<const std::int64_t> k);

TorusField forward_gradient(const TorusField& u);
TorusField backward_divergence(const TorusField& z);
TorusField laplacian(const TorusField& u);

// Site-sums and inner products over all components.
double inner(const TorusField& a, const TorusField& b);
double site_mean(std::span<const double> v);

}  // namespace incstat
