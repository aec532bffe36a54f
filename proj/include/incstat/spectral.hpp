// spectral.hpp
//
// Discrete Fourier diagonalization of constant-coefficient operators on a
// torus. Backed by FFTW real-to-complex transforms; any side L >= 2 works.

#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "incstat/lattice.hpp"

namespace incstat {

using Spectrum = std::vector<std::complex<double>>;

// Half-spectrum transforms for one geometry. Instances are shared and
// immutable; execution is safe from several threads at once.
class FourierTransform {
 public:
  static std::shared_ptr<const FourierTransform> get(const TorusGeometry& g);

  ~FourierTransform();
  FourierTransform(const FourierTransform&) = delete;
  FourierTransform& operator=(const FourierTransform&) = delete;

  const TorusGeometry& geometry() const { return geom_; }
  std::size_t spectrum_size() const { return half_; }

  // Unnormalized forward transform: F(m) = sum_x f(x) exp(-2 pi i m.x / L).
  Spectrum forward(std::span<const double> f) const;
  // Inverse including the 1/L^d factor.
  std::vector<double> inverse(const Spectrum& F) const;

  // Symbol of -lap on the half-spectrum: sum_l 4 sin^2(pi m_l / L).
  const std::vector<double>& laplace_symbol() const { return omega_; }
  // Symbol of the forward difference along an axis: exp(2 pi i m_l / L) - 1.
  const std::vector<std::complex<double>>& gradient_symbol(int axis) const { return grad_[axis]; }
  // Multiplicity of each half-spectrum entry in the full spectrum (1 or 2).
  const std::vector<double>& weight() const { return weight_; }

  struct Impl;

 private:
  explicit FourierTransform(const TorusGeometry& g);

  TorusGeometry geom_;
  std::size_t half_;
  std::vector<double> omega_;
  std::vector<double> weight_;
  std::vector<std::vector<std::complex<double>>> grad_;
  std::unique_ptr<Impl> impl_;
};

// Solves mu*u - lap u = f exactly on the torus.
TorusField solve_helmholtz(double mu, const TorusField& f);

// Residual max-norm of mu*u - lap u - f, computed with the stencil.
double helmholtz_residual(double mu, const TorusField& u, const TorusField& f);

}  // namespace incstat
