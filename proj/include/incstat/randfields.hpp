// randfields.hpp
//
// Generators of mean-free increment fields zeta_i on a torus and the
// cross-realization covariance estimator.
//
// An IncrementSample for axis i stores d components; component l at site k
// is the centered increment (Y_{e_l} - E Y_{e_l})(theta_k) . e_i.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "incstat/lattice.hpp"
#include "incstat/rng.hpp"

namespace incstat {

enum class LawKind { uniform_centered, gaussian, bernoulli_pm };

// Scalar law of the iid variables a_l(k).
//   uniform_centered(w): uniform on [-w, w]
//   gaussian(sigma):     N(0, sigma^2)
//   bernoulli_pm(p):     +1 with probability p, -1 otherwise
struct Law {
  LawKind kind = LawKind::uniform_centered;
  double param = 1.0;

  void validate() const;
  double mean() const;
  double variance() const;
  double sample(Engine& eng) const;
  std::string describe() const;
};

Law parse_law(const std::string& name, double param);

enum class GeneratorKind { zero, iid, gradient, decay_alpha, gff };

std::string to_string(GeneratorKind k);
GeneratorKind parse_generator(const std::string& name);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::iid;
  int axis = 0;        // i in [0, d)
  Law law{};           // iid and gradient
  double alpha = 3.0;  // decay_alpha

  // "iid(uniform_centered(1),axis=0)" style tag used in provenance.
  std::string describe() const;
};

struct IncrementSample {
  TorusGeometry geometry{1, 2};
  int axis = 0;
  TorusField values{TorusGeometry{1, 2}};
  std::string generator_id;
  std::string parameters;
  std::uint64_t seed = 0;
  // Set when the components form a discrete gradient (path-independent increments).
  bool curl_free = false;
  // Scalar potential psi with zeta = grad psi, for gradient-type generators.
  std::optional<TorusField> potential;
  // decay_alpha: fraction of spectral mass removed by clamping, and the warning flag.
  double clamped_mass = 0.0;
  bool clamp_warning = false;
};

IncrementSample iid_increments(const TorusGeometry& g, int axis, const Law& law, std::uint64_t seed);
IncrementSample gradient_increments(const TorusGeometry& g, int axis, const Law& psi_law, std::uint64_t seed);
IncrementSample decay_alpha_increments(const TorusGeometry& g, int axis, double alpha, std::uint64_t seed);
IncrementSample gff_increments(const TorusGeometry& g, int axis, std::uint64_t seed);
IncrementSample zero_increments(const TorusGeometry& g, int axis);

// zeta = grad psi for a given potential (centered and rounded to a dyadic grid
// first, so the discrete curl vanishes exactly).
IncrementSample increments_from_potential(int axis, TorusField psi, std::uint64_t seed = 0,
                                          std::string generator_id = "potential");

IncrementSample generate(const GeneratorSpec& spec, const TorusGeometry& g, std::uint64_t seed);

// max_x,l<m |d_l z_m - d_m z_l|; zero in d = 1.
double max_curl(const TorusField& z);

struct CovarianceEntry {
  Site lag{};
  int l = 0;       // component at the shifted site
  int lp = 0;      // component at the origin
  int n = 0;       // coordinate (the sample axis)
  double cov = 0.0;
  double stderr_ = 0.0;
};

struct CovarianceEstimate {
  int dim = 1;
  std::vector<Site> lags;
  // Lag-major, then l, then lp.
  std::vector<CovarianceEntry> entries;
  // Fit of log|cov| against log|k| over significant diagonal entries.
  std::optional<double> alpha;
  double alpha_halfwidth = 0.0;
  std::size_t fit_points = 0;
  std::size_t samples = 0;

  const CovarianceEntry& entry(std::size_t lag_index, int l, int lp) const;
};

// Cross-realization covariance Cov(zeta_l(x + k), zeta_lp(x)) with site
// averaging inside each realization and jackknife standard errors over
// realizations. Lags are given in lattice units with d coordinates.
CovarianceEstimate empirical_covariance(const std::vector<IncrementSample>& samples,
                                        const std::vector<Site>& lags);

}  // namespace incstat
