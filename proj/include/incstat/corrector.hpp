// corrector.hpp
//
// Regularized corrector equation on a torus,
//
//   mu phi - lap phi = div zeta,
//
// its Green representation, and Monte Carlo estimates of E[phi^2] across a
// geometric grid of masses mu with the resulting growth verdict.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "incstat/lattice.hpp"
#include "incstat/randfields.hpp"
#include "incstat/stats.hpp"

namespace incstat {

struct CorrectorSolution {
  double mu = 0.0;
  TorusField phi{TorusGeometry{1, 2}};
  double second_moment = 0.0;     // site average of phi^2
  double dirichlet_energy = 0.0;  // site average of |grad phi|^2
  double zeta_energy = 0.0;       // site average of |zeta|^2
  double residual_max = 0.0;
  double mean = 0.0;              // site average of phi
  std::string source_id;
  std::uint64_t source_seed = 0;

  // mu <phi^2> + <|grad phi|^2> - <|zeta|^2>; nonpositive up to rounding.
  double energy_excess() const { return mu * second_moment + dirichlet_energy - zeta_energy; }
};

CorrectorSolution solve_corrector(double mu, const IncrementSample& zeta);

struct GreenCheck {
  double max_deviation = 0.0;
  double phi_max = 0.0;
  double relative() const { return phi_max > 0.0 ? max_deviation / phi_max : max_deviation; }
};

// Evaluates phi(x) = sum_y dG_mu(y - x) . zeta(y) by direct summation and
// compares with solve_corrector. Direct summation costs O(L^(2d)).
GreenCheck green_representation_check(double mu, const IncrementSample& zeta);
GreenCheck green_representation_check(double mu, const IncrementSample& zeta, const CorrectorSolution& sol);

// Var[a] * sum_x (d_i G_mu(x))^2, the exact second moment for iid increments.
double variance_formula_iid(double mu, const TorusGeometry& g, double var_a, int axis);

struct MomentEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
  std::vector<double> per_realization;  // site-averaged phi^2, indexed by realization
  std::size_t energy_violations = 0;    // realizations with energy_excess > 1e-9
  double max_energy_excess = -1e300;
  double max_residual = 0.0;
  // Gradient-type generators only: mean site-averaged psi^2 and mean <|grad phi - zeta|^2>.
  std::optional<double> psi_second_moment;
  std::optional<double> gradient_mismatch;
  std::size_t psi_bound_violations = 0;  // realizations with <phi^2> > <psi^2>
};

// Realization r uses the seed derive_seed(master_seed, {stream, r}).
MomentEstimate second_moment_mc(double mu, const GeneratorSpec& gen, const TorusGeometry& g,
                                std::size_t n_realizations, std::uint64_t master_seed, int threads = 1,
                                std::uint64_t stream = 0);

std::vector<double> geometric_grid(double mu_max, double mu_min, std::size_t points);
bool is_geometric(const std::vector<double>& grid);

struct SideRule {
  double factor = 8.0;                   // L >= factor * mu^(-1/2)
  std::int64_t min_side = 8;
  std::optional<std::int64_t> cap;       // recorded when it binds
  double memory_budget_bytes = 4.0e9;

  std::int64_t side_for(double mu) const;
  bool capped_at(double mu) const;
};

// Rough peak memory of one worker solving on an L^d torus.
double corrector_memory_bytes(int d, std::int64_t L);

enum class Verdict { bounded, diverging_powerlaw, diverging_log, inconclusive };

std::string to_string(Verdict v);
Verdict parse_verdict(const std::string& s);

struct VerdictThresholds {
  double bounded_ratio = 1.5;
  double powerlaw_slope = -0.25;
  double powerlaw_r2 = 0.9;
  double log_r2 = 0.95;
};

struct ScalingConfig {
  GeneratorSpec generator;
  int d = 1;
  std::vector<double> mu_grid;
  std::size_t n = 200;
  std::uint64_t seed = 1;
  SideRule rule;
  int threads = 1;
};

struct ScalingPoint {
  double mu = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t L = 0;
  std::size_t n = 0;
  bool capped = false;
  std::size_t energy_violations = 0;
  double max_energy_excess = 0.0;
  std::optional<double> psi_second_moment;
  std::optional<double> gradient_mismatch;
  std::size_t psi_bound_violations = 0;
};

struct ScalingReport {
  std::string generator;
  int d = 1;
  std::uint64_t seed = 0;
  SideRule rule;
  std::vector<ScalingPoint> points;
  LinearFit loglog;     // ln E vs ln mu
  LinearFit loglinear;  // E vs |ln mu|
  double boundedness_ratio = 0.0;
  Verdict verdict = Verdict::inconclusive;
  bool fits_valid = false;
};

Verdict classify(const ScalingReport& r, const VerdictThresholds& t = {});

// Validates the configuration (grid, sides, budget) before any computation.
void validate_scaling_config(const ScalingConfig& cfg);

ScalingReport scaling_study(const ScalingConfig& cfg);

}  // namespace incstat
