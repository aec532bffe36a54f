// corrector.cpp

#include "incstat/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "incstat/errors.hpp"
#include "incstat/green.hpp"
#include "incstat/parallel.hpp"
#include "incstat/rng.hpp"
#include "incstat/spectral.hpp"

namespace incstat {

namespace {

void require_positive_mass(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument("corrector mass must be positive, got " + std::to_string(mu));
  }
}

double mean_of_squares(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s / static_cast<double>(v.size());
}

}  // namespace

CorrectorSolution solve_corrector(double mu, const IncrementSample& zeta) {
  require_positive_mass(mu);
  const auto& g = zeta.geometry;
  const TorusField rhs = backward_divergence(zeta.values);

  auto ft = FourierTransform::get(g);
  Spectrum F = ft->forward(rhs.component(0));
  const auto& omega = ft->laplace_symbol();
  // The zero mode of a divergence vanishes; pin it so that <phi> = 0 exactly.
  F[0] = 0.0;
  for (std::size_t h = 1; h < F.size(); ++h) F[h] /= mu + omega[h];

  CorrectorSolution sol;
  sol.mu = mu;
  sol.phi = TorusField(g, 1, ft->inverse(F));
  sol.source_id = zeta.generator_id;
  sol.source_seed = zeta.seed;

  const TorusField grad = forward_gradient(sol.phi);
  sol.second_moment = mean_of_squares(sol.phi.values());
  sol.dirichlet_energy = mean_of_squares(grad.values()) * g.dim();
  sol.zeta_energy = mean_of_squares(zeta.values.values()) * g.dim();
  sol.mean = site_mean(sol.phi.values());
  sol.residual_max = helmholtz_residual(mu, sol.phi, rhs);
  return sol;
}

GreenCheck green_representation_check(double mu, const IncrementSample& zeta) {
  return green_representation_check(mu, zeta, solve_corrector(mu, zeta));
}

GreenCheck green_representation_check(double mu, const IncrementSample& zeta, const CorrectorSolution& sol) {
  require_positive_mass(mu);
  const auto& g = zeta.geometry;
  if (!(sol.phi.geometry() == g)) {
    throw std::invalid_argument("corrector solution and increments live on different tori");
  }
  if (sol.mu != mu) throw std::invalid_argument("corrector solution was computed for a different mu");
  const double pairs = static_cast<double>(g.sites()) * static_cast<double>(g.sites());
  if (pairs > 5.0e9) {
    throw std::invalid_argument("torus too large for direct Green summation (L^(2d) > 5e9)");
  }
  const GreenTable table = green_torus(mu, g);
  const int d = g.dim();
  const auto L = static_cast<std::int64_t>(g.side());

  std::vector<Site> coords(g.sites());
  for (std::size_t x = 0; x < g.sites(); ++x) coords[x] = g.coord(x);

  GreenCheck check;
  check.phi_max = sol.phi.max_abs();
  for (std::size_t x = 0; x < g.sites(); ++x) {
    double acc = 0.0;
    for (std::size_t y = 0; y < g.sites(); ++y) {
      std::size_t diff = 0;
      for (int a = 0; a < d; ++a) {
        diff += static_cast<std::size_t>((coords[y][a] - coords[x][a] + L) % L) * g.stride(a);
      }
      for (int l = 0; l < d; ++l) acc += table.grad.at(diff, l) * zeta.values.at(y, l);
    }
    check.max_deviation = std::max(check.max_deviation, std::abs(acc - sol.phi.at(x)));
  }
  return check;
}

double variance_formula_iid(double mu, const TorusGeometry& g, double var_a, int axis) {
  if (var_a < 0.0) throw std::invalid_argument("variance must be nonnegative");
  if (var_a == 0.0) return 0.0;
  return var_a * grad_green_l2(mu, g, axis);
}

MomentEstimate second_moment_mc(double mu, const GeneratorSpec& gen, const TorusGeometry& g,
                                std::size_t n_realizations, std::uint64_t master_seed, int threads,
                                std::uint64_t stream) {
  require_positive_mass(mu);
  if (n_realizations < 2) throw std::invalid_argument("second_moment_mc needs at least 2 realizations");

  struct Slot {
    double phi2 = 0.0;
    double excess = 0.0;
    double residual = 0.0;
    double psi2 = std::numeric_limits<double>::quiet_NaN();
    double mismatch = std::numeric_limits<double>::quiet_NaN();
  };
  std::vector<Slot> slots(n_realizations);

  parallel_for(n_realizations, threads, [&](std::size_t r) {
    IncrementSample zeta;
    try {
      zeta = generate(gen, g, derive_seed(master_seed, {stream, r}));
    } catch (const std::exception& e) {
      throw GeneratorError(r, e.what());
    }
    const CorrectorSolution sol = solve_corrector(mu, zeta);
    Slot& s = slots[r];
    s.phi2 = sol.second_moment;
    s.excess = sol.energy_excess();
    s.residual = sol.residual_max;
    if (zeta.potential) {
      s.psi2 = mean_of_squares(zeta.potential->values());
      const TorusField grad = forward_gradient(sol.phi);
      double m = 0.0;
      for (std::size_t i = 0; i < grad.values().size(); ++i) {
        const double e = grad.values()[i] - zeta.values.values()[i];
        m += e * e;
      }
      s.mismatch = m / static_cast<double>(g.sites());
    }
  });

  MomentEstimate est;
  est.n = n_realizations;
  est.per_realization.reserve(n_realizations);
  std::vector<double> psi2, mismatch;
  for (const Slot& s : slots) {
    est.per_realization.push_back(s.phi2);
    if (s.excess > 1e-9) ++est.energy_violations;
    est.max_energy_excess = std::max(est.max_energy_excess, s.excess);
    est.max_residual = std::max(est.max_residual, s.residual);
    if (!std::isnan(s.psi2)) {
      psi2.push_back(s.psi2);
      mismatch.push_back(s.mismatch);
      if (s.phi2 > s.psi2) ++est.psi_bound_violations;
    }
  }
  const MeanStderr ms = mean_stderr(est.per_realization);
  est.mean = ms.mean;
  est.stderr_ = ms.stderr_;
  if (!psi2.empty()) {
    est.psi_second_moment = mean_stderr(psi2).mean;
    est.gradient_mismatch = mean_stderr(mismatch).mean;
  }
  return est;
}

std::vector<double> geometric_grid(double mu_max, double mu_min, std::size_t points) {
  if (points < 2) throw std::invalid_argument("a mu-grid needs at least 2 points");
  if (!(mu_max > mu_min) || !(mu_min > 0.0)) {
    throw std::invalid_argument("mu-grid needs mu_max > mu_min > 0");
  }
  std::vector<double> grid(points);
  // Ratios that are integer powers of two give exactly representable grids.
  const double log2_ratio = std::log2(mu_max / mu_min) / static_cast<double>(points - 1);
  if (std::abs(log2_ratio - std::round(log2_ratio)) < 1e-12) {
    const int k = static_cast<int>(std::round(log2_ratio));
    for (std::size_t j = 0; j < points; ++j) grid[j] = std::ldexp(mu_max, -k * static_cast<int>(j));
    return grid;
  }
  const double step = std::log(mu_min / mu_max) / static_cast<double>(points - 1);
  for (std::size_t j = 0; j < points; ++j) grid[j] = mu_max * std::exp(step * static_cast<double>(j));
  grid.front() = mu_max;
  grid.back() = mu_min;
  return grid;
}

bool is_geometric(const std::vector<double>& grid) {
  if (grid.size() < 2) return false;
  for (double m : grid) {
    if (!(m > 0.0) || !std::isfinite(m)) return false;
  }
  const double r0 = std::log(grid[1] / grid[0]);
  if (r0 == 0.0) return false;
  for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
    if (std::abs(std::log(grid[j + 1] / grid[j]) - r0) > 1e-9 * std::abs(r0)) return false;
  }
  return true;
}

std::int64_t SideRule::side_for(double mu) const {
  auto L = static_cast<std::int64_t>(std::ceil(factor / std::sqrt(mu) - 1e-9));
  L = std::max(L, min_side);
  if (cap && L > *cap) L = *cap;
  return L;
}

bool SideRule::capped_at(double mu) const {
  if (!cap) return false;
  const auto L = std::max(static_cast<std::int64_t>(std::ceil(factor / std::sqrt(mu) - 1e-9)), min_side);
  return L > *cap;
}

double corrector_memory_bytes(int d, std::int64_t L) {
  double n = 1.0;
  for (int a = 0; a < d; ++a) n *= static_cast<double>(L);
  // zeta, its divergence, phi, grad phi, spectra and transform scratch.
  return n * 8.0 * (3.0 * d + 10.0);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::bounded: return "bounded";
    case Verdict::diverging_powerlaw: return "diverging-powerlaw";
    case Verdict::diverging_log: return "diverging-log";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict parse_verdict(const std::string& s) {
  for (auto v : {Verdict::bounded, Verdict::diverging_powerlaw, Verdict::diverging_log, Verdict::inconclusive}) {
    if (to_string(v) == s) return v;
  }
  throw std::invalid_argument("unknown verdict '" + s + "'");
}

Verdict classify(const ScalingReport& r, const VerdictThresholds& t) {
  if (r.boundedness_ratio <= t.bounded_ratio) return Verdict::bounded;
  if (!r.fits_valid) return Verdict::inconclusive;
  if (r.loglog.slope <= t.powerlaw_slope && r.loglog.r2 >= t.powerlaw_r2) return Verdict::diverging_powerlaw;
  if (r.loglinear.slope > 0.0 && r.loglinear.r2 >= t.log_r2) return Verdict::diverging_log;
  return Verdict::inconclusive;
}

void validate_scaling_config(const ScalingConfig& cfg) {
  if (cfg.d < 1 || cfg.d > 3) throw ConfigError("d", "must be 1, 2 or 3");
  if (cfg.generator.axis < 0 || cfg.generator.axis >= cfg.d) throw ConfigError("axis", "must lie in [0, d)");
  if (cfg.generator.kind == GeneratorKind::gff && cfg.d != 2) throw ConfigError("generator", "gff requires d = 2");
  if (cfg.mu_grid.size() < 5) throw ConfigError("mu_grid", "needs at least 5 points");
  if (!is_geometric(cfg.mu_grid)) throw ConfigError("mu_grid", "must be a geometric sequence of positive values");
  if (cfg.n < 2) throw ConfigError("n", "needs at least 2 realizations");
  if (cfg.threads < 1) throw ConfigError("threads", "must be >= 1");
  if (!(cfg.rule.factor > 0.0)) throw ConfigError("l_factor", "must be positive");
  if (cfg.rule.min_side < 2) throw ConfigError("l_min", "must be >= 2");
  if (cfg.rule.cap && *cfg.rule.cap < 2) throw ConfigError("l_cap", "must be >= 2");
  for (double mu : cfg.mu_grid) {
    const std::int64_t L = cfg.rule.side_for(mu);
    const double bytes = corrector_memory_bytes(cfg.d, L) * cfg.threads;
    if (bytes > cfg.rule.memory_budget_bytes) {
      throw BudgetError("memory_budget_mb", "torus side " + std::to_string(L) + " at mu=" + std::to_string(mu) +
                                                " needs ~" + std::to_string(bytes / 1e6) +
                                                " MB, over the configured budget");
    }
  }
}

ScalingReport scaling_study(const ScalingConfig& cfg) {
  validate_scaling_config(cfg);
  ScalingReport rep;
  rep.generator = cfg.generator.describe();
  rep.d = cfg.d;
  rep.seed = cfg.seed;
  rep.rule = cfg.rule;

  for (std::size_t j = 0; j < cfg.mu_grid.size(); ++j) {
    const double mu = cfg.mu_grid[j];
    ScalingPoint pt;
    pt.mu = mu;
    pt.L = cfg.rule.side_for(mu);
    pt.capped = cfg.rule.capped_at(mu);
    const MomentEstimate est =
        second_moment_mc(mu, cfg.generator, TorusGeometry(cfg.d, pt.L), cfg.n, cfg.seed, cfg.threads, j);
    pt.mean = est.mean;
    pt.stderr_ = est.stderr_;
    pt.n = est.n;
    pt.energy_violations = est.energy_violations;
    pt.max_energy_excess = est.max_energy_excess;
    pt.psi_second_moment = est.psi_second_moment;
    pt.gradient_mismatch = est.gradient_mismatch;
    pt.psi_bound_violations = est.psi_bound_violations;
    rep.points.push_back(pt);
  }

  // The largest mu is the reference point of the boundedness ratio.
  const auto ref = std::max_element(rep.points.begin(), rep.points.end(),
                                    [](const ScalingPoint& a, const ScalingPoint& b) { return a.mu < b.mu; });
  double largest = 0.0;
  for (const auto& p : rep.points) largest = std::max(largest, p.mean);
  rep.boundedness_ratio = ref->mean > 0.0 ? largest / ref->mean : (largest > 0.0 ? HUGE_VAL : 1.0);

  bool positive = true;
  for (const auto& p : rep.points) positive = positive && p.mean > 0.0;
  if (positive) {
    std::vector<double> lx, ly, ax, ay;
    for (const auto& p : rep.points) {
      lx.push_back(std::log(p.mu));
      ly.push_back(std::log(p.mean));
      ax.push_back(std::abs(std::log(p.mu)));
      ay.push_back(p.mean);
    }
    rep.loglog = fit_line(lx, ly);
    rep.loglinear = fit_line(ax, ay);
    rep.fits_valid = true;
  }
  rep.verdict = classify(rep);
  return rep;
}

}  // namespace incstat
