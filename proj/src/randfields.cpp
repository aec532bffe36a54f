// randfields.cpp

#include "incstat/randfields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "incstat/spectral.hpp"
#include "incstat/stats.hpp"

namespace incstat {

namespace {

// Potentials are rounded to multiples of 2^-36 so that forward differences
// are exact and the discrete curl of a gradient vanishes bit-for-bit.
constexpr int kPotentialBits = 36;

double quantize(double v) {
  return std::ldexp(std::nearbyint(std::ldexp(v, kPotentialBits)), -kPotentialBits);
}

void check_axis(const TorusGeometry& g, int axis) {
  if (axis < 0 || axis >= g.dim()) {
    throw std::invalid_argument("axis " + std::to_string(axis) + " out of range for d=" +
                                std::to_string(g.dim()));
  }
}

void center(std::span<double> v) {
  const double m = site_mean(v);
  for (double& x : v) x -= m;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

IncrementSample from_potential(const TorusGeometry& g, int axis, TorusField psi, std::uint64_t seed,
                               std::string id, std::string params) {
  center(psi.component(0));
  for (double& v : psi.values()) v = quantize(v);
  IncrementSample s;
  s.geometry = g;
  s.axis = axis;
  // Telescoping makes every component sum to zero on the torus; no recentring,
  // which would break the exact curl identity.
  s.values = forward_gradient(psi);
  s.generator_id = std::move(id);
  s.parameters = std::move(params);
  s.seed = seed;
  s.curl_free = true;
  s.potential = std::move(psi);
  return s;
}

}  // namespace

void Law::validate() const {
  switch (kind) {
    case LawKind::uniform_centered:
      if (!(param > 0.0)) throw std::invalid_argument("uniform_centered width must be > 0");
      break;
    case LawKind::gaussian:
      if (!(param > 0.0)) throw std::invalid_argument("gaussian sigma must be > 0");
      break;
    case LawKind::bernoulli_pm:
      if (!(param > 0.0 && param < 1.0)) throw std::invalid_argument("bernoulli_pm p must lie in (0, 1)");
      break;
  }
  if (!std::isfinite(param)) throw std::invalid_argument("law parameter must be finite");
}

double Law::mean() const {
  return kind == LawKind::bernoulli_pm ? 2.0 * param - 1.0 : 0.0;
}

double Law::variance() const {
  switch (kind) {
    case LawKind::uniform_centered: return param * param / 3.0;
    case LawKind::gaussian: return param * param;
    case LawKind::bernoulli_pm: return 4.0 * param * (1.0 - param);
  }
  return 0.0;
}

double Law::sample(Engine& eng) const {
  switch (kind) {
    case LawKind::uniform_centered: return std::uniform_real_distribution<double>(-param, param)(eng);
    case LawKind::gaussian: return std::normal_distribution<double>(0.0, param)(eng);
    case LawKind::bernoulli_pm: return std::bernoulli_distribution(param)(eng) ? 1.0 : -1.0;
  }
  return 0.0;
}

std::string Law::describe() const {
  switch (kind) {
    case LawKind::uniform_centered: return "uniform_centered(" + format_double(param) + ")";
    case LawKind::gaussian: return "gaussian(" + format_double(param) + ")";
    case LawKind::bernoulli_pm: return "bernoulli_pm(" + format_double(param) + ")";
  }
  return "?";
}

Law parse_law(const std::string& name, double param) {
  Law law;
  if (name == "uniform_centered" || name == "uniform") {
    law.kind = LawKind::uniform_centered;
  } else if (name == "gaussian") {
    law.kind = LawKind::gaussian;
  } else if (name == "bernoulli_pm") {
    law.kind = LawKind::bernoulli_pm;
  } else {
    throw std::invalid_argument("unknown law '" + name + "'");
  }
  law.param = param;
  law.validate();
  return law;
}

std::string to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::zero: return "zero";
    case GeneratorKind::iid: return "iid";
    case GeneratorKind::gradient: return "gradient";
    case GeneratorKind::decay_alpha: return "decay_alpha";
    case GeneratorKind::gff: return "gff";
  }
  return "?";
}

GeneratorKind parse_generator(const std::string& name) {
  for (auto k : {GeneratorKind::zero, GeneratorKind::iid, GeneratorKind::gradient, GeneratorKind::decay_alpha,
                 GeneratorKind::gff}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown generator '" + name + "'");
}

std::string GeneratorSpec::describe() const {
  std::string s = to_string(kind) + "(";
  if (kind == GeneratorKind::iid || kind == GeneratorKind::gradient) s += law.describe() + ",";
  if (kind == GeneratorKind::decay_alpha) s += "alpha=" + format_double(alpha) + ",";
  return s + "axis=" + std::to_string(axis) + ")";
}

IncrementSample iid_increments(const TorusGeometry& g, int axis, const Law& law, std::uint64_t seed) {
  check_axis(g, axis);
  law.validate();
  Engine eng = make_engine(seed);
  IncrementSample s;
  s.geometry = g;
  s.axis = axis;
  s.values = TorusField(g, g.dim());
  auto comp = s.values.component(axis);
  const double m = law.mean();
  for (double& v : comp) v = law.sample(eng) - m;
  center(comp);
  s.generator_id = "iid";
  s.parameters = law.describe();
  s.seed = seed;
  s.curl_free = g.dim() == 1;
  return s;
}

IncrementSample gradient_increments(const TorusGeometry& g, int axis, const Law& psi_law, std::uint64_t seed) {
  check_axis(g, axis);
  psi_law.validate();
  Engine eng = make_engine(seed);
  TorusField psi(g, 1);
  for (double& v : psi.values()) v = psi_law.sample(eng);
  return from_potential(g, axis, std::move(psi), seed, "gradient", psi_law.describe());
}

IncrementSample decay_alpha_increments(const TorusGeometry& g, int axis, double alpha, std::uint64_t seed) {
  check_axis(g, axis);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("decay exponent alpha must be positive");
  }
  auto ft = FourierTransform::get(g);

  // Target covariance on the minimum-image torus distance.
  std::vector<double> target(g.sites());
  for (std::size_t x = 0; x < g.sites(); ++x) {
    const Site k = g.centered(x);
    double r2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) r2 += static_cast<double>(k[a] * k[a]);
    target[x] = 1.0 / (1.0 + std::pow(std::sqrt(r2), alpha));
  }
  const Spectrum S = ft->forward(target);
  const auto& w = ft->weight();
  std::vector<double> amplitude(S.size());
  double total = 0.0, clamped = 0.0;
  for (std::size_t h = 0; h < S.size(); ++h) {
    const double s = S[h].real();
    total += w[h] * std::abs(s);
    if (s < 0.0) clamped += w[h] * (-s);
    amplitude[h] = std::sqrt(std::max(s, 0.0));
  }

  Engine eng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  IncrementSample s;
  s.geometry = g;
  s.axis = axis;
  s.values = TorusField(g, g.dim());
  std::vector<double> white(g.sites());
  for (int l = 0; l < g.dim(); ++l) {
    for (double& v : white) v = normal(eng);
    Spectrum F = ft->forward(white);
    for (std::size_t h = 0; h < F.size(); ++h) F[h] *= amplitude[h];
    std::vector<double> field = ft->inverse(F);
    auto comp = s.values.component(l);
    std::copy(field.begin(), field.end(), comp.begin());
    center(comp);
  }
  s.generator_id = "decay_alpha";
  s.parameters = "alpha=" + format_double(alpha);
  s.seed = seed;
  s.clamped_mass = total > 0.0 ? clamped / total : 0.0;
  s.clamp_warning = s.clamped_mass > 0.10;
  return s;
}

IncrementSample gff_increments(const TorusGeometry& g, int axis, std::uint64_t seed) {
  if (g.dim() != 2) {
    throw std::invalid_argument("gff_increments requires d = 2, got d=" + std::to_string(g.dim()));
  }
  check_axis(g, axis);
  auto ft = FourierTransform::get(g);
  Engine eng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(g.sites());
  for (double& v : white) v = normal(eng);
  Spectrum F = ft->forward(white);
  const auto& omega = ft->laplace_symbol();
  for (std::size_t h = 0; h < F.size(); ++h) F[h] = omega[h] > 0.0 ? F[h] / std::sqrt(omega[h]) : 0.0;
  TorusField psi(g, 1, ft->inverse(F));
  return from_potential(g, axis, std::move(psi), seed, "gff", "");
}

IncrementSample increments_from_potential(int axis, TorusField psi, std::uint64_t seed, std::string generator_id) {
  if (psi.components() != 1) throw std::invalid_argument("potential must be a scalar field");
  const TorusGeometry g = psi.geometry();
  check_axis(g, axis);
  return from_potential(g, axis, std::move(psi), seed, std::move(generator_id), "");
}

IncrementSample zero_increments(const TorusGeometry& g, int axis) {
  check_axis(g, axis);
  IncrementSample s;
  s.geometry = g;
  s.axis = axis;
  s.values = TorusField(g, g.dim());
  s.generator_id = "zero";
  s.curl_free = true;
  return s;
}

IncrementSample generate(const GeneratorSpec& spec, const TorusGeometry& g, std::uint64_t seed) {
  switch (spec.kind) {
    case GeneratorKind::zero: return zero_increments(g, spec.axis);
    case GeneratorKind::iid: return iid_increments(g, spec.axis, spec.law, seed);
    case GeneratorKind::gradient: return gradient_increments(g, spec.axis, spec.law, seed);
    case GeneratorKind::decay_alpha: return decay_alpha_increments(g, spec.axis, spec.alpha, seed);
    case GeneratorKind::gff: return gff_increments(g, spec.axis, seed);
  }
  throw std::invalid_argument("unknown generator");
}

double max_curl(const TorusField& z) {
  const auto& g = z.geometry();
  if (z.components() != g.dim()) throw std::invalid_argument("max_curl expects d components");
  double m = 0.0;
  for (int l = 0; l < g.dim(); ++l) {
    for (int k = l + 1; k < g.dim(); ++k) {
      for (std::size_t x = 0; x < g.sites(); ++x) {
        const double dl_zk = z.at(g.step(x, l, +1), k) - z.at(x, k);
        const double dk_zl = z.at(g.step(x, k, +1), l) - z.at(x, l);
        m = std::max(m, std::abs(dl_zk - dk_zl));
      }
    }
  }
  return m;
}

const CovarianceEntry& CovarianceEstimate::entry(std::size_t lag_index, int l, int lp) const {
  return entries.at(lag_index * static_cast<std::size_t>(dim * dim) + static_cast<std::size_t>(l * dim + lp));
}

CovarianceEstimate empirical_covariance(const std::vector<IncrementSample>& samples,
                                        const std::vector<Site>& lags) {
  if (samples.size() < 2) throw std::invalid_argument("empirical_covariance needs at least 2 samples");
  if (lags.empty()) throw std::invalid_argument("empirical_covariance needs at least one lag");
  const auto& g = samples.front().geometry;
  for (const auto& s : samples) {
    if (!(s.geometry == g) || s.generator_id != samples.front().generator_id ||
        s.parameters != samples.front().parameters || s.axis != samples.front().axis) {
      throw std::invalid_argument("samples differ in geometry or generator");
    }
  }
  const int d = g.dim();
  const std::size_t n = samples.size();
  const auto N = static_cast<double>(g.sites());
  auto ft = FourierTransform::get(g);

  std::vector<std::size_t> lag_sites;
  for (const auto& k : lags) lag_sites.push_back(g.index(k));

  // per_sample[(lag, l, lp)][s]
  const std::size_t n_entries = lags.size() * static_cast<std::size_t>(d * d);
  std::vector<std::vector<double>> per_sample(n_entries, std::vector<double>(n));
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<Spectrum> F;
    for (int l = 0; l < d; ++l) F.push_back(ft->forward(samples[s].values.component(l)));
    for (int l = 0; l < d; ++l) {
      for (int lp = 0; lp < d; ++lp) {
        Spectrum P(F[l].size());
        for (std::size_t h = 0; h < P.size(); ++h) P[h] = F[l][h] * std::conj(F[lp][h]);
        // inverse(P)(k) = sum_x z_l(x + k) z_lp(x)
        const std::vector<double> corr = ft->inverse(P);
        for (std::size_t j = 0; j < lags.size(); ++j) {
          per_sample[j * static_cast<std::size_t>(d * d) + static_cast<std::size_t>(l * d + lp)][s] =
              corr[lag_sites[j]] / N;
        }
      }
    }
  }

  CovarianceEstimate est;
  est.dim = d;
  est.lags = lags;
  est.samples = n;
  std::vector<double> fx, fy;
  for (std::size_t j = 0; j < lags.size(); ++j) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += static_cast<double>(lags[j][a] * lags[j][a]);
    for (int l = 0; l < d; ++l) {
      for (int lp = 0; lp < d; ++lp) {
        const auto& v = per_sample[j * static_cast<std::size_t>(d * d) + static_cast<std::size_t>(l * d + lp)];
        const double total = order_free_sum(v);
        const double mean = total / static_cast<double>(n);
        // Jackknife over realizations.
        std::vector<double> dev(n);
        for (std::size_t s = 0; s < n; ++s) {
          const double loo = (total - v[s]) / static_cast<double>(n - 1);
          dev[s] = (loo - mean) * (loo - mean);
        }
        const double se =
            std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * order_free_sum(std::move(dev)));
        CovarianceEntry e;
        e.lag = lags[j];
        e.l = l;
        e.lp = lp;
        e.n = samples.front().axis;
        e.cov = mean;
        e.stderr_ = se;
        est.entries.push_back(e);
        if (l == lp && r2 > 0.0 && std::abs(mean) > 3.0 * se && mean != 0.0) {
          fx.push_back(0.5 * std::log(r2));
          fy.push_back(std::log(std::abs(mean)));
        }
      }
    }
  }

  bool distinct = false;
  for (double x : fx) distinct = distinct || x != fx.front();
  if (fx.size() >= 2 && distinct) {
    const LinearFit fit = fit_line(fx, fy);
    est.alpha = -fit.slope;
    est.alpha_halfwidth = 1.96 * fit.slope_stderr;
    est.fit_points = fit.points;
  }
  return est;
}

}  // namespace incstat
