// pointsets.cpp

#include "incstat/pointsets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "incstat/parallel.hpp"
#include "incstat/rng.hpp"
#include "incstat/stats.hpp"

namespace incstat {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::uint64_t zigzag(std::int64_t j) {
  return (static_cast<std::uint64_t>(j) << 1) ^ static_cast<std::uint64_t>(j >> 63);
}

// Open-interval uniform for quantile functions with a singularity at 1.
double open_uniform(std::uint64_t key, std::uint64_t counter) {
  return hash_uniform(key, counter) + 0x1.0p-54;
}

double dist2(const Point& a, const Point& b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Uniform grid of cells of a given size over a box.
class CellList {
 public:
  CellList(const PointSetWindow& set, double cell) : d_(set.d), box_(set.box), cell_(cell) {
    std::size_t total = 1;
    for (int a = 0; a < d_; ++a) {
      const double extent = box_.hi[a] - box_.lo[a];
      dims_[a] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(extent / cell_)));
      total *= static_cast<std::size_t>(dims_[a]);
    }
    start_.assign(total + 1, 0);
    std::vector<std::size_t> cell_of(set.points.size());
    for (std::size_t p = 0; p < set.points.size(); ++p) {
      cell_of[p] = flat(cell_coord(set.points[p]));
      ++start_[cell_of[p] + 1];
    }
    for (std::size_t c = 0; c < total; ++c) start_[c + 1] += start_[c];
    order_.resize(set.points.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t p = 0; p < set.points.size(); ++p) order_[fill[cell_of[p]]++] = p;
  }

  // Calls fn(q) for every point q in cells adjacent to the cell of x.
  template <class Fn>
  void for_neighbours(const Point& x, Fn&& fn) const {
    const Site c = cell_coord(x);
    Site lo{}, hi{};
    for (int a = 0; a < d_; ++a) {
      lo[a] = std::max<std::int64_t>(0, c[a] - 1);
      hi[a] = std::min<std::int64_t>(dims_[a] - 1, c[a] + 1);
    }
    Site k = lo;
    while (true) {
      const std::size_t f = flat(k);
      for (std::size_t i = start_[f]; i < start_[f + 1]; ++i) fn(order_[i]);
      int a = d_ - 1;
      while (a >= 0 && k[a] == hi[a]) {
        k[a] = lo[a];
        --a;
      }
      if (a < 0) break;
      ++k[a];
    }
  }

 private:
  Site cell_coord(const Point& p) const {
    Site c{};
    for (int a = 0; a < d_; ++a) {
      auto v = static_cast<std::int64_t>(std::floor((p[a] - box_.lo[a]) / cell_));
      c[a] = std::clamp<std::int64_t>(v, 0, dims_[a] - 1);
    }
    return c;
  }

  std::size_t flat(const Site& c) const {
    std::size_t f = 0;
    for (int a = 0; a < d_; ++a) f = f * static_cast<std::size_t>(dims_[a]) + static_cast<std::size_t>(c[a]);
    return f;
  }

  int d_;
  Box box_;
  double cell_;
  Site dims_{};
  std::vector<std::size_t> start_;
  std::vector<std::size_t> order_;
};

void check_energy_domain(const PointSetWindow& set, const Potential& V, const Box& D, PairConvention conv) {
  if (D.d != set.d) throw std::invalid_argument("energy box has the wrong dimension");
  if (!(V.cutoff > 0.0) || !std::isfinite(V.cutoff)) throw std::invalid_argument("potential cutoff must be finite and > 0");
  if (!set.box.contains(D)) throw std::invalid_argument("energy box D exceeds the point-set window");
  if (conv == PairConvention::centered_in_d && !set.box.shrunk(V.cutoff).contains(D)) {
    throw std::invalid_argument("energy box D is closer than the cutoff to the window boundary");
  }
}

}  // namespace

Matrix identity_matrix(int d) {
  Matrix m{};
  for (int i = 0; i < d; ++i) m[i][i] = 1.0;
  return m;
}

Box Box::cube(int d, double lo, double hi) {
  Box b;
  b.d = d;
  for (int a = 0; a < d; ++a) {
    b.lo[a] = lo;
    b.hi[a] = hi;
  }
  return b;
}

bool Box::contains(const Point& p) const {
  for (int a = 0; a < d; ++a) {
    if (!(p[a] >= lo[a] && p[a] < hi[a])) return false;
  }
  return true;
}

bool Box::contains(const Box& inner) const {
  for (int a = 0; a < d; ++a) {
    if (inner.lo[a] < lo[a] || inner.hi[a] > hi[a]) return false;
  }
  return true;
}

Box Box::shrunk(double r) const {
  Box b = *this;
  for (int a = 0; a < d; ++a) {
    b.lo[a] += r;
    b.hi[a] -= r;
  }
  return b;
}

double Box::volume() const {
  double v = 1.0;
  for (int a = 0; a < d; ++a) v *= std::max(0.0, hi[a] - lo[a]);
  return v;
}

bool LatticeFieldWindow::inside(const Site& z) const {
  for (int a = 0; a < d; ++a) {
    if (z[a] < lo[a] || z[a] >= lo[a] + side) return false;
  }
  return true;
}

std::size_t LatticeFieldWindow::index(const Site& z) const {
  if (!inside(z)) throw std::out_of_range("lattice site outside the window");
  std::size_t f = 0;
  for (int a = 0; a < d; ++a) f = f * static_cast<std::size_t>(side) + static_cast<std::size_t>(z[a] - lo[a]);
  return f;
}

Site LatticeFieldWindow::site(std::size_t idx) const {
  Site z{};
  for (int a = d - 1; a >= 0; --a) {
    z[a] = lo[a] + static_cast<std::int64_t>(idx % static_cast<std::size_t>(side));
    idx /= static_cast<std::size_t>(side);
  }
  return z;
}

// ------------------------------------------------------------------ renewal

void TauLaw::validate() const {
  const bool ok = std::isfinite(a) && std::isfinite(b);
  switch (kind) {
    case TauKind::constant:
      if (!ok || !(a > 0.0)) throw std::invalid_argument("constant interval must be > 0");
      break;
    case TauKind::uniform:
      if (!ok || !(a > 0.0) || !(b > a)) throw std::invalid_argument("uniform intervals need 0 < a < b");
      break;
    case TauKind::exponential:
      if (!ok || !(a >= 0.0) || !(b > 0.0)) throw std::invalid_argument("exponential intervals need a >= 0, rate > 0");
      break;
  }
}

double TauLaw::mean() const {
  switch (kind) {
    case TauKind::constant: return a;
    case TauKind::uniform: return 0.5 * (a + b);
    case TauKind::exponential: return a + 1.0 / b;
  }
  return 0.0;
}

double TauLaw::variance() const {
  switch (kind) {
    case TauKind::constant: return 0.0;
    case TauKind::uniform: return (b - a) * (b - a) / 12.0;
    case TauKind::exponential: return 1.0 / (b * b);
  }
  return 0.0;
}

double TauLaw::quantile(double u) const {
  switch (kind) {
    case TauKind::constant: return a;
    case TauKind::uniform: return a + (b - a) * u;
    case TauKind::exponential: return a - std::log1p(-u) / b;
  }
  return 0.0;
}

std::string TauLaw::describe() const {
  switch (kind) {
    case TauKind::constant: return "constant(" + fmt(a) + ")";
    case TauKind::uniform: return "uniform(" + fmt(a) + "," + fmt(b) + ")";
    case TauKind::exponential: return "exponential(" + fmt(a) + "," + fmt(b) + ")";
  }
  return "?";
}

TauLaw parse_tau_law(const std::string& name, double a, double b) {
  TauLaw law;
  if (name == "constant") {
    law.kind = TauKind::constant;
  } else if (name == "uniform") {
    law.kind = TauKind::uniform;
  } else if (name == "exponential") {
    law.kind = TauKind::exponential;
  } else {
    throw std::invalid_argument("unknown interval law '" + name + "'");
  }
  law.a = a;
  law.b = b;
  law.validate();
  return law;
}

PointSetWindow renewal_pointset_1d(const TauLaw& law, double lo, double hi, std::uint64_t seed,
                                   std::int64_t shift) {
  law.validate();
  if (!(hi > lo)) throw std::invalid_argument("renewal window needs lo < hi");
  const std::uint64_t key = splitmix64(seed ^ 0x72656e6577616cULL);
  auto tau = [&](std::int64_t j) { return law.quantile(open_uniform(key, zigzag(j))); };

  PointSetWindow set;
  set.d = 1;
  set.box.d = 1;
  set.box.lo[0] = lo;
  set.box.hi[0] = hi;
  set.provenance = "renewal(" + law.describe() + ",shift=" + std::to_string(shift) + ")";
  set.seed = seed;
  std::vector<Site> labels;

  std::vector<std::pair<std::int64_t, double>> pts;
  double x = 0.0;
  for (std::int64_t m = 0; x < hi; ++m) {
    if (x >= lo) pts.emplace_back(m, x);
    x += tau(m + shift);
  }
  x = 0.0;
  for (std::int64_t m = 0; x >= lo;) {
    --m;
    x -= tau(m + shift);
    if (x >= lo && x < hi) pts.emplace_back(m, x);
  }
  std::sort(pts.begin(), pts.end());
  for (const auto& [m, pos] : pts) {
    set.points.push_back(Point{pos, 0.0, 0.0});
    labels.push_back(Site{m, 0, 0});
  }
  set.labels = std::move(labels);
  return set;
}

// ----------------------------------------------------------- lattice images

std::string ImageGenerator::describe(int d) const {
  if (kind == ImageKind::perturbed_identity) return "perturbed_identity(" + fmt(amplitude) + ")";
  std::string s = "affine(A=[";
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) s += fmt(A[i][j]) + (j + 1 < d ? "," : "");
    s += i + 1 < d ? ";" : "";
  }
  return s + "])";
}

namespace {

std::uint64_t site_key(std::uint64_t seed, int component, const Site& z) {
  return derive_seed(seed, {static_cast<std::uint64_t>(component), zigzag(z[0]), zigzag(z[1]), zigzag(z[2])});
}

// Displacement of the perturbed identity at z; each coordinate is uniform
// in [-amp/sqrt(d), amp/sqrt(d)], so |u| <= amp.
Point displacement(std::uint64_t seed, int d, double amplitude, const Site& z) {
  Point u{};
  const double h = amplitude / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i) u[i] = h * (2.0 * hash_uniform(site_key(seed, i, z), 0) - 1.0);
  return u;
}

void check_injective(const std::vector<Point>& pts) {
  std::vector<Point> sorted = pts;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::runtime_error("label collision: Phi is not injective on the window");
  }
}

}  // namespace

LatticeImage lattice_image_pointset(const ImageGenerator& gen, int d, const Site& lo, std::int64_t side,
                                    std::uint64_t seed, const Site& shift) {
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension must be 1, 2 or 3");
  if (side < 1) throw std::invalid_argument("window side must be >= 1");
  if (gen.kind == ImageKind::perturbed_identity && !(gen.amplitude >= 0.0 && gen.amplitude < 0.5)) {
    throw std::invalid_argument("perturbation amplitude must lie in [0, 1/2)");
  }

  LatticeImage img;
  auto& f = img.field;
  f.d = d;
  f.lo = lo;
  f.side = side;
  std::size_t n = 1;
  for (int a = 0; a < d; ++a) n *= static_cast<std::size_t>(side);
  f.phi.resize(n);

  // b on a 2^-30 grid keeps A z + b exact for dyadic A.
  Point b{};
  if (gen.kind == ImageKind::affine) {
    for (int i = 0; i < d; ++i) b[i] = std::ldexp(std::floor(std::ldexp(hash_uniform(splitmix64(seed), i), 30)), -30);
  }
  for (std::size_t idx = 0; idx < n; ++idx) {
    const Site z = f.site(idx);
    Point p{};
    if (gen.kind == ImageKind::affine) {
      for (int i = 0; i < d; ++i) {
        double s = b[i];
        for (int j = 0; j < d; ++j) s += gen.A[i][j] * static_cast<double>(z[j]);
        p[i] = s;
      }
    } else {
      Site zs{};
      for (int a = 0; a < d; ++a) zs[a] = z[a] + shift[a];
      const Point u = displacement(seed, d, gen.amplitude, zs);
      for (int i = 0; i < d; ++i) p[i] = static_cast<double>(z[i]) + u[i];
    }
    f.phi[idx] = p;
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  f.increments.assign(n * static_cast<std::size_t>(d), Point{nan, nan, nan});
  for (std::size_t idx = 0; idx < n; ++idx) {
    const Site z = f.site(idx);
    for (int l = 0; l < d; ++l) {
      Site zn = z;
      ++zn[l];
      if (!f.inside(zn)) continue;
      Point inc{};
      const Point& a = f.phi[f.index(zn)];
      for (int i = 0; i < d; ++i) inc[i] = a[i] - f.phi[idx][i];
      f.increments[idx * static_cast<std::size_t>(d) + static_cast<std::size_t>(l)] = inc;
    }
  }

  check_injective(f.phi);

  auto& set = img.points;
  set.d = d;
  set.seed = seed;
  set.provenance = gen.describe(d);
  set.points = f.phi;
  std::vector<Site> labels(n);
  for (std::size_t idx = 0; idx < n; ++idx) labels[idx] = f.site(idx);
  set.labels = std::move(labels);
  set.box.d = d;
  if (gen.kind == ImageKind::perturbed_identity) {
    for (int a = 0; a < d; ++a) {
      set.box.lo[a] = static_cast<double>(lo[a]) - 0.5;
      set.box.hi[a] = static_cast<double>(lo[a] + side) - 0.5;
    }
  } else {
    for (int a = 0; a < d; ++a) {
      double mn = HUGE_VAL, mx = -HUGE_VAL;
      for (const auto& p : set.points) {
        mn = std::min(mn, p[a]);
        mx = std::max(mx, p[a]);
      }
      set.box.lo[a] = mn;
      set.box.hi[a] = mx + 1e-9 * (1.0 + std::abs(mx));
    }
  }
  return img;
}

// ----------------------------------------------------------------- energies

double Potential::operator()(double r) const {
  if (r > cutoff) return 0.0;
  return kind == PotentialKind::indicator ? 1.0 : 1.0 - r / cutoff;
}

std::string Potential::describe() const {
  return std::string(kind == PotentialKind::indicator ? "indicator" : "hat") + "(" + fmt(cutoff) + ")";
}

Potential parse_potential(const std::string& name, double cutoff) {
  Potential V;
  if (name == "indicator") {
    V.kind = PotentialKind::indicator;
  } else if (name == "hat") {
    V.kind = PotentialKind::hat;
  } else {
    throw std::invalid_argument("unknown potential '" + name + "'");
  }
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw std::invalid_argument("potential cutoff must be > 0");
  V.cutoff = cutoff;
  return V;
}

double energy(const PointSetWindow& set, const Potential& V, const Box& D, PairConvention convention) {
  check_energy_domain(set, V, D, convention);
  const CellList cells(set, V.cutoff);
  const double r2max = V.cutoff * V.cutoff;
  std::vector<double> terms;
  for (std::size_t p = 0; p < set.points.size(); ++p) {
    const Point& x = set.points[p];
    if (!D.contains(x)) continue;
    cells.for_neighbours(x, [&](std::size_t q) {
      if (q == p) return;
      const Point& y = set.points[q];
      if (convention == PairConvention::both_in_d && !D.contains(y)) return;
      const double r2 = dist2(x, y, set.d);
      if (r2 <= r2max) terms.push_back(V(std::sqrt(r2)));
    });
  }
  return 0.5 * order_free_sum(std::move(terms));
}

double energy_brute_force(const PointSetWindow& set, const Potential& V, const Box& D, PairConvention convention) {
  check_energy_domain(set, V, D, convention);
  const double r2max = V.cutoff * V.cutoff;
  std::vector<double> terms;
  for (std::size_t p = 0; p < set.points.size(); ++p) {
    if (!D.contains(set.points[p])) continue;
    for (std::size_t q = 0; q < set.points.size(); ++q) {
      if (q == p) continue;
      if (convention == PairConvention::both_in_d && !D.contains(set.points[q])) continue;
      const double r2 = dist2(set.points[p], set.points[q], set.d);
      if (r2 <= r2max) terms.push_back(V(std::sqrt(r2)));
    }
  }
  return 0.5 * order_free_sum(std::move(terms));
}

double min_pair_distance(const PointSetWindow& set) {
  if (set.points.size() < 2) return HUGE_VAL;
  // Grow the cell size until some neighbour is found within it.
  double cell = 1.0;
  for (int a = 0; a < set.d; ++a) cell = std::max(cell, 1e-3 * (set.box.hi[a] - set.box.lo[a]));
  for (int attempt = 0; attempt < 64; ++attempt, cell *= 2.0) {
    const CellList cells(set, cell);
    double best = HUGE_VAL;
    for (std::size_t p = 0; p < set.points.size(); ++p) {
      cells.for_neighbours(set.points[p], [&](std::size_t q) {
        if (q != p) best = std::min(best, dist2(set.points[p], set.points[q], set.d));
      });
    }
    if (best <= cell * cell) return std::sqrt(best);
  }
  return HUGE_VAL;
}

// --------------------------------------------------- thermodynamic density

std::string PointGenerator::describe() const {
  switch (kind) {
    case PointGeneratorKind::integer_lattice: return "integer_lattice(d=" + std::to_string(d) + ")";
    case PointGeneratorKind::renewal: return "renewal(" + tau.describe() + ")";
    case PointGeneratorKind::perturbed_lattice:
      return "perturbed_lattice(d=" + std::to_string(d) + ",amplitude=" + fmt(amplitude) + ")";
  }
  return "?";
}

PointSetWindow PointGenerator::sample(const Box& window, std::uint64_t seed, std::int64_t shift) const {
  if (kind == PointGeneratorKind::renewal) {
    if (d != 1) throw std::invalid_argument("renewal point sets are one-dimensional");
    return renewal_pointset_1d(tau, window.lo[0], window.hi[0], seed, shift);
  }
  const double amp = kind == PointGeneratorKind::perturbed_lattice ? amplitude : 0.0;
  if (!(amp >= 0.0 && amp < 0.5)) throw std::invalid_argument("perturbation amplitude must lie in [0, 1/2)");
  PointSetWindow set;
  set.d = d;
  set.box = window;
  set.seed = seed;
  set.provenance = describe();
  Site lo{}, hi{};
  for (int a = 0; a < d; ++a) {
    lo[a] = static_cast<std::int64_t>(std::floor(window.lo[a])) - 1;
    hi[a] = static_cast<std::int64_t>(std::ceil(window.hi[a])) + 1;
  }
  Site z = lo;
  while (true) {
    Point p{};
    Site zs = z;
    zs[0] += shift;
    const Point u = amp > 0.0 ? displacement(seed, d, amp, zs) : Point{};
    for (int i = 0; i < d; ++i) p[i] = static_cast<double>(z[i]) + u[i];
    if (window.contains(p)) set.points.push_back(p);
    int a = d - 1;
    while (a >= 0 && z[a] == hi[a]) {
      z[a] = lo[a];
      --a;
    }
    if (a < 0) break;
    ++z[a];
  }
  return set;
}

DensityStudy thermodynamic_density(const PointGenerator& gen, const Potential& V, const std::vector<double>& sizes,
                                   std::size_t seeds, std::uint64_t master_seed, std::int64_t shift, int threads) {
  if (sizes.size() < 3) throw std::invalid_argument("thermodynamic_density needs at least 3 box sizes");
  if (seeds < 8) throw std::invalid_argument("thermodynamic_density needs at least 8 seeds");
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    if (!(sizes[j] > 0.0) || (j > 0 && !(sizes[j] > sizes[j - 1]))) {
      throw std::invalid_argument("box sizes must be positive and strictly increasing");
    }
  }

  DensityStudy study;
  study.shift = shift;
  study.invariance_checked = gen.supports_shift();
  study.rows.resize(sizes.size());
  for (auto& row : study.rows) {
    row.densities.assign(seeds, 0.0);
    row.shifted_densities.assign(seeds, 0.0);
  }

  const double margin = V.cutoff + 1.0;
  parallel_for(seeds, threads, [&](std::size_t s) {
    const std::uint64_t seed = derive_seed(master_seed, {s});
    const Box window = Box::cube(gen.d, -margin, sizes.back() + margin);
    const PointSetWindow base = gen.sample(window, seed, 0);
    std::optional<PointSetWindow> moved;
    if (study.invariance_checked) moved = gen.sample(window, seed, shift);
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      const Box D = Box::cube(gen.d, 0.0, sizes[j]);
      study.rows[j].densities[s] = energy(base, V, D) / D.volume();
      if (moved) study.rows[j].shifted_densities[s] = energy(*moved, V, D) / D.volume();
    }
  });

  auto spread_of = [](const std::vector<double>& v) {
    const MeanStderr ms = mean_stderr(v);
    return std::pair{ms.mean, ms.stderr_ * std::sqrt(static_cast<double>(ms.n))};
  };
  study.invariance_holds = study.invariance_checked;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    auto& row = study.rows[j];
    row.N = sizes[j];
    std::tie(row.mean, row.spread) = spread_of(row.densities);
    if (study.invariance_checked) {
      std::tie(row.shifted_mean, row.shifted_spread) = spread_of(row.shifted_densities);
      row.shift_agrees = std::abs(row.mean - row.shifted_mean) <= 2.0 * row.spread;
      study.invariance_holds = study.invariance_holds && row.shift_agrees;
    }
  }
  study.spread_decreasing = true;
  for (std::size_t j = 1; j < sizes.size(); ++j) {
    study.spread_decreasing = study.spread_decreasing && study.rows[j].spread < study.rows[j - 1].spread;
  }
  return study;
}

// ------------------------------------------------------------ reconstruction

namespace {

template <class Step>
Point staircase(int d, const Site& k, const std::array<int, kMaxDim>& order, Step&& step) {
  Site pos{};
  Point acc{};
  for (int o = 0; o < d; ++o) {
    const int l = order[o];
    const std::int64_t n = k[l] < 0 ? -k[l] : k[l];
    for (std::int64_t s = 0; s < n; ++s) {
      if (k[l] > 0) {
        step(pos, l, acc, +1.0);
        ++pos[l];
      } else {
        --pos[l];
        step(pos, l, acc, -1.0);
      }
    }
  }
  return acc;
}

double max_diff(const Point& a, const Point& b, int d) {
  double m = 0.0;
  for (int i = 0; i < d; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

YkResult reconstruct_Yk(const std::vector<IncrementSample>& zeta, const Matrix& T, const Site& k) {
  if (zeta.empty()) throw std::invalid_argument("reconstruct_Yk needs one increment sample per coordinate");
  const TorusGeometry g = zeta.front().geometry;
  const int d = g.dim();
  if (static_cast<int>(zeta.size()) != d) throw std::invalid_argument("need exactly d increment samples");
  for (int i = 0; i < d; ++i) {
    if (!(zeta[i].geometry == g) || zeta[i].axis != i) {
      throw std::invalid_argument("increment samples must share a torus and be ordered by coordinate");
    }
    if (max_curl(zeta[i].values) > 1e-10 * (1.0 + zeta[i].values.max_abs())) {
      throw std::domain_error("increments do not define a point-set translation (discrete curl is nonzero)");
    }
  }

  auto step = [&](const Site& pos, int l, Point& acc, double sign) {
    const std::size_t x = g.index(pos);
    for (int i = 0; i < d; ++i) acc[i] += sign * zeta[i].values.at(x, l);
  };
  std::array<int, kMaxDim> fwd{0, 1, 2}, rev{};
  for (int o = 0; o < d; ++o) rev[o] = d - 1 - o;

  YkResult r;
  r.value = staircase(d, k, fwd, step);
  r.alternate = staircase(d, k, rev, step);
  for (int i = 0; i < d; ++i) {
    double tk = 0.0;
    for (int l = 0; l < d; ++l) tk += T[i][l] * static_cast<double>(k[l]);
    r.value[i] += tk;
    r.alternate[i] += tk;
  }
  r.path_deviation = max_diff(r.value, r.alternate, d);
  double scale = 1.0;
  for (int i = 0; i < d; ++i) scale = std::max(scale, std::abs(r.value[i]));
  if (r.path_deviation > 1e-10 * scale) {
    throw std::domain_error("increments do not define a point-set translation (path dependence)");
  }
  return r;
}

YkResult reconstruct_Yk(const LatticeFieldWindow& field, const Site& base, const Site& k) {
  const int d = field.d;
  Site target{};
  for (int a = 0; a < d; ++a) target[a] = base[a] + k[a];
  if (!field.inside(base) || !field.inside(target)) throw std::invalid_argument("staircase leaves the window");

  auto step = [&](const Site& pos, int l, Point& acc, double sign) {
    Site z{};
    for (int a = 0; a < d; ++a) z[a] = base[a] + pos[a];
    const Point& inc = field.increment(z, l);
    for (int i = 0; i < d; ++i) acc[i] += sign * inc[i];
  };
  std::array<int, kMaxDim> fwd{0, 1, 2}, rev{};
  for (int o = 0; o < d; ++o) rev[o] = d - 1 - o;
  YkResult r;
  r.value = staircase(d, k, fwd, step);
  r.alternate = staircase(d, k, rev, step);
  r.path_deviation = max_diff(r.value, r.alternate, d);
  return r;
}

// ----------------------------------------------------------------- detector

LinearityResult linearity_detector(const LatticeFieldWindow& field, double tol) {
  const int d = field.d;
  if (field.side < 3) throw std::invalid_argument("linearity detector needs a window side >= 3");

  // Test lags: {-1, 0, 1}^d without 0, plus 2 e_l.
  std::vector<Site> lags;
  const int count = static_cast<int>(std::pow(3, d));
  for (int c = 0; c < count; ++c) {
    Site k{};
    int r = c;
    bool zero = true;
    for (int a = 0; a < d; ++a) {
      k[a] = r % 3 - 1;
      r /= 3;
      zero = zero && k[a] == 0;
    }
    if (!zero) lags.push_back(k);
  }
  for (int l = 0; l < d; ++l) {
    Site k{};
    k[l] = 2;
    lags.push_back(k);
  }

  LinearityResult res;
  for (const Site& k : lags) {
    Point mn{HUGE_VAL, HUGE_VAL, HUGE_VAL}, mx{-HUGE_VAL, -HUGE_VAL, -HUGE_VAL};
    for (std::size_t idx = 0; idx < field.sites(); ++idx) {
      const Site y = field.site(idx);
      Site yk{};
      for (int a = 0; a < d; ++a) yk[a] = y[a] + k[a];
      if (!field.inside(yk)) continue;
      const Point& p = field.at(yk);
      for (int i = 0; i < d; ++i) {
        const double v = p[i] - field.phi[idx][i];
        mn[i] = std::min(mn[i], v);
        mx[i] = std::max(mx[i], v);
      }
    }
    for (int i = 0; i < d; ++i) {
      if (mx[i] >= mn[i]) res.max_dependence = std::max(res.max_dependence, mx[i] - mn[i]);
    }
  }

  for (int l = 0; l < d; ++l) {
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(d));
    for (std::size_t idx = 0; idx < field.sites(); ++idx) {
      const Point& inc = field.increments[idx * static_cast<std::size_t>(d) + static_cast<std::size_t>(l)];
      if (std::isnan(inc[0])) continue;
      for (int i = 0; i < d; ++i) cols[i].push_back(inc[i]);
    }
    for (int i = 0; i < d; ++i) {
      const double n = static_cast<double>(cols[i].size());
      res.A[i][l] = order_free_sum(std::move(cols[i])) / n;
    }
  }
  res.affine = res.max_dependence <= tol;
  return res;
}

void write_points_csv(std::ostream& os, const PointSetWindow& set) {
  os << "index";
  for (int a = 0; a < set.d; ++a) os << ",x" << a;
  if (set.labels) {
    for (int a = 0; a < set.d; ++a) os << ",label" << a;
  }
  os << '\n';
  char buf[64];
  for (std::size_t p = 0; p < set.points.size(); ++p) {
    os << p;
    for (int a = 0; a < set.d; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", set.points[p][a]);
      os << ',' << buf;
    }
    if (set.labels) {
      for (int a = 0; a < set.d; ++a) os << ',' << (*set.labels)[p][a];
    }
    os << '\n';
  }
}

}  // namespace incstat
