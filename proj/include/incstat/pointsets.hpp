// pointsets.hpp
//
// Increment-stationary point sets in finite windows: renewal sets on the
// line, lattice images Phi(Z^d), two-body energies with cell lists,
// thermodynamic densities, reconstruction of the translations Y_k from unit
// increments, and the affine-field detector.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "incstat/lattice.hpp"
#include "incstat/randfields.hpp"

namespace incstat {

using Point = std::array<double, kMaxDim>;
using Matrix = std::array<std::array<double, kMaxDim>, kMaxDim>;  // Matrix[row][col]

Matrix identity_matrix(int d);

// Half-open axis-aligned box [lo, hi).
struct Box {
  int d = 1;
  Point lo{};
  Point hi{};

  static Box cube(int d, double lo, double hi);
  bool contains(const Point& p) const;
  bool contains(const Box& inner) const;
  Box shrunk(double r) const;
  double volume() const;
};

struct PointSetWindow {
  int d = 1;
  Box box;
  std::vector<Point> points;
  // Lattice label of each point, when the set is an image Phi(Z^d) or a renewal set.
  std::optional<std::vector<Site>> labels;
  std::string provenance;
  std::uint64_t seed = 0;
};

// Phi on the lattice cube {lo, ..., lo + side - 1}^d.
struct LatticeFieldWindow {
  int d = 1;
  Site lo{};
  std::int64_t side = 0;
  std::vector<Point> phi;         // row-major over the cube
  std::vector<Point> increments;  // [site * d + l] = Phi(z + e_l) - Phi(z); NaN where z + e_l leaves the cube

  std::size_t sites() const { return phi.size(); }
  bool inside(const Site& z) const;
  std::size_t index(const Site& z) const;
  Site site(std::size_t idx) const;
  const Point& at(const Site& z) const { return phi[index(z)]; }
  const Point& increment(const Site& z, int l) const { return increments[index(z) * d + l]; }
};

// ---------------------------------------------------------------- renewal

enum class TauKind { constant, uniform, exponential };

// Interval law; all kinds must be strictly positive.
//   constant(a), uniform(a, b) on [a, b), exponential: a + Exp(rate b)
struct TauLaw {
  TauKind kind = TauKind::constant;
  double a = 1.0;
  double b = 0.0;

  void validate() const;
  double mean() const;
  double variance() const;
  // Quantile function; u in [0, 1).
  double quantile(double u) const;
  std::string describe() const;
};

TauLaw parse_tau_law(const std::string& name, double a, double b);

// Renewal set X_0 = 0, X_k = X_{k-1} + tau_{k-1}, X_{-k} = X_{-(k-1)} - tau_{-k},
// restricted to [lo, hi). tau_j is a pure function of (seed, j), so the
// realization theta_shift omega is X'_k = X_{k+shift} - X_shift.
PointSetWindow renewal_pointset_1d(const TauLaw& law, double lo, double hi, std::uint64_t seed,
                                   std::int64_t shift = 0);

// --------------------------------------------------------- lattice images

enum class ImageKind { affine, perturbed_identity };

struct ImageGenerator {
  ImageKind kind = ImageKind::perturbed_identity;
  Matrix A{};              // affine: Phi(z) = A z + b
  double amplitude = 0.0;  // perturbed identity: Phi(z) = z + u(z), |u(z)| <= amplitude

  std::string describe(int d) const;
};

struct LatticeImage {
  PointSetWindow points;
  LatticeFieldWindow field;
};

// Window is the cube {lo, ..., lo + side - 1}^d. For perturbed identity the
// displacement u(z) depends only on (seed, z), so a shift by k is the
// relabeling z -> z + k. b for the affine family is uniform in [0, 1)^d.
LatticeImage lattice_image_pointset(const ImageGenerator& gen, int d, const Site& lo, std::int64_t side,
                                    std::uint64_t seed, const Site& shift = Site{});

// ------------------------------------------------------------- energies

enum class PotentialKind { indicator, hat };

// indicator: V(x) = 1 for |x| <= cutoff; hat: V(x) = (1 - |x|/cutoff)_+.
struct Potential {
  PotentialKind kind = PotentialKind::indicator;
  double cutoff = 1.0;

  double operator()(double r) const;
  std::string describe() const;
};

Potential parse_potential(const std::string& name, double cutoff);

// Which pairs enter E(l, D).
//   centered_in_d: 1/2 sum over x in D, y in l, y != x  (needs a cutoff margin inside the window)
//   both_in_d:     1/2 sum over x, y in D, y != x
enum class PairConvention { centered_in_d, both_in_d };

// Pair sum with cell lists of size cutoff. Pair values are summed in an
// order-free way, so the result does not depend on the cell traversal.
double energy(const PointSetWindow& set, const Potential& V, const Box& D,
              PairConvention convention = PairConvention::centered_in_d);

// Same sum by a double loop over all points. O(n^2); oracle for small sets.
double energy_brute_force(const PointSetWindow& set, const Potential& V, const Box& D,
                          PairConvention convention = PairConvention::centered_in_d);

double min_pair_distance(const PointSetWindow& set);

// ------------------------------------------------- thermodynamic densities

enum class PointGeneratorKind { integer_lattice, renewal, perturbed_lattice };

struct PointGenerator {
  PointGeneratorKind kind = PointGeneratorKind::renewal;
  int d = 1;
  TauLaw tau{};            // renewal
  double amplitude = 0.0;  // perturbed_lattice

  bool supports_shift() const { return true; }
  std::string describe() const;
  // Realization theta_shift omega restricted to the box.
  PointSetWindow sample(const Box& window, std::uint64_t seed, std::int64_t shift) const;
};

struct DensityRow {
  double N = 0.0;
  double mean = 0.0;
  double spread = 0.0;  // cross-seed standard deviation of E(l, D)/|D|
  double shifted_mean = 0.0;
  double shifted_spread = 0.0;
  std::vector<double> densities;          // per seed
  std::vector<double> shifted_densities;  // per seed
  bool shift_agrees = false;              // |mean - shifted_mean| <= 2 spread
};

struct DensityStudy {
  std::vector<DensityRow> rows;
  bool spread_decreasing = false;  // strictly, between consecutive sizes
  bool invariance_checked = false;
  bool invariance_holds = false;
  std::int64_t shift = 0;
};

// D = [0, N)^d, window = D grown by cutoff + 1 on every side. Seeds for the
// s-th realization come from derive_seed(master_seed, {s}).
DensityStudy thermodynamic_density(const PointGenerator& gen, const Potential& V, const std::vector<double>& sizes,
                                   std::size_t seeds, std::uint64_t master_seed, std::int64_t shift,
                                   int threads = 1);

// ------------------------------------------------------- reconstruction

struct YkResult {
  Point value{};
  Point alternate{};           // reversed-axis staircase
  double path_deviation = 0.0;
};

// Y_k = sum_l k_l T e_l + centered increments telescoped along the staircase
// 0 -> k_1 e_1 -> k_1 e_1 + k_2 e_2 -> ... on the torus. zeta[i] is the
// sample for coordinate i; T[i][l] = E[Y_{e_l}] . e_i.
// Throws std::domain_error when the increments are not curl-free.
YkResult reconstruct_Yk(const std::vector<IncrementSample>& zeta, const Matrix& T, const Site& k);

// X_{base+k} - X_base by telescoping the recorded increments of a window.
YkResult reconstruct_Yk(const LatticeFieldWindow& field, const Site& base, const Site& k);

// ----------------------------------------------------------- detector

struct LinearityResult {
  bool affine = false;
  Matrix A{};               // window average of the increments, column l = E[d_l Phi]
  double max_dependence = 0.0;  // max over test lags k of the spread over y of X_{y+k} - X_y
};

LinearityResult linearity_detector(const LatticeFieldWindow& field, double tol);

void write_points_csv(std::ostream& os, const PointSetWindow& set);

}  // namespace incstat
