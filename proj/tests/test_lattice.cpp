// test_lattice.cpp

#include <doctest.h>

#include <sstream>

#include "incstat/field_io.hpp"
#include "incstat/lattice.hpp"
#include "incstat/spectral.hpp"
#include "oracles.hpp"

using namespace incstat;

namespace {

TorusField random_field(const TorusGeometry& g, int comps, std::uint64_t seed) {
  return TorusField(g, comps, oracle::random_values(g.sites() * comps, seed));
}

}  // namespace

TEST_CASE("geometry indexing round-trips") {
  const TorusGeometry g(3, 5);
  CHECK(g.sites() == 125);
  for (std::size_t i = 0; i < g.sites(); ++i) CHECK(g.index(g.coord(i)) == i);
  CHECK(g.step(g.index({0, 0, 4}), 2, +1) == g.index({0, 0, 0}));
  CHECK(g.step(g.index({0, 0, 0}), 0, -1) == g.index({4, 0, 0}));
  CHECK_THROWS_AS(TorusGeometry(4, 8), std::invalid_argument);
  CHECK_THROWS_AS(TorusGeometry(1, 1), std::invalid_argument);
}

TEST_CASE("shift") {
  SUBCASE("indicator moves backwards") {
    const TorusGeometry g(1, 4);
    TorusField f(g);
    f.at(0) = 1.0;
    const std::int64_t k[] = {1};
    const auto s = shift(f, k);
    CHECK(s.at(3) == 1.0);
    CHECK(s.at(0) == 0.0);
    CHECK(s.at(1) == 0.0);
    CHECK(s.at(2) == 0.0);
  }
  SUBCASE("zero shift is the identity") {
    const TorusGeometry g(2, 6);
    const auto f = random_field(g, 2, 3);
    const std::int64_t k[] = {0, 0};
    const auto s = shift(f, k);
    CHECK(std::equal(s.values().begin(), s.values().end(), f.values().begin()));
  }
  SUBCASE("group law") {
    const TorusGeometry g(2, 8);
    const auto f = random_field(g, 1, 5);
    const std::int64_t j[] = {3, -2};
    const std::int64_t k[] = {7, 5};
    const std::int64_t jk[] = {10, 3};
    const auto a = shift(shift(f, j), k);
    const auto b = shift(f, jk);
    CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  }
  SUBCASE("length mismatch") {
    const TorusGeometry g(2, 4);
    const std::int64_t k[] = {1};
    CHECK_THROWS_AS(shift(TorusField(g), k), std::invalid_argument);
  }
}

TEST_CASE("forward gradient") {
  const TorusGeometry g1(1, 4);
  TorusField c(g1, 1, {2.5, 2.5, 2.5, 2.5});
  CHECK(forward_gradient(c).max_abs() == 0.0);

  const auto du = forward_gradient(TorusField(g1, 1, {0, 1, 0, 0}));
  CHECK(du.at(0) == 1.0);
  CHECK(du.at(1) == -1.0);
  CHECK(du.at(2) == 0.0);
  CHECK(du.at(3) == 0.0);

  const TorusGeometry g(3, 5);
  const auto grad = forward_gradient(random_field(g, 1, 11));
  REQUIRE(grad.components() == 3);
  for (int a = 0; a < 3; ++a) CHECK(std::abs(site_mean(grad.component(a))) <= 1e-14);
  CHECK_THROWS_AS(forward_gradient(TorusField(g, 2)), std::invalid_argument);
}

TEST_CASE("backward divergence") {
  const TorusGeometry g(2, 6);
  TorusField c(g, 2);
  for (std::size_t i = 0; i < g.sites(); ++i) {
    c.at(i, 0) = 1.5;
    c.at(i, 1) = -0.25;
  }
  CHECK(backward_divergence(c).max_abs() == 0.0);

  const auto u = random_field(g, 1, 21);
  const auto z = random_field(g, 2, 22);
  const double lhs = inner(forward_gradient(u), z);
  const double rhs = inner(u, backward_divergence(z));
  CHECK(std::abs(lhs - rhs) <= 1e-12);

  // Transpose oracle: div = sum_l D_l^T z_l.
  Eigen::VectorXd dense = Eigen::VectorXd::Zero(g.sites());
  for (int a = 0; a < 2; ++a) dense += oracle::difference(2, 6, a).transpose() * oracle::to_vec(z.component(a));
  const auto div = backward_divergence(z);
  CHECK((oracle::to_vec(div.values()) - dense).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::abs(site_mean(div.values())) <= 1e-14);
}

TEST_CASE("laplacian") {
  const TorusGeometry g1(1, 4);
  CHECK(laplacian(TorusField(g1, 1, {3, 3, 3, 3})).max_abs() == 0.0);
  const auto lap = laplacian(TorusField(g1, 1, {1, 0, 0, 0}));
  CHECK(-lap.at(0) == 2.0);
  CHECK(-lap.at(1) == -1.0);
  CHECK(-lap.at(2) == 0.0);
  CHECK(-lap.at(3) == -1.0);

  for (int d = 1; d <= 3; ++d) {
    const TorusGeometry g(d, 5);
    const auto u = random_field(g, 1, 30 + d);
    const auto a = laplacian(u);
    const auto b = backward_divergence(forward_gradient(u));
    double dev = 0.0;
    for (std::size_t i = 0; i < g.sites(); ++i) dev = std::max(dev, std::abs(a.at(i) + b.at(i)));
    CHECK(dev <= 1e-12);
  }
}

TEST_CASE("helmholtz solve") {
  const TorusGeometry g1(1, 4);
  CHECK(solve_helmholtz(0.7, TorusField(g1)).max_abs() == 0.0);

  const auto u = solve_helmholtz(1.0, TorusField(g1, 1, {1, 0, 0, 0}));
  const double expect[] = {7.0 / 15, 1.0 / 5, 2.0 / 15, 1.0 / 5};
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 4) + oracle::minus_laplacian(1, 4);
  const Eigen::VectorXd dense = A.partialPivLu().solve(Eigen::VectorXd::Unit(4, 0));
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(u.at(i) - expect[i]) <= 1e-14);
    CHECK(std::abs(dense[i] - expect[i]) <= 1e-14);
  }

  SUBCASE("dense oracle on small tori, all dimensions") {
    const std::pair<int, std::int64_t> cases[] = {{1, 7}, {2, 6}, {2, 5}, {3, 4}, {3, 5}};
    for (auto [d, L] : cases) {
      const TorusGeometry g(d, L);
      const auto f = random_field(g, 1, 40 + d * 10 + L);
      const double mu = 0.37;
      const auto sol = solve_helmholtz(mu, f);
      Eigen::MatrixXd M = mu * Eigen::MatrixXd::Identity(g.sites(), g.sites()) + oracle::minus_laplacian(d, L);
      const Eigen::VectorXd ref = M.partialPivLu().solve(oracle::to_vec(f.values()));
      CHECK((oracle::to_vec(sol.values()) - ref).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(helmholtz_residual(mu, sol, f) <= 1e-12);
    }
  }

  SUBCASE("site sum identity") {
    const TorusGeometry g(2, 16);
    const auto f = random_field(g, 1, 77);
    const double mu = 0.05;
    const auto sol = solve_helmholtz(mu, f);
    double su = 0.0, sf = 0.0;
    for (std::size_t i = 0; i < g.sites(); ++i) {
      su += sol.at(i);
      sf += f.at(i);
    }
    CHECK(std::abs(mu * su - sf) <= 1e-10);
  }

  CHECK_THROWS_AS(solve_helmholtz(0.0, TorusField(g1)), std::invalid_argument);
  CHECK_THROWS_AS(solve_helmholtz(-1.0, TorusField(g1)), std::invalid_argument);
}

TEST_CASE("fourier transform round trip and symbols") {
  const TorusGeometry g(2, 6);
  const auto ft = FourierTransform::get(g);
  CHECK(ft == FourierTransform::get(g));
  const auto f = oracle::random_values(g.sites(), 9);
  const auto back = ft->inverse(ft->forward(f));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(back[i] - f[i]) <= 1e-14);
  double wsum = 0.0;
  for (double w : ft->weight()) wsum += w;
  CHECK(wsum == doctest::Approx(static_cast<double>(g.sites())));
  CHECK(ft->laplace_symbol()[0] == 0.0);
}

TEST_CASE("field io round trips") {
  const TorusGeometry g(2, 5);
  const auto f = random_field(g, 2, 101);
  std::stringstream csv;
  write_field_csv(csv, f);
  const auto a = read_field_csv(csv, g, 2);
  CHECK(std::equal(a.values().begin(), a.values().end(), f.values().begin()));

  std::stringstream bin;
  write_field_binary(bin, f);
  const auto b = read_field_binary(bin);
  CHECK(b.geometry() == g);
  CHECK(std::equal(b.values().begin(), b.values().end(), f.values().begin()));

  std::stringstream bad("garbage");
  CHECK_THROWS(read_field_binary(bad));
}
