#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "pmlbie/cheb.hpp"

using namespace pmlbie;
using namespace pmlbie::cheb;

namespace {

double integrate(const ChebGrid& g, double (*f)(double)) {
  double s = 0.0;
  for (int j = 0; j < g.n; ++j) s += g.weights[j] * f(g.nodes[j]);
  return s;
}

}  // namespace

TEST_CASE("fejer small rules") {
  const ChebGrid g1 = fejer_rule(1);
  CHECK(std::abs(g1.nodes[0]) <= 1e-16);
  CHECK(g1.weights[0] == doctest::Approx(2.0).epsilon(1e-15));
  const ChebGrid g2 = fejer_rule(2);
  CHECK(g2.nodes[0] == doctest::Approx(std::cos(kPi / 4)).epsilon(1e-15));
  CHECK(g2.nodes[1] == doctest::Approx(-std::cos(kPi / 4)).epsilon(1e-15));
  CHECK(g2.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(g2.weights[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(integrate(fejer_rule(5), [](double x) { return x * x * x * x; }) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK_THROWS_AS(fejer_rule(0), ConfigError);
}

TEST_CASE("fejer rule is exact for degree N-1") {
  for (int n : {3, 8, 16, 33, 64}) {
    const ChebGrid g = fejer_rule(n);
    for (int d = 0; d < n; ++d) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += g.weights[j] * std::pow(g.nodes[j], d);
      const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
      CHECK(std::abs(s - exact) <= 1e-14);
    }
  }
}

TEST_CASE("fejer nodes decrease, weights positive and sum to 2") {
  for (int n = 1; n <= 512; n += (n < 40 ? 1 : 37)) {
    const ChebGrid g = fejer_rule(n);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      REQUIRE(g.weights[j] > 0.0);
      REQUIRE(std::abs(g.nodes[j]) < 1.0);
      if (j > 0) REQUIRE(g.nodes[j] < g.nodes[j - 1]);
      if (n % 2 == 0) REQUIRE(g.nodes[j] != 0.0);
      sum += g.weights[j];
    }
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-13));
  }
}

TEST_CASE("cardinal functions") {
  const Interpolator in(8);
  const auto& u = in.grid().nodes;
  double worst = 0.0;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      for (int m = 0; m < 8; ++m)
        for (int n = 0; n < 8; ++n) {
          const double want = (i == m && j == n) ? 1.0 : 0.0;
          worst = std::max(worst, std::abs(interp_coeff(in, i, j, u[m], u[n]) - want));
        }
  CHECK(worst <= 1e-12);

  std::vector<double> a(8);
  for (double x : {-1.0, -0.3, 0.0, 0.77, 1.0}) {
    in.cardinal(x, a);
    CHECK(std::accumulate(a.begin(), a.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-13));
    for (int j = 0; j < 8; ++j) CHECK(a[j] == doctest::Approx(in.cardinal(j, x)).epsilon(1e-12));
  }
}

TEST_CASE("tensor interpolation of a smooth function") {
  const int n = 20;
  const Interpolator in(n);
  const auto& u = in.grid().nodes;
  auto f = [](double x, double y) { return std::cos(3 * x) * std::sin(2 * y); };
  std::vector<double> au(n), av(n);
  double worst = 0.0;
  for (double x : {-0.95, -0.4, 0.13, 0.66, 0.99})
    for (double y : {-0.8, -0.01, 0.5, 0.93}) {
      in.cardinal(x, au);
      in.cardinal(y, av);
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += au[i] * av[j] * f(u[i], u[j]);
      worst = std::max(worst, std::abs(s - f(x, y)));
    }
  CHECK(worst <= 1e-9);
}

TEST_CASE("differentiation matrix") {
  const Interpolator in(12);
  const auto& u = in.grid().nodes;
  Eigen::VectorXd c = Eigen::VectorXd::Constant(12, 3.0), p(12), dp(12);
  CHECK((in.derivative_matrix() * c).cwiseAbs().maxCoeff() <= 1e-12);
  for (int i = 0; i < 12; ++i) {
    p[i] = std::pow(u[i], 11) - 2 * u[i];
    dp[i] = 11 * std::pow(u[i], 10) - 2;
  }
  CHECK((in.derivative_matrix() * p - dp).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("graded maps") {
  CHECK(chi(6, 0.5) == doctest::Approx(0.910847).epsilon(1e-6));
  CHECK(chi(6, 0.0) == 0.0);
  CHECK(chi(6, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(chi(6, -1.0) == doctest::Approx(-1.0).epsilon(1e-15));
  for (double alpha : {-0.7, 0.0, 0.3, 0.95}) {
    const GradedMap m{alpha, 6};
    CHECK(m(1.0).value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m(-1.0).value == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(m(0.0).value == doctest::Approx(alpha).epsilon(1e-15));
    CHECK(std::abs(m(1e-3).derivative) <= 1e-12);
    double prev = -1.0;
    for (int i = 1; i <= 400; ++i) {
      const double t = -1.0 + 2.0 * i / 400.0;
      const MapValue v = m(t);
      CHECK(v.value >= prev - 1e-15);
      CHECK(v.lower_gap == doctest::Approx(v.value + 1.0).epsilon(1e-13));
      CHECK(v.upper_gap == doctest::Approx(1.0 - v.value).epsilon(1e-13));
      prev = v.value;
    }
  }
}

TEST_CASE("graded map derivatives agree with finite differences") {
  const double h = 1e-6;
  for (double alpha : {-1.0, -0.2, 0.5, 1.0}) {
    const GradedMap m{alpha, 6};
    for (double t : {-0.83, -0.31, 0.27, 0.71}) {
      const double fd = (m(t + h).value - m(t - h).value) / (2 * h);
      CHECK(m(t).derivative == doctest::Approx(fd).epsilon(1e-7));
    }
  }
  for (double s : {-0.6, 0.1, 0.45})
    CHECK(chi_derivative(6, s) == doctest::Approx((chi(6, s + h) - chi(6, s - h)) / (2 * h)).epsilon(1e-7));
}

TEST_CASE("end grading flattens flagged ends") {
  const EndGrading both{true, true, 6};
  const EndGrading up{false, true, 6};
  CHECK(both(1.0 - 1e-3).derivative <= 1e-10);
  CHECK(both(-1.0 + 1e-3).derivative <= 1e-10);
  CHECK(up(1.0 - 1e-3).derivative <= 1e-10);
  CHECK(up(-1.0 + 1e-3).derivative > 0.1);
  const EndGrading none{};
  CHECK(none(0.3).value == 0.3);
  CHECK(none(0.3).derivative == 1.0);
}

TEST_CASE("graded increments keep their relative accuracy") {
  const EndGrading up{false, true, 6};
  // near the graded end the increment is tiny; compare against direct
  // integration of the derivative
  const double u0 = 1.0 - 2e-3, u1 = 1.0 - 1e-3;
  const auto [g0, dg] = up.increment(u0, u1);
  const ChebGrid gl = gauss_legendre(30);
  double ref = 0.0;
  for (int i = 0; i < gl.n; ++i)
    ref += gl.weights[i] * up(0.5 * (u0 + u1) + 0.5 * (u1 - u0) * gl.nodes[i]).derivative;
  ref *= 0.5 * (u1 - u0);
  CHECK(g0 == up(u0).value);
  CHECK(dg == doctest::Approx(ref).epsilon(1e-12));
  CHECK(dg > 0.0);
  const auto far = up.increment(-0.5, 0.5);
  CHECK(far.second == doctest::Approx(up(0.5).value - up(-0.5).value).epsilon(1e-14));
}

TEST_CASE("gauss legendre") {
  const ChebGrid g = gauss_legendre(10);
  for (int d = 0; d < 20; ++d) {
    double s = 0.0;
    for (int j = 0; j < g.n; ++j) s += g.weights[j] * std::pow(g.nodes[j], d);
    CHECK(std::abs(s - (d % 2 ? 0.0 : 2.0 / (d + 1))) <= 1e-14);
  }
  CHECK_THROWS_AS(gauss_legendre(0), DomainError);
}

TEST_CASE("end log rule integrates log singularities") {
  const ChebGrid g = end_log_rule(1.0, 1e-12, 1.0, 16);
  double s = 0.0, one = 0.0;
  for (int j = 0; j < g.n; ++j) {
    s += g.weights[j] * std::log(1.0 - g.nodes[j]);
    one += g.weights[j];
  }
  CHECK(one == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(s == doctest::Approx(2.0 * std::log(2.0) - 2.0).epsilon(1e-11));
  const ChebGrid h = end_log_rule(-1.0, 1e-12, 1.0, 16);
  double t = 0.0;
  for (int j = 0; j < h.n; ++j) t += h.weights[j] * std::log(1.0 + h.nodes[j]);
  CHECK(t == doctest::Approx(2.0 * std::log(2.0) - 2.0).epsilon(1e-11));
}
