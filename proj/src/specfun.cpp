#include "pmlbie/specfun.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace pmlbie::specfun {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

struct LaguerreRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Golub-Welsch for the weight u^alpha e^{-u} on (0, inf).
LaguerreRule make_laguerre(int n, double alpha) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    jac(i, i) = 2.0 * i + alpha + 1.0;
    if (i + 1 < n) {
      const double b = std::sqrt((i + 1.0) * (i + 1.0 + alpha));
      jac(i, i + 1) = b;
      jac(i + 1, i) = b;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  LaguerreRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  const double mu0 = std::tgamma(alpha + 1.0);
  for (int i = 0; i < n; ++i) {
    rule.x[i] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    rule.w[i] = mu0 * v0 * v0;
  }
  return rule;
}

struct RulePair {
  LaguerreRule order0;  // alpha = -1/2
  LaguerreRule order1;  // alpha = +1/2
};

const RulePair& rules(int n) {
  static const RulePair r20{make_laguerre(20, -0.5), make_laguerre(20, 0.5)};
  static const RulePair r40{make_laguerre(40, -0.5), make_laguerre(40, 0.5)};
  static const RulePair r64{make_laguerre(64, -0.5), make_laguerre(64, 0.5)};
  if (n <= 20) return r20;
  if (n <= 40) return r40;
  return r64;
}

int nodes_for(double r) { return r < 5.0 ? 40 : 20; }

}  // namespace

cd branch_sqrt(cd z) {
  // std::sqrt returns Re >= 0 with the cut on the negative axis, but picks
  // -i*sqrt|z| for a negative real with a -0.0 imaginary part.
  if (z.imag() == 0.0 && z.real() < 0.0) return {0.0, std::sqrt(-z.real())};
  return std::sqrt(z);
}

namespace detail {

std::pair<cd, cd> hankel01_series(cd z) {
  const cd q = 0.25 * z * z;
  const cd mq = -q;
  // J0, J1 and the log-free parts of Y0, Y1.
  cd j0 = 1.0, j1 = 1.0, y0s = 0.0, y1s = 0.0;
  cd t0 = 1.0;  // (-q)^k / (k!)^2
  cd t1 = 1.0;  // (-q)^k / (k! (k+1)!)
  double harm = 0.0;  // H_k
  // psi(k+1) + psi(k+2) = -2 gamma + H_k + H_{k+1}
  y1s = (-2.0 * kEulerGamma + 1.0) * t1;
  for (int k = 1; k < 200; ++k) {
    t0 *= mq / (double(k) * k);
    t1 *= mq / (double(k) * (k + 1));
    const double harm_next = harm + 1.0 / k;
    j0 += t0;
    j1 += t1;
    y0s += harm_next * t0;
    y1s += (-2.0 * kEulerGamma + harm_next + harm_next + 1.0 / (k + 1)) * t1;
    harm = harm_next;
    if (std::abs(t0) < 1e-18 * std::abs(j0) && std::abs(t1) < 1e-18 * std::abs(j1)) break;
  }
  const cd half = 0.5 * z;
  j1 *= half;
  const cd lg = std::log(half);
  const cd y0 = (2.0 / kPi) * ((lg + kEulerGamma) * j0 - y0s);
  const cd y1 = -2.0 / (kPi * z) + (2.0 / kPi) * lg * j1 - (half / kPi) * y1s;
  return {j0 + kI * y0, j1 + kI * y1};
}

std::pair<cd, cd> hankel01_integral_scaled(cd z, int nodes) {
  const RulePair& rp = rules(nodes);
  const cd c = kI / (2.0 * z);
  cd s0 = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i < rp.order0.x.size(); ++i) {
    s0 += rp.order0.w[i] / std::sqrt(1.0 + c * rp.order0.x[i]);
    s1 += rp.order1.w[i] * std::sqrt(1.0 + c * rp.order1.x[i]);
  }
  // sqrt(2/(pi z)) e^{-i pi/4} / Gamma(1/2) and e^{-i 3pi/4} / Gamma(3/2)
  const cd pre = std::sqrt(2.0 / (kPi * z));
  const cd e0 = std::polar(1.0, -0.25 * kPi);
  const cd e1 = std::polar(1.0, -0.75 * kPi);
  const double sqrt_pi = std::sqrt(kPi);
  return {pre * e0 * s0 / sqrt_pi, pre * e1 * s1 / (0.5 * sqrt_pi)};
}

}  // namespace detail

std::pair<cd, cd> hankel1_01(cd z) {
  const double r = std::abs(z);
  if (r == 0.0) throw DomainError("hankel1: singular at z = 0");
  if (r < detail::kSeriesRadius) return detail::hankel01_series(z);
  auto [h0, h1] = detail::hankel01_integral_scaled(z, nodes_for(r));
  const cd e = std::exp(kI * z);
  return {h0 * e, h1 * e};
}

cd hankel1(int order, cd z) {
  if (order != 0 && order != 1) throw std::invalid_argument("hankel1: order must be 0 or 1");
  auto h = hankel1_01(z);
  return order == 0 ? h.first : h.second;
}

cd hankel1_scaled(int order, cd z) {
  if (order != 0 && order != 1) throw std::invalid_argument("hankel1_scaled: order must be 0 or 1");
  const double r = std::abs(z);
  if (r == 0.0) throw DomainError("hankel1_scaled: singular at z = 0");
  std::pair<cd, cd> h;
  if (r < detail::kSeriesRadius) {
    h = detail::hankel01_series(z);
    const cd e = std::exp(-kI * z);
    h.first *= e;
    h.second *= e;
  } else {
    h = detail::hankel01_integral_scaled(z, nodes_for(r));
  }
  return order == 0 ? h.first : h.second;
}

}  // namespace pmlbie::specfun
