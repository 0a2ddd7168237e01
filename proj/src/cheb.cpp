#include "pmlbie/cheb.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace pmlbie::cheb {

ChebGrid fejer_rule(int n) {
  if (n < 1) throw ConfigError("fejer_rule: N must be >= 1");
  ChebGrid g;
  g.n = n;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int j = 0; j < n; ++j) {
    const double theta = (2.0 * j + 1.0) * kPi / (2.0 * n);
    g.nodes[j] = std::cos(theta);
    double s = 0.0;
    for (int l = 1; l <= n / 2; ++l) s += std::cos(2.0 * l * theta) / (4.0 * l * l - 1.0);
    g.weights[j] = 2.0 / n * (1.0 - 2.0 * s);
  }
  return g;
}

Interpolator::Interpolator(int n) : n_(n), grid_(fejer_rule(n)) {
  bary_.resize(n);
  for (int j = 0; j < n; ++j) bary_[j] = ((j % 2) ? -1.0 : 1.0) * std::sin((2.0 * j + 1.0) * kPi / (2.0 * n));
  coef_.resize(n, n);
  for (int j = 0; j < n; ++j) {
    const double theta = (2.0 * j + 1.0) * kPi / (2.0 * n);
    for (int m = 0; m < n; ++m) coef_(j, m) = (m == 0 ? 1.0 : 2.0) * std::cos(m * theta) / n;
  }
  diff_.resize(n, n);
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) {
    cardinal_derivative(grid_.nodes[i], d);
    for (int j = 0; j < n; ++j) diff_(i, j) = d[j];
  }
}

void Interpolator::cardinal(double u, std::span<double> out) const {
  // barycentric form for first-kind points
  double den = 0.0;
  for (int j = 0; j < n_; ++j) {
    const double d = u - grid_.nodes[j];
    if (d == 0.0) {
      for (int m = 0; m < n_; ++m) out[m] = m == j ? 1.0 : 0.0;
      return;
    }
    out[j] = bary_[j] / d;
    den += out[j];
  }
  for (int j = 0; j < n_; ++j) out[j] /= den;
}

double Interpolator::cardinal(int j, double u) const {
  double tm2 = 1.0, tm1 = u, acc = coef_(j, 0);
  if (n_ > 1) acc += coef_(j, 1) * u;
  for (int m = 2; m < n_; ++m) {
    const double tm = 2.0 * u * tm1 - tm2;
    acc += coef_(j, m) * tm;
    tm2 = tm1;
    tm1 = tm;
  }
  return acc;
}

void Interpolator::cardinal_derivative(double u, std::span<double> out) const {
  // T_m' = m U_{m-1}
  Eigen::VectorXd dt(n_);
  dt[0] = 0.0;
  double um2 = 0.0, um1 = 1.0;  // U_{-1}, U_0
  for (int m = 1; m < n_; ++m) {
    dt[m] = m * um1;
    const double um = 2.0 * u * um1 - um2;
    um2 = um1;
    um1 = um;
  }
  Eigen::Map<Eigen::VectorXd>(out.data(), n_) = coef_ * dt;
}

double interp_coeff(const Interpolator& interp, int i, int j, double u, double v) {
  return interp.cardinal(i, u) * interp.cardinal(j, v);
}

double eta(int p, double s) { return (0.5 - 1.0 / p) * s * s * s + s / p + 0.5; }

namespace {
double eta_derivative(int p, double s) { return 3.0 * (0.5 - 1.0 / p) * s * s + 1.0 / p; }
}  // namespace

double chi(int p, double s) {
  const double a = std::pow(eta(p, s), p), b = std::pow(eta(p, -s), p);
  return 2.0 * a / (a + b) - 1.0;
}

double chi_derivative(int p, double s) {
  const double ep = eta(p, s), em = eta(p, -s);
  const double a = std::pow(ep, p), b = std::pow(em, p);
  const double da = p * std::pow(ep, p - 1) * eta_derivative(p, s);
  const double db = -p * std::pow(em, p - 1) * eta_derivative(p, -s);
  return 2.0 * (da * b - a * db) / ((a + b) * (a + b));
}

ChebGrid gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) jac(i, i - 1) = jac(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  ChebGrid g;
  g.n = n;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    g.nodes[i] = es.eigenvalues()[i];
    g.weights[i] = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
  return g;
}

ChebGrid end_log_rule(double e, double r_min, double panel, int n) {
  const ChebGrid gl = gauss_legendre(n);
  ChebGrid g;
  auto add = [&](double r0, double r1, bool log_scale) {
    for (int i = 0; i < n; ++i) {
      double r, w;
      if (log_scale) {
        const double a = std::log(r0), b = std::log(r1);
        const double tau = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
        r = std::exp(tau);
        w = 0.5 * (b - a) * gl.weights[i] * r;
      } else {
        r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * gl.nodes[i];
        w = 0.5 * (r1 - r0) * gl.weights[i];
      }
      g.nodes.push_back(e > 0.0 ? 1.0 - r : -1.0 + r);
      g.weights.push_back(w);
    }
  };
  add(0.0, r_min, false);
  const double span = std::log(2.0 / r_min);
  const int panels = std::max(1, static_cast<int>(std::ceil(span / panel)));
  for (int j = 0; j < panels; ++j)
    add(r_min * std::exp(span * j / panels), r_min * std::exp(span * (j + 1) / panels), true);
  g.n = static_cast<int>(g.nodes.size());
  return g;
}

namespace {

// 1 - chi and 1 + chi without cancellation at the ends.
double chi_minus(int p, double s) {
  const double a = std::pow(eta(p, s), p), b = std::pow(eta(p, -s), p);
  return 2.0 * b / (a + b);
}

double chi_plus(int p, double s) {
  const double a = std::pow(eta(p, s), p), b = std::pow(eta(p, -s), p);
  return 2.0 * a / (a + b);
}

}  // namespace

MapValue GradedMap::operator()(double t) const {
  if (alpha == 1.0) {
    const double s = 0.5 * (t + 1.0);
    const double c = chi(p, s);
    return {-1.0 + 2.0 * c, chi_derivative(p, s), 2.0 * c, 2.0 * chi_minus(p, s)};
  }
  if (alpha == -1.0) {
    const double s = 0.5 * (1.0 - t);
    const double c = chi(p, s);
    return {1.0 - 2.0 * c, chi_derivative(p, s), 2.0 * chi_minus(p, s), 2.0 * c};
  }
  const double sgn = t < 0.0 ? -1.0 : 1.0;
  const double s = 1.0 - std::abs(t);
  const double c = chi(p, s);
  const double value = sgn - (sgn - alpha) * c;
  const double d = (1.0 - alpha * sgn) * chi_derivative(p, s);
  if (sgn > 0.0) return {value, d, value + 1.0, (1.0 - alpha) * c};
  return {value, d, (1.0 + alpha) * c, 1.0 - value};
}

MapValue graded_map(const GradedMap& map, double t) { return map(t); }

MapValue EndGrading::operator()(double u) const {
  if (lower && upper) return {chi(p, u), chi_derivative(p, u), chi_plus(p, u), chi_minus(p, u)};
  if (upper) return GradedMap{1.0, p}(u);
  if (lower) return GradedMap{-1.0, p}(u);
  return {u, 1.0, u + 1.0, 1.0 - u};
}

std::pair<double, double> EndGrading::increment(double u0, double u1) const {
  const MapValue m0 = (*this)(u0);
  if (!active()) return {m0.value, u1 - u0};
  const double du = u1 - u0;
  double room = 2.0;
  if (upper) room = std::min(room, 1.0 - std::max(u0, u1));
  if (lower) room = std::min(room, 1.0 + std::min(u0, u1));
  if (std::abs(du) <= 0.25 * room) {
    // 8-point Gauss-Legendre on g'
    static const double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
    static const double w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    const double mid = 0.5 * (u0 + u1), half = 0.5 * du;
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
      s += w[i] * ((*this)(mid - half * x[i]).derivative + (*this)(mid + half * x[i]).derivative);
    return {m0.value, half * s};
  }
  const MapValue m1 = (*this)(u1);
  if (m0.upper_gap < 0.5 && m1.upper_gap < 0.5) return {m0.value, m0.upper_gap - m1.upper_gap};
  if (m0.lower_gap < 0.5 && m1.lower_gap < 0.5) return {m0.value, m1.lower_gap - m0.lower_gap};
  return {m0.value, m1.value - m0.value};
}

}  // namespace pmlbie::cheb
