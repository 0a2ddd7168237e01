#include "pmlbie/pml.hpp"

#include <cmath>

#include "pmlbie/specfun.hpp"

namespace pmlbie::pml {

namespace {

constexpr int kRampDegree = 64;

double clenshaw(const std::vector<double>& c, double s) {
  double b1 = 0.0, b2 = 0.0;
  for (int k = static_cast<int>(c.size()) - 1; k >= 1; --k) {
    const double b0 = 2.0 * s * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return s * b1 - b2 + c[0];
}

}  // namespace

PmlProfile::PmlProfile(int dim, std::array<double, 3> half_width, std::array<double, 3> thickness,
                       double strength, int order)
    : dim_(dim), a_(half_width), t_(thickness), s_(strength), p_(order) {
  if (dim != 2 && dim != 3) throw ConfigError("pml: dim must be 2 or 3");
  for (int i = 0; i < dim; ++i) {
    if (!(a_[i] > 0.0)) throw ConfigError("pml: half widths must be positive");
    if (!(t_[i] > 0.0)) throw ConfigError("pml: thicknesses must be positive");
  }
  if (!(s_ > 0.0)) throw ConfigError("pml: strength S must be positive");
  if (p_ < 2) throw ConfigError("pml: order P must be >= 2");

  // Chebyshev interpolant of the ramp on s in [-1, 1] (xbar = (s - 1) / 2),
  // integrated coefficient-wise.
  const int m = kRampDegree + 1;
  std::vector<double> f(m), c(m, 0.0);
  for (int j = 0; j < m; ++j) {
    const double s = std::cos((2.0 * j + 1.0) * kPi / (2.0 * m));
    f[j] = ramp_unit(0.5 * (s - 1.0));
  }
  for (int k = 0; k < m; ++k) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += f[j] * std::cos(k * (2.0 * j + 1.0) * kPi / (2.0 * m));
    c[k] = (k == 0 ? 1.0 : 2.0) * acc / m;
  }
  std::vector<double> b(m + 1, 0.0);
  for (int k = 1; k <= m; ++k) {
    const double cm = c[k - 1] * (k == 1 ? 2.0 : 1.0);
    const double cp = k + 1 < m ? c[k + 1] : 0.0;
    b[k] = (cm - cp) / (2.0 * k);
  }
  // value at s = -1 must vanish; the factor 1/2 converts ds to dxbar
  double at_minus1 = 0.0;
  for (int k = 1; k <= m; ++k) at_minus1 += b[k] * ((k % 2) ? -1.0 : 1.0);
  b[0] = -at_minus1;
  for (double& v : b) v *= 0.5;
  cheb_ = std::move(b);
  unit_total_ = clenshaw(cheb_, 1.0);
}

double PmlProfile::ramp_unit(double xbar) const {
  const double f1 = (0.5 - 1.0 / p_) * xbar * xbar * xbar + xbar / p_ + 0.5;
  const double f2 = 1.0 - f1;
  const double a = std::pow(f1, p_), b = std::pow(f2, p_);
  return 2.0 * s_ * a / (a + b);
}

double PmlProfile::ramp_antiderivative(double xbar) const {
  return clenshaw(cheb_, 2.0 * xbar + 1.0);
}

double PmlProfile::sigma(int axis, double t) const {
  const double at = std::abs(t);
  if (at <= a_[axis]) return 0.0;
  if (at >= a_[axis] + t_[axis]) return s_;
  return ramp_unit((at - (a_[axis] + t_[axis])) / t_[axis]);
}

double PmlProfile::stretch_integral(int axis, double t) const {
  const double at = std::abs(t);
  if (at <= a_[axis]) return 0.0;
  const double sgn = t < 0.0 ? -1.0 : 1.0;
  if (at >= a_[axis] + t_[axis])
    return sgn * (t_[axis] * unit_total_ + s_ * (at - a_[axis] - t_[axis]));
  const double xbar = (at - (a_[axis] + t_[axis])) / t_[axis];
  return sgn * t_[axis] * ramp_antiderivative(xbar);
}

double PmlProfile::ramp_integral(int axis) const { return t_[axis] * unit_total_; }

bool PmlProfile::in_physical_box(const Vec3& x) const {
  for (int i = 0; i < dim_; ++i)
    if (std::abs(x[i]) > a_[i]) return false;
  return true;
}

StretchedPoint stretch(const Vec3& x, const PmlProfile& profile) {
  StretchedPoint sp;
  sp.x = x;
  for (int i = 0; i < 3; ++i) {
    if (i < profile.dim()) {
      sp.xt[i] = cd(x[i], profile.stretch_integral(i, x[i]));
      sp.alpha[i] = cd(1.0, profile.sigma(i, x[i]));
    } else {
      sp.xt[i] = cd(x[i], 0.0);
      sp.alpha[i] = 1.0;
    }
  }
  return sp;
}

cd complex_distance(const Vec3c& xt, const Vec3c& yt) {
  const Vec3c d = xt - yt;
  return specfun::branch_sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
}

cd complex_distance(const StretchedPoint& xs, const StretchedPoint& ys) {
  return complex_distance(xs.xt, ys.xt);
}

Vec3c cofactors(const Vec3c& alpha) {
  return Vec3c(alpha[1] * alpha[2], alpha[0] * alpha[2], alpha[0] * alpha[1]);
}

PmlMatrices pml_matrices(const StretchedPoint& xs, int dim) {
  const Vec3c& a = xs.alpha;
  PmlMatrices m;
  if (dim == 2) {
    m.a_diag = Vec3c(a[1] / a[0], a[0] / a[1], 1.0);
    m.jac = a[0] * a[1];
  } else {
    m.a_diag = Vec3c(a[1] * a[2] / a[0], a[0] * a[2] / a[1], a[0] * a[1] / a[2]);
    m.jac = a[0] * a[1] * a[2];
  }
  return m;
}

LemmaWeights lemma_weights(const StretchedPoint& xs, const StretchedPoint& ys, int dim) {
  LemmaWeights w;
  const Vec3c cx = cofactors(xs.alpha), cy = cofactors(ys.alpha);
  w.zero_order = cx.cwiseProduct(cy);
  w.curl = xs.alpha.cwiseProduct(ys.alpha);
  if (dim == 2) {
    w.zero_order[2] = 1.0;
    w.curl = Vec3c::Ones();
  }
  return w;
}

}  // namespace pmlbie::pml
