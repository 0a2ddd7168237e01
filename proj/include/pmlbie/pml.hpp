#pragma once

#include <array>
#include <vector>

#include "pmlbie/types.hpp"

namespace pmlbie::pml {

// Per-axis box absorber. Inside |x_i| <= a_i the stretch is the identity;
// on a_i < |x_i| <= a_i + T_i the absorption ramps smoothly from 0 to S and
// stays at S beyond.
class PmlProfile {
 public:
  PmlProfile() = default;
  PmlProfile(int dim, std::array<double, 3> half_width, std::array<double, 3> thickness,
             double strength = 6.0, int order = 6);

  int dim() const { return dim_; }
  double half_width(int axis) const { return a_[axis]; }
  double thickness(int axis) const { return t_[axis]; }
  double outer(int axis) const { return a_[axis] + t_[axis]; }
  double strength() const { return s_; }
  int order() const { return p_; }

  // Absorption sigma_i(t).
  double sigma(int axis, double t) const;
  // Im of the stretched coordinate: int_0^t sigma_i.
  double stretch_integral(int axis, double t) const;
  // int_{a_i}^{a_i+T_i} sigma_i.
  double ramp_integral(int axis) const;

  // True when the box [-half_width, half_width] contains x on every axis.
  bool in_physical_box(const Vec3& x) const;

 private:
  double ramp_unit(double xbar) const;  // sigma in ramp coordinate xbar in [-1, 0]
  double ramp_antiderivative(double xbar) const;

  int dim_ = 2;
  std::array<double, 3> a_{1.0, 1.0, 1.0};
  std::array<double, 3> t_{1.0, 1.0, 1.0};
  double s_ = 6.0;
  int p_ = 6;
  // Chebyshev coefficients of int_{-1}^{xbar} ramp_unit on xbar in [-1, 0].
  std::vector<double> cheb_;
  double unit_total_ = 0.0;
};

struct StretchedPoint {
  Vec3 x = Vec3::Zero();
  Vec3c xt = Vec3c::Zero();
  Vec3c alpha = Vec3c::Ones();  // 1 + i sigma_i(x_i)
};

StretchedPoint stretch(const Vec3& x, const PmlProfile& profile);

// Complex distance; zero when the stretched points coincide.
cd complex_distance(const StretchedPoint& xs, const StretchedPoint& ys);
cd complex_distance(const Vec3c& xt, const Vec3c& yt);

struct PmlMatrices {
  Vec3c a_diag;  // diagonal of A (third entry 1 in 2D)
  cd jac;        // J
};
PmlMatrices pml_matrices(const StretchedPoint& xs, int dim);

// Cofactor weights c_i = product of alpha_j over j != i. They appear in the
// stretched normal derivative and in the zero-order weights of the
// regularized hyper-singular operator.
Vec3c cofactors(const Vec3c& alpha);

struct LemmaWeights {
  Vec3c zero_order;  // A1 (2D, first two entries) or A3 (3D): c_i(x) c_i(y)
  Vec3c curl;        // A2: alpha_i(x_i) alpha_i(y_i)  (3D only; ones in 2D)
};
LemmaWeights lemma_weights(const StretchedPoint& xs, const StretchedPoint& ys, int dim);

}  // namespace pmlbie::pml
