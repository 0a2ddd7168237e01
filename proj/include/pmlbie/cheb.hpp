#pragma once

#include <span>
#include <utility>
#include <vector>

#include "pmlbie/types.hpp"

namespace pmlbie::cheb {

// First-kind Chebyshev points u_j = cos((2j+1) pi / (2N)) with Fejer's first
// rule weights.
struct ChebGrid {
  int n = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

ChebGrid fejer_rule(int n);
ChebGrid gauss_legendre(int n);

// Rule on [-1, 1] clustering geometrically toward the end e = +-1: panels of
// equal length in log|u - e| down to |u - e| = r_min, n Gauss nodes each.
ChebGrid end_log_rule(double e, double r_min, double panel, int n);

// Cardinal (Lagrange) basis of the Chebyshev interpolant on a grid.
class Interpolator {
 public:
  explicit Interpolator(int n);

  int size() const { return n_; }
  const ChebGrid& grid() const { return grid_; }

  // a_j(u) for j = 0..N-1 written into out.
  void cardinal(double u, std::span<double> out) const;
  double cardinal(int j, double u) const;
  // da_j/du at u.
  void cardinal_derivative(double u, std::span<double> out) const;

  // D(i, j) = da_j/du (u_i); nodal derivative = D * nodal values.
  const Eigen::MatrixXd& derivative_matrix() const { return diff_; }

 private:
  int n_;
  ChebGrid grid_;
  std::vector<double> bary_;
  Eigen::MatrixXd coef_;  // coef_(j, m) = alpha_m T_m(u_j) / N
  Eigen::MatrixXd diff_;
};

// 2D tensor-product cardinal function a_ij(u, v) = a_i(u) a_j(v).
double interp_coeff(const Interpolator& interp, int i, int j, double u, double v);

// eta_p and chi_p of the graded changes of variables.
double eta(int p, double s);
double chi(int p, double s);
double chi_derivative(int p, double s);

struct MapValue {
  double value;
  double derivative;
  double lower_gap;  // value + 1
  double upper_gap;  // 1 - value
};

// xi_alpha: [-1,1] -> [-1,1], clustering points polynomially around alpha.
struct GradedMap {
  double alpha = 0.0;
  int p = 6;
  MapValue operator()(double t) const;
};

MapValue graded_map(const GradedMap& map, double t);

// Endpoint grading of a patch parameter. The derivative vanishes to order
// p-1 at each flagged end.
struct EndGrading {
  bool lower = false;
  bool upper = false;
  int p = 6;
  bool active() const { return lower || upper; }
  MapValue operator()(double u) const;
  // (g(u0), g(u1) - g(u0)), the increment keeping its relative accuracy
  // when both points crowd into a graded end.
  std::pair<double, double> increment(double u0, double u1) const;
};

}  // namespace pmlbie::cheb
