#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pmlbie/geometry.hpp"
#include "pmlbie/kernels.hpp"
#include "pmlbie/operators.hpp"
#include "pmlbie/types.hpp"

namespace pmlbie::solve {

struct GmresOptions {
  double tol = 1e-12;
  int restart = 200;
  int max_iter = 1000;
};

struct GmresResult {
  CVector x;
  int iterations = 0;
  double residual = 0.0;  // relative, ||b - A x|| / ||b||
  bool converged = false;
  std::vector<double> history;  // relative residual after each iteration
};

using LinearMap = std::function<CVector(const CVector&)>;

// Restarted GMRES with modified Gram-Schmidt and Givens rotations.
GmresResult gmres(const LinearMap& apply, const CVector& b, const GmresOptions& opt);

// physical: incident plane wave or point source.
// manufactured: the exact scattered field is a point source placed inside
// the obstacle (or, for transmission, one source per layer placed in the
// opposite layer).
enum class DataMode { physical, manufactured };

struct ProblemSpec {
  std::shared_ptr<const geometry::Scene> scene;
  double k = kPi;
  double k2 = 2.0 * kPi;  // lower layer (transmission only)
  kernels::Incidence incidence;
  DataMode mode = DataMode::manufactured;
  Vec3 source = Vec3::Zero();        // manufactured source (half-space problems)
  Vec3 source_upper = Vec3::Zero();  // transmission: source of the lower-layer field
  Vec3 source_lower = Vec3::Zero();  // transmission: source of the upper-layer field
  operators::DiscretizationParams disc;
  GmresOptions gmres;
  bool parallel = true;
};

// Boundary data at the nodes: values, stretched normal derivatives and
// parameter derivatives of the Dirichlet data.
struct BoundaryData {
  CVector f, g;
  CVector fu, fv;
};

BoundaryData boundary_data(const ProblemSpec& spec, const operators::Discretization& disc);

struct Solution {
  std::shared_ptr<const geometry::Scene> scene;
  std::shared_ptr<const operators::Discretization> disc;
  ProblemSpec spec;
  BoundaryData data;
  CVector trace;         // u (Neumann, transmission: lower-layer u)
  CVector normal_trace;  // normal derivative (Dirichlet, transmission)
  CVector normal_weighted;  // J * normal_trace when that is the unknown, else empty
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> history;
  double t_precompute_s = 0.0;
  double t_iter_s = 0.0;
  std::vector<std::string> warnings;
};

Solution solve_neumann(const ProblemSpec& spec);
Solution solve_dirichlet(const ProblemSpec& spec);
Solution solve_transmission(const ProblemSpec& spec);
// Dispatch on the scene's boundary condition.
Solution solve(const ProblemSpec& spec);

// Operator of the 2x2 transmission system applied to [u; J du], J the node
// jacobians; the second row is scaled by J (exposed for testing).
CVector transmission_apply(const operators::OperatorSet& ops1, const operators::OperatorSet& ops2,
                           const CVector& x);

struct FieldValues {
  std::vector<Vec3> points;
  CVector scattered;
  CVector total;  // scattered + incident + reference (physical mode)
  CVector exact;  // exact scattered field (manufactured mode), else empty
};

// Field at points of the physical fluid region; throws ConfigError for
// points outside B_a or outside the fluid.
FieldValues eval_field(const Solution& sol, const std::vector<Vec3>& points);

double error_linf(const CVector& numeric, const CVector& reference);

// Max-norm residuals of (1/2 + K) f - S g and (-1/2 + K') g - N f for the
// boundary data of a half-space problem (exact Cauchy data in manufactured
// mode), relative to max |g|.
struct CalderonResiduals {
  double trace = 0.0;
  double normal = 0.0;
  int n_dof = 0;
};
CalderonResiduals calderon_residuals(const ProblemSpec& spec);

}  // namespace pmlbie::solve
