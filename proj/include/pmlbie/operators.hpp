#pragma once

#include <array>
#include <utility>
#include <vector>

#include "pmlbie/cheb.hpp"
#include "pmlbie/geometry.hpp"
#include "pmlbie/kernels.hpp"
#include "pmlbie/types.hpp"

namespace pmlbie::operators {

struct DiscretizationParams {
  int n = 16;          // Chebyshev nodes per patch direction
  int n_beta = 200;    // graded nodes per direction for adjacent integrals
  double delta = 0.1;  // adjacency tolerance
  int p = 8;           // grading order of the rectangular-polar maps
};

struct Node {
  kernels::KernelPoint kp;
  int patch = 0;
  int iu = 0, iv = 0;
  double u = 0.0, v = 0.0;
  double weight = 0.0;  // Fejer weight (product in 3D), parameter measure
  Vec3 ru = Vec3::Zero();
  Vec3 rv = Vec3::Zero();
};

// Closest point of a patch to a target.
struct Adjacency {
  int patch = 0;
  double u = 0.0, v = 0.0;
  double distance = 0.0;
};

class Discretization {
 public:
  Discretization(const geometry::Scene& scene, const DiscretizationParams& params);

  const geometry::Scene& scene() const { return *scene_; }
  const DiscretizationParams& params() const { return params_; }
  int dim() const { return scene_->dim; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int patch_count() const { return static_cast<int>(scene_->patches.size()); }
  int per_patch() const { return per_patch_; }
  int offset(int patch) const { return patch * per_patch_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const cheb::Interpolator& interp() const { return interp_; }
  const cheb::ChebGrid& beta_grid() const { return beta_; }

  // Patches within delta of each node, own patch first.
  const std::vector<Adjacency>& adjacency(int node) const { return node_adj_[node]; }
  std::vector<Adjacency> adjacency(const Vec3& x) const;

  // Nodal parameter derivatives of a density, patch by patch.
  CVector derivative_u(const CVector& phi) const;
  CVector derivative_v(const CVector& phi) const;

 private:
  const geometry::Scene* scene_;
  DiscretizationParams params_;
  int per_patch_;
  cheb::Interpolator interp_;
  cheb::ChebGrid beta_;
  std::vector<Node> nodes_;
  std::vector<std::array<double, 6>> boxes_;  // per-patch bounding boxes
  std::vector<std::vector<Adjacency>> node_adj_;
};

Discretization discretize(const geometry::Scene& scene, const DiscretizationParams& params);

// Distance from x to a patch and the minimizing parameters.
Adjacency closest_point(const geometry::Patch& patch, int patch_id, const Vec3& x);

// *_param variants integrate against the parameter measure (no jacobian);
// applied to J psi they reproduce the arc-length operators on psi.
enum class Op { single, single_param, double_layer, adjoint_double, adjoint_param };

// Quadrature entries of the requested operators for one target against one
// adjacent patch, computed on the graded mesh centered at the closest point.
// rows[r][m] multiplies the density at local node m of the patch.
// target_node >= 0 marks the target as that discretization node.
void adjacent_rows(const Discretization& disc, const kernels::KernelPoint& target, const Adjacency& adj,
                   double k, const std::vector<Op>& ops, std::vector<std::vector<cd>>& rows,
                   int target_node = -1);

enum class Storage { dense, blocks, on_the_fly };

struct Timing {
  double precompute_s = 0.0;
  double apply_s = 0.0;
  int applications = 0;
};

class OperatorSet {
 public:
  OperatorSet(const Discretization& disc, double k, std::vector<Op> ops, Storage storage,
              bool parallel = true);

  const Discretization& disc() const { return *disc_; }
  double wavenumber() const { return k_; }
  Storage storage() const { return storage_; }
  bool has(Op op) const;

  CVector apply(Op op, const CVector& phi) const;
  CVector apply_serial(Op op, const CVector& phi) const;
  // Several operator/density pairs sharing one sweep over kernel evaluations.
  std::vector<CVector> apply_many(const std::vector<std::pair<Op, CVector>>& requests,
                                  bool parallel = true) const;

  // Assembled matrix (dense storage only).
  const CMatrix& matrix(Op op) const;

  const Timing& timing() const { return timing_; }

 private:
  int index(Op op) const;
  void assemble_dense(bool parallel);
  void precompute_blocks(bool parallel);
  void apply_target(int i, const std::vector<std::pair<Op, CVector>>& requests,
                    std::vector<CVector>& out, std::vector<std::vector<cd>>& scratch) const;

  const Discretization* disc_;
  double k_;
  std::vector<Op> ops_;
  Storage storage_;
  std::vector<CMatrix> dense_;
  // blocks_[op][i] holds the adjacent rows of node i, concatenated in the
  // order of disc.adjacency(i).
  std::vector<std::vector<std::vector<cd>>> blocks_;
  mutable Timing timing_;
};

// Tangential data of a density: parameter derivatives at the nodes.
struct TangentData {
  CVector du;
  CVector dv;  // 3D only
};

// Regularized hyper-singular operator. Needs an OperatorSet holding single
// and single_param. Without tangent data the density is differentiated
// spectrally. weighted returns J(x) N phi(x), J the jacobian at the target,
// which stays accurate where J vanishes at graded ends.
CVector apply_hyper(const OperatorSet& ops, const CVector& phi, const TangentData* tangent = nullptr,
                    bool parallel = true, bool weighted = false);

// Layer potentials S[psi] - D[phi] evaluated at arbitrary points of the
// physical region (double-layer kernel taken with the source normal). A
// non-null mu adds S[mu / J] with mu interpolated in the parameter measure.
CVector eval_potential(const Discretization& disc, double k, const std::vector<Vec3>& points,
                       const CVector& psi, const CVector& phi, bool parallel = true,
                       const CVector* mu = nullptr);

}  // namespace pmlbie::operators
