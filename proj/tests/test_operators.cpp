#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "pmlbie/operators.hpp"
#include "pmlbie/solve.hpp"
#include "oracles.hpp"

using namespace pmlbie;
using namespace pmlbie::operators;
using geometry::BoundaryCondition;
using geometry::SceneKind;
using namespace pmlbie::oracle;

namespace {

geometry::Scene disc_scene(double k, double t_over_lambda = 2.0) {
  const double lambda = 2.0 * kPi / k;
  geometry::SceneParams p;
  p.wavelength = lambda;
  const double t = t_over_lambda * lambda;
  return geometry::build_scene(SceneKind::disc2d, BoundaryCondition::dirichlet,
                               pml::PmlProfile(2, {4.0, 1000.0, 1000.0}, {t, t, t}), p);
}

// One straight segment [-L, L] x {0}.
geometry::Scene segment_scene(double half) {
  geometry::SceneParams p;
  geometry::CustomCurve c;
  c.kind = geometry::CustomCurve::Kind::poly;
  c.cx = {0.0, half};
  c.cy = {0.0, 0.0};
  c.orientation = -1;
  c.on_plane = true;
  p.custom.push_back(c);
  return geometry::build_scene(SceneKind::custom, BoundaryCondition::dirichlet,
                               pml::PmlProfile(2, {100.0, 100.0, 100.0}, {1.0, 1.0, 1.0}), p);
}

CVector random_density(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = cd(g(rng), g(rng));
  return v;
}

}  // namespace

TEST_CASE("discretization layout") {
  const geometry::Scene s = disc_scene(kPi);
  const Discretization d(s, DiscretizationParams{16});
  CHECK(d.size() == 96);
  CHECK(d.per_patch() == 16);
  for (int i = 0; i < d.size(); ++i) {
    CHECK(d.adjacency(i).front().patch == d.nodes()[i].patch);
    for (const Adjacency& a : d.adjacency(i)) CHECK(a.distance <= 0.1);
  }
  const Discretization d8(s, DiscretizationParams{8});
  double wsum = 0.0;
  for (int i = 0; i < 8; ++i) wsum += d8.nodes()[i].weight;
  CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("closest point") {
  const geometry::Patch seg(geometry::make_segment(Vec3(-1, 0, 0), Vec3(1, 0, 0)), 1);
  const Adjacency a = closest_point(seg, 0, Vec3(0.5, 0.3, 0.0));
  CHECK(a.u == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(a.distance == doctest::Approx(0.3).epsilon(1e-10));
  const Adjacency b = closest_point(seg, 0, Vec3(3.0, 0.0, 0.0));
  CHECK(b.u == doctest::Approx(1.0));
  CHECK(b.distance == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("single layer on a segment matches adaptive quadrature") {
  const double half = 1.5, k = 2.0;
  const geometry::Scene s = segment_scene(half);
  const Discretization d(s, DiscretizationParams{24});
  const OperatorSet ops(d, k, {Op::single}, Storage::dense, false);
  CVector psi(d.size());
  for (int i = 0; i < d.size(); ++i) psi[i] = std::cos(d.nodes()[i].kp.x[0]);
  const CVector sp = ops.apply(Op::single, psi);
  boost::math::quadrature::tanh_sinh<double> ts;
  double worst = 0.0;
  for (int i = 0; i < d.size(); i += 5) {
    const double x = d.nodes()[i].kp.x[0];
    auto part = [&](bool imag) {
      auto f = [&](double y) {
        const double r = std::abs(x - y);
        const cd g = r == 0.0 ? cd(0.0) : 0.25 * kI * h0(k * r);
        return (imag ? g.imag() : g.real()) * std::cos(y);
      };
      return ts.integrate(f, -half, x) + ts.integrate(f, x, half);
    };
    const cd ref(part(false), part(true));
    worst = std::max(worst, std::abs(sp[i] - ref) / std::abs(ref));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("regularized hyper-singular operator matches the Maue identity on a circle") {
  const double gap = maue_gap(kPi, 32);
  MESSAGE("Maue max-norm difference " << gap);
  CHECK(gap <= 1e-8);
}

TEST_CASE("operators are linear and vanish on zero density") {
  const geometry::Scene s = disc_scene(kPi);
  const Discretization d(s, DiscretizationParams{12});
  const OperatorSet ops(d, kPi, {Op::single, Op::single_param, Op::double_layer, Op::adjoint_double},
                        Storage::dense);
  const CVector z = CVector::Zero(d.size());
  const CVector a = random_density(d.size(), 1), b = random_density(d.size(), 2);
  const cd c(0.3, -1.7);
  for (Op op : {Op::single, Op::double_layer, Op::adjoint_double}) {
    CHECK(ops.apply(op, z).norm() == 0.0);
    const CVector lhs = ops.apply(op, a + c * b);
    const CVector rhs = ops.apply(op, a) + c * ops.apply(op, b);
    CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
  }
  CHECK(apply_hyper(ops, z).norm() == 0.0);
}

TEST_CASE("storage modes and serial apply agree") {
  const geometry::Scene s = disc_scene(kPi);
  const Discretization d(s, DiscretizationParams{12});
  const std::vector<Op> list{Op::single, Op::double_layer, Op::adjoint_double};
  const OperatorSet dense(d, kPi, list, Storage::dense);
  const OperatorSet blocks(d, kPi, list, Storage::blocks);
  const OperatorSet fly(d, kPi, list, Storage::on_the_fly);
  const CVector phi = random_density(d.size(), 5);
  for (Op op : list) {
    const CVector ref = dense.apply(op, phi);
    CHECK((blocks.apply(op, phi) - ref).norm() <= 1e-13 * ref.norm());
    CHECK((fly.apply(op, phi) - ref).norm() <= 1e-13 * ref.norm());
    CHECK((dense.apply_serial(op, phi) - ref).norm() <= 1e-13 * ref.norm());
    CHECK((blocks.apply_serial(op, phi) - blocks.apply(op, phi)).norm() <= 1e-13 * ref.norm());
  }
  CHECK_THROWS(blocks.matrix(Op::single));
  CHECK_THROWS(dense.apply(Op::single_param, phi));
}

TEST_CASE("adjacent quadrature is stable in N_beta") {
  const geometry::Scene s = disc_scene(kPi);
  DiscretizationParams p{16};
  const Discretization d200(s, p);
  p.n_beta = 400;
  const Discretization d400(s, p);
  const OperatorSet o200(d200, kPi, {Op::single, Op::double_layer}, Storage::dense);
  const OperatorSet o400(d400, kPi, {Op::single, Op::double_layer}, Storage::dense);
  for (Op op : {Op::single, Op::double_layer}) {
    const double scale = o200.matrix(op).cwiseAbs().maxCoeff();
    const double beta = (o200.matrix(op) - o400.matrix(op)).cwiseAbs().maxCoeff() / scale;
    MESSAGE("N_beta 200->400 max entry change " << beta);
    CHECK(beta <= 1e-8);
  }
}

TEST_CASE("near and far quadrature agree on smooth densities") {
  const geometry::Scene s = disc_scene(kPi);
  DiscretizationParams p{32};
  const Discretization d1(s, p);
  p.delta = 0.2;
  const Discretization d2(s, p);
  const OperatorSet o1(d1, kPi, {Op::single, Op::double_layer}, Storage::dense);
  const OperatorSet o2(d2, kPi, {Op::single, Op::double_layer}, Storage::dense);
  CVector phi(d1.size());
  for (int i = 0; i < d1.size(); ++i) phi[i] = std::cos(d1.nodes()[i].kp.x[0]) * std::exp(-0.1 * d1.nodes()[i].kp.x[0]);
  for (Op op : {Op::single, Op::double_layer}) {
    const CVector a = o1.apply(op, phi), b = o2.apply(op, phi);
    const double diff = (a - b).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff();
    MESSAGE("delta 0.1 vs 0.2 relative change " << diff);
    CHECK(diff <= 1e-8);
  }
}

TEST_CASE("discrete operators stay bounded under refinement") {
  const geometry::Scene s = disc_scene(kPi);
  double prev = 0.0;
  for (int n : {8, 16, 32}) {
    const Discretization d(s, DiscretizationParams{n});
    const OperatorSet ops(d, kPi, {Op::single, Op::double_layer}, Storage::dense);
    // max row sum of |K| in the arc-length weighted norm
    const CMatrix& k = ops.matrix(Op::double_layer);
    const double norm = k.cwiseAbs().rowwise().sum().maxCoeff();
    CHECK(std::isfinite(norm));
    if (prev > 0.0) CHECK(norm <= 2.0 * prev);
    prev = norm;
  }
}

TEST_CASE("Calderon identities hold for exact Cauchy data") {
  solve::ProblemSpec spec;
  const double t = 4.0;
  geometry::SceneParams p;
  spec.scene = std::make_shared<geometry::Scene>(geometry::build_scene(
      SceneKind::disc2d, BoundaryCondition::dirichlet, pml::PmlProfile(2, {4.0, 1000.0, 1000.0}, {t, t, t}), p));
  spec.k = kPi;
  spec.source = Vec3(0.0, 2.0, 0.0);
  spec.disc.n = 32;
  const solve::CalderonResiduals r32 = solve::calderon_residuals(spec);
  spec.disc.n = 16;
  const solve::CalderonResiduals r16 = solve::calderon_residuals(spec);
  CHECK(r32.n_dof == 6 * 32);
  CHECK(r32.trace <= 1e-6);
  CHECK(r32.normal <= 1e-3);
  CHECK(r16.trace / r32.trace >= 1e2);
  CHECK(r16.normal / r32.normal >= 1e2);
}
