#include <cmath>
#include <random>

#include "doctest.h"
#include "pmlbie/solve.hpp"

using namespace pmlbie;
using namespace pmlbie::solve;
using geometry::BoundaryCondition;
using geometry::SceneKind;

namespace {

std::shared_ptr<const geometry::Scene> scene(SceneKind kind, BoundaryCondition bc, double k) {
  const double lambda = 2.0 * kPi / k, t = 2.0 * lambda;
  geometry::SceneParams p;
  p.wavelength = lambda;
  return std::make_shared<geometry::Scene>(
      geometry::build_scene(kind, bc, pml::PmlProfile(2, {4.0, 1000.0, 1000.0}, {t, t, t}), p));
}

ProblemSpec disc_problem(BoundaryCondition bc, int n) {
  ProblemSpec spec;
  spec.scene = scene(SceneKind::disc2d, bc, kPi);
  spec.k = kPi;
  spec.source = Vec3(0.0, 2.0, 0.0);
  spec.disc.n = n;
  return spec;
}

}  // namespace

TEST_CASE("gmres on the identity converges in one step") {
  const CVector b = CVector::LinSpaced(10, 1.0, 10.0);
  const GmresResult r = gmres([](const CVector& x) { return x; }, b, GmresOptions{});
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK((r.x - b).norm() <= 1e-14 * b.norm());
}

TEST_CASE("gmres agrees with a direct solve") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  const int n = 50;
  CMatrix a = CMatrix::Identity(n, n) * 4.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) += cd(g(rng), g(rng)) / double(n);
  CVector b(n);
  for (int i = 0; i < n; ++i) b[i] = cd(g(rng), g(rng));
  const CVector ref = a.partialPivLu().solve(b);
  for (int restart : {5, 200}) {
    GmresOptions opt;
    opt.restart = restart;
    const GmresResult r = gmres([&](const CVector& x) { return CVector(a * x); }, b, opt);
    CHECK(r.converged);
    CHECK(r.residual <= 1e-12);
    CHECK((r.x - ref).norm() <= 1e-10 * ref.norm());
    if (restart == 200)
      for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1]);
  }
}

TEST_CASE("gmres zero right-hand side and iteration cap") {
  const GmresResult z = gmres([](const CVector& x) { return x; }, CVector::Zero(4), GmresOptions{});
  CHECK(z.converged);
  CHECK(z.iterations == 0);
  CHECK(z.x.norm() == 0.0);
  CMatrix a = CMatrix::Zero(30, 30);
  for (int i = 0; i < 30; ++i) a(i, (i + 1) % 30) = 1.0;  // cyclic shift: slow for GMRES
  GmresOptions opt;
  opt.max_iter = 5;
  const GmresResult r = gmres([&](const CVector& x) { return CVector(a * x); }, CVector::Unit(30, 0), opt);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 5);
}

TEST_CASE("manufactured solutions on the disc") {
  for (BoundaryCondition bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann}) {
    const Solution sol = solve::solve(disc_problem(bc, 32));
    CHECK(sol.converged);
    const FieldValues fv = eval_field(sol, sol.scene->screen);
    const double eps = error_linf(fv.scattered, fv.exact);
    MESSAGE(geometry::to_string(bc) << " N=32 eps_inf " << eps << " iterations " << sol.iterations);
    CHECK(eps <= 1e-5);
  }
}

TEST_CASE("equal wavenumbers give a zero transmission solution") {
  ProblemSpec spec;
  spec.scene = scene(SceneKind::bump2layer, BoundaryCondition::transmission, kPi);
  spec.k = spec.k2 = kPi;
  spec.mode = DataMode::physical;
  spec.incidence.theta = 0.3;
  spec.disc.n = 16;
  const Solution sol = solve::solve(spec);
  CHECK(sol.data.f.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.data.g.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.trace.cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(sol.normal_trace.cwiseAbs().maxCoeff() <= 1e-12);

  const operators::OperatorSet o1(*sol.disc, kPi,
                                  {operators::Op::single, operators::Op::single_param, operators::Op::double_layer,
                                   operators::Op::adjoint_double, operators::Op::adjoint_param},
                                  operators::Storage::dense);
  const operators::OperatorSet o2(*sol.disc, kPi,
                                  {operators::Op::single, operators::Op::single_param, operators::Op::double_layer,
                                   operators::Op::adjoint_double, operators::Op::adjoint_param},
                                  operators::Storage::dense);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  CVector x(2 * sol.disc->size());
  for (auto& v : x) v = cd(g(rng), g(rng));
  CHECK((transmission_apply(o1, o2, x) - x).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("point-source data decays into the PML") {
  ProblemSpec spec = disc_problem(BoundaryCondition::dirichlet, 16);
  spec.mode = DataMode::physical;
  spec.incidence.kind = kernels::Incidence::Kind::point_source;
  spec.incidence.source = Vec3(-1.0, 3.5, 0.0);
  const operators::Discretization d(*spec.scene, spec.disc);
  const BoundaryData bd = boundary_data(spec, d);
  const pml::PmlProfile& prof = spec.scene->profile;
  double inside = 0.0, deep = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    const double x = std::abs(d.nodes()[i].kp.x[0]);
    if (x <= prof.half_width(0)) inside = std::max(inside, std::abs(bd.f[i]));
    if (x >= prof.half_width(0) + 0.75 * prof.thickness(0)) deep = std::max(deep, std::abs(bd.f[i]));
  }
  CHECK(deep <= std::exp(-1.0) * inside);
}

TEST_CASE("reciprocity of the scattered field") {
  const Vec3 a(-1.2, 1.0, 0.0), b(1.5, 3.4, 0.0);
  for (BoundaryCondition bc : {BoundaryCondition::dirichlet, BoundaryCondition::neumann}) {
    ProblemSpec spec = disc_problem(bc, 64);
    spec.mode = DataMode::physical;
    spec.incidence.kind = kernels::Incidence::Kind::point_source;
    spec.incidence.source = a;
    const cd uab = eval_field(solve::solve(spec), {b}).scattered[0];
    spec.incidence.source = b;
    const cd uba = eval_field(solve::solve(spec), {a}).scattered[0];
    MESSAGE(geometry::to_string(bc) << " reciprocity gap " << std::abs(uab - uba) / std::abs(uab));
    CHECK(std::abs(uab - uba) <= 1e-8 * std::abs(uab));
  }
}

TEST_CASE("field evaluation rejects points outside the fluid or the box") {
  const Solution sol = solve::solve(disc_problem(BoundaryCondition::dirichlet, 8));
  CHECK_THROWS_AS(eval_field(sol, {Vec3(0.0, 2.0, 0.0)}), ConfigError);
  CHECK_THROWS_AS(eval_field(sol, {Vec3(5.0, 1.0, 0.0)}), ConfigError);
  CHECK_THROWS_AS(eval_field(sol, {Vec3(0.0, -1.0, 0.0)}), ConfigError);
  CHECK(eval_field(sol, {}).scattered.size() == 0);
}

TEST_CASE("error metric") {
  const CVector u = CVector::Constant(5, cd(0.3, -2.0));
  CHECK(error_linf(u, u) == 0.0);
  CHECK(error_linf(1.01 * u, u) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK_THROWS_AS(error_linf(u, CVector::Zero(5)), DomainError);
  CHECK_THROWS_AS(error_linf(u, CVector::Zero(4)), ConfigError);
}

TEST_CASE("invalid problems") {
  ProblemSpec spec = disc_problem(BoundaryCondition::dirichlet, 8);
  spec.k = -1.0;
  CHECK_THROWS_AS(solve::solve(spec), ConfigError);
  spec.k = kPi;
  spec.gmres.tol = 0.0;
  CHECK_THROWS_AS(solve::solve(spec), ConfigError);
  ProblemSpec none;
  CHECK_THROWS_AS(solve::solve(none), ConfigError);
  ProblemSpec t;
  t.scene = scene(SceneKind::bump2layer, BoundaryCondition::transmission, kPi);
  t.mode = DataMode::physical;
  t.incidence.kind = kernels::Incidence::Kind::point_source;
  CHECK_THROWS_AS(solve::solve(t), ConfigError);
  CHECK_THROWS_AS(calderon_residuals(t), ConfigError);
}
