#include "pmlbie/solve.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace pmlbie::solve {

namespace {

using clock_type = std::chrono::steady_clock;
using operators::Op;
using operators::OperatorSet;
using operators::Storage;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

CVector node_jacobians(const operators::Discretization& disc) {
  CVector j(disc.size());
  for (int i = 0; i < disc.size(); ++i) j[i] = disc.nodes()[i].kp.jacobian;
  return j;
}

Storage iterative_storage(int dim) { return dim == 2 ? Storage::dense : Storage::blocks; }

void check_spec(const ProblemSpec& spec) {
  if (!spec.scene) throw ConfigError("problem has no scene");
  if (!(spec.k > 0.0)) throw ConfigError("wavenumber k must be positive");
  if (!(spec.gmres.tol > 0.0 && spec.gmres.tol < 1.0)) throw ConfigError("GMRES tolerance must lie in (0, 1)");
  if (spec.gmres.restart < 1 || spec.gmres.max_iter < 1) throw ConfigError("GMRES restart and max_iter must be >= 1");
}

// Parameter derivatives of a field along the patch at a node.
cd param_derivative(const kernels::FieldValue& f, const kernels::KernelPoint& kp, const Vec3& dr) {
  cd s = 0.0;
  for (int j = 0; j < 3; ++j) s += f.grad[j] * kp.alpha[j] * dr[j];
  return s;
}

kernels::FieldValue combine(const kernels::FieldValue& a, const kernels::FieldValue& b, double sb) {
  kernels::FieldValue r;
  r.value = a.value + sb * b.value;
  r.grad = a.grad + sb * b.grad;
  return r;
}

// The function whose trace is the Dirichlet data, evaluated at a stretched point.
kernels::FieldValue data_field(const ProblemSpec& spec, const Vec3c& xt) {
  const geometry::Scene& scene = *spec.scene;
  const int dim = scene.dim;
  kernels::Incidence src;
  src.kind = kernels::Incidence::Kind::point_source;
  if (scene.bc == geometry::BoundaryCondition::transmission) {
    if (spec.mode == DataMode::manufactured) {
      src.source = spec.source_lower;
      const auto f1 = kernels::incident_field(src, spec.k, dim, xt);
      src.source = spec.source_upper;
      const auto f2 = kernels::incident_field(src, spec.k2, dim, xt);
      return combine(f1, f2, -1.0);
    }
    const auto ui = kernels::incident_field(spec.incidence, spec.k, dim, xt);
    const auto r1 = kernels::twolayer_reference(spec.incidence, spec.k, spec.k2, dim, 1, xt);
    const auto r2 = kernels::twolayer_reference(spec.incidence, spec.k, spec.k2, dim, 2, xt);
    kernels::FieldValue f = combine(ui, r1, 1.0);
    f = combine(r2, f, -1.0);
    return f;
  }
  if (spec.mode == DataMode::manufactured) {
    src.source = spec.source;
    return kernels::incident_field(src, spec.k, dim, xt);
  }
  const auto sign = scene.bc == geometry::BoundaryCondition::dirichlet ? kernels::ReferenceSign::dirichlet
                                                                       : kernels::ReferenceSign::neumann;
  const auto ui = kernels::incident_field(spec.incidence, spec.k, dim, xt);
  const auto ur = kernels::reference_field(spec.incidence, sign, spec.k, dim, xt);
  kernels::FieldValue f = combine(ui, ur, 1.0);
  f.value = -f.value;
  f.grad = -f.grad;
  return f;
}

double boundary_data_edge_max(const ProblemSpec& spec) {
  const geometry::Scene& scene = *spec.scene;
  const pml::PmlProfile& prof = scene.profile;
  double m = 0.0;
  for (const auto& patch : scene.patches) {
    const int samples = patch.dim() == 3 ? 9 : 1;
    for (int e = 0; e < (patch.dim() == 3 ? 4 : 2); ++e)
      for (int s = 0; s < samples; ++s) {
        double u, v = 0.0;
        const double t = samples > 1 ? -1.0 + 2.0 * s / (samples - 1) : 0.0;
        if (patch.dim() == 2) {
          u = e == 0 ? -1.0 : 1.0;
        } else {
          u = e < 2 ? (e == 0 ? -1.0 : 1.0) : t;
          v = e < 2 ? t : (e == 2 ? -1.0 : 1.0);
        }
        const Vec3 x = patch.point(u, v);
        bool outer = false;
        for (int i = 0; i < prof.dim(); ++i)
          if (std::abs(x[i]) >= prof.outer(i) - 1e-9) outer = true;
        if (!outer) continue;
        const pml::StretchedPoint sp = pml::stretch(x, prof);
        m = std::max(m, std::abs(data_field(spec, sp.xt).value));
      }
  }
  return m;
}

Solution prepare(const ProblemSpec& spec) {
  check_spec(spec);
  Solution sol;
  sol.scene = spec.scene;
  sol.spec = spec;
  sol.disc = std::make_shared<const operators::Discretization>(*spec.scene, spec.disc);
  sol.data = boundary_data(spec, *sol.disc);
  return sol;
}

void finish(Solution& sol, const GmresResult& r) {
  sol.iterations = r.iterations;
  sol.residual = r.residual;
  sol.converged = r.converged;
  sol.history = r.history;
  if (!r.converged) {
    std::ostringstream os;
    os << "GMRES did not reach the tolerance: relative residual " << r.residual << " after " << r.iterations
       << " iterations";
    sol.warnings.push_back(os.str());
  }
}

}  // namespace

GmresResult gmres(const LinearMap& apply, const CVector& b, const GmresOptions& opt) {
  const Eigen::Index n = b.size();
  GmresResult res;
  res.x = CVector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  const int m = std::max(1, std::min<int>(opt.restart, static_cast<int>(n)));
  double rel = 1.0;
  bool first = true;
  while (res.iterations < opt.max_iter) {
    const CVector r = first ? b : CVector(b - apply(res.x));
    first = false;
    const double beta = r.norm();
    rel = beta / bnorm;
    if (rel <= opt.tol) break;
    CMatrix v(n, m + 1);
    CMatrix h = CMatrix::Zero(m + 1, m);
    std::vector<cd> cs(m), sn(m);
    CVector g = CVector::Zero(m + 1);
    g[0] = beta;
    v.col(0) = r / beta;
    int j = 0;
    for (; j < m && res.iterations < opt.max_iter; ++j) {
      CVector w = apply(v.col(j));
      ++res.iterations;
      for (int i = 0; i <= j; ++i) {
        h(i, j) = v.col(i).dot(w);
        w -= h(i, j) * v.col(i);
      }
      const double hn = w.norm();
      h(j + 1, j) = hn;
      for (int i = 0; i < j; ++i) {
        const cd t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
        h(i + 1, j) = -std::conj(sn[i]) * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = t;
      }
      const cd a = h(j, j), bb = h(j + 1, j);
      const double t = std::sqrt(std::norm(a) + std::norm(bb));
      if (std::abs(a) == 0.0) {
        cs[j] = 0.0;
        sn[j] = 1.0;
      } else {
        cs[j] = std::abs(a) / t;
        sn[j] = (a / std::abs(a)) * std::conj(bb) / t;
      }
      h(j, j) = cs[j] * a + sn[j] * bb;
      h(j + 1, j) = 0.0;
      g[j + 1] = -std::conj(sn[j]) * g[j];
      g[j] = cs[j] * g[j];
      rel = std::abs(g[j + 1]) / bnorm;
      res.history.push_back(rel);
      if (hn > 0.0) v.col(j + 1) = w / hn;
      if (rel <= opt.tol || hn == 0.0) {
        ++j;
        break;
      }
    }
    // back substitution on the leading j x j triangle
    CVector y = CVector::Zero(j);
    for (int i = j - 1; i >= 0; --i) {
      cd s = g[i];
      for (int l = i + 1; l < j; ++l) s -= h(i, l) * y[l];
      y[i] = s / h(i, i);
    }
    res.x += v.leftCols(j) * y;
    if (rel <= opt.tol) break;
  }
  res.residual = rel;
  res.converged = rel <= opt.tol;
  return res;
}

BoundaryData boundary_data(const ProblemSpec& spec, const operators::Discretization& disc) {
  const int n = disc.size();
  BoundaryData d;
  d.f.resize(n);
  d.g.resize(n);
  d.fu.resize(n);
  d.fv = CVector::Zero(n);
  for (int i = 0; i < n; ++i) {
    const operators::Node& nd = disc.nodes()[i];
    const kernels::FieldValue fv = data_field(spec, nd.kp.xt);
    d.f[i] = fv.value;
    d.g[i] = kernels::stretched_normal_derivative(nd.kp, fv.grad);
    d.fu[i] = param_derivative(fv, nd.kp, nd.ru);
    if (disc.dim() == 3) d.fv[i] = param_derivative(fv, nd.kp, nd.rv);
  }
  return d;
}

Solution solve_neumann(const ProblemSpec& spec) {
  const auto t0 = clock_type::now();
  Solution sol = prepare(spec);
  const operators::Discretization& disc = *sol.disc;
  const int dim = disc.dim();
  CVector rhs;
  std::unique_ptr<OperatorSet> ops;
  if (dim == 2) {
    ops = std::make_unique<OperatorSet>(disc, spec.k, std::vector<Op>{Op::single, Op::double_layer}, Storage::dense,
                                        spec.parallel);
    rhs = ops->apply(Op::single, sol.data.g);
  } else {
    if (static_cast<double>(disc.size()) * disc.per_patch() <= 1e7) {
      ops = std::make_unique<OperatorSet>(disc, spec.k, std::vector<Op>{Op::single, Op::double_layer},
                                          Storage::blocks, spec.parallel);
      rhs = ops->apply_many({{Op::single, sol.data.g}}, spec.parallel)[0];
    } else {
      ops = std::make_unique<OperatorSet>(disc, spec.k, std::vector<Op>{Op::double_layer}, Storage::blocks,
                                          spec.parallel);
      const OperatorSet once(disc, spec.k, {Op::single}, Storage::on_the_fly);
      rhs = once.apply_many({{Op::single, sol.data.g}}, spec.parallel)[0];
    }
  }
  sol.t_precompute_s = seconds_since(t0);
  const auto t1 = clock_type::now();
  const LinearMap a = [&](const CVector& x) -> CVector {
    return 0.5 * x + ops->apply_many({{Op::double_layer, x}}, spec.parallel)[0];
  };
  const GmresResult r = gmres(a, rhs, spec.gmres);
  sol.t_iter_s = seconds_since(t1);
  sol.trace = r.x;
  sol.normal_trace = sol.data.g;
  finish(sol, r);
  return sol;
}

Solution solve_dirichlet(const ProblemSpec& spec) {
  const auto t0 = clock_type::now();
  Solution sol = prepare(spec);
  const operators::Discretization& disc = *sol.disc;
  const int dim = disc.dim();
  const double edge = boundary_data_edge_max(spec);
  const double fmax = sol.data.f.size() ? sol.data.f.cwiseAbs().maxCoeff() : 0.0;
  if (edge > 1e-6 * fmax) {
    std::ostringstream os;
    os << "Dirichlet data at the outer PML boundary is not negligible (" << edge << " vs max " << fmax
       << "); the regularized hyper-singular operator assumes it vanishes";
    sol.warnings.push_back(os.str());
  }
  const operators::TangentData tangent{sol.data.fu, sol.data.fv};
  CVector rhs;
  std::unique_ptr<OperatorSet> ops;
  if (dim == 2) {
    ops = std::make_unique<OperatorSet>(disc, spec.k,
                                        std::vector<Op>{Op::single, Op::single_param, Op::adjoint_param},
                                        Storage::dense, spec.parallel);
    rhs = operators::apply_hyper(*ops, sol.data.f, &tangent, spec.parallel, true);
  } else {
    const bool keep_all = static_cast<double>(disc.size()) * disc.per_patch() <= 1e7;
    if (keep_all) {
      ops = std::make_unique<OperatorSet>(
          disc, spec.k, std::vector<Op>{Op::single, Op::single_param, Op::adjoint_param}, Storage::blocks,
          spec.parallel);
      rhs = operators::apply_hyper(*ops, sol.data.f, &tangent, spec.parallel, true);
    } else {
      ops = std::make_unique<OperatorSet>(disc, spec.k, std::vector<Op>{Op::adjoint_param}, Storage::blocks,
                                          spec.parallel);
      const OperatorSet once(disc, spec.k, {Op::single, Op::single_param}, Storage::on_the_fly);
      rhs = operators::apply_hyper(once, sol.data.f, &tangent, spec.parallel, true);
    }
  }
  const CVector jac = node_jacobians(disc);
  sol.t_precompute_s = seconds_since(t0);
  const auto t1 = clock_type::now();
  const LinearMap a = [&](const CVector& x) -> CVector {
    return -0.5 * x + jac.cwiseProduct(ops->apply_many({{Op::adjoint_param, x}}, spec.parallel)[0]);
  };
  const GmresResult r = gmres(a, rhs, spec.gmres);
  sol.t_iter_s = seconds_since(t1);
  sol.normal_weighted = r.x;
  sol.normal_trace = r.x.cwiseQuotient(jac);
  sol.trace = sol.data.f;
  finish(sol, r);
  return sol;
}

CVector transmission_apply(const OperatorSet& ops1, const OperatorSet& ops2, const CVector& x) {
  const Eigen::Index n = x.size() / 2;
  const CVector jac = node_jacobians(ops1.disc());
  const CVector u = x.head(n), mu = x.tail(n);
  const auto a1 = ops1.apply_many({{Op::double_layer, u}, {Op::single_param, mu}, {Op::adjoint_param, mu}});
  const auto a2 = ops2.apply_many({{Op::double_layer, u}, {Op::single_param, mu}, {Op::adjoint_param, mu}});
  const CVector n1 = operators::apply_hyper(ops1, u, nullptr, true, true);
  const CVector n2 = operators::apply_hyper(ops2, u, nullptr, true, true);
  CVector y(2 * n);
  y.head(n) = u + a1[0] - a2[0] + a2[1] - a1[1];
  y.tail(n) = n1 - n2 + mu + jac.cwiseProduct(a2[2] - a1[2]);
  return y;
}

Solution solve_transmission(const ProblemSpec& spec) {
  const auto t0 = clock_type::now();
  if (!(spec.k2 > 0.0)) throw ConfigError("lower-layer wavenumber k2 must be positive");
  if (spec.mode == DataMode::physical && spec.incidence.kind != kernels::Incidence::Kind::plane_wave)
    throw ConfigError("transmission problems need plane-wave incidence");
  Solution sol = prepare(spec);
  const operators::Discretization& disc = *sol.disc;
  const std::vector<Op> all{Op::single, Op::single_param, Op::double_layer, Op::adjoint_double, Op::adjoint_param};
  const Storage st = iterative_storage(disc.dim());
  const OperatorSet ops1(disc, spec.k, all, st, spec.parallel);
  const OperatorSet ops2(disc, spec.k2, all, st, spec.parallel);
  const operators::TangentData tangent{sol.data.fu, sol.data.fv};
  const int n = disc.size();
  const auto a1 = ops1.apply_many({{Op::double_layer, sol.data.f}, {Op::single, sol.data.g},
                                   {Op::adjoint_double, sol.data.g}});
  const CVector n1 = operators::apply_hyper(ops1, sol.data.f, &tangent, spec.parallel, true);
  const CVector jac = node_jacobians(disc);
  CVector rhs(2 * n);
  rhs.head(n) = -(0.5 * sol.data.f + a1[0]) + a1[1];
  rhs.tail(n) = -jac.cwiseProduct(0.5 * sol.data.g - a1[2]) - n1;
  sol.t_precompute_s = seconds_since(t0);
  const auto t1 = clock_type::now();
  const LinearMap a = [&](const CVector& x) -> CVector { return transmission_apply(ops1, ops2, x); };
  const GmresResult r = gmres(a, rhs, spec.gmres);
  sol.t_iter_s = seconds_since(t1);
  sol.trace = r.x.head(n);
  sol.normal_weighted = r.x.tail(n);
  sol.normal_trace = r.x.tail(n).cwiseQuotient(jac);
  finish(sol, r);
  return sol;
}

Solution solve(const ProblemSpec& spec) {
  if (!spec.scene) throw ConfigError("problem has no scene");
  switch (spec.scene->bc) {
    case geometry::BoundaryCondition::dirichlet: return solve_dirichlet(spec);
    case geometry::BoundaryCondition::neumann: return solve_neumann(spec);
    case geometry::BoundaryCondition::transmission: return solve_transmission(spec);
  }
  throw ConfigError("unknown boundary condition");
}

FieldValues eval_field(const Solution& sol, const std::vector<Vec3>& points) {
  const geometry::Scene& scene = *sol.scene;
  const ProblemSpec& spec = sol.spec;
  const int dim = scene.dim;
  FieldValues out;
  out.points = points;
  const int np = static_cast<int>(points.size());
  std::vector<int> region(np);
  for (int i = 0; i < np; ++i) {
    if (!scene.profile.in_physical_box(points[i]))
      throw ConfigError("field point outside the physical box B_a");
    region[i] = scene.region ? scene.region(points[i]) : 1;
    if (region[i] == 0) throw ConfigError("field point outside the fluid region");
  }
  out.scattered = CVector::Zero(np);
  const bool trans = scene.bc == geometry::BoundaryCondition::transmission;
  const CVector* mu = sol.normal_weighted.size() ? &sol.normal_weighted : nullptr;
  const CVector none = CVector::Zero(sol.trace.size());
  const CVector& psi = mu ? none : sol.normal_trace;
  if (!trans) {
    out.scattered = operators::eval_potential(*sol.disc, spec.k, points, psi, sol.trace, spec.parallel, mu);
  } else {
    std::vector<Vec3> p1, p2;
    std::vector<int> i1, i2;
    for (int i = 0; i < np; ++i) {
      (region[i] == 1 ? p1 : p2).push_back(points[i]);
      (region[i] == 1 ? i1 : i2).push_back(i);
    }
    const CVector v1 = operators::eval_potential(*sol.disc, spec.k, p1, psi + sol.data.g, sol.trace + sol.data.f,
                                                 spec.parallel, mu);
    const CVector v2 = operators::eval_potential(*sol.disc, spec.k2, p2, psi, sol.trace, spec.parallel, mu);
    for (std::size_t j = 0; j < i1.size(); ++j) out.scattered[i1[j]] = v1[j];
    for (std::size_t j = 0; j < i2.size(); ++j) out.scattered[i2[j]] = -v2[j];
  }
  out.total = out.scattered;
  kernels::Incidence src;
  src.kind = kernels::Incidence::Kind::point_source;
  if (spec.mode == DataMode::manufactured) {
    out.exact.resize(np);
    for (int i = 0; i < np; ++i) {
      if (!trans) {
        src.source = spec.source;
        out.exact[i] = kernels::incident_field(src, spec.k, dim, points[i]).value;
      } else if (region[i] == 1) {
        src.source = spec.source_lower;
        out.exact[i] = kernels::incident_field(src, spec.k, dim, points[i]).value;
      } else {
        src.source = spec.source_upper;
        out.exact[i] = kernels::incident_field(src, spec.k2, dim, points[i]).value;
      }
    }
    return out;
  }
  for (int i = 0; i < np; ++i) {
    if (!trans) {
      const auto sign = scene.bc == geometry::BoundaryCondition::dirichlet ? kernels::ReferenceSign::dirichlet
                                                                           : kernels::ReferenceSign::neumann;
      out.total[i] += kernels::incident_field(spec.incidence, spec.k, dim, points[i]).value +
                      kernels::reference_field(spec.incidence, sign, spec.k, dim, points[i]).value;
    } else if (region[i] == 1) {
      out.total[i] += kernels::incident_field(spec.incidence, spec.k, dim, points[i]).value +
                      kernels::twolayer_reference(spec.incidence, spec.k, spec.k2, dim, 1, points[i]).value;
    } else {
      out.total[i] += kernels::twolayer_reference(spec.incidence, spec.k, spec.k2, dim, 2, points[i]).value;
    }
  }
  return out;
}

CalderonResiduals calderon_residuals(const ProblemSpec& spec) {
  check_spec(spec);
  if (spec.scene->bc == geometry::BoundaryCondition::transmission)
    throw ConfigError("Calderon residuals are defined for half-space problems");
  const operators::Discretization disc = operators::discretize(*spec.scene, spec.disc);
  const BoundaryData bd = boundary_data(spec, disc);
  const OperatorSet ops(disc, spec.k, {Op::single, Op::single_param, Op::double_layer, Op::adjoint_double},
                        iterative_storage(disc.dim()), spec.parallel);
  const auto a = ops.apply_many({{Op::double_layer, bd.f}, {Op::single, bd.g}, {Op::adjoint_double, bd.g}},
                                spec.parallel);
  const operators::TangentData tangent{bd.fu, bd.fv};
  const CVector nf = operators::apply_hyper(ops, bd.f, &tangent, spec.parallel);
  const double scale = bd.g.cwiseAbs().maxCoeff();
  CalderonResiduals r;
  r.n_dof = disc.size();
  r.trace = (0.5 * bd.f + a[0] - a[1]).cwiseAbs().maxCoeff() / scale;
  r.normal = (-0.5 * bd.g + a[2] - nf).cwiseAbs().maxCoeff() / scale;
  return r;
}

double error_linf(const CVector& numeric, const CVector& reference) {
  if (numeric.size() != reference.size()) throw ConfigError("error_linf: size mismatch");
  const double den = reference.size() ? reference.cwiseAbs().maxCoeff() : 0.0;
  if (den == 0.0) throw DomainError("error_linf: reference field vanishes identically");
  return (numeric - reference).cwiseAbs().maxCoeff() / den;
}

}  // namespace pmlbie::solve
