#include "pmlbie/operators.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>

namespace pmlbie::operators {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

bool is_normal_op(Op op) {
  return op == Op::double_layer || op == Op::adjoint_double || op == Op::adjoint_param;
}

cd op_value(Op op, const kernels::LayerValues& lv, double jac) {
  switch (op) {
    case Op::single: return lv.s * jac;
    case Op::single_param: return lv.s;
    case Op::double_layer: return lv.k * jac;
    case Op::adjoint_double: return lv.kt * jac;
    case Op::adjoint_param: return lv.kt;
  }
  return 0.0;
}

// Both on the same plane: the double-layer kernels vanish identically.
bool coplanar(const geometry::Scene& scene, int target_patch, int source_patch) {
  if (target_patch < 0) return false;
  const int a = scene.patches[target_patch].plane_id();
  return a >= 0 && a == scene.patches[source_patch].plane_id();
}

double box_distance(const std::array<double, 6>& b, const Vec3& x) {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = std::max({b[i] - x[i], 0.0, x[i] - b[i + 3]});
    s += d * d;
  }
  return std::sqrt(s);
}

kernels::KernelPoint source_point(const geometry::Patch& patch, const pml::PmlProfile& prof, double u, double v) {
  const geometry::Frame f = patch.frame(u, v);
  return kernels::make_kernel_point(f.point, f.normal, f.jacobian, prof);
}

}  // namespace

Adjacency closest_point(const geometry::Patch& patch, int patch_id, const Vec3& x) {
  const bool surf = patch.dim() == 3;
  const int m = surf ? 17 : 65;
  Adjacency best;
  best.patch = patch_id;
  best.distance = std::numeric_limits<double>::infinity();
  for (int j = 0; j < (surf ? m : 1); ++j)
    for (int i = 0; i < m; ++i) {
      const double u = -1.0 + 2.0 * i / (m - 1);
      const double v = surf ? -1.0 + 2.0 * j / (m - 1) : 0.0;
      const double d = (patch.point(u, v) - x).norm();
      if (d < best.distance) {
        best.distance = d;
        best.u = u;
        best.v = v;
      }
    }
  // projected Gauss-Newton on |r(u, v) - x|^2
  double u = best.u, v = best.v;
  for (int it = 0; it < 40; ++it) {
    const geometry::Frame f = patch.frame(u, v);
    const Vec3 e = f.point - x;
    double du, dv = 0.0;
    if (surf) {
      const double a = f.ru.dot(f.ru), b = f.ru.dot(f.rv), c = f.rv.dot(f.rv);
      const double g1 = f.ru.dot(e), g2 = f.rv.dot(e);
      const double det = a * c - b * b;
      if (!(det > 1e-300)) break;
      du = -(c * g1 - b * g2) / det;
      dv = -(a * g2 - b * g1) / det;
    } else {
      const double a = f.ru.dot(f.ru);
      if (!(a > 1e-300)) break;
      du = -f.ru.dot(e) / a;
    }
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const double un = std::clamp(u + step * du, -1.0, 1.0);
      const double vn = surf ? std::clamp(v + step * dv, -1.0, 1.0) : 0.0;
      const double d = (patch.point(un, vn) - x).norm();
      if (d <= best.distance) {
        moved = std::abs(un - u) + std::abs(vn - v) > 1e-15;
        u = un;
        v = vn;
        best.distance = d;
        best.u = u;
        best.v = v;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return best;
}

Discretization::Discretization(const geometry::Scene& scene, const DiscretizationParams& params)
    : scene_(&scene),
      params_(params),
      per_patch_(scene.dim == 3 ? params.n * params.n : params.n),
      interp_(params.n < 1 ? 1 : params.n),
      beta_(cheb::fejer_rule(params.n_beta < 1 ? 2 : params.n_beta)) {
  if (params.n < 4) throw ConfigError("discretize: N must be >= 4");
  if (params.n_beta < 2 || params.n_beta % 2) throw ConfigError("discretize: N_beta must be even and >= 2");
  if (!(params.delta > 0.0)) throw ConfigError("discretize: delta must be positive");
  if (params.p < 2) throw ConfigError("discretize: grading order p must be >= 2");
  if (scene.patches.empty()) throw ConfigError("discretize: scene has no patches");

  const int n = params.n;
  const auto& grid = interp_.grid();
  const int nq = static_cast<int>(scene.patches.size());
  nodes_.reserve(static_cast<std::size_t>(nq) * per_patch_);
  for (int q = 0; q < nq; ++q) {
    const geometry::Patch& patch = scene.patches[q];
    if (patch.dim() != scene.dim) throw ConfigError("discretize: patch dimension mismatch");
    for (int iv = 0; iv < (scene.dim == 3 ? n : 1); ++iv)
      for (int iu = 0; iu < n; ++iu) {
        Node nd;
        nd.patch = q;
        nd.iu = iu;
        nd.iv = iv;
        nd.u = grid.nodes[iu];
        nd.v = scene.dim == 3 ? grid.nodes[iv] : 0.0;
        nd.weight = grid.weights[iu] * (scene.dim == 3 ? grid.weights[iv] : 1.0);
        const geometry::Frame f = patch.frame(nd.u, nd.v);
        nd.kp = kernels::make_kernel_point(f.point, f.normal, f.jacobian, scene.profile);
        nd.ru = f.ru;
        nd.rv = f.rv;
        nodes_.push_back(nd);
      }
  }

  boxes_.resize(nq);
  for (int q = 0; q < nq; ++q) {
    const geometry::Patch& patch = scene.patches[q];
    const int m = scene.dim == 3 ? 33 : 129;
    std::array<double, 6> b{};
    for (int i = 0; i < 3; ++i) {
      b[i] = std::numeric_limits<double>::infinity();
      b[i + 3] = -b[i];
    }
    double gap = 0.0;
    Vec3 prev = Vec3::Zero();
    for (int j = 0; j < (scene.dim == 3 ? m : 1); ++j)
      for (int i = 0; i < m; ++i) {
        const Vec3 x = patch.point(-1.0 + 2.0 * i / (m - 1), scene.dim == 3 ? -1.0 + 2.0 * j / (m - 1) : 0.0);
        if (i > 0) gap = std::max(gap, (x - prev).norm());
        prev = x;
        for (int d = 0; d < 3; ++d) {
          b[d] = std::min(b[d], x[d]);
          b[d + 3] = std::max(b[d + 3], x[d]);
        }
      }
    for (int d = 0; d < 3; ++d) {
      b[d] -= gap;
      b[d + 3] += gap;
    }
    boxes_[q] = b;
  }

  node_adj_.resize(nodes_.size());
  const int total = size();
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < total; ++i) {
    const Node& nd = nodes_[i];
    std::vector<Adjacency> adj;
    adj.push_back(Adjacency{nd.patch, nd.u, nd.v, 0.0});
    for (int q = 0; q < nq; ++q) {
      if (q == nd.patch || box_distance(boxes_[q], nd.kp.x) > params_.delta) continue;
      const Adjacency a = closest_point(scene.patches[q], q, nd.kp.x);
      if (a.distance <= params_.delta) adj.push_back(a);
    }
    node_adj_[i] = std::move(adj);
  }
}

std::vector<Adjacency> Discretization::adjacency(const Vec3& x) const {
  std::vector<Adjacency> adj;
  for (int q = 0; q < patch_count(); ++q) {
    if (box_distance(boxes_[q], x) > params_.delta) continue;
    const Adjacency a = closest_point(scene_->patches[q], q, x);
    if (a.distance <= params_.delta) adj.push_back(a);
  }
  return adj;
}

CVector Discretization::derivative_u(const CVector& phi) const {
  const int n = params_.n;
  const Eigen::MatrixXd& d = interp_.derivative_matrix();
  CVector out(phi.size());
  const int lines = dim() == 3 ? n : 1;
  for (int q = 0; q < patch_count(); ++q)
    for (int iv = 0; iv < lines; ++iv) {
      const int o = offset(q) + iv * n;
      out.segment(o, n) = d.cast<cd>() * phi.segment(o, n);
    }
  return out;
}

CVector Discretization::derivative_v(const CVector& phi) const {
  const int n = params_.n;
  CVector out = CVector::Zero(phi.size());
  if (dim() != 3) return out;
  const Eigen::MatrixXd& d = interp_.derivative_matrix();
  for (int q = 0; q < patch_count(); ++q) {
    const int o = offset(q);
    Eigen::Map<const CMatrix> p(phi.data() + o, n, n);  // (iu, iv)
    Eigen::Map<CMatrix> r(out.data() + o, n, n);
    r = p * d.transpose().cast<cd>();
  }
  return out;
}

Discretization discretize(const geometry::Scene& scene, const DiscretizationParams& params) {
  return Discretization(scene, params);
}

void adjacent_rows(const Discretization& disc, const kernels::KernelPoint& target, const Adjacency& near,
                   double k, const std::vector<Op>& ops, std::vector<std::vector<cd>>& rows, int target_node) {
  const geometry::Scene& scene = disc.scene();
  const geometry::Patch& patch = scene.patches[near.patch];
  Adjacency adj = near;
  // target offset from the closest point; zero for nodes of this patch
  Vec3 base = patch.point(adj.u, adj.v) - target.x;
  bool corner_target = false;
  if (target_node >= 0 && disc.dim() == 2) {
    // nodes crowding a shared corner: measure both sides from the corner
    const Node& t = disc.nodes()[target_node];
    const geometry::Patch& own = scene.patches[t.patch];
    for (double eb : {-1.0, 1.0}) {
      if (t.patch == adj.patch || std::abs(adj.u - eb) > 1e-9) continue;
      for (double ea : {-1.0, 1.0})
        if ((own.point(ea) - patch.point(eb)).norm() <= 1e-12) {
          adj.u = eb;
          base = own.difference(t.u, 0.0, ea, 0.0);
          corner_target = true;
        }
    }
  }
  const int n = disc.params().n;
  const int nb = disc.params().n_beta;
  const int p = disc.params().p;
  const int dim = disc.dim();
  const cheb::ChebGrid& g = disc.beta_grid();
  const int nops = static_cast<int>(ops.size());
  rows.resize(nops);
  for (auto& r : rows) r.assign(disc.per_patch(), 0.0);

  // targets hugging a graded corner from the other side see a Poisson-type
  // peak at their own tiny distance; resolve it on log-spaced panels
  const bool corner = dim == 2 && corner_target &&
                      ((adj.u == 1.0 && patch.grading_u().upper) || (adj.u == -1.0 && patch.grading_u().lower));
  std::vector<double> uu, wu;
  if (corner) {
    const cheb::ChebGrid cr = cheb::end_log_rule(adj.u, 1e-14, 0.5, 16);
    uu = cr.nodes;
    wu = cr.weights;
  } else {
    const cheb::GradedMap mu{adj.u, p};
    uu.resize(nb);
    wu.resize(nb);
    for (int j = 0; j < nb; ++j) {
      const cheb::MapValue m = mu(g.nodes[j]);
      uu[j] = m.value;
      wu[j] = g.weights[j] * m.derivative;
    }
  }
  const int nq = static_cast<int>(uu.size());
  Eigen::MatrixXd au(nq, n);
  std::vector<double> card(n);
  for (int j = 0; j < nq; ++j) {
    disc.interp().cardinal(uu[j], card);
    for (int m = 0; m < n; ++m) au(j, m) = wu[j] * card[m];
  }

  if (dim == 2) {
    for (int j = 0; j < nq; ++j) {
      const kernels::KernelPoint y = source_point(patch, scene.profile, uu[j], 0.0);
      const Vec3 diff = patch.difference(adj.u, 0.0, uu[j], 0.0) + base;
      if (diff.norm() == 0.0) continue;
      const kernels::LayerValues lv = kernels::kernel_layers(target, y, k, dim, diff);
      for (int r = 0; r < nops; ++r) {
        const cd val = op_value(ops[r], lv, y.jacobian);
        for (int m = 0; m < n; ++m) rows[r][m] += val * au(j, m);
      }
    }
    return;
  }

  const cheb::GradedMap mv{adj.v, p};
  std::vector<double> vv(nb), wv(nb);
  for (int l = 0; l < nb; ++l) {
    const cheb::MapValue m = mv(g.nodes[l]);
    vv[l] = m.value;
    wv[l] = g.weights[l] * m.derivative;
  }
  Eigen::MatrixXd av(nb, n);
  for (int l = 0; l < nb; ++l) {
    disc.interp().cardinal(vv[l], card);
    for (int m = 0; m < n; ++m) av(l, m) = wv[l] * card[m];
  }
  // separable patches: stretch along u- and v-lines only, combine per axis
  const bool sep = patch.separable();
  std::vector<pml::StretchedPoint> su, sv;
  std::vector<double> ju, jv;
  std::array<bool, 3> along_u{};
  Vec3 sep_normal = Vec3::Zero();
  double j00 = 1.0;
  if (sep) {
    const geometry::Frame c = patch.frame(0.0, 0.0);
    for (int i = 0; i < 3; ++i) along_u[i] = c.ru[i] != 0.0;
    sep_normal = c.normal;
    j00 = c.jacobian;
    su.resize(nb);
    sv.resize(nb);
    ju.resize(nb);
    jv.resize(nb);
    for (int j = 0; j < nb; ++j) {
      const geometry::Frame fu = patch.frame(uu[j], 0.0);
      su[j] = pml::stretch(fu.point, scene.profile);
      ju[j] = fu.jacobian;
      const geometry::Frame fv = patch.frame(0.0, vv[j]);
      sv[j] = pml::stretch(fv.point, scene.profile);
      jv[j] = fv.jacobian;
    }
  }
  auto separable_point = [&](int j, int l) {
    kernels::KernelPoint y;
    y.physical = true;
    for (int i = 0; i < 3; ++i) {
      const pml::StretchedPoint& s = along_u[i] ? su[j] : sv[l];
      y.x[i] = s.x[i];
      y.xt[i] = s.xt[i];
      y.alpha[i] = s.alpha[i];
      if (s.alpha[i] != 1.0 || s.xt[i].imag() != 0.0) y.physical = false;
    }
    y.cof = pml::cofactors(y.alpha);
    y.normal = sep_normal;
    y.jacobian = ju[j] * jv[l] / j00;
    return y;
  };

  std::vector<CMatrix> f(nops, CMatrix(nb, nb));
  for (int l = 0; l < nb; ++l)
    for (int j = 0; j < nb; ++j) {
      const kernels::KernelPoint y =
          sep ? separable_point(j, l) : source_point(patch, scene.profile, uu[j], vv[l]);
      const Vec3 diff = patch.difference(adj.u, adj.v, uu[j], vv[l]) + base;
      if (diff.norm() == 0.0) {
        for (int r = 0; r < nops; ++r) f[r](j, l) = 0.0;
        continue;
      }
      const kernels::LayerValues lv = kernels::kernel_layers(target, y, k, dim, diff);
      for (int r = 0; r < nops; ++r) f[r](j, l) = op_value(ops[r], lv, y.jacobian);
    }
  const CMatrix auc = au.cast<cd>(), avc = av.cast<cd>();
  for (int r = 0; r < nops; ++r) {
    const CMatrix res = auc.transpose() * f[r] * avc;  // (iu, iv)
    for (int iv = 0; iv < n; ++iv)
      for (int iu = 0; iu < n; ++iu) rows[r][iu + n * iv] = res(iu, iv);
  }
}

OperatorSet::OperatorSet(const Discretization& disc, double k, std::vector<Op> ops, Storage storage,
                         bool parallel)
    : disc_(&disc), k_(k), ops_(std::move(ops)), storage_(storage) {
  if (!(k > 0.0)) throw ConfigError("wavenumber must be positive");
  if (ops_.empty()) throw ConfigError("operator set needs at least one operator");
  const auto t0 = clock_type::now();
  if (storage_ == Storage::dense) assemble_dense(parallel);
  if (storage_ == Storage::blocks) precompute_blocks(parallel);
  timing_.precompute_s = seconds_since(t0);
}

bool OperatorSet::has(Op op) const { return std::find(ops_.begin(), ops_.end(), op) != ops_.end(); }

int OperatorSet::index(Op op) const {
  const auto it = std::find(ops_.begin(), ops_.end(), op);
  if (it == ops_.end()) throw ConfigError("operator not available in this operator set");
  return static_cast<int>(it - ops_.begin());
}

const CMatrix& OperatorSet::matrix(Op op) const {
  if (storage_ != Storage::dense) throw ConfigError("matrix() requires dense storage");
  return dense_[index(op)];
}

void OperatorSet::assemble_dense(bool parallel) {
  const Discretization& d = *disc_;
  const int nn = d.size(), nops = static_cast<int>(ops_.size()), pp = d.per_patch();
  dense_.assign(nops, CMatrix::Zero(nn, nn));
  const auto& nodes = d.nodes();
  const geometry::Scene& scene = d.scene();
  const bool all_normal = std::all_of(ops_.begin(), ops_.end(), is_normal_op);
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (int i = 0; i < nn; ++i) {
    const kernels::KernelPoint& x = nodes[i].kp;
    const auto& adj = d.adjacency(i);
    std::vector<std::vector<cd>> rows;
    for (int q = 0; q < d.patch_count(); ++q) {
      const bool flat = coplanar(scene, nodes[i].patch, q);
      if (flat && all_normal) continue;
      const auto a = std::find_if(adj.begin(), adj.end(), [q](const Adjacency& e) { return e.patch == q; });
      if (a != adj.end()) {
        adjacent_rows(d, x, *a, k_, ops_, rows, i);
        for (int r = 0; r < nops; ++r) {
          if (flat && is_normal_op(ops_[r])) continue;
          for (int m = 0; m < pp; ++m) dense_[r](i, d.offset(q) + m) = rows[r][m];
        }
        continue;
      }
      for (int m = 0; m < pp; ++m) {
        const Node& s = nodes[d.offset(q) + m];
        const kernels::LayerValues lv = kernels::kernel_layers(x, s.kp, k_, d.dim());
        for (int r = 0; r < nops; ++r) {
          if (flat && is_normal_op(ops_[r])) continue;
          dense_[r](i, d.offset(q) + m) = op_value(ops_[r], lv, s.kp.jacobian) * s.weight;
        }
      }
    }
  }
}

void OperatorSet::precompute_blocks(bool parallel) {
  const Discretization& d = *disc_;
  const int nn = d.size(), nops = static_cast<int>(ops_.size()), pp = d.per_patch();
  blocks_.assign(nops, std::vector<std::vector<cd>>(nn));
  const auto& nodes = d.nodes();
  const geometry::Scene& scene = d.scene();
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (int i = 0; i < nn; ++i) {
    const auto& adj = d.adjacency(i);
    for (int r = 0; r < nops; ++r) blocks_[r][i].assign(adj.size() * pp, 0.0);
    std::vector<std::vector<cd>> rows;
    for (std::size_t a = 0; a < adj.size(); ++a) {
      const bool flat = coplanar(scene, nodes[i].patch, adj[a].patch);
      std::vector<Op> need;
      std::vector<int> slot;
      for (int r = 0; r < nops; ++r)
        if (!(flat && is_normal_op(ops_[r]))) {
          need.push_back(ops_[r]);
          slot.push_back(r);
        }
      if (need.empty()) continue;
      adjacent_rows(d, nodes[i].kp, adj[a], k_, need, rows, i);
      for (std::size_t s = 0; s < need.size(); ++s)
        std::copy(rows[s].begin(), rows[s].end(), blocks_[slot[s]][i].begin() + a * pp);
    }
  }
}

void OperatorSet::apply_target(int i, const std::vector<std::pair<Op, CVector>>& requests,
                               std::vector<CVector>& out, std::vector<std::vector<cd>>& scratch) const {
  const Discretization& d = *disc_;
  const auto& nodes = d.nodes();
  const geometry::Scene& scene = d.scene();
  const int pp = d.per_patch(), nr = static_cast<int>(requests.size());
  const kernels::KernelPoint& x = nodes[i].kp;
  const auto& adj = d.adjacency(i);
  std::vector<cd> acc(nr, 0.0);
  bool all_normal = true;
  for (const auto& rq : requests) all_normal = all_normal && is_normal_op(rq.first);

  std::vector<Op> ops;
  for (const auto& rq : requests)
    if (std::find(ops.begin(), ops.end(), rq.first) == ops.end()) ops.push_back(rq.first);

  for (int q = 0; q < d.patch_count(); ++q) {
    const bool flat = coplanar(scene, nodes[i].patch, q);
    if (flat && all_normal) continue;
    const int o = d.offset(q);
    const auto a = std::find_if(adj.begin(), adj.end(), [q](const Adjacency& e) { return e.patch == q; });
    if (a != adj.end()) {
      const std::size_t ai = static_cast<std::size_t>(a - adj.begin());
      if (storage_ == Storage::on_the_fly) adjacent_rows(d, x, *a, k_, ops, scratch, i);
      for (int r = 0; r < nr; ++r) {
        const Op op = requests[r].first;
        if (flat && is_normal_op(op)) continue;
        const cd* row;
        if (storage_ == Storage::on_the_fly) {
          row = scratch[std::find(ops.begin(), ops.end(), op) - ops.begin()].data();
        } else {
          row = blocks_[index(op)][i].data() + ai * pp;
        }
        const CVector& phi = requests[r].second;
        cd s = 0.0;
        for (int m = 0; m < pp; ++m) s += row[m] * phi[o + m];
        acc[r] += s;
      }
      continue;
    }
    for (int m = 0; m < pp; ++m) {
      const Node& s = nodes[o + m];
      const kernels::LayerValues lv = kernels::kernel_layers(x, s.kp, k_, d.dim());
      for (int r = 0; r < nr; ++r) {
        const Op op = requests[r].first;
        if (flat && is_normal_op(op)) continue;
        acc[r] += op_value(op, lv, s.kp.jacobian) * s.weight * requests[r].second[o + m];
      }
    }
  }
  for (int r = 0; r < nr; ++r) out[r][i] = acc[r];
}

std::vector<CVector> OperatorSet::apply_many(const std::vector<std::pair<Op, CVector>>& requests,
                                             bool parallel) const {
  const auto t0 = clock_type::now();
  const int nn = disc_->size();
  for (const auto& rq : requests) {
    if (rq.second.size() != nn) throw ConfigError("density length does not match the discretization");
    if (storage_ != Storage::on_the_fly) index(rq.first);
  }
  std::vector<CVector> out(requests.size(), CVector::Zero(nn));
  if (storage_ == Storage::dense) {
    for (std::size_t r = 0; r < requests.size(); ++r) out[r] = dense_[index(requests[r].first)] * requests[r].second;
  } else {
#pragma omp parallel if (parallel)
    {
      std::vector<std::vector<cd>> scratch;
#pragma omp for schedule(dynamic, 8)
      for (int i = 0; i < nn; ++i) apply_target(i, requests, out, scratch);
    }
  }
  timing_.apply_s += seconds_since(t0);
  ++timing_.applications;
  return out;
}

CVector OperatorSet::apply(Op op, const CVector& phi) const { return apply_many({{op, phi}}, true)[0]; }

CVector OperatorSet::apply_serial(Op op, const CVector& phi) const {
  if (storage_ != Storage::dense) return apply_many({{op, phi}}, false)[0];
  const CMatrix& m = dense_[index(op)];
  CVector out = CVector::Zero(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    cd s = 0.0;
    for (int j = 0; j < m.cols(); ++j) s += m(i, j) * phi[j];
    out[i] = s;
  }
  return out;
}

CVector apply_hyper(const OperatorSet& ops, const CVector& phi, const TangentData* tangent, bool parallel,
                    bool weighted) {
  const Discretization& d = ops.disc();
  const auto& nodes = d.nodes();
  const auto& patches = d.scene().patches;
  const int nn = d.size(), dim = d.dim();
  const double k = ops.wavenumber();
  const CVector du = tangent ? tangent->du : d.derivative_u(phi);
  const CVector dv = dim == 3 ? (tangent ? tangent->dv : d.derivative_v(phi)) : CVector();

  std::vector<std::pair<Op, CVector>> req;
  if (dim == 2) {
    CVector w(nn);
    for (int m = 0; m < nn; ++m) w[m] = double(patches[nodes[m].patch].orientation()) * du[m];
    req.emplace_back(Op::single_param, w);
  } else {
    for (int c = 0; c < 3; ++c) {
      CVector w(nn);
      for (int m = 0; m < nn; ++m) {
        const Node& s = nodes[m];
        const double o = patches[s.patch].orientation();
        w[m] = s.kp.alpha[c] * o * (du[m] * s.rv[c] - dv[m] * s.ru[c]);
      }
      req.emplace_back(Op::single_param, w);
    }
  }
  const int weak_count = static_cast<int>(req.size());
  for (int c = 0; c < dim; ++c) {
    CVector z(nn);
    for (int m = 0; m < nn; ++m) z[m] = nodes[m].kp.cof[c] * nodes[m].kp.normal[c] * phi[m];
    req.emplace_back(Op::single, z);
  }
  const std::vector<CVector> out = ops.apply_many(req, parallel);

  CVector res = CVector::Zero(nn);
  if (dim == 2) {
    const CVector vu = d.derivative_u(out[0]);
    for (int i = 0; i < nn; ++i)
      res[i] = double(patches[nodes[i].patch].orientation()) * vu[i] / (weighted ? 1.0 : nodes[i].kp.jacobian);
  } else {
    for (int c = 0; c < 3; ++c) {
      const CVector vu = d.derivative_u(out[c]);
      const CVector vv = d.derivative_v(out[c]);
      for (int i = 0; i < nn; ++i) {
        const Node& t = nodes[i];
        const double o = patches[t.patch].orientation();
        res[i] += t.kp.alpha[c] * o * (vu[i] * t.rv[c] - vv[i] * t.ru[c]) / (weighted ? 1.0 : t.kp.jacobian);
      }
    }
  }
  for (int c = 0; c < dim; ++c)
    for (int i = 0; i < nn; ++i)
      res[i] += k * k * nodes[i].kp.normal[c] * nodes[i].kp.cof[c] * out[weak_count + c][i] *
                (weighted ? nodes[i].kp.jacobian : 1.0);
  return res;
}

CVector eval_potential(const Discretization& d, double k, const std::vector<Vec3>& points, const CVector& psi,
                       const CVector& phi, bool parallel, const CVector* mu) {
  const int np = static_cast<int>(points.size()), pp = d.per_patch();
  const auto& nodes = d.nodes();
  const std::vector<Op> ops{Op::single, Op::double_layer, Op::single_param};
  CVector out(np);
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (int i = 0; i < np; ++i) {
    const kernels::KernelPoint x =
        kernels::make_kernel_point(points[i], Vec3::Zero(), 1.0, d.scene().profile);
    const auto adj = d.adjacency(points[i]);
    std::vector<std::vector<cd>> rows;
    cd acc = 0.0;
    for (int q = 0; q < d.patch_count(); ++q) {
      const int o = d.offset(q);
      const auto a = std::find_if(adj.begin(), adj.end(), [q](const Adjacency& e) { return e.patch == q; });
      if (a != adj.end()) {
        adjacent_rows(d, x, *a, k, ops, rows);
        for (int m = 0; m < pp; ++m) {
          acc += rows[0][m] * psi[o + m] - rows[1][m] * phi[o + m];
          if (mu) acc += rows[2][m] * (*mu)[o + m];
        }
        continue;
      }
      for (int m = 0; m < pp; ++m) {
        const Node& s = nodes[o + m];
        const kernels::LayerValues lv = kernels::kernel_layers(x, s.kp, k, d.dim());
        acc += s.weight * s.kp.jacobian * (lv.s * psi[o + m] - lv.k * phi[o + m]);
        if (mu) acc += s.weight * lv.s * (*mu)[o + m];
      }
    }
    out[i] = acc;
  }
  return out;
}

}  // namespace pmlbie::operators
