#include "pmlbie/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Core>

#include "pmlbie/cheb.hpp"
#include "pmlbie/kernels.hpp"
#include "pmlbie/specfun.hpp"

namespace pmlbie::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Walks a JSON object, recording the path for diagnostics and rejecting
// keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("config" + path_ + (key.empty() ? "" : "." + key) + ": " + what);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    if (!j_[key].is_number()) fail(key, "expected a number");
    return j_[key].get<double>();
  }

  int integer(const std::string& key, int def) {
    if (!has(key)) return def;
    if (!j_[key].is_number_integer()) fail(key, "expected an integer");
    return j_[key].get<int>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    if (!j_[key].is_boolean()) fail(key, "expected true or false");
    return j_[key].get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    if (!j_[key].is_string()) fail(key, "expected a string");
    return j_[key].get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    if (!has(key)) return def;
    if (!j_[key].is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j_[key]) {
      if (!v.is_number()) fail(key, "expected an array of numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& key, std::vector<int> def) {
    if (!has(key)) return def;
    if (!j_[key].is_array()) fail(key, "expected an array of integers");
    std::vector<int> out;
    for (const auto& v : j_[key]) {
      if (!v.is_number_integer()) fail(key, "expected an array of integers");
      out.push_back(v.get<int>());
    }
    return out;
  }

  std::optional<Vec3> point(const std::string& key, int dim) {
    if (!has(key)) return std::nullopt;
    const std::vector<double> v = numbers(key, {});
    if (static_cast<int>(v.size()) != dim) fail(key, "expected " + std::to_string(dim) + " coordinates");
    Vec3 p = Vec3::Zero();
    for (int i = 0; i < dim; ++i) p[i] = v[i];
    return p;
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Reader(j_.contains(key) ? j_[key] : empty, path_ + "." + key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_[key];
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(it.key(), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

ordered_json vec_json(const Vec3& v, int dim) {
  ordered_json a = ordered_json::array();
  for (int i = 0; i < dim; ++i) a.push_back(v[i]);
  return a;
}

double wavenumber(Reader& r, const std::string& name, double def) {
  const bool direct = r.has(name), scaled = r.has(name + "_over_pi");
  if (direct && scaled) r.fail(name, "give either " + name + " or " + name + "_over_pi, not both");
  if (scaled) return kPi * r.number(name + "_over_pi", 0.0);
  return r.number(name, def);
}

geometry::CustomCurve parse_curve(const json& j, const std::string& path) {
  Reader r(j, path);
  geometry::CustomCurve c;
  const std::string kind = r.string("kind", "poly");
  if (kind == "poly") {
    c.kind = geometry::CustomCurve::Kind::poly;
  } else if (kind == "trig") {
    c.kind = geometry::CustomCurve::Kind::trig;
  } else {
    r.fail("kind", "expected 'poly' or 'trig'");
  }
  c.cx = r.numbers("cx", {});
  c.cy = r.numbers("cy", {});
  c.ax = r.numbers("ax", {});
  c.bx = r.numbers("bx", {});
  c.ay = r.numbers("ay", {});
  c.by = r.numbers("by", {});
  c.t0 = r.number("t0", c.kind == geometry::CustomCurve::Kind::poly ? -1.0 : 0.0);
  c.t1 = r.number("t1", c.kind == geometry::CustomCurve::Kind::poly ? 1.0 : 2.0 * kPi);
  c.orientation = r.integer("orientation", 1);
  if (c.orientation != 1 && c.orientation != -1) r.fail("orientation", "expected 1 or -1");
  c.grade_lower = r.boolean("grade_lower", false);
  c.grade_upper = r.boolean("grade_upper", false);
  c.on_plane = r.boolean("on_plane", false);
  r.finish();
  return c;
}

std::string reference_name(ReferenceMode m) {
  switch (m) {
    case ReferenceMode::none: return "none";
    case ReferenceMode::manufactured: return "manufactured";
    case ReferenceMode::self: return "self";
  }
  return "none";
}

}  // namespace

Experiment experiment_from_string(const std::string& s) {
  if (s == "solve") return Experiment::solve;
  if (s == "convergence") return Experiment::convergence;
  if (s == "pml-sweep") return Experiment::pml_sweep;
  if (s == "field") return Experiment::field;
  if (s == "selftest") return Experiment::selftest;
  throw ConfigError("unknown experiment '" + s + "'");
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::solve: return "solve";
    case Experiment::convergence: return "convergence";
    case Experiment::pml_sweep: return "pml-sweep";
    case Experiment::field: return "field";
    case Experiment::selftest: return "selftest";
  }
  return "solve";
}

int dimension(geometry::SceneKind kind) { return kind == geometry::SceneKind::ball3d ? 3 : 2; }

RunConfig parse_config(const json& j) {
  Reader r(j, "");
  RunConfig c;
  c.scene = geometry::scene_kind_from_string(r.string("scene", "disc2d"));
  const int dim = dimension(c.scene);
  const bool layered = c.scene == geometry::SceneKind::bump2layer;
  c.bc = geometry::bc_from_string(r.string("bc", layered ? "transmission" : "dirichlet"));
  c.k = wavenumber(r, "k", kPi);
  c.k2 = wavenumber(r, "k2", 2.0 * kPi);
  if (!(c.k > 0.0)) r.fail("k", "must be positive");
  if (!(c.k2 > 0.0)) r.fail("k2", "must be positive");

  const std::string data = r.string("data", "manufactured");
  if (data == "manufactured") {
    c.mode = solve::DataMode::manufactured;
  } else if (data == "physical") {
    c.mode = solve::DataMode::physical;
  } else {
    r.fail("data", "expected 'manufactured' or 'physical'");
  }

  {
    Reader ri = r.child("incidence");
    const std::string kind = ri.string("kind", "plane_wave");
    if (kind == "plane_wave") {
      c.incidence.kind = kernels::Incidence::Kind::plane_wave;
    } else if (kind == "point_source") {
      c.incidence.kind = kernels::Incidence::Kind::point_source;
    } else {
      ri.fail("kind", "expected 'plane_wave' or 'point_source'");
    }
    c.incidence.theta = ri.number("theta", 0.0);
    c.incidence.phi = ri.number("phi", 0.0);
    if (auto p = ri.point("source", dim)) c.incidence.source = *p;
    if (c.incidence.kind == kernels::Incidence::Kind::point_source && !ri.has("source"))
      ri.fail("source", "point-source incidence needs a source location");
    if (c.incidence.kind == kernels::Incidence::Kind::plane_wave && std::abs(c.incidence.theta) >= 0.5 * kPi)
      ri.fail("theta", "plane waves must travel downward (|theta| < pi/2)");
    ri.finish();
  }
  c.source = r.point("source", dim);
  c.source_upper = r.point("source_upper", dim);
  c.source_lower = r.point("source_lower", dim);

  {
    Reader rp = r.child("pml");
    const std::vector<double> a = rp.numbers("a", dim == 3 ? std::vector<double>{2.0, 2.0, 1000.0}
                                                           : std::vector<double>{4.0, 1000.0});
    if (static_cast<int>(a.size()) != dim) rp.fail("a", "expected " + std::to_string(dim) + " half widths");
    for (int i = 0; i < dim; ++i) {
      if (!(a[i] > 0.0)) rp.fail("a", "half widths must be positive");
      c.a[i] = a[i];
    }
    if (rp.has("T")) {
      const std::vector<double> t = rp.numbers("T", {});
      if (static_cast<int>(t.size()) != dim) rp.fail("T", "expected " + std::to_string(dim) + " thicknesses");
      std::array<double, 3> th{1.0, 1.0, 1.0};
      for (int i = 0; i < dim; ++i) {
        if (!(t[i] > 0.0)) rp.fail("T", "thicknesses must be positive");
        th[i] = t[i];
      }
      c.thickness = th;
    }
    c.t_over_lambda = rp.number("T_over_lambda", 2.0);
    if (!(c.t_over_lambda > 0.0)) rp.fail("T_over_lambda", "must be positive");
    c.strength = rp.number("S", 6.0);
    c.order = rp.integer("P", 6);
    if (!(c.strength > 0.0)) rp.fail("S", "must be positive");
    if (c.order < 2) rp.fail("P", "must be >= 2");
    rp.finish();
  }

  {
    Reader rg = r.child("geometry");
    geometry::SceneParams& g = c.geometry;
    g.flat_physical = rg.integer("flat_physical", 0);
    g.flat_pml = rg.integer("flat_pml", 0);
    g.obstacle = rg.integer("obstacle_patches", 0);
    if (auto p = rg.point("center", dim)) {
      g.obstacle_center = *p;
      g.obstacle_center_set = true;
    }
    g.obstacle_size = rg.number("size", 1.0);
    if (!(g.obstacle_size > 0.0)) rg.fail("size", "must be positive");
    g.bump_radius = rg.number("bump_radius", 1.0);
    if (!(g.bump_radius > 0.0)) rg.fail("bump_radius", "must be positive");
    g.corner_p = rg.integer("corner_p", 6);
    if (g.corner_p < 2) rg.fail("corner_p", "must be >= 2");
    g.screen_half_length = rg.number("screen_half_length", 0.0);
    g.screen_offset = rg.number("screen_offset", 0.5);
    g.screen_samples = rg.integer("screen_samples", 0);
    if (rg.has("curves")) {
      const json& cs = rg.raw("curves");
      if (!cs.is_array()) rg.fail("curves", "expected an array");
      for (std::size_t i = 0; i < cs.size(); ++i)
        g.custom.push_back(parse_curve(cs[i], ".geometry.curves[" + std::to_string(i) + "]"));
    }
    if (auto p = rg.point("custom_source", dim)) g.custom_source = *p;
    rg.finish();
  }

  {
    Reader rd = r.child("disc");
    c.disc.n = rd.integer("N", 16);
    c.disc.n_beta = rd.integer("N_beta", 200);
    c.disc.p = rd.integer("p", 8);
    c.disc.delta = rd.number("delta", 0.1);
    if (c.disc.n < 4) rd.fail("N", "must be >= 4");
    if (c.disc.n_beta < 2 || c.disc.n_beta % 2) rd.fail("N_beta", "must be even and >= 2");
    if (c.disc.p < 2) rd.fail("p", "must be >= 2");
    if (!(c.disc.delta > 0.0)) rd.fail("delta", "must be positive");
    rd.finish();
  }

  {
    Reader rs = r.child("gmres");
    c.gmres.tol = rs.number("tol", 1e-12);
    c.gmres.restart = rs.integer("restart", 200);
    c.gmres.max_iter = rs.integer("max_iter", 1000);
    if (!(c.gmres.tol > 0.0 && c.gmres.tol < 1.0)) rs.fail("tol", "must lie in (0, 1)");
    if (c.gmres.restart < 1) rs.fail("restart", "must be >= 1");
    if (c.gmres.max_iter < 1) rs.fail("max_iter", "must be >= 1");
    rs.finish();
  }

  {
    Reader rr = r.child("reference");
    const std::string def = c.mode == solve::DataMode::manufactured ? "manufactured" : "none";
    c.reference_set = rr.has("mode");
    const std::string m = rr.string("mode", def);
    if (m == "manufactured") {
      c.reference = ReferenceMode::manufactured;
    } else if (m == "self") {
      c.reference = ReferenceMode::self;
    } else if (m == "none") {
      c.reference = ReferenceMode::none;
    } else {
      rr.fail("mode", "expected 'manufactured', 'self' or 'none'");
    }
    if (c.reference == ReferenceMode::manufactured && c.mode != solve::DataMode::manufactured)
      rr.fail("mode", "a manufactured reference needs manufactured data");
    c.n_ref = rr.integer("N_ref", 96);
    if (c.n_ref < 4) rr.fail("N_ref", "must be >= 4");
    rr.finish();
  }

  {
    Reader rc = r.child("convergence");
    c.n_list = rc.integers("N", {16, 32, 64});
    if (c.n_list.empty()) rc.fail("N", "needs at least one entry");
    for (std::size_t i = 0; i < c.n_list.size(); ++i) {
      if (c.n_list[i] < 4) rc.fail("N", "entries must be >= 4");
      if (i > 0 && c.n_list[i] <= c.n_list[i - 1]) rc.fail("N", "entries must increase");
    }
    rc.finish();
  }

  {
    Reader rw = r.child("pml_sweep");
    c.sweep = rw.numbers("T_over_lambda", {0.5, 1.0, 1.5, 2.0, 2.5, 3.0});
    if (c.sweep.empty()) rw.fail("T_over_lambda", "needs at least one entry");
    for (double t : c.sweep)
      if (!(t > 0.0)) rw.fail("T_over_lambda", "entries must be positive");
    rw.finish();
  }

  {
    Reader rf = r.child("field");
    const char* axes[3] = {"x1", "x2", "x3"};
    for (int i = 0; i < dim; ++i) {
      const std::vector<double> def{-0.5 * c.a[i], 0.5 * c.a[i], 41.0};
      std::vector<double> v = rf.numbers(axes[i], def);
      if (v.size() != 3) rf.fail(axes[i], "expected [lo, hi, samples]");
      if (v[2] < 1.0 || v[2] != std::floor(v[2])) rf.fail(axes[i], "sample count must be a positive integer");
      if (!(v[0] <= v[1])) rf.fail(axes[i], "lo must not exceed hi");
      if (v[0] < -c.a[i] || v[1] > c.a[i]) rf.fail(axes[i], "grid must lie inside the physical box");
      c.field.lo[i] = v[0];
      c.field.hi[i] = v[1];
      c.field.n[i] = static_cast<int>(v[2]);
    }
    if (dim == 2 && rf.has("x3")) rf.fail("x3", "2D scenes have no x3 axis");
    const std::string q = rf.string("quantity", "total");
    if (q != "total" && q != "scattered") rf.fail("quantity", "expected 'total' or 'scattered'");
    c.field.total = q == "total";
    rf.finish();
  }

  c.table_timings = r.boolean("table_timings", false);
  r.has("comment");
  r.finish();

  if (c.scene != geometry::SceneKind::custom &&
      (c.bc == geometry::BoundaryCondition::transmission) != layered)
    throw ConfigError("config.bc: the bump2layer scene goes with 'transmission' and vice versa");
  if (c.bc == geometry::BoundaryCondition::transmission && c.mode == solve::DataMode::physical &&
      c.incidence.kind != kernels::Incidence::Kind::plane_wave)
    throw ConfigError("config.incidence.kind: two-layer problems need plane-wave incidence");

  ordered_json& o = c.resolved;
  o["scene"] = geometry::to_string(c.scene);
  o["bc"] = geometry::to_string(c.bc);
  o["k"] = c.k;
  if (c.bc == geometry::BoundaryCondition::transmission) o["k2"] = c.k2;
  o["data"] = data;
  o["incidence"] = {{"kind", c.incidence.kind == kernels::Incidence::Kind::plane_wave ? "plane_wave" : "point_source"},
                    {"theta", c.incidence.theta},
                    {"phi", c.incidence.phi},
                    {"source", vec_json(c.incidence.source, dim)}};
  if (c.source) o["source"] = vec_json(*c.source, dim);
  if (c.source_upper) o["source_upper"] = vec_json(*c.source_upper, dim);
  if (c.source_lower) o["source_lower"] = vec_json(*c.source_lower, dim);
  ordered_json pml;
  pml["a"] = std::vector<double>(c.a.begin(), c.a.begin() + dim);
  if (c.thickness) pml["T"] = std::vector<double>(c.thickness->begin(), c.thickness->begin() + dim);
  pml["T_over_lambda"] = c.t_over_lambda;
  pml["S"] = c.strength;
  pml["P"] = c.order;
  o["pml"] = pml;
  o["geometry"] = {{"flat_physical", c.geometry.flat_physical},
                   {"flat_pml", c.geometry.flat_pml},
                   {"obstacle_patches", c.geometry.obstacle},
                   {"size", c.geometry.obstacle_size},
                   {"bump_radius", c.geometry.bump_radius},
                   {"corner_p", c.geometry.corner_p},
                   {"screen_half_length", c.geometry.screen_half_length},
                   {"screen_offset", c.geometry.screen_offset},
                   {"screen_samples", c.geometry.screen_samples},
                   {"custom_curves", c.geometry.custom.size()}};
  if (c.geometry.obstacle_center_set) o["geometry"]["center"] = vec_json(c.geometry.obstacle_center, dim);
  o["disc"] = {{"N", c.disc.n}, {"N_beta", c.disc.n_beta}, {"p", c.disc.p}, {"delta", c.disc.delta}};
  o["gmres"] = {{"tol", c.gmres.tol}, {"restart", c.gmres.restart}, {"max_iter", c.gmres.max_iter}};
  o["reference"] = {{"mode", reference_name(c.reference)}, {"N_ref", c.n_ref}};
  o["convergence"] = {{"N", c.n_list}};
  o["pml_sweep"] = {{"T_over_lambda", c.sweep}};
  ordered_json fld;
  const char* axes[3] = {"x1", "x2", "x3"};
  for (int i = 0; i < dim; ++i) fld[axes[i]] = {c.field.lo[i], c.field.hi[i], c.field.n[i]};
  fld["quantity"] = c.field.total ? "total" : "scattered";
  o["field"] = fld;
  o["table_timings"] = c.table_timings;
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

double wavelength(const RunConfig& cfg) {
  const double k = cfg.bc == geometry::BoundaryCondition::transmission ? std::min(cfg.k, cfg.k2) : cfg.k;
  return 2.0 * kPi / k;
}

pml::PmlProfile make_profile(const RunConfig& cfg, double t_over_lambda) {
  const int dim = dimension(cfg.scene);
  std::array<double, 3> t{1.0, 1.0, 1.0};
  std::array<double, 3> a{1.0, 1.0, 1.0};
  for (int i = 0; i < dim; ++i) {
    a[i] = cfg.a[i];
    t[i] = cfg.thickness ? (*cfg.thickness)[i] : t_over_lambda * wavelength(cfg);
  }
  return pml::PmlProfile(dim, a, t, cfg.strength, cfg.order);
}

solve::ProblemSpec make_problem(const RunConfig& cfg, int n, double t_over_lambda) {
  const pml::PmlProfile prof = make_profile(cfg, t_over_lambda);
  geometry::SceneParams sp = cfg.geometry;
  sp.wavelength = wavelength(cfg);
  auto scene = std::make_shared<geometry::Scene>(geometry::build_scene(cfg.scene, cfg.bc, prof, sp));
  solve::ProblemSpec ps;
  ps.scene = scene;
  ps.k = cfg.k;
  ps.k2 = cfg.k2;
  ps.incidence = cfg.incidence;
  ps.mode = cfg.mode;
  ps.source = cfg.source ? *cfg.source : scene->interior_point;
  const int dim = scene->dim;
  ps.source_upper = cfg.source_upper ? *cfg.source_upper : Vec3(-0.2, 2.0, 0.0);
  ps.source_lower = cfg.source_lower ? *cfg.source_lower : Vec3(0.1, 0.3, 0.0);
  if (dim == 2) {
    ps.source[2] = 0.0;
    ps.source_upper[2] = 0.0;
    ps.source_lower[2] = 0.0;
  }
  ps.disc = cfg.disc;
  ps.disc.n = n;
  ps.gmres = cfg.gmres;
  ps.parallel = cfg.parallel;
  if (ps.mode == solve::DataMode::manufactured) {
    if (scene->bc != geometry::BoundaryCondition::transmission) {
      if (scene->region && scene->region(ps.source) != 0)
        throw ConfigError("config.source: the manufactured source must lie outside the fluid");
    } else if (scene->region) {
      if (scene->region(ps.source_upper) != 1)
        throw ConfigError("config.source_upper: must lie in the upper layer");
      if (scene->region(ps.source_lower) != 2)
        throw ConfigError("config.source_lower: must lie in the lower layer");
    }
  }
  return ps;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string table_csv(const std::vector<TableRow>& rows, bool with_timings) {
  std::ostringstream os;
  os << "k,N,N_DOF,N_iter,residual,eps_inf,t_precompute_s,t_iter_s\n";
  for (const TableRow& r : rows) {
    os << format_double(r.k) << ',' << r.n << ',' << r.n_dof << ',' << r.n_iter << ',' << format_double(r.residual)
       << ',' << (r.eps_inf ? format_double(*r.eps_inf) : "") << ',';
    if (with_timings) os << format_double(r.t_precompute_s) << ',' << format_double(r.t_iter_s);
    else os << ',';
    os << '\n';
  }
  return os.str();
}

namespace {

using clock_type = std::chrono::steady_clock;

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
}

// Relative max-norm error; absolute when the reference vanishes.
double field_error(const CVector& numeric, const CVector& reference) {
  const double den = reference.size() ? reference.cwiseAbs().maxCoeff() : 0.0;
  const double num = (numeric - reference).cwiseAbs().maxCoeff();
  return den > 0.0 ? num / den : num;
}

std::string field_csv(const std::vector<Vec3>& pts, const CVector& u, const std::vector<bool>& valid, int dim) {
  std::ostringstream os;
  os << (dim == 3 ? "x1,x2,x3,re_u,im_u,abs_u\n" : "x1,x2,re_u,im_u,abs_u\n");
  int j = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int d = 0; d < dim; ++d) os << format_double(pts[i][d]) << ',';
    if (valid[i]) {
      const cd v = u[j++];
      os << format_double(v.real()) << ',' << format_double(v.imag()) << ',' << format_double(std::abs(v)) << '\n';
    } else {
      os << "nan,nan,nan\n";
    }
  }
  return os.str();
}

struct Runner {
  const RunConfig& cfg;
  std::filesystem::path out;
  std::ostream& log;
  ordered_json rows_json = ordered_json::array();
  std::vector<TableRow> rows;
  bool failed = false;
  std::string message;

  // Screen values of the chosen reference, computed once.
  std::optional<CVector> self_reference;

  CVector reference_on_screen(double t_over_lambda) {
    if (self_reference) return *self_reference;
    log << "reference solve at N = " << cfg.n_ref << "\n";
    const solve::ProblemSpec ps = make_problem(cfg, cfg.n_ref, t_over_lambda);
    const solve::Solution sol = solve::solve(ps);
    if (!sol.converged) throw SolverError("reference solve did not converge");
    const solve::FieldValues fv = solve::eval_field(sol, ps.scene->screen);
    self_reference = cfg.mode == solve::DataMode::physical ? fv.total : fv.scattered;
    return *self_reference;
  }

  solve::Solution solve_row(int n, double t_over_lambda, double ref_t_over_lambda) {
    const solve::ProblemSpec ps = make_problem(cfg, n, t_over_lambda);
    log << "solving " << geometry::to_string(cfg.scene) << " " << geometry::to_string(cfg.bc) << " N = " << n
        << " T/lambda = " << t_over_lambda << "\n";
    solve::Solution sol = solve::solve(ps);
    TableRow row;
    row.k = cfg.k;
    row.n = n;
    row.n_dof = sol.disc->size();
    row.n_iter = sol.iterations;
    row.residual = sol.residual;
    row.t_precompute_s = sol.t_precompute_s;
    row.t_iter_s = sol.t_iter_s;
    row.t_over_lambda = t_over_lambda;
    row.converged = sol.converged;
    row.warnings = sol.warnings;
    if (cfg.reference != ReferenceMode::none) {
      const solve::FieldValues fv = solve::eval_field(sol, ps.scene->screen);
      if (cfg.reference == ReferenceMode::manufactured) {
        row.eps_inf = field_error(fv.scattered, fv.exact);
      } else {
        const CVector ref = reference_on_screen(ref_t_over_lambda);
        row.eps_inf = field_error(cfg.mode == solve::DataMode::physical ? fv.total : fv.scattered, ref);
      }
    }
    for (const auto& w : sol.warnings) log << "warning: " << w << "\n";
    log << "  N_DOF = " << row.n_dof << " N_iter = " << row.n_iter << " residual = " << row.residual
        << (row.eps_inf ? " eps_inf = " + format_double(*row.eps_inf) : std::string()) << "\n";
    ordered_json rj;
    rj["k"] = row.k;
    rj["N"] = row.n;
    rj["N_DOF"] = row.n_dof;
    rj["N_iter"] = row.n_iter;
    rj["residual"] = row.residual;
    rj["eps_inf"] = row.eps_inf ? ordered_json(*row.eps_inf) : ordered_json(nullptr);
    rj["T_over_lambda"] = t_over_lambda;
    rj["T"] = ps.scene->profile.thickness(0);
    rj["t_precompute_s"] = row.t_precompute_s;
    rj["t_iter_s"] = row.t_iter_s;
    rj["converged"] = row.converged;
    rj["history"] = sol.history;
    rj["warnings"] = row.warnings;
    rows_json.push_back(rj);
    rows.push_back(row);
    if (!sol.converged) {
      failed = true;
      message = "GMRES did not reach the tolerance at N = " + std::to_string(n);
    }
    return sol;
  }

  void write_screen_field(const solve::Solution& sol) {
    const std::vector<Vec3>& pts = sol.scene->screen;
    const solve::FieldValues fv = solve::eval_field(sol, pts);
    const bool total = cfg.mode == solve::DataMode::physical && cfg.field.total;
    write_text(out / "field.csv",
               field_csv(pts, total ? fv.total : fv.scattered, std::vector<bool>(pts.size(), true), sol.scene->dim));
  }

  void write_grid_field(const solve::Solution& sol) {
    const geometry::Scene& scene = *sol.scene;
    const int dim = scene.dim;
    const FieldGrid& g = cfg.field;
    std::vector<Vec3> pts, inside;
    std::vector<bool> valid;
    auto coord = [&](int axis, int i) {
      return g.n[axis] == 1 ? g.lo[axis] : g.lo[axis] + (g.hi[axis] - g.lo[axis]) * i / (g.n[axis] - 1);
    };
    for (int i3 = 0; i3 < (dim == 3 ? g.n[2] : 1); ++i3)
      for (int i2 = 0; i2 < g.n[1]; ++i2)
        for (int i1 = 0; i1 < g.n[0]; ++i1) {
          const Vec3 x(coord(0, i1), coord(1, i2), dim == 3 ? coord(2, i3) : 0.0);
          pts.push_back(x);
          const bool ok = !scene.region || scene.region(x) != 0;
          valid.push_back(ok);
          if (ok) inside.push_back(x);
        }
    const solve::FieldValues fv = solve::eval_field(sol, inside);
    const bool total = cfg.mode == solve::DataMode::physical && cfg.field.total;
    write_text(out / "field.csv", field_csv(pts, total ? fv.total : fv.scattered, valid, dim));
  }
};

ordered_json environment(int threads) {
  ordered_json e;
  e["threads"] = threads;
  e["openmp"] = _OPENMP;
  e["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
#ifdef __VERSION__
  e["compiler"] = __VERSION__;
#endif
#ifdef NDEBUG
  e["assertions"] = false;
#else
  e["assertions"] = true;
#endif
  return e;
}

}  // namespace

RunResult run(Experiment e, const RunConfig& cfg, const std::string& out_dir, int threads, std::ostream& log) {
  RunResult result;
  const std::filesystem::path out(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) {
    result.status = 1;
    result.message = "cannot create output directory '" + out_dir + "': " + ec.message();
    return result;
  }
  if (threads > 0) omp_set_num_threads(threads);
  const int used_threads = omp_get_max_threads();
  const auto t0 = clock_type::now();

  RunConfig resolved = cfg;
  if (!cfg.reference_set && cfg.mode == solve::DataMode::physical &&
      (e == Experiment::convergence || e == Experiment::pml_sweep)) {
    resolved.reference = ReferenceMode::self;
    resolved.resolved["reference"]["mode"] = "self";
  }
  Runner r{resolved, out, log, ordered_json::array(), {}, false, {}, std::nullopt};
  ordered_json extra;
  std::vector<std::string> artifacts;
  try {
    switch (e) {
      case Experiment::solve: {
        const solve::Solution sol = r.solve_row(cfg.disc.n, cfg.t_over_lambda, cfg.t_over_lambda);
        r.write_screen_field(sol);
        artifacts = {"table.csv", "field.csv", "run.json"};
        break;
      }
      case Experiment::convergence: {
        std::optional<solve::Solution> last;
        for (int n : cfg.n_list) {
          last = r.solve_row(n, cfg.t_over_lambda, cfg.t_over_lambda);
          if (r.failed) break;
        }
        if (last) r.write_screen_field(*last);
        artifacts = {"table.csv", "field.csv", "run.json"};
        break;
      }
      case Experiment::pml_sweep: {
        const double t_ref = *std::max_element(cfg.sweep.begin(), cfg.sweep.end());
        std::ostringstream sweep;
        sweep << "T_over_lambda,T,eps_inf\n";
        for (double t : cfg.sweep) {
          const solve::Solution sol = r.solve_row(cfg.disc.n, t, t_ref);
          const TableRow& row = r.rows.back();
          sweep << format_double(t) << ',' << format_double(sol.scene->profile.thickness(0)) << ','
                << (row.eps_inf ? format_double(*row.eps_inf) : "") << '\n';
          if (r.failed) break;
        }
        write_text(out / "sweep.csv", sweep.str());
        artifacts = {"table.csv", "sweep.csv", "run.json"};
        break;
      }
      case Experiment::field: {
        const solve::Solution sol = r.solve_row(cfg.disc.n, cfg.t_over_lambda, cfg.t_over_lambda);
        r.write_grid_field(sol);
        artifacts = {"table.csv", "field.csv", "run.json"};
        break;
      }
      case Experiment::selftest: {
        const std::vector<SelfCheck> checks = selftest();
        std::ostringstream os;
        os << "check,pass,detail\n";
        ordered_json cj = ordered_json::array();
        for (const SelfCheck& c : checks) {
          log << (c.pass ? "PASS " : "FAIL ") << c.name << "  " << c.detail << "\n";
          os << c.name << ',' << (c.pass ? 1 : 0) << ",\"" << c.detail << "\"\n";
          cj.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
          if (!c.pass) {
            r.failed = true;
            r.message = "selftest check '" + c.name + "' failed";
          }
        }
        write_text(out / "selftest.csv", os.str());
        extra["checks"] = cj;
        artifacts = {"selftest.csv", "run.json"};
        break;
      }
    }
    result.status = r.failed ? 2 : 0;
    result.message = r.message;
  } catch (const ConfigError& ex) {
    result.status = 1;
    result.message = ex.what();
  } catch (const std::exception& ex) {
    result.status = 2;
    result.message = ex.what();
  }

  if (e != Experiment::selftest && !r.rows.empty())
    write_text(out / "table.csv", table_csv(r.rows, cfg.table_timings));
  ordered_json rj;
  rj["experiment"] = to_string(e);
  rj["status"] = result.status == 0 ? "ok" : result.status == 1 ? "validation_error" : "solver_failure";
  rj["partial"] = result.status != 0;
  rj["message"] = result.message;
  rj["config"] = resolved.resolved;
  rj["environment"] = environment(used_threads);
  rj["wall_s"] = std::chrono::duration<double>(clock_type::now() - t0).count();
  rj["rows"] = r.rows_json;
  for (auto it = extra.begin(); it != extra.end(); ++it) rj[it.key()] = it.value();
  rj["artifacts"] = artifacts;
  try {
    write_text(out / "run.json", rj.dump(2) + "\n");
  } catch (const ConfigError& ex) {
    if (result.status == 0) result.status = 1;
    result.message = ex.what();
  }
  result.rows = r.rows;
  return result;
}

std::vector<SelfCheck> selftest() {
  std::vector<SelfCheck> out;
  auto add = [&](const std::string& name, bool pass, double value) {
    out.push_back({name, pass, format_double(value)});
  };
  auto guarded = [&](const std::string& name, const std::function<void()>& f) {
    try {
      f();
    } catch (const std::exception& ex) {
      out.push_back({name, false, ex.what()});
    }
  };

  guarded("specfun.hankel1", [&] {
    const cd h0 = specfun::hankel1(0, cd(1.0, 0.0)), h1 = specfun::hankel1(1, cd(1.0, 0.0));
    const double e = std::max(std::abs(h0 - cd(0.76519768655796655, 0.088256964215676957)),
                              std::abs(h1 - cd(0.44005058574493352, -0.78121282130028872)));
    add("specfun.hankel1", e <= 1e-13, e);
  });
  guarded("specfun.branch_sqrt", [&] {
    const double e = std::abs(specfun::branch_sqrt(cd(-4.0, 0.0)) - cd(0.0, 2.0));
    add("specfun.branch_sqrt", e == 0.0, e);
  });
  guarded("pml.ramp", [&] {
    const pml::PmlProfile p(2, {1.0, 1.0, 1.0}, {2.0, 2.0, 1.0});
    const cheb::ChebGrid gl = cheb::gauss_legendre(64);
    double num = 0.0;
    for (int i = 0; i < gl.n; ++i) num += gl.weights[i] * p.sigma(0, 2.0 + gl.nodes[i]);
    const double e = std::abs(num - p.ramp_integral(0)) + std::abs(p.sigma(0, 0.5)) + std::abs(p.sigma(0, 3.0) - 6.0);
    add("pml.ramp", e <= 1e-12, e);
  });
  guarded("cheb.fejer", [&] {
    const cheb::ChebGrid g = cheb::fejer_rule(16);
    double s = 0.0;
    for (int i = 0; i < g.n; ++i) s += g.weights[i] * std::pow(g.nodes[i], 10);
    add("cheb.fejer", std::abs(s - 2.0 / 11.0) <= 1e-14, std::abs(s - 2.0 / 11.0));
  });
  guarded("geometry.closed_normal", [&] {
    const pml::PmlProfile prof(2, {4.0, 1000.0, 1.0}, {4.0, 4.0, 1.0});
    geometry::SceneParams sp;
    const geometry::Scene s =
        geometry::build_scene(geometry::SceneKind::kite2d, geometry::BoundaryCondition::dirichlet, prof, sp);
    const cheb::ChebGrid g = cheb::fejer_rule(32);
    Vec3 acc = Vec3::Zero();
    double len = 0.0;
    for (const auto& p : s.patches) {
      if (p.plane_id() >= 0) continue;
      for (int i = 0; i < g.n; ++i) {
        const geometry::Frame f = p.frame(g.nodes[i]);
        acc += g.weights[i] * f.jacobian * f.normal;
        len += g.weights[i] * f.jacobian;
      }
    }
    add("geometry.closed_normal", acc.norm() <= 1e-8, acc.norm() / len);
  });
  guarded("kernels.green3d", [&] {
    const cd g = kernels::green_free(Vec3(0, 0, 0), Vec3(1, 0, 0), 2.0 * kPi, 3);
    add("kernels.green3d", std::abs(g - 1.0 / (4.0 * kPi)) <= 1e-15, std::abs(g - 1.0 / (4.0 * kPi)));
  });
  guarded("kernels.fresnel", [&] {
    const kernels::FresnelCoefficients f = kernels::fresnel(kernels::Incidence{}, 1.0, 2.0);
    const double e = std::abs(f.reflection + 1.0 / 3.0) + std::abs(f.transmission - 2.0 / 3.0);
    add("kernels.fresnel", e <= 1e-15, e);
  });
  guarded("operators.calderon", [&] {
    RunConfig c = parse_config(json::object());
    const solve::ProblemSpec ps = make_problem(c, 32, 2.0);
    const solve::CalderonResiduals res = solve::calderon_residuals(ps);
    add("operators.calderon", res.trace <= 1e-6 && res.normal <= 1e-3, std::max(res.trace, res.normal));
  });
  guarded("solve.gmres", [&] {
    const int n = 30;
    CVector d(n), b(n);
    for (int i = 0; i < n; ++i) {
      d[i] = cd(1.0 + i, 0.5 * i);
      b[i] = cd(1.0, -1.0 * i);
    }
    const solve::GmresResult g = solve::gmres([&](const CVector& x) -> CVector { return d.cwiseProduct(x); }, b, {});
    const double e = (d.cwiseProduct(g.x) - b).norm() / b.norm();
    add("solve.gmres", g.converged && e <= 1e-11, e);
  });
  guarded("solve.disc_dirichlet", [&] {
    RunConfig c = parse_config(json::object());
    const solve::ProblemSpec ps = make_problem(c, 16, 2.0);
    const solve::Solution sol = solve::solve(ps);
    const solve::FieldValues fv = solve::eval_field(sol, ps.scene->screen);
    const double e = solve::error_linf(fv.scattered, fv.exact);
    add("solve.disc_dirichlet", sol.converged && e <= 1e-2, e);
  });
  return out;
}

}  // namespace pmlbie::cli
