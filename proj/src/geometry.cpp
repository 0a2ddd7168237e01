#include "pmlbie/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace pmlbie::geometry {

namespace {

class Segment final : public Shape {
 public:
  Segment(Vec3 p0, Vec3 p1) : p0_(p0), p1_(p1) {}
  int dim() const override { return 2; }
  void eval(double u, double, Vec3& r, Vec3& ru, Vec3& rv) const override {
    r = 0.5 * (1.0 - u) * p0_ + 0.5 * (1.0 + u) * p1_;
    ru = 0.5 * (p1_ - p0_);
    rv.setZero();
  }

  Vec3 difference(double, double, double du, double) const override { return 0.5 * du * (p1_ - p0_); }

 private:
  Vec3 p0_, p1_;
};

class Arc final : public Shape {
 public:
  Arc(Vec3 c, double radius, double th0, double th1) : c_(c), r_(radius), th0_(th0), th1_(th1) {}
  int dim() const override { return 2; }
  void eval(double u, double, Vec3& r, Vec3& ru, Vec3& rv) const override {
    const double dth = 0.5 * (th1_ - th0_);
    const double th = th0_ + dth * (u + 1.0);
    r = c_ + r_ * Vec3(std::cos(th), std::sin(th), 0.0);
    ru = r_ * dth * Vec3(-std::sin(th), std::cos(th), 0.0);
    rv.setZero();
  }

  Vec3 difference(double u0, double, double du, double) const override {
    const double dth = 0.5 * (th1_ - th0_);
    const double h = 0.5 * dth * du;
    const double tm = th0_ + dth * (u0 + 0.5 * du + 1.0);
    const double sh = std::sin(h);
    return r_ * Vec3(-2.0 * std::sin(tm) * sh, 2.0 * std::cos(tm) * sh, 0.0);
  }

 private:
  Vec3 c_;
  double r_, th0_, th1_;
};

class Kite final : public Shape {
 public:
  Kite(Vec3 c, double scale, double t0, double t1) : c_(c), s_(scale), t0_(t0), t1_(t1) {}
  int dim() const override { return 2; }
  void eval(double u, double, Vec3& r, Vec3& ru, Vec3& rv) const override {
    const double dt = 0.5 * (t1_ - t0_);
    const double t = t0_ + dt * (u + 1.0);
    r = c_ + s_ * Vec3(std::cos(t) + 0.65 * std::cos(2.0 * t) - 0.65, 1.5 * std::sin(t), 0.0);
    ru = s_ * dt * Vec3(-std::sin(t) - 1.3 * std::sin(2.0 * t), 1.5 * std::cos(t), 0.0);
    rv.setZero();
  }

  Vec3 difference(double u0, double, double du, double) const override {
    const double dt = 0.5 * (t1_ - t0_);
    const double h = 0.5 * dt * du;
    const double tm = t0_ + dt * (u0 + 0.5 * du + 1.0);
    const double dc1 = -2.0 * std::sin(tm) * std::sin(h);
    const double dc2 = -2.0 * std::sin(2.0 * tm) * std::sin(2.0 * h);
    const double ds1 = 2.0 * std::cos(tm) * std::sin(h);
    return s_ * Vec3(dc1 + 0.65 * dc2, 1.5 * ds1, 0.0);
  }

 private:
  Vec3 c_;
  double s_, t0_, t1_;
};

class TrigCurve final : public Shape {
 public:
  TrigCurve(std::vector<double> ax, std::vector<double> bx, std::vector<double> ay,
            std::vector<double> by, double t0, double t1)
      : ax_(std::move(ax)), bx_(std::move(bx)), ay_(std::move(ay)), by_(std::move(by)), t0_(t0), t1_(t1) {}
  int dim() const override { return 2; }
  void eval(double u, double, Vec3& r, Vec3& ru, Vec3& rv) const override {
    const double dt = 0.5 * (t1_ - t0_);
    const double t = t0_ + dt * (u + 1.0);
    auto series = [t](const std::vector<double>& a, const std::vector<double>& b, double& f, double& df) {
      f = 0.0;
      df = 0.0;
      for (std::size_t m = 0; m < a.size(); ++m) {
        f += a[m] * std::cos(m * t);
        df -= a[m] * m * std::sin(m * t);
      }
      for (std::size_t m = 0; m < b.size(); ++m) {
        f += b[m] * std::sin(m * t);
        df += b[m] * m * std::cos(m * t);
      }
    };
    double x, dx, y, dy;
    series(ax_, bx_, x, dx);
    series(ay_, by_, y, dy);
    r = Vec3(x, y, 0.0);
    ru = dt * Vec3(dx, dy, 0.0);
    rv.setZero();
  }

  Vec3 difference(double u0, double, double du, double) const override {
    const double dt = 0.5 * (t1_ - t0_);
    const double h = 0.5 * dt * du;
    const double tm = t0_ + dt * (u0 + 0.5 * du + 1.0);
    auto series = [tm, h](const std::vector<double>& a, const std::vector<double>& b) {
      double d = 0.0;
      for (std::size_t m = 1; m < a.size(); ++m) d -= 2.0 * a[m] * std::sin(m * tm) * std::sin(m * h);
      for (std::size_t m = 1; m < b.size(); ++m) d += 2.0 * b[m] * std::cos(m * tm) * std::sin(m * h);
      return d;
    };
    return Vec3(series(ax_, bx_), series(ay_, by_), 0.0);
  }

 private:
  std::vector<double> ax_, bx_, ay_, by_;
  double t0_, t1_;
};

class PolyCurve final : public Shape {
 public:
  PolyCurve(std::vector<double> cx, std::vector<double> cy) : cx_(std::move(cx)), cy_(std::move(cy)) {}
  int dim() const override { return 2; }
  void eval(double u, double, Vec3& r, Vec3& ru, Vec3& rv) const override {
    auto horner = [u](const std::vector<double>& c, double& f, double& df) {
      f = 0.0;
      df = 0.0;
      for (std::size_t m = c.size(); m-- > 0;) {
        df = df * u + f;
        f = f * u + c[m];
      }
    };
    double x, dx, y, dy;
    horner(cx_, x, dx);
    horner(cy_, y, dy);
    r = Vec3(x, y, 0.0);
    ru = Vec3(dx, dy, 0.0);
    rv.setZero();
  }

  Vec3 difference(double u0, double, double du, double) const override {
    const double u1 = u0 + du;
    // (u1^m - u0^m) = (u1 - u0) sum_i u1^i u0^(m-1-i)
    auto divided = [u0, u1, du](const std::vector<double>& c) {
      double d = 0.0;
      for (std::size_t m = 1; m < c.size(); ++m) {
        double s = 0.0, p1 = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
          s += p1 * std::pow(u0, static_cast<double>(m - 1 - i));
          p1 *= u1;
        }
        d += c[m] * s;
      }
      return d * du;
    };
    return Vec3(divided(cx_), divided(cy_), 0.0);
  }

 private:
  std::vector<double> cx_, cy_;
};

class Rectangle final : public Shape {
 public:
  Rectangle(Vec3 c, Vec3 e1, Vec3 e2, double h1, double h2) : c_(c), e1_(h1 * e1), e2_(h2 * e2) {}
  int dim() const override { return 3; }
  void eval(double u, double v, Vec3& r, Vec3& ru, Vec3& rv) const override {
    r = c_ + u * e1_ + v * e2_;
    ru = e1_;
    rv = e2_;
  }

  Vec3 difference(double, double, double du, double dv) const override {
    return du * e1_ + dv * e2_;
  }
  bool separable() const override {
    for (int i = 0; i < 3; ++i)
      if (e1_[i] != 0.0 && e2_[i] != 0.0) return false;
    return true;
  }

 private:
  Vec3 c_, e1_, e2_;
};

class SphereFace final : public Shape {
 public:
  SphereFace(Vec3 c, double radius, int face) : c_(c), r_(radius) {
    const int axis = face / 2;
    const double sgn = (face % 2) ? -1.0 : 1.0;
    n_ = Vec3::Zero();
    n_[axis] = sgn;
    ea_ = Vec3::Zero();
    eb_ = Vec3::Zero();
    ea_[(axis + 1) % 3] = 1.0;
    eb_[(axis + 2) % 3] = 1.0;
  }
  int dim() const override { return 3; }
  void eval(double u, double v, Vec3& r, Vec3& ru, Vec3& rv) const override {
    const double q = 0.25 * kPi;
    const double a = std::tan(q * u), b = std::tan(q * v);
    const Vec3 p = n_ + a * ea_ + b * eb_;
    const double np = p.norm();
    const Vec3 ph = p / np;
    const Vec3 pu = q * (1.0 + a * a) * ea_;
    const Vec3 pv = q * (1.0 + b * b) * eb_;
    r = c_ + r_ * ph;
    ru = r_ * (pu - ph.dot(pu) * ph) / np;
    rv = r_ * (pv - ph.dot(pv) * ph) / np;
  }

  Vec3 difference(double u0, double v0, double du, double dv) const override {
    const double q = 0.25 * kPi;
    const double u1 = u0 + du, v1 = v0 + dv;
    const double a0 = std::tan(q * u0), b0 = std::tan(q * v0);
    const double a1 = std::tan(q * u1), b1 = std::tan(q * v1);
    const double da = std::sin(q * du) / (std::cos(q * u1) * std::cos(q * u0));
    const double db = std::sin(q * dv) / (std::cos(q * v1) * std::cos(q * v0));
    const Vec3 p0 = n_ + a0 * ea_ + b0 * eb_;
    const Vec3 p1 = n_ + a1 * ea_ + b1 * eb_;
    const Vec3 dp = da * ea_ + db * eb_;
    const double n0 = p0.norm(), n1 = p1.norm();
    const double dn = -dp.dot(p0 + p1) / (n0 + n1);  // |p0| - |p1|
    return r_ * (dp / n1 + p0 * (dn / (n0 * n1)));
  }

 private:
  Vec3 c_;
  double r_;
  Vec3 n_, ea_, eb_;
};

// Breakpoints of the flat part along one axis: PML strips and the physical
// interval split into the requested number of pieces.
std::vector<double> flat_breaks(double a, double t, int n_pml, int n_phys) {
  std::vector<double> b;
  for (int i = 0; i < n_pml; ++i) b.push_back(-a - t + t * i / n_pml);
  for (int i = 0; i < n_phys; ++i) b.push_back(-a + 2.0 * a * i / n_phys);
  for (int i = 0; i <= n_pml; ++i) b.push_back(a + t * i / n_pml);
  return b;
}

bool inside_polygon(const std::vector<Vec3>& poly, const Vec3& x) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec3& pi = poly[i];
    const Vec3& pj = poly[j];
    if (((pi[1] > x[1]) != (pj[1] > x[1])) &&
        (x[0] < (pj[0] - pi[0]) * (x[1] - pi[1]) / (pj[1] - pi[1]) + pi[0]))
      in = !in;
  }
  return in;
}

int default_physical(double a, double wavelength) {
  return 2 * std::max(1, static_cast<int>(std::ceil(a / (10.0 * wavelength) - 1e-12)));
}

int default_obstacle(double perimeter, double wavelength, int minimum) {
  return std::max(minimum, static_cast<int>(std::ceil(perimeter / (5.5 * wavelength) - 1e-12)));
}

void add_flat_2d(Scene& s, const pml::PmlProfile& prof, int n_pml, int n_phys) {
  const auto b = flat_breaks(prof.half_width(0), prof.thickness(0), n_pml, n_phys);
  for (std::size_t i = 0; i + 1 < b.size(); ++i)
    s.patches.emplace_back(make_segment(Vec3(b[i], 0, 0), Vec3(b[i + 1], 0, 0)), 1, cheb::EndGrading{},
                           cheb::EndGrading{}, 0);
}

void add_screen_2d(Scene& s, const pml::PmlProfile& prof, const SceneParams& p) {
  const double half = p.screen_half_length > 0.0 ? p.screen_half_length : 0.5 * prof.half_width(0);
  const int n = p.screen_samples > 0 ? p.screen_samples : 101;
  const double h = s.obstacle_top + p.screen_offset;
  s.screen.clear();
  for (int i = 0; i < n; ++i) s.screen.emplace_back(-half + 2.0 * half * i / std::max(1, n - 1), h, 0.0);
  s.screen_rows = 1;
  s.screen_cols = n;
}

}  // namespace

std::shared_ptr<const Shape> make_segment(Vec3 p0, Vec3 p1) { return std::make_shared<Segment>(p0, p1); }
std::shared_ptr<const Shape> make_arc(Vec3 c, double r, double th0, double th1) {
  return std::make_shared<Arc>(c, r, th0, th1);
}
std::shared_ptr<const Shape> make_kite(Vec3 c, double scale, double t0, double t1) {
  return std::make_shared<Kite>(c, scale, t0, t1);
}
std::shared_ptr<const Shape> make_trig_curve(std::vector<double> ax, std::vector<double> bx,
                                             std::vector<double> ay, std::vector<double> by,
                                             double t0, double t1) {
  return std::make_shared<TrigCurve>(std::move(ax), std::move(bx), std::move(ay), std::move(by), t0, t1);
}
std::shared_ptr<const Shape> make_poly_curve(std::vector<double> cx, std::vector<double> cy) {
  return std::make_shared<PolyCurve>(std::move(cx), std::move(cy));
}
std::shared_ptr<const Shape> make_rectangle(Vec3 c, Vec3 e1, Vec3 e2, double h1, double h2) {
  return std::make_shared<Rectangle>(c, e1, e2, h1, h2);
}
std::shared_ptr<const Shape> make_sphere_face(Vec3 c, double radius, int face) {
  return std::make_shared<SphereFace>(c, radius, face);
}

Patch::Patch(std::shared_ptr<const Shape> shape, int orientation, cheb::EndGrading grade_u,
             cheb::EndGrading grade_v, int plane_id)
    : shape_(std::move(shape)),
      orientation_(orientation >= 0 ? 1 : -1),
      grade_u_(grade_u),
      grade_v_(grade_v),
      plane_id_(plane_id) {}

Frame Patch::frame(double u, double v) const {
  const cheb::MapValue gu = grade_u_(u);
  const cheb::MapValue gv = dim() == 3 ? grade_v_(v) : cheb::MapValue{v, 1.0, v + 1.0, 1.0 - v};
  Frame f;
  shape_->eval(gu.value, gv.value, f.point, f.ru, f.rv);
  if (dim() == 2) {
    const double len = f.ru.norm();
    const double s = orientation_ / len;
    f.normal = s * Vec3(f.ru[1], -f.ru[0], 0.0);
    f.tangent = Vec3(-f.normal[1], f.normal[0], 0.0);
    f.jacobian = len * gu.derivative;
  } else {
    const Vec3 n = f.ru.cross(f.rv);
    const double len = n.norm();
    f.normal = orientation_ * n / len;
    f.tangent = f.ru.normalized();
    f.jacobian = len * gu.derivative * gv.derivative;
  }
  f.ru *= gu.derivative;
  f.rv *= gv.derivative;
  return f;
}

Vec3 Patch::point(double u, double v) const {
  Vec3 r, ru, rv;
  const double gu = grade_u_(u).value;
  const double gv = dim() == 3 ? grade_v_(v).value : v;
  shape_->eval(gu, gv, r, ru, rv);
  return r;
}

Vec3 Shape::difference(double u0, double v0, double du, double dv) const {
  Vec3 r0, r1, ru, rv;
  eval(u0, v0, r0, ru, rv);
  eval(u0 + du, v0 + dv, r1, ru, rv);
  return r1 - r0;
}

Vec3 Patch::difference(double u0, double v0, double u1, double v1) const {
  const auto [g0, dg] = grade_u_.increment(u0, u1);
  if (dim() == 2) return shape_->difference(g0, 0.0, dg, 0.0);
  const auto [h0, dh] = grade_v_.increment(v0, v1);
  return shape_->difference(g0, h0, dg, dh);
}

Frame patch_frame(const Patch& patch, double u, double v) { return patch.frame(u, v); }

SceneKind scene_kind_from_string(const std::string& s) {
  if (s == "disc2d") return SceneKind::disc2d;
  if (s == "kite2d") return SceneKind::kite2d;
  if (s == "bump2layer") return SceneKind::bump2layer;
  if (s == "ball3d") return SceneKind::ball3d;
  if (s == "custom") return SceneKind::custom;
  throw ConfigError("unknown scene '" + s + "'");
}

std::string to_string(SceneKind k) {
  switch (k) {
    case SceneKind::disc2d: return "disc2d";
    case SceneKind::kite2d: return "kite2d";
    case SceneKind::bump2layer: return "bump2layer";
    case SceneKind::ball3d: return "ball3d";
    case SceneKind::custom: return "custom";
  }
  return "custom";
}

BoundaryCondition bc_from_string(const std::string& s) {
  if (s == "dirichlet") return BoundaryCondition::dirichlet;
  if (s == "neumann") return BoundaryCondition::neumann;
  if (s == "transmission") return BoundaryCondition::transmission;
  throw ConfigError("unknown boundary condition '" + s + "'");
}

std::string to_string(BoundaryCondition bc) {
  switch (bc) {
    case BoundaryCondition::dirichlet: return "dirichlet";
    case BoundaryCondition::neumann: return "neumann";
    case BoundaryCondition::transmission: return "transmission";
  }
  return "dirichlet";
}

double kite_perimeter() { return 9.324022673284965; }

Scene build_scene(SceneKind kind, BoundaryCondition bc, const pml::PmlProfile& prof, const SceneParams& p) {
  Scene s;
  s.kind = kind;
  s.bc = bc;
  s.profile = prof;
  s.dim = kind == SceneKind::ball3d ? 3 : 2;
  if (prof.dim() != s.dim) throw ConfigError("scene dimension does not match the PML profile");
  if ((bc == BoundaryCondition::transmission) != (kind == SceneKind::bump2layer || kind == SceneKind::custom))
    if (kind != SceneKind::custom)
      throw ConfigError("transmission conditions require the bump2layer scene and vice versa");

  const double a = prof.half_width(0);
  const double lambda = p.wavelength;
  const int n_pml = p.flat_pml > 0 ? p.flat_pml : (kind == SceneKind::ball3d ? 2 : 1);
  const int n_phys = p.flat_physical > 0 ? p.flat_physical : default_physical(a, lambda);

  switch (kind) {
    case SceneKind::disc2d: {
      const Vec3 c = p.obstacle_center_set ? p.obstacle_center : Vec3(0.0, 2.0, 0.0);
      const double r = p.obstacle_size;
      if (c[1] - r <= 0.0) throw ConfigError("disc2d: obstacle intersects the plane");
      if (std::abs(c[0]) + r >= a || c[1] + r >= prof.half_width(1))
        throw ConfigError("disc2d: obstacle must lie inside the physical box");
      add_flat_2d(s, prof, n_pml, n_phys);
      const int m = p.obstacle > 0 ? p.obstacle : default_obstacle(2.0 * kPi * r, lambda, 2);
      for (int i = 0; i < m; ++i)
        s.patches.emplace_back(make_arc(c, r, 2.0 * kPi * i / m, 2.0 * kPi * (i + 1) / m), -1);
      s.interior_point = c;
      s.obstacle_top = c[1] + r;
      s.region = [c, r](const Vec3& x) { return (x[1] > 0.0 && (x - c).norm() > r) ? 1 : 0; };
      add_screen_2d(s, prof, p);
      break;
    }
    case SceneKind::kite2d: {
      const Vec3 c = p.obstacle_center_set ? p.obstacle_center : Vec3(0.0, 3.0, 0.0);
      const double sc = p.obstacle_size;
      if (c[1] - 1.5 * sc <= 0.0) throw ConfigError("kite2d: obstacle intersects the plane");
      if (std::abs(c[0]) + 1.5 * sc >= a || c[1] + 1.5 * sc >= prof.half_width(1))
        throw ConfigError("kite2d: obstacle must lie inside the physical box");
      add_flat_2d(s, prof, n_pml, n_phys);
      const int m = p.obstacle > 0 ? p.obstacle : default_obstacle(kite_perimeter() * sc, lambda, 6);
      for (int i = 0; i < m; ++i)
        s.patches.emplace_back(make_kite(c, sc, 2.0 * kPi * i / m, 2.0 * kPi * (i + 1) / m), -1);
      std::vector<Vec3> poly;
      for (int i = 0; i < 2000; ++i) {
        const double t = 2.0 * kPi * i / 2000.0;
        poly.push_back(c + sc * Vec3(std::cos(t) + 0.65 * std::cos(2 * t) - 0.65, 1.5 * std::sin(t), 0.0));
      }
      s.interior_point = c;
      s.obstacle_top = c[1] + 1.5 * sc;
      s.region = [poly](const Vec3& x) { return (x[1] > 0.0 && !inside_polygon(poly, x)) ? 1 : 0; };
      add_screen_2d(s, prof, p);
      break;
    }
    case SceneKind::bump2layer: {
      const double r = p.bump_radius;
      if (!(r > 0.0) || r >= a) throw ConfigError("bump2layer: bump radius must satisfy 0 < r < a_1");
      const double t = prof.thickness(0);
      const cheb::EndGrading none{};
      const cheb::EndGrading up{false, true, p.corner_p};
      const cheb::EndGrading lo{true, false, p.corner_p};
      for (int i = 0; i < n_pml; ++i) {
        const double x0 = -a - t + t * i / n_pml, x1 = -a - t + t * (i + 1) / n_pml;
        s.patches.emplace_back(make_segment(Vec3(x0, 0, 0), Vec3(x1, 0, 0)), 1, none, none, 0);
      }
      s.patches.emplace_back(make_segment(Vec3(-a, 0, 0), Vec3(-r, 0, 0)), 1, up, none, 0);
      // Clockwise arc over the top: the normal points into the lower layer.
      s.patches.emplace_back(make_arc(Vec3::Zero(), r, kPi, 0.5 * kPi), 1, lo);
      s.patches.emplace_back(make_arc(Vec3::Zero(), r, 0.5 * kPi, 0.0), 1, up);
      s.patches.emplace_back(make_segment(Vec3(r, 0, 0), Vec3(a, 0, 0)), 1, lo, none, 0);
      for (int i = 0; i < n_pml; ++i) {
        const double x0 = a + t * i / n_pml, x1 = a + t * (i + 1) / n_pml;
        s.patches.emplace_back(make_segment(Vec3(x0, 0, 0), Vec3(x1, 0, 0)), 1, none, none, 0);
      }
      s.interior_point = Vec3(0.0, 0.5 * r, 0.0);
      s.obstacle_top = r;
      s.region = [r](const Vec3& x) {
        const double h = std::abs(x[0]) < r ? std::sqrt(r * r - x[0] * x[0]) : 0.0;
        return x[1] > h ? 1 : 2;
      };
      add_screen_2d(s, prof, p);
      break;
    }
    case SceneKind::ball3d: {
      const Vec3 c = p.obstacle_center_set ? p.obstacle_center : Vec3(0.0, 0.0, 2.0);
      const double r = p.obstacle_size;
      if (c[2] - r <= 0.0) throw ConfigError("ball3d: obstacle intersects the plane");
      const auto bx = flat_breaks(prof.half_width(0), prof.thickness(0), n_pml, n_phys);
      const auto by = flat_breaks(prof.half_width(1), prof.thickness(1), n_pml, n_phys);
      for (std::size_t j = 0; j + 1 < by.size(); ++j)
        for (std::size_t i = 0; i + 1 < bx.size(); ++i) {
          const Vec3 ctr(0.5 * (bx[i] + bx[i + 1]), 0.5 * (by[j] + by[j + 1]), 0.0);
          s.patches.emplace_back(make_rectangle(ctr, Vec3::UnitX(), Vec3::UnitY(), 0.5 * (bx[i + 1] - bx[i]),
                                                0.5 * (by[j + 1] - by[j])),
                                 -1, cheb::EndGrading{}, cheb::EndGrading{}, 0);
        }
      for (int f = 0; f < 6; ++f) {
        auto shape = make_sphere_face(c, r, f);
        Vec3 x, ru, rv;
        shape->eval(0.0, 0.0, x, ru, rv);
        const int orient = ru.cross(rv).dot(x - c) > 0.0 ? -1 : 1;
        s.patches.emplace_back(shape, orient);
      }
      s.interior_point = c;
      s.obstacle_top = c[2] + r;
      s.region = [c, r](const Vec3& x) { return (x[2] > 0.0 && (x - c).norm() > r) ? 1 : 0; };
      const double half = p.screen_half_length > 0.0 ? p.screen_half_length : 0.5 * prof.half_width(0);
      const int n = p.screen_samples > 0 ? p.screen_samples : 21;
      const double h = s.obstacle_top + p.screen_offset;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          s.screen.emplace_back(-half + 2.0 * half * i / std::max(1, n - 1),
                                -half + 2.0 * half * j / std::max(1, n - 1), h);
      s.screen_rows = n;
      s.screen_cols = n;
      break;
    }
    case SceneKind::custom: {
      if (p.custom.empty()) throw ConfigError("custom scene: no curves given");
      std::vector<Vec3> poly;
      double top = 0.0;
      for (const CustomCurve& cc : p.custom) {
        std::shared_ptr<const Shape> shape =
            cc.kind == CustomCurve::Kind::trig ? make_trig_curve(cc.ax, cc.bx, cc.ay, cc.by, cc.t0, cc.t1)
                                               : make_poly_curve(cc.cx, cc.cy);
        const cheb::EndGrading g{cc.grade_lower, cc.grade_upper, p.corner_p};
        s.patches.emplace_back(shape, cc.orientation, g, cheb::EndGrading{}, cc.on_plane ? 0 : -1);
        if (!cc.on_plane)
          for (int i = 0; i < 64; ++i) {
            const Vec3 x = s.patches.back().point(-1.0 + 2.0 * i / 64.0);
            poly.push_back(x);
            top = std::max(top, x[1]);
          }
      }
      s.interior_point = p.custom_source;
      s.obstacle_top = top;
      const bool has_plane = std::any_of(p.custom.begin(), p.custom.end(), [](const auto& c) { return c.on_plane; });
      s.region = [poly, has_plane](const Vec3& x) {
        if (has_plane && x[1] <= 0.0) return 0;
        return (poly.size() >= 3 && inside_polygon(poly, x)) ? 0 : 1;
      };
      add_screen_2d(s, prof, p);
      break;
    }
  }
  return s;
}

}  // namespace pmlbie::geometry
