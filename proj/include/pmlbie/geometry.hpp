#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pmlbie/cheb.hpp"
#include "pmlbie/pml.hpp"
#include "pmlbie/types.hpp"

namespace pmlbie::geometry {

// Smooth map from [-1,1] (curves) or [-1,1]^2 (surfaces) into R^3. Curves
// live in the x3 = 0 plane and ignore v.
class Shape {
 public:
  virtual ~Shape() = default;
  virtual int dim() const = 0;  // ambient dimension, 2 or 3
  virtual void eval(double u, double v, Vec3& r, Vec3& ru, Vec3& rv) const = 0;
  // r(u0 + du, v0 + dv) - r(u0, v0) without cancellation for small steps.
  virtual Vec3 difference(double u0, double v0, double du, double dv) const;
  // Affine with every coordinate depending on u alone or on v alone.
  virtual bool separable() const { return false; }
};

std::shared_ptr<const Shape> make_segment(Vec3 p0, Vec3 p1);
std::shared_ptr<const Shape> make_arc(Vec3 center, double radius, double theta0, double theta1);
// Kite curve center + scale * (cos t + 0.65 cos 2t - 0.65, 1.5 sin t), t in [t0, t1].
std::shared_ptr<const Shape> make_kite(Vec3 center, double scale, double t0, double t1);
// x_d(t) = sum_m a_m cos(m t) + b_m sin(m t), t in [t0, t1].
std::shared_ptr<const Shape> make_trig_curve(std::vector<double> ax, std::vector<double> bx,
                                             std::vector<double> ay, std::vector<double> by,
                                             double t0, double t1);
// x_d(u) = sum_m c_m u^m.
std::shared_ptr<const Shape> make_poly_curve(std::vector<double> cx, std::vector<double> cy);
// origin + u * h1 * e1 + v * h2 * e2
std::shared_ptr<const Shape> make_rectangle(Vec3 center, Vec3 e1, Vec3 e2, double h1, double h2);
// Equiangular cube-to-sphere face; face = 2 * axis + (negative ? 1 : 0).
std::shared_ptr<const Shape> make_sphere_face(Vec3 center, double radius, int face);

struct Frame {
  Vec3 point;
  Vec3 normal;    // unit, points out of the fluid region
  double jacobian;  // |r_u| (2D) or |r_u x r_v| (3D)
  Vec3 ru;
  Vec3 rv;
  Vec3 tangent;   // 2D: unit tangent with normal = (t2, -t1); 3D: r_u / |r_u|
};

class Patch {
 public:
  // orientation = +1 gives normal (r_u2, -r_u1)/|r_u| in 2D and
  // (r_u x r_v)/|r_u x r_v| in 3D; -1 flips it.
  Patch(std::shared_ptr<const Shape> shape, int orientation, cheb::EndGrading grade_u = {},
        cheb::EndGrading grade_v = {}, int plane_id = -1);

  int dim() const { return shape_->dim(); }
  int orientation() const { return orientation_; }
  int plane_id() const { return plane_id_; }
  const cheb::EndGrading& grading_u() const { return grade_u_; }
  const cheb::EndGrading& grading_v() const { return grade_v_; }

  Frame frame(double u, double v = 0.0) const;
  Vec3 point(double u, double v = 0.0) const;
  // point(u1, v1) - point(u0, v0), accurate to relative rounding.
  Vec3 difference(double u0, double v0, double u1, double v1) const;
  bool separable() const { return shape_->separable(); }

 private:
  std::shared_ptr<const Shape> shape_;
  int orientation_;
  cheb::EndGrading grade_u_;
  cheb::EndGrading grade_v_;
  int plane_id_;
};

Frame patch_frame(const Patch& patch, double u, double v = 0.0);

enum class SceneKind { disc2d, kite2d, bump2layer, ball3d, custom };
enum class BoundaryCondition { dirichlet, neumann, transmission };

SceneKind scene_kind_from_string(const std::string& s);
std::string to_string(SceneKind k);
BoundaryCondition bc_from_string(const std::string& s);
std::string to_string(BoundaryCondition bc);

// A custom patch description: one 2D curve piece.
struct CustomCurve {
  enum class Kind { trig, poly } kind = Kind::poly;
  std::vector<double> ax, bx, ay, by;  // trig coefficients
  std::vector<double> cx, cy;          // poly coefficients
  double t0 = 0.0, t1 = 1.0;
  int orientation = 1;
  bool grade_lower = false, grade_upper = false;
  bool on_plane = false;
};

struct SceneParams {
  // Patch counts; <= 0 selects the wavenumber-based default.
  int flat_physical = 0;   // pieces of [-a, a] (per direction in 3D)
  int flat_pml = 0;        // pieces of each PML strip (per side)
  int obstacle = 0;        // closed obstacle pieces (2D)
  Vec3 obstacle_center = Vec3(0.0, 0.0, 0.0);
  bool obstacle_center_set = false;
  double obstacle_size = 1.0;  // disc/ball radius, kite scale
  double bump_radius = 1.0;
  int corner_p = 6;            // endpoint grading order at corners
  double wavelength = 2.0;     // used only for default patch counts
  // Test screen: half length (<= 0: a_1 / 2), height above the obstacle top.
  double screen_half_length = 0.0;
  double screen_offset = 0.5;
  int screen_samples = 0;  // per direction; <= 0: 101 (2D) or 21 (3D)
  std::vector<CustomCurve> custom;
  Vec3 custom_source = Vec3(0.0, 2.0, 0.0);
};

struct Scene {
  SceneKind kind = SceneKind::custom;
  int dim = 2;
  std::vector<Patch> patches;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  Vec3 interior_point = Vec3::Zero();  // inside the obstacle (manufactured sources)
  double obstacle_top = 0.0;
  std::vector<Vec3> screen;             // evaluation points of the error metric
  int screen_rows = 1, screen_cols = 0;
  pml::PmlProfile profile;
  // 0: not part of the fluid, 1: fluid / upper layer, 2: lower layer.
  std::function<int(const Vec3&)> region;
};

Scene build_scene(SceneKind kind, BoundaryCondition bc, const pml::PmlProfile& profile,
                  const SceneParams& params);

// Perimeter of the standard kite at scale 1.
double kite_perimeter();

}  // namespace pmlbie::geometry
