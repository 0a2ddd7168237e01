#include <cmath>

#include "doctest.h"
#include "pmlbie/kernels.hpp"

using namespace pmlbie;
using namespace pmlbie::kernels;

namespace {

pml::PmlProfile profile(int dim) { return pml::PmlProfile(dim, {2.0, 2.0, 1000.0}, {4.0, 4.0, 4.0}); }

KernelPoint kp(const Vec3& x, const Vec3& n, int dim) { return make_kernel_point(x, n, 1.0, profile(dim)); }

}  // namespace

TEST_CASE("free-space Green's function values") {
  const cd g2 = green_free(Vec3::Zero(), Vec3(1.0, 0.0, 0.0), 1.0, 2);
  CHECK(std::abs(g2 - cd(-0.022064241, 0.191299422)) <= 1e-9);
  const cd g3 = green_free(Vec3::Zero(), Vec3(0.0, 0.6, 0.8), 2.0 * kPi, 3);
  CHECK(std::abs(g3 - 1.0 / (4.0 * kPi)) <= 1e-15);
  CHECK_THROWS_AS(green_free(Vec3::Zero(), Vec3::Zero(), 1.0, 2), DomainError);
}

TEST_CASE("PML Green's function is symmetric and equals the free one inside the box") {
  for (int dim : {2, 3}) {
    const Vec3 n = dim == 2 ? Vec3(0, 1, 0) : Vec3(0, 0, 1);
    const KernelPoint a = kp(Vec3(0.3, -1.0, 0.2), n, dim), b = kp(Vec3(-1.1, 0.5, 0.0), n, dim);
    CHECK(std::abs(green_pml(a, b, 3.0, dim).g - green_free(a.x, b.x, 3.0, dim)) <= 1e-15);
    const KernelPoint c = kp(Vec3(4.5, 1.0, 0.0), n, dim), d = kp(Vec3(-3.0, 5.0, 0.0), n, dim);
    CHECK_FALSE(c.physical);
    CHECK(green_pml(c, d, 3.0, dim).g == green_pml(d, c, 3.0, dim).g);
  }
}

TEST_CASE("PML Green's function decays along the absorbing direction") {
  const KernelPoint src = kp(Vec3::Zero(), Vec3(0, 1, 0), 2);
  double prev = 1e300;
  for (double x = 2.5; x <= 10.0; x += 0.5) {
    const double g = std::abs(green_pml(src, kp(Vec3(x, 0.0, 0.0), Vec3(0, 1, 0), 2), kPi, 2).g);
    CHECK(g < prev);
    prev = g;
  }
  const double inside = std::abs(green_pml(src, kp(Vec3(2.0, 0, 0), Vec3(0, 1, 0), 2), kPi, 2).g);
  CHECK(prev <= 1e-6 * inside);
}

TEST_CASE("double layer and its adjoint swap arguments") {
  for (int dim : {2, 3}) {
    const KernelPoint a = kp(Vec3(4.5, 0.3, 0.1), Vec3(0.6, 0.8, 0.0), dim);
    const KernelPoint b = kp(Vec3(-1.0, 2.0, 0.4), Vec3(0.0, 0.6, 0.8), dim);
    const cd kab = kernel_layer(LayerKind::K, a, b, 2.0, dim);
    const cd ktba = kernel_layer(LayerKind::Kt, b, a, 2.0, dim);
    CHECK(std::abs(kab - ktba) <= 1e-15 * std::abs(kab));
    const LayerValues v = kernel_layers(a, b, 2.0, dim, b.x - a.x);
    CHECK(std::abs(v.k - kab) <= 1e-14 * std::abs(kab));
    CHECK(std::abs(v.s - kernel_layer(LayerKind::S, a, b, 2.0, dim)) <= 1e-14 * std::abs(v.s));
  }
}

TEST_CASE("double layer vanishes on a straight line") {
  const Vec3 n(0, -1, 0);
  for (double x : {0.5, 3.0, 7.0}) {
    const KernelPoint a = kp(Vec3(-1.0, 0.0, 0.0), n, 2), b = kp(Vec3(x, 0.0, 0.0), n, 2);
    CHECK(std::abs(kernel_layer(LayerKind::K, a, b, kPi, 2)) <= 1e-16);
    CHECK(std::abs(kernel_layer(LayerKind::Kt, a, b, kPi, 2)) <= 1e-16);
  }
}

TEST_CASE("single layer singularity") {
  const Vec3 n(0, 1, 0);
  const KernelPoint x = kp(Vec3(0.1, 0.0, 0.0), n, 2);
  for (double h = 1e-1; h >= 1e-8; h /= 10) {
    const cd s = kernel_layer(LayerKind::S, x, kp(Vec3(0.1 + h, 0.0, 0.0), n, 2), 1.0, 2);
    CHECK(std::abs(s + std::log(h) / (2.0 * kPi)) <= 0.3);
  }
  const KernelPoint y = kp(Vec3(0.1, 0.2, 0.0), Vec3(0, 0, 1), 3);
  const double h = 1e-7;
  const cd s3 = kernel_layer(LayerKind::S, y, kp(Vec3(0.1 + h, 0.2, 0.0), Vec3(0, 0, 1), 3), kPi, 3);
  CHECK(std::abs(h * s3 - 1.0 / (4.0 * kPi)) <= 1e-6);
}

TEST_CASE("hyper-singular parts") {
  const Vec3 n(0, 1, 0);
  const KernelPoint a = kp(Vec3(0.0, 0.0, 0.0), n, 2), b = kp(Vec3(1.0, 0.0, 0.0), n, 2);
  const HyperParts h = kernel_hyper_parts(a, b, 1.5, 2);
  const cd g = green_free(a.x, b.x, 1.5, 2);
  CHECK(std::abs(h.weak - g) <= 1e-16);
  CHECK(std::abs(h.zero_order - 2.25 * g) <= 1e-15);
  CHECK(h.weak_vector.norm() == 0.0);
  // 3D, normals along x3 and points in the plane: grad G has no x3 part and
  // nu x grad G lies in the plane
  const KernelPoint c = kp(Vec3(0.0, 0.0, 0.0), Vec3(0, 0, 1), 3), d = kp(Vec3(0.3, 0.4, 0.0), Vec3(0, 0, 1), 3);
  const HyperParts h3 = kernel_hyper_parts(c, d, 2.0, 3);
  CHECK(std::abs(h3.weak_vector[2]) <= 1e-16);
  CHECK(std::abs(h3.zero_order - 4.0 * green_free(c.x, d.x, 2.0, 3)) <= 1e-15);
}

TEST_CASE("incident fields") {
  Incidence pw;
  pw.theta = 0.4;
  CHECK(std::abs(incident_field(pw, 3.0, 2, Vec3(Vec3::Zero())).value - 1.0) <= 1e-16);
  CHECK(incident_direction(pw, 2).norm() == doctest::Approx(1.0));
  Incidence ps;
  ps.kind = Incidence::Kind::point_source;
  ps.source = Vec3(0.2, 1.5, 0.0);
  for (const Incidence& inc : {pw, ps})
    for (int dim : {2, 3}) {
      const Vec3 x(0.7, 0.4, dim == 3 ? 0.3 : 0.0);
      const FieldValue f = incident_field(inc, 3.0, dim, x);
      const double h = 1e-6;
      for (int j = 0; j < dim; ++j) {
        Vec3 e = Vec3::Zero();
        e[j] = h;
        const cd fd = (incident_field(inc, 3.0, dim, Vec3(x + e)).value - incident_field(inc, 3.0, dim, Vec3(x - e)).value) / (2 * h);
        CHECK(std::abs(fd - f.grad[j]) <= 1e-7 * std::max(1.0, std::abs(f.grad[j])));
      }
    }
}

TEST_CASE("reference fields cancel or double on the plane") {
  Incidence pw;
  pw.theta = 0.7;
  for (double x : {-1.5, 0.0, 2.3}) {
    const Vec3 p(x, 0.0, 0.0);
    const cd ui = incident_field(pw, kPi, 2, p).value;
    CHECK(std::abs(ui + reference_field(pw, ReferenceSign::dirichlet, kPi, 2, p).value) <= 1e-15);
    const cd dn = incident_field(pw, kPi, 2, p).grad[1] + reference_field(pw, ReferenceSign::neumann, kPi, 2, p).grad[1];
    CHECK(std::abs(dn) <= 1e-14);
  }
  Incidence ps;
  ps.kind = Incidence::Kind::point_source;
  CHECK(reference_field(ps, ReferenceSign::dirichlet, kPi, 2, Vec3(1, 1, 0)).value == 0.0);
}

TEST_CASE("fresnel coefficients") {
  Incidence normal;
  const FresnelCoefficients f = fresnel(normal, 1.0, 2.0);
  CHECK(std::abs(f.reflection - (-1.0 / 3.0)) <= 1e-15);
  CHECK(std::abs(f.transmission - 2.0 / 3.0) <= 1e-15);
  const FresnelCoefficients same = fresnel(normal, 1.5, 1.5);
  CHECK(same.reflection == 0.0);
  CHECK(same.transmission == 1.0);
  // total internal reflection keeps Im beta2 >= 0
  Incidence grazing;
  grazing.theta = 1.2;
  CHECK(fresnel(grazing, 2.0, 1.0).beta2.imag() > 0.0);
}

TEST_CASE("two-layer reference fields match across the interface") {
  for (double theta : {0.0, 0.5, 1.2})
    for (int dim : {2, 3}) {
      Incidence inc;
      inc.theta = theta;
      inc.phi = 0.3;
      for (double x : {-0.8, 0.4}) {
        const Vec3 p(x, dim == 3 ? 0.25 : 0.0, 0.0);
        Vec3 q = p;
        if (dim == 2) q[1] = 0.0;
        const FieldValue ui = incident_field(inc, 2.0, dim, q);
        const FieldValue ur = twolayer_reference(inc, 2.0, 1.0, dim, 1, q);
        const FieldValue ut = twolayer_reference(inc, 2.0, 1.0, dim, 2, q);
        CHECK(std::abs(ui.value + ur.value - ut.value) <= 1e-12);
        CHECK(std::abs(ui.grad[dim - 1] + ur.grad[dim - 1] - ut.grad[dim - 1]) <= 1e-12);
      }
    }
  Incidence ps;
  ps.kind = Incidence::Kind::point_source;
  CHECK_THROWS_AS(twolayer_reference(ps, 1.0, 2.0, 2, 1, Vec3(Vec3::Zero())), ConfigError);
}
