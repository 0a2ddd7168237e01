#include "pmlbie/kernels.hpp"

#include <cmath>

#include "pmlbie/specfun.hpp"

namespace pmlbie::kernels {

KernelPoint make_kernel_point(const Vec3& x, const Vec3& normal, double jacobian,
                              const pml::PmlProfile& profile) {
  const pml::StretchedPoint sp = pml::stretch(x, profile);
  KernelPoint p;
  p.x = x;
  p.xt = sp.xt;
  p.alpha = sp.alpha;
  p.cof = pml::cofactors(sp.alpha);
  p.normal = normal;
  p.jacobian = jacobian;
  p.physical = true;
  for (int i = 0; i < 3; ++i)
    if (sp.alpha[i] != 1.0 || sp.xt[i].imag() != 0.0) p.physical = false;
  return p;
}

GreenValue green_of_rho(cd rho, double k, int dim) {
  if (rho == 0.0) throw DomainError("Green's function evaluated at coincident points");
  GreenValue gv;
  gv.rho = rho;
  if (dim == 2) {
    const auto [h0, h1] = specfun::hankel1_01(k * rho);
    gv.g = 0.25 * kI * h0;
    gv.dg = -0.25 * kI * k * h1;
  } else {
    const cd e = std::exp(kI * k * rho) / (4.0 * kPi * rho);
    gv.g = e;
    gv.dg = e * (kI * k * rho - 1.0) / rho;
  }
  return gv;
}

namespace {

GreenValue green_real(double r, double k, int dim) {
  if (r == 0.0) throw DomainError("Green's function evaluated at coincident points");
  if (dim == 2) return green_of_rho(cd(r, 0.0), k, dim);
  GreenValue gv;
  gv.rho = r;
  const double kr = k * r;
  const cd e = cd(std::cos(kr), std::sin(kr)) / (4.0 * kPi * r);
  gv.g = e;
  gv.dg = e * cd(-1.0, kr) / r;
  return gv;
}

}  // namespace

cd green_free(const Vec3& x, const Vec3& y, double k, int dim) { return green_real((x - y).norm(), k, dim).g; }

GreenValue green_pml(const KernelPoint& x, const KernelPoint& y, double k, int dim) {
  if (x.physical && y.physical) return green_real((x.x - y.x).norm(), k, dim);
  return green_of_rho(pml::complex_distance(x.xt, y.xt), k, dim);
}

GreenValue green_pml(const pml::StretchedPoint& x, const pml::StretchedPoint& y, double k, int dim) {
  return green_of_rho(pml::complex_distance(x, y), k, dim);
}

LayerValues kernel_layers(const KernelPoint& x, const KernelPoint& y, double k, int dim) {
  const GreenValue gv = green_pml(x, y, k, dim);
  const cd f = gv.dg / gv.rho;
  cd ky = 0.0, kx = 0.0;
  if (x.physical && y.physical) {
    const Vec3 d = y.x - x.x;
    ky = f * y.normal.dot(d);
    kx = -f * x.normal.dot(d);
  } else {
    for (int j = 0; j < dim; ++j) {
      const cd d = y.xt[j] - x.xt[j];
      ky += y.cof[j] * y.normal[j] * d;
      kx -= x.cof[j] * x.normal[j] * d;
    }
    ky *= f;
    kx *= f;
  }
  return {gv.g, ky, kx};
}

LayerValues kernel_layers(const KernelPoint& x, const KernelPoint& y, double k, int dim, const Vec3& diff) {
  if (x.physical && y.physical) {
    const GreenValue gv = green_real(diff.norm(), k, dim);
    const cd f = gv.dg / gv.rho;
    return {gv.g, f * y.normal.dot(diff), -f * x.normal.dot(diff)};
  }
  Vec3c d;
  for (int j = 0; j < 3; ++j) d[j] = cd(diff[j], y.xt[j].imag() - x.xt[j].imag());
  const GreenValue gv = green_of_rho(specfun::branch_sqrt((d.transpose() * d).value()), k, dim);
  const cd f = gv.dg / gv.rho;
  cd ky = 0.0, kx = 0.0;
  for (int j = 0; j < dim; ++j) {
    ky += y.cof[j] * y.normal[j] * d[j];
    kx -= x.cof[j] * x.normal[j] * d[j];
  }
  return {gv.g, f * ky, f * kx};
}

cd kernel_layer(LayerKind kind, const KernelPoint& x, const KernelPoint& y, double k, int dim) {
  const LayerValues v = kernel_layers(x, y, k, dim);
  switch (kind) {
    case LayerKind::S: return v.s;
    case LayerKind::K: return v.k;
    case LayerKind::Kt: return v.kt;
  }
  return v.s;
}

HyperParts kernel_hyper_parts(const KernelPoint& x, const KernelPoint& y, double k, int dim) {
  const GreenValue gv = green_pml(x, y, k, dim);
  HyperParts h;
  h.weak = gv.g;
  h.weak_vector = Vec3c::Zero();
  cd w = 0.0;
  for (int i = 0; i < dim; ++i) w += x.normal[i] * x.cof[i] * y.cof[i] * y.normal[i];
  h.zero_order = k * k * w * gv.g;
  if (dim == 3) {
    Vec3c grad;
    for (int j = 0; j < 3; ++j) grad[j] = x.alpha[j] * gv.dg * (x.xt[j] - y.xt[j]) / gv.rho;
    const Vec3c n = x.normal.cast<cd>();
    const Vec3c c = n.cross(grad);
    for (int i = 0; i < 3; ++i) h.weak_vector[i] = x.alpha[i] * y.alpha[i] * c[i];
  }
  return h;
}

cd stretched_normal_derivative(const KernelPoint& p, const Vec3c& grad) {
  cd s = 0.0;
  for (int j = 0; j < 3; ++j) s += p.cof[j] * p.normal[j] * grad[j];
  return s;
}

Vec3 incident_direction(const Incidence& inc, int dim) {
  if (dim == 2) return Vec3(std::sin(inc.theta), -std::cos(inc.theta), 0.0);
  return Vec3(std::sin(inc.theta) * std::cos(inc.phi), std::sin(inc.theta) * std::sin(inc.phi),
              -std::cos(inc.theta));
}

namespace {

FieldValue plane_wave(const Vec3& d, double k, const Vec3c& xt, int mirror_axis, cd amplitude) {
  Vec3c dd = d.cast<cd>();
  if (mirror_axis >= 0) dd[mirror_axis] = -dd[mirror_axis];
  FieldValue f;
  f.value = amplitude * std::exp(kI * k * (dd.transpose() * xt).value());
  for (int j = 0; j < 3; ++j) f.grad[j] = kI * k * dd[j] * f.value;
  return f;
}

}  // namespace

FieldValue incident_field(const Incidence& inc, double k, int dim, const Vec3c& xt) {
  if (inc.kind == Incidence::Kind::plane_wave) return plane_wave(incident_direction(inc, dim), k, xt, -1, 1.0);
  const Vec3c d = xt - inc.source.cast<cd>();
  const GreenValue gv = green_of_rho(pml::complex_distance(xt, inc.source.cast<cd>()), k, dim);
  FieldValue f;
  f.value = gv.g;
  for (int j = 0; j < dim; ++j) f.grad[j] = gv.dg * d[j] / gv.rho;
  return f;
}

FieldValue incident_field(const Incidence& inc, double k, int dim, const Vec3& x) {
  return incident_field(inc, k, dim, Vec3c(x.cast<cd>()));
}

FieldValue reference_field(const Incidence& inc, ReferenceSign bc, double k, int dim, const Vec3c& xt) {
  if (inc.kind == Incidence::Kind::point_source) return {};
  const cd amp = bc == ReferenceSign::dirichlet ? -1.0 : 1.0;
  return plane_wave(incident_direction(inc, dim), k, xt, dim - 1, amp);
}

FieldValue reference_field(const Incidence& inc, ReferenceSign bc, double k, int dim, const Vec3& x) {
  return reference_field(inc, bc, k, dim, Vec3c(x.cast<cd>()));
}

FresnelCoefficients fresnel(const Incidence& inc, double k1, double k2) {
  FresnelCoefficients f;
  f.xi = k1 * std::sin(inc.theta);
  f.beta1 = k1 * std::cos(inc.theta);
  f.beta2 = k2 == k1 ? f.beta1 : specfun::branch_sqrt(cd(k2 * k2 - f.xi * f.xi, 0.0));
  f.reflection = (f.beta1 - f.beta2) / (f.beta1 + f.beta2);
  f.transmission = 2.0 * f.beta1 / (f.beta1 + f.beta2);
  return f;
}

FieldValue twolayer_reference(const Incidence& inc, double k1, double k2, int dim, int layer,
                              const Vec3c& xt) {
  if (inc.kind != Incidence::Kind::plane_wave)
    throw ConfigError("two-layer reference fields need plane-wave incidence");
  if (k1 == k2) return layer == 1 ? FieldValue{} : plane_wave(incident_direction(inc, dim), k1, xt, -1, 1.0);
  const FresnelCoefficients fc = fresnel(inc, k1, k2);
  Vec3c kv = Vec3c::Zero();
  const Vec3 d = incident_direction(inc, dim);
  for (int j = 0; j + 1 < dim; ++j) kv[j] = k1 * d[j];
  cd amp;
  if (layer == 1) {
    kv[dim - 1] = fc.beta1;
    amp = fc.reflection;
  } else {
    kv[dim - 1] = -fc.beta2;
    amp = fc.transmission;
  }
  FieldValue f;
  f.value = amp * std::exp(kI * (kv.transpose() * xt).value());
  for (int j = 0; j < 3; ++j) f.grad[j] = kI * kv[j] * f.value;
  return f;
}

FieldValue twolayer_reference(const Incidence& inc, double k1, double k2, int dim, int layer,
                              const Vec3& x) {
  return twolayer_reference(inc, k1, k2, dim, layer, Vec3c(x.cast<cd>()));
}

}  // namespace pmlbie::kernels
