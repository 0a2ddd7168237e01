#pragma once

#include "pmlbie/pml.hpp"
#include "pmlbie/types.hpp"

namespace pmlbie::kernels {

// Boundary or evaluation point with its stretched data cached.
struct KernelPoint {
  Vec3 x = Vec3::Zero();
  Vec3c xt = Vec3c::Zero();
  Vec3c alpha = Vec3c::Ones();
  Vec3c cof = Vec3c::Ones();  // cofactors of alpha
  Vec3 normal = Vec3::Zero();
  double jacobian = 1.0;
  bool physical = true;       // inside the closed physical box, alpha == 1
};

KernelPoint make_kernel_point(const Vec3& x, const Vec3& normal, double jacobian,
                              const pml::PmlProfile& profile);

// (i/4) H0(k|x-y|) in 2D, exp(ik|x-y|) / (4 pi |x-y|) in 3D.
cd green_free(const Vec3& x, const Vec3& y, double k, int dim);

struct GreenValue {
  cd g;    // G(rho)
  cd dg;   // dG/drho
  cd rho;
};

// Free-space Green's function as a function of a (complex) distance.
GreenValue green_of_rho(cd rho, double k, int dim);
GreenValue green_pml(const KernelPoint& x, const KernelPoint& y, double k, int dim);
GreenValue green_pml(const pml::StretchedPoint& x, const pml::StretchedPoint& y, double k, int dim);

enum class LayerKind { S, K, Kt };

cd kernel_layer(LayerKind kind, const KernelPoint& x, const KernelPoint& y, double k, int dim);

// S, K and Kt kernels from a single Green's function evaluation.
struct LayerValues {
  cd s, k, kt;
};
LayerValues kernel_layers(const KernelPoint& x, const KernelPoint& y, double k, int dim);
// Same, with y.x - x.x supplied by the caller (accurate for nearby points).
LayerValues kernel_layers(const KernelPoint& x, const KernelPoint& y, double k, int dim, const Vec3& diff);

struct HyperParts {
  cd weak;            // 2D: G
  Vec3c weak_vector;  // 3D: A2 (nu_x x grad_x) G
  cd zero_order;      // k^2 nu_x^T A nu_y G
};
HyperParts kernel_hyper_parts(const KernelPoint& x, const KernelPoint& y, double k, int dim);

// sum_j c_j nu^j d/dxt_j for a gradient taken in stretched coordinates.
cd stretched_normal_derivative(const KernelPoint& p, const Vec3c& grad);

struct Incidence {
  enum class Kind { plane_wave, point_source } kind = Kind::plane_wave;
  double theta = 0.0;
  double phi = 0.0;
  Vec3 source = Vec3::Zero();
};

// (sin t, -cos t) in 2D; (sin t cos p, sin t sin p, -cos t) in 3D.
Vec3 incident_direction(const Incidence& inc, int dim);

// Value and gradient with respect to the (stretched) coordinates.
struct FieldValue {
  cd value = 0.0;
  Vec3c grad = Vec3c::Zero();
};

FieldValue incident_field(const Incidence& inc, double k, int dim, const Vec3c& xt);
FieldValue incident_field(const Incidence& inc, double k, int dim, const Vec3& x);

enum class ReferenceSign { dirichlet, neumann };

// Field reflected by the flat plane; zero for point sources.
FieldValue reference_field(const Incidence& inc, ReferenceSign bc, double k, int dim, const Vec3c& xt);
FieldValue reference_field(const Incidence& inc, ReferenceSign bc, double k, int dim, const Vec3& x);

struct FresnelCoefficients {
  cd reflection;
  cd transmission;
  cd beta1;  // vertical wavenumbers
  cd beta2;
  double xi;  // horizontal wavenumber k1 sin theta
};

// Continuity of value and normal derivative across the plane; the lower
// vertical wavenumber takes the Im >= 0 branch.
FresnelCoefficients fresnel(const Incidence& inc, double k1, double k2);

// Reflected field (layer 1) or transmitted field (layer 2) of a plane wave
// travelling in the upper layer.
FieldValue twolayer_reference(const Incidence& inc, double k1, double k2, int dim, int layer,
                              const Vec3c& xt);
FieldValue twolayer_reference(const Incidence& inc, double k1, double k2, int dim, int layer,
                              const Vec3& x);

}  // namespace pmlbie::kernels
