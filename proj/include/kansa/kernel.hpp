#pragma once

#include <array>
#include <string>

#include "kansa/types.hpp"

namespace kansa {

enum class KernelFamily { gaussian, multiquadric, inverse_multiquadric };

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& name);

/// Radial kernel Phi(x, y) = phi(|x - y|).
///
///   gaussian:              phi(r) = exp(-alpha r^2)
///   multiquadric:          phi(r) = (alpha^2 + r^2)^beta, beta not in {0, 1, 2, ...}
///   inverse_multiquadric:  phi(r) = (alpha^2 + r^2)^beta, beta < 0
///
/// `cpd_order` is the order m of conditional positive definiteness (0 means
/// positive definite). `nu` is the effective smoothness used by the
/// interpolation error indicator only.
struct KernelSpec {
  KernelFamily family = KernelFamily::gaussian;
  double alpha = 1.0;
  double beta = 0.0;
  int cpd_order = 0;
  int nu = 4;

  static KernelSpec gaussian(double alpha, int nu = 4);
  static KernelSpec multiquadric(double alpha, double beta, int nu = 4);
  static KernelSpec inverse_multiquadric(double alpha, double beta = -0.5, int nu = 4);

  // Throws InputError when an invariant is broken.
  void validate() const;
};

// Minimal conditional-positive-definiteness order for the family/beta.
int minimal_cpd_order(KernelFamily family, double beta);

// phi as a function of s = r^2 together with its first three s-derivatives.
// Working in s keeps every family smooth at r = 0.
std::array<double, 4> profile_in_squared_radius(const KernelSpec& spec, double s);

double radial_profile(const KernelSpec& spec, double r);

double kernel_eval(const KernelSpec& spec, const PointRef& x, const PointRef& y);

/// D^alpha_x Phi(x, y) for |alpha|_1 <= 3, from closed forms in s = |x - y|^2.
double kernel_derivative(const KernelSpec& spec, const MultiIndex& alpha, const PointRef& x,
                         const PointRef& y);

// Value, gradient and Hessian with respect to x in one pass.
struct KernelJet {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};
KernelJet kernel_jet(const KernelSpec& spec, const PointRef& x, const PointRef& y);

}  // namespace kansa
