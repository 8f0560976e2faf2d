#include "kansa/kernel.hpp"

#include <cmath>
#include <sstream>

#include "kansa/errors.hpp"

namespace kansa {

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::gaussian:
      return "gaussian";
    case KernelFamily::multiquadric:
      return "multiquadric";
    case KernelFamily::inverse_multiquadric:
      return "inverse_multiquadric";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "multiquadric" || name == "mq") return KernelFamily::multiquadric;
  if (name == "inverse_multiquadric" || name == "imq") return KernelFamily::inverse_multiquadric;
  throw InputError("unknown kernel family '" + name + "'");
}

namespace {

bool is_nonnegative_integer(double beta) {
  return beta >= 0.0 && std::floor(beta) == beta;
}

}  // namespace

int minimal_cpd_order(KernelFamily family, double beta) {
  if (family == KernelFamily::multiquadric && beta > 0.0) {
    return static_cast<int>(std::ceil(beta));
  }
  return 0;
}

KernelSpec KernelSpec::gaussian(double alpha, int nu) {
  KernelSpec spec{KernelFamily::gaussian, alpha, 0.0, 0, nu};
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::multiquadric(double alpha, double beta, int nu) {
  KernelSpec spec{KernelFamily::multiquadric, alpha, beta,
                  minimal_cpd_order(KernelFamily::multiquadric, beta), nu};
  spec.validate();
  return spec;
}

KernelSpec KernelSpec::inverse_multiquadric(double alpha, double beta, int nu) {
  KernelSpec spec{KernelFamily::inverse_multiquadric, alpha, beta, 0, nu};
  spec.validate();
  return spec;
}

void KernelSpec::validate() const {
  std::ostringstream err;
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    err << "kernel alpha must be positive and finite, got " << alpha;
  } else if (nu < 2) {
    err << "kernel smoothness nu must be >= 2, got " << nu;
  } else if (family == KernelFamily::multiquadric && is_nonnegative_integer(beta)) {
    err << "multiquadric beta must not be a nonnegative integer, got " << beta;
  } else if (family == KernelFamily::inverse_multiquadric && !(beta < 0.0)) {
    err << "inverse multiquadric requires beta < 0, got " << beta;
  } else if (cpd_order < minimal_cpd_order(family, beta)) {
    err << "cpd order " << cpd_order << " is below the minimum "
        << minimal_cpd_order(family, beta) << " for " << to_string(family);
  } else {
    return;
  }
  throw InputError(err.str());
}

std::array<double, 4> profile_in_squared_radius(const KernelSpec& spec, double s) {
  if (spec.family == KernelFamily::gaussian) {
    const double a = spec.alpha;
    const double g = std::exp(-a * s);
    return {g, -a * g, a * a * g, -a * a * a * g};
  }
  // (alpha^2 + s)^beta and its falling-factorial derivatives.
  const double base = spec.alpha * spec.alpha + s;
  const double b = spec.beta;
  const double g0 = std::pow(base, b);
  const double g1 = b * g0 / base;
  const double g2 = (b - 1.0) * g1 / base;
  const double g3 = (b - 2.0) * g2 / base;
  return {g0, g1, g2, g3};
}

double radial_profile(const KernelSpec& spec, double r) {
  return profile_in_squared_radius(spec, r * r)[0];
}

namespace {

void check_dims(const PointRef& x, const PointRef& y) {
  if (x.size() != y.size() || x.size() == 0) {
    throw InputError("kernel arguments have mismatched dimensions " + std::to_string(x.size()) +
                     " and " + std::to_string(y.size()));
  }
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const PointRef& x, const PointRef& y) {
  check_dims(x, y);
  return profile_in_squared_radius(spec, (x - y).squaredNorm())[0];
}

double kernel_derivative(const KernelSpec& spec, const MultiIndex& alpha, const PointRef& x,
                         const PointRef& y) {
  check_dims(x, y);
  if (static_cast<Eigen::Index>(alpha.size()) != x.size()) {
    throw InputError("multi-index length does not match point dimension");
  }
  // Expand the multi-index into the list of differentiated axes.
  std::array<int, 3> axes{};
  int n = 0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] < 0) throw InputError("multi-index entries must be nonnegative");
    for (int r = 0; r < alpha[i]; ++r) {
      if (n == 3) throw InputError("kernel derivatives are available up to order 3");
      axes[n++] = static_cast<int>(i);
    }
  }

  const Vector u = x - y;
  const auto g = profile_in_squared_radius(spec, u.squaredNorm());
  auto delta = [](int i, int j) { return i == j ? 1.0 : 0.0; };

  switch (n) {
    case 0:
      return g[0];
    case 1:
      return 2.0 * g[1] * u[axes[0]];
    case 2: {
      const int a = axes[0], b = axes[1];
      return 4.0 * g[2] * u[a] * u[b] + 2.0 * g[1] * delta(a, b);
    }
    default: {
      const int a = axes[0], b = axes[1], c = axes[2];
      return 8.0 * g[3] * u[a] * u[b] * u[c] +
             4.0 * g[2] * (delta(a, b) * u[c] + delta(a, c) * u[b] + delta(b, c) * u[a]);
    }
  }
}

KernelJet kernel_jet(const KernelSpec& spec, const PointRef& x, const PointRef& y) {
  check_dims(x, y);
  const Vector u = x - y;
  const auto g = profile_in_squared_radius(spec, u.squaredNorm());
  KernelJet jet;
  jet.value = g[0];
  jet.gradient = 2.0 * g[1] * u;
  jet.hessian = 4.0 * g[2] * (u * u.transpose());
  jet.hessian.diagonal().array() += 2.0 * g[1];
  return jet;
}

}  // namespace kansa
