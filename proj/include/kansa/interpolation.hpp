#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <variant>

#include "kansa/geometry.hpp"
#include "kansa/kernel.hpp"
#include "kansa/polynomial.hpp"

namespace kansa {

inline constexpr double kMaxCondition = 1e14;
inline constexpr Eigen::Index kSvdConditionLimit = 2000;

/// Kernel expansion sum_j xi_j Phi(x, x_j) + sum_l eta_l pi_l(x).
/// Immutable after construction; safe to evaluate from several threads.
class Interpolant {
 public:
  Interpolant(KernelSpec kernel, std::shared_ptr<const SiteSet> sites, PolynomialTail tail,
              Vector xi, Vector eta, std::optional<Domain> domain = std::nullopt);

  const KernelSpec& kernel() const { return kernel_; }
  const SiteSet& sites() const { return *sites_; }
  std::shared_ptr<const SiteSet> shared_sites() const { return sites_; }
  const PolynomialTail& tail() const { return tail_; }
  const Vector& xi() const { return xi_; }
  // Tail coefficients in the centred/scaled basis of tail().
  const Vector& eta() const { return eta_; }
  const std::optional<Domain>& domain() const { return domain_; }
  int dimension() const { return sites_->dimension(); }

  // Evaluation is defined on all of R^d; points outside the domain log a warning.
  double evaluate(const PointRef& x) const;
  double derivative(const MultiIndex& alpha, const PointRef& x) const;
  Vector gradient(const PointRef& x) const;
  Matrix hessian(const PointRef& x) const;

  // sqrt(xi^T A xi), the native-space seminorm.
  double native_seminorm() const;

  // Tail coefficients in raw monomials x^e.
  std::map<MultiIndex, double> raw_tail_coefficients() const { return tail_.to_raw_monomials(eta_); }

 private:
  void check_point(const PointRef& x) const;

  KernelSpec kernel_;
  std::shared_ptr<const SiteSet> sites_;
  PolynomialTail tail_;
  Vector xi_;
  Vector eta_;
  std::optional<Domain> domain_;
};

// [[A, P], [P^T, 0]] with A_ij = Phi(x_i, x_j) and P_jl = pi_l(x_j).
// Throws InputError when Q > 0 and the sites are not unisolvent.
Matrix assemble_system(const KernelSpec& kernel, const SiteSet& sites, const PolynomialTail& tail);

// Kernel block only.
Matrix kernel_matrix(const KernelSpec& kernel, const SiteSet& sites);

enum class Factorization {
  automatic,  // Cholesky when Q = 0 (LU fallback), LU for the saddle system
  lu,
};

/// Factorised interpolation system for fixed kernel, sites and tail. Fitting
/// new data reuses the factorisation; the fitted map b -> (xi, eta) is linear.
class InterpolationSystem {
 public:
  InterpolationSystem(KernelSpec kernel, SiteSet sites, PolynomialTail tail,
                      std::optional<Domain> domain = std::nullopt,
                      Factorization method = Factorization::automatic);
  InterpolationSystem(KernelSpec kernel, std::shared_ptr<const SiteSet> sites, PolynomialTail tail,
                      std::optional<Domain> domain = std::nullopt,
                      Factorization method = Factorization::automatic);

  const KernelSpec& kernel() const { return kernel_; }
  const SiteSet& sites() const { return *sites_; }
  std::shared_ptr<const SiteSet> shared_sites() const { return sites_; }
  const PolynomialTail& tail() const { return tail_; }
  const std::optional<Domain>& domain() const { return domain_; }
  const Matrix& matrix() const { return matrix_; }
  // 2-norm condition number (SVD) or a 1-norm LU estimate for large systems.
  double condition() const { return condition_; }
  bool used_cholesky() const { return std::holds_alternative<Eigen::LLT<Matrix>>(solver_); }

  // Throws InputError on a length mismatch.
  Interpolant fit(const Vector& values) const;
  // Full solution (xi, eta) of the block system for right-hand side (b, 0).
  Vector solve(const Vector& values) const;

 private:
  void factorize(Factorization method);

  KernelSpec kernel_;
  std::shared_ptr<const SiteSet> sites_;
  PolynomialTail tail_;
  std::optional<Domain> domain_;
  Matrix matrix_;
  double condition_ = 0.0;
  std::variant<Eigen::LLT<Matrix>, Eigen::PartialPivLU<Matrix>> solver_;
};

// One-shot fit. Tail order taken from `tail`; Q = 0 takes the direct A xi = b route.
Interpolant fit(const KernelSpec& kernel, const SiteSet& sites, const Vector& values,
                const PolynomialTail& tail);

/// Delta^(nu - |alpha|) * |f|_N: the interpolation error estimate without the
/// unknown constant C_{nu,Phi}. An indicator, not a certified bound.
double error_indicator(const Interpolant& f, double fill, int alpha_order);

/// Values, gradients and Hessians at the sites of a fixed system, via
/// precomputed differentiation matrices.
struct SiteJets {
  Vector values;
  Matrix gradients;             // N x d
  std::vector<Matrix> hessians;  // N matrices, d x d
};

class SiteDifferentiation {
 public:
  explicit SiteDifferentiation(const InterpolationSystem& system);
  SiteJets apply(const Interpolant& f) const;

 private:
  int d_ = 0;
  Matrix value_;                   // N x (N + Q)
  std::vector<Matrix> first_;      // d of them
  std::vector<Matrix> second_;     // d(d+1)/2 of them, upper triangle row-major
};

// Plain-text coefficient dump: kernel, tail metadata, sites, xi, eta.
void write_interpolant(std::ostream& out, const Interpolant& f);
Interpolant read_interpolant(std::istream& in);

}  // namespace kansa
