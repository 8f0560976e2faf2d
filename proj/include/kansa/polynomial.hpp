#pragma once

#include <map>

#include "kansa/types.hpp"

namespace kansa {

/// Basis of Pi_{m-1}(R^d): monomials of total degree <= m - 1 written in
/// centred and scaled coordinates (x_i - center_i) / scale_i.
class PolynomialTail {
 public:
  PolynomialTail() = default;
  PolynomialTail(int m, Vector center, Vector scale);

  // Tail for an axis-aligned box; centre is the midpoint, scale the half-widths.
  static PolynomialTail for_box(int m, const Vector& lower, const Vector& upper);

  int m() const { return m_; }
  int dimension() const { return static_cast<int>(center_.size()); }
  int size() const { return static_cast<int>(exponents_.size()); }
  const std::vector<MultiIndex>& exponents() const { return exponents_; }
  const Vector& center() const { return center_; }
  const Vector& scale() const { return scale_; }

  // (pi_1(x), ..., pi_Q(x))
  Vector evaluate(const PointRef& x) const;
  // (D^alpha pi_1(x), ..., D^alpha pi_Q(x))
  Vector derivative(const MultiIndex& alpha, const PointRef& x) const;
  // N x Q matrix P with P(j, l) = pi_l(x_j).
  Matrix collocation(const PointMatrix& points) const;

  // Re-expresses sum_l coeffs_l pi_l(x) in raw monomials x^e; keys are exponents.
  std::map<MultiIndex, double> to_raw_monomials(const Vector& coeffs) const;

 private:
  int m_ = 0;
  Vector center_;
  Vector scale_;
  std::vector<MultiIndex> exponents_;
};

// Dimension of Pi_{m-1}(R^d), i.e. C(m - 1 + d, d); zero for m = 0.
int tail_dimension(int m, int d);

}  // namespace kansa
