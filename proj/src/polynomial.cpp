#include "kansa/polynomial.hpp"

#include <cmath>
#include <numeric>

#include "kansa/errors.hpp"

namespace kansa {

int order(const MultiIndex& alpha) { return std::accumulate(alpha.begin(), alpha.end(), 0); }

namespace {

void append_with_order(int d, int total, std::size_t axis, MultiIndex& current,
                       std::vector<MultiIndex>& out) {
  if (axis + 1 == static_cast<std::size_t>(d)) {
    current[axis] = total;
    out.push_back(current);
    return;
  }
  for (int e = total; e >= 0; --e) {
    current[axis] = e;
    append_with_order(d, total - e, axis + 1, current, out);
  }
  current[axis] = 0;
}

double falling_factorial(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= static_cast<double>(n - i);
  return r;
}

double binomial(int n, int k) { return falling_factorial(n, k) / falling_factorial(k, k); }

}  // namespace

std::vector<MultiIndex> multi_indices_up_to(int d, int max_order) {
  std::vector<MultiIndex> out;
  if (d < 1 || max_order < 0) return out;
  MultiIndex current(static_cast<std::size_t>(d), 0);
  for (int total = 0; total <= max_order; ++total) append_with_order(d, total, 0, current, out);
  return out;
}

int tail_dimension(int m, int d) {
  if (m <= 0) return 0;
  return static_cast<int>(std::lround(binomial(m - 1 + d, d)));
}

PolynomialTail::PolynomialTail(int m, Vector center, Vector scale)
    : m_(m), center_(std::move(center)), scale_(std::move(scale)) {
  if (m < 0) throw InputError("polynomial tail order must be nonnegative");
  if (center_.size() != scale_.size() || center_.size() == 0) {
    throw InputError("polynomial tail centre/scale dimension mismatch");
  }
  if ((scale_.array() <= 0.0).any()) throw InputError("polynomial tail scales must be positive");
  if (m_ > 0) exponents_ = multi_indices_up_to(dimension(), m_ - 1);
}

PolynomialTail PolynomialTail::for_box(int m, const Vector& lower, const Vector& upper) {
  Vector scale = 0.5 * (upper - lower);
  // Degenerate extents (all sites on a hyperplane) keep unit scale.
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    if (!(scale[i] > 0.0)) scale[i] = 1.0;
  }
  return PolynomialTail(m, 0.5 * (upper + lower), scale);
}

Vector PolynomialTail::evaluate(const PointRef& x) const {
  return derivative(MultiIndex(static_cast<std::size_t>(dimension()), 0), x);
}

Vector PolynomialTail::derivative(const MultiIndex& alpha, const PointRef& x) const {
  if (x.size() != dimension() || static_cast<int>(alpha.size()) != dimension()) {
    throw InputError("polynomial tail evaluated with mismatched dimension");
  }
  Vector out(size());
  const Vector z = ((x - center_).array() / scale_.array()).matrix();
  for (int l = 0; l < size(); ++l) {
    const auto& e = exponents_[static_cast<std::size_t>(l)];
    double v = 1.0;
    for (int i = 0; i < dimension() && v != 0.0; ++i) {
      const int a = alpha[static_cast<std::size_t>(i)];
      const int p = e[static_cast<std::size_t>(i)];
      if (a > p) {
        v = 0.0;
        break;
      }
      v *= falling_factorial(p, a) * std::pow(z[i], p - a) / std::pow(scale_[i], a);
    }
    out[l] = v;
  }
  return out;
}

Matrix PolynomialTail::collocation(const PointMatrix& points) const {
  Matrix p(points.rows(), size());
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    p.row(j) = evaluate(points.row(j).transpose()).transpose();
  }
  return p;
}

std::map<MultiIndex, double> PolynomialTail::to_raw_monomials(const Vector& coeffs) const {
  if (coeffs.size() != size()) throw InputError("tail coefficient vector has wrong length");
  std::map<MultiIndex, double> raw;
  const int d = dimension();
  for (int l = 0; l < size(); ++l) {
    const auto& e = exponents_[static_cast<std::size_t>(l)];
    // prod_i ((x_i - c_i)/s_i)^{e_i} = prod_i sum_a C(e_i, a) x_i^a (-c_i)^{e_i - a} / s_i^{e_i}
    std::vector<std::pair<MultiIndex, double>> terms{{MultiIndex(static_cast<std::size_t>(d), 0),
                                                      coeffs[l]}};
    for (int i = 0; i < d; ++i) {
      const int p = e[static_cast<std::size_t>(i)];
      std::vector<std::pair<MultiIndex, double>> next;
      for (const auto& [expo, c] : terms) {
        for (int a = 0; a <= p; ++a) {
          MultiIndex ex = expo;
          ex[static_cast<std::size_t>(i)] = a;
          next.emplace_back(ex, c * binomial(p, a) * std::pow(-center_[i], p - a) /
                                    std::pow(scale_[i], p));
        }
      }
      terms = std::move(next);
    }
    for (const auto& [expo, c] : terms) raw[expo] += c;
  }
  return raw;
}

}  // namespace kansa
