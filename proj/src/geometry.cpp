#include "kansa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "kansa/errors.hpp"

namespace kansa {

namespace {

std::string format_point(const PointRef& x) {
  std::ostringstream out;
  out.precision(12);
  out << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x[i];
  out << ')';
  return out.str();
}

// Calls visit(point) for every point of the tensor grid without materialising it.
template <class Visit>
void for_each_grid_point(const Vector& lower, const Vector& upper, int per_axis, Visit&& visit) {
  const auto d = lower.size();
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  Vector x(d);
  auto coord = [&](Eigen::Index axis, int i) {
    if (per_axis == 1) return 0.5 * (lower[axis] + upper[axis]);
    return lower[axis] + (upper[axis] - lower[axis]) * i / (per_axis - 1);
  };
  while (true) {
    for (Eigen::Index a = 0; a < d; ++a) x[a] = coord(a, idx[static_cast<std::size_t>(a)]);
    visit(x);
    // Last axis varies fastest.
    Eigen::Index a = d - 1;
    while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == per_axis) {
      idx[static_cast<std::size_t>(a)] = 0;
      --a;
    }
    if (a < 0) break;
  }
}

}  // namespace

Domain::Domain(Rectangle rect) : shape_(std::move(rect)) {
  const auto& r = std::get<Rectangle>(shape_);
  if (r.lower.size() == 0 || r.lower.size() != r.upper.size()) {
    throw InputError("rectangle bounds must be nonempty and of equal dimension");
  }
  for (Eigen::Index i = 0; i < r.lower.size(); ++i) {
    if (!(r.lower[i] < r.upper[i])) {
      throw InputError("rectangle requires lower < upper on axis " + std::to_string(i));
    }
  }
}

Domain::Domain(Ball ball) : shape_(std::move(ball)) {
  const auto& b = std::get<Ball>(shape_);
  if (b.center.size() == 0) throw InputError("ball centre must be nonempty");
  if (!(b.radius > 0.0)) throw InputError("ball radius must be positive");
}

int Domain::dimension() const {
  return static_cast<int>(is_rectangle() ? rectangle().lower.size() : as_ball().center.size());
}

const Rectangle& Domain::rectangle() const {
  if (!is_rectangle()) throw InputError("domain is not a rectangle");
  return std::get<Rectangle>(shape_);
}

const Ball& Domain::as_ball() const {
  if (is_rectangle()) throw InputError("domain is not a ball");
  return std::get<Ball>(shape_);
}

bool Domain::contains(const PointRef& x, double slack) const {
  if (x.size() != dimension()) return false;
  if (is_rectangle()) {
    const auto& r = rectangle();
    return ((x - r.lower).array() >= -slack).all() && ((r.upper - x).array() >= -slack).all();
  }
  const auto& b = as_ball();
  return (x - b.center).norm() <= b.radius + slack;
}

bool Domain::contains_box(const Domain& inner) const {
  if (inner.dimension() != dimension()) return false;
  const Vector lo = inner.bounding_lower();
  const Vector hi = inner.bounding_upper();
  if (is_rectangle()) return contains(lo) && contains(hi);
  // A box lies in a ball iff all its corners do.
  bool all = true;
  for_each_grid_point(lo, hi, 2, [&](const Vector& c) { all = all && contains(c); });
  return all;
}

Vector Domain::bounding_lower() const {
  if (is_rectangle()) return rectangle().lower;
  const auto& b = as_ball();
  return b.center.array() - b.radius;
}

Vector Domain::bounding_upper() const {
  if (is_rectangle()) return rectangle().upper;
  const auto& b = as_ball();
  return b.center.array() + b.radius;
}

PolynomialTail Domain::tail(int m) const {
  if (is_rectangle()) return PolynomialTail::for_box(m, rectangle().lower, rectangle().upper);
  const auto& b = as_ball();
  return PolynomialTail(m, b.center, Vector::Constant(b.center.size(), b.radius));
}

std::string Domain::describe() const {
  std::ostringstream out;
  if (is_rectangle()) {
    out << "rectangle lower=" << format_point(rectangle().lower)
        << " upper=" << format_point(rectangle().upper);
  } else {
    out << "ball center=" << format_point(as_ball().center) << " radius=" << as_ball().radius;
  }
  return out.str();
}

SiteSet::SiteSet(PointMatrix points) : points_(std::move(points)) {
  if (points_.rows() == 0 || points_.cols() == 0) throw InputError("site set must be nonempty");
  if (!points_.allFinite()) throw InputError("site coordinates must be finite");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(points_.rows()));
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < points_.cols(); ++c) {
      if (points_(a, c) != points_(b, c)) return points_(a, c) < points_(b, c);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!less(order[i - 1], order[i])) {
      throw InputError("duplicate site " + format_point(points_.row(order[i]).transpose()) +
                       " at rows " + std::to_string(std::min(order[i - 1], order[i])) + " and " +
                       std::to_string(std::max(order[i - 1], order[i])));
    }
  }
}

void SiteSet::require_inside(const Domain& domain) const {
  if (domain.dimension() != dimension()) throw InputError("site/domain dimension mismatch");
  for (Eigen::Index j = 0; j < size(); ++j) {
    if (!domain.contains(point(j), 1e-9)) {
      throw InputError("site " + format_point(point(j)) + " lies outside " + domain.describe());
    }
  }
}

Vector SiteSet::bounding_lower() const { return points_.colwise().minCoeff().transpose(); }
Vector SiteSet::bounding_upper() const { return points_.colwise().maxCoeff().transpose(); }

PointMatrix tensor_grid(const Vector& lower, const Vector& upper, int points_per_axis) {
  if (points_per_axis < 1) throw InputError("points per axis must be >= 1");
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw InputError("grid bounds must be nonempty and of equal dimension");
  }
  const auto d = lower.size();
  const auto n = static_cast<Eigen::Index>(std::llround(std::pow(points_per_axis, d)));
  PointMatrix pts(n, d);
  Eigen::Index row = 0;
  // Endpoints included; a single point per axis sits at the midpoint.
  for_each_grid_point(lower, upper, points_per_axis, [&](const Vector& x) {
    pts.row(row++) = x.transpose();
  });
  return pts;
}

SiteSet equispaced_grid(const Domain& domain, int points_per_axis) {
  if (!domain.is_rectangle()) throw InputError("equispaced grids require a rectangle domain");
  return SiteSet(tensor_grid(domain.rectangle().lower, domain.rectangle().upper, points_per_axis));
}

double minimum_spacing(const SiteSet& sites) {
  if (sites.size() < 2) throw InputError("separation distance needs at least two sites");
  const auto& p = sites.points();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < p.rows(); ++j) {
      best = std::min(best, (p.row(i) - p.row(j)).squaredNorm());
    }
  }
  return std::sqrt(best);
}

double separation_distance(const SiteSet& sites) { return 0.5 * minimum_spacing(sites); }

double mean_pairwise_distance(const SiteSet& sites) {
  const auto& p = sites.points();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < p.rows(); ++j) sum += 2.0 * (p.row(i) - p.row(j)).norm();
  }
  const double n = static_cast<double>(p.rows());
  return sum / (n * n);
}

double fill_distance(const SiteSet& sites, const Domain& domain, int resolution) {
  if (resolution < 2) throw InputError("fill distance resolution must be >= 2");
  if (domain.dimension() != sites.dimension()) throw InputError("site/domain dimension mismatch");
  const auto& p = sites.points();
  const bool clip = !domain.is_rectangle();
  double worst = 0.0;
  for_each_grid_point(domain.bounding_lower(), domain.bounding_upper(), resolution,
                      [&](const Vector& x) {
                        if (clip && !domain.contains(x)) return;
                        const double nearest = (p.rowwise() - x.transpose()).rowwise().squaredNorm().minCoeff();
                        worst = std::max(worst, nearest);
                      });
  return std::sqrt(worst);
}

double quasi_uniformity(const SiteSet& sites, const Domain& domain, int resolution) {
  return fill_distance(sites, domain, resolution) / separation_distance(sites);
}

std::string to_string(Unisolvency u) {
  switch (u) {
    case Unisolvency::unisolvent:
      return "unisolvent";
    case Unisolvency::not_unisolvent:
      return "not_unisolvent";
    case Unisolvency::trivially_true:
      return "trivially_true";
  }
  return "unknown";
}

UnisolvencyReport unisolvency_check(const SiteSet& sites, int m) {
  return unisolvency_check(
      sites, PolynomialTail::for_box(std::max(m, 0), sites.bounding_lower(), sites.bounding_upper()));
}

UnisolvencyReport unisolvency_check(const SiteSet& sites, const PolynomialTail& tail) {
  UnisolvencyReport report;
  const int m = tail.m();
  report.tail_size = tail.size();

  bool distinct = sites.size() >= m;
  for (int c = 0; c < sites.dimension() && distinct; ++c) {
    std::vector<double> coords(sites.points().col(c).begin(), sites.points().col(c).end());
    std::sort(coords.begin(), coords.end());
    distinct = std::adjacent_find(coords.begin(), coords.end()) == coords.end();
  }
  report.sufficient_condition = distinct;

  if (m == 0) {
    report.status = Unisolvency::trivially_true;
    return report;
  }
  const Matrix p = tail.collocation(sites.points());
  Eigen::JacobiSVD<Matrix> svd(p);
  const Vector& sv = svd.singularValues();
  const double cutoff = kRankThreshold * (sv.size() ? sv[0] : 0.0);
  report.rank = static_cast<int>((sv.array() > cutoff).count());
  report.status = report.rank == tail.size() ? Unisolvency::unisolvent : Unisolvency::not_unisolvent;
  return report;
}

}  // namespace kansa
