#pragma once

#include <string>
#include <variant>

#include "kansa/polynomial.hpp"
#include "kansa/types.hpp"

namespace kansa {

struct Rectangle {
  Vector lower;
  Vector upper;
};

struct Ball {
  Vector center;
  double radius = 1.0;
};

/// Bounded domain Omega. Rectangles and balls both satisfy an interior cone
/// condition, so no runtime check is made for it.
class Domain {
 public:
  explicit Domain(Rectangle rect);
  explicit Domain(Ball ball);

  static Domain box(const Vector& lower, const Vector& upper) { return Domain(Rectangle{lower, upper}); }
  static Domain ball(const Vector& center, double radius) { return Domain(Ball{center, radius}); }

  int dimension() const;
  bool is_rectangle() const { return std::holds_alternative<Rectangle>(shape_); }
  const Rectangle& rectangle() const;
  const Ball& as_ball() const;

  // Membership of the closure, with an absolute slack for rounding.
  bool contains(const PointRef& x, double slack = 1e-12) const;
  bool contains_box(const Domain& inner) const;

  // Axis-aligned bounding box (identical to the rectangle itself).
  Vector bounding_lower() const;
  Vector bounding_upper() const;

  // Tail centred on the domain midpoint and scaled by half-widths (radius for balls).
  PolynomialTail tail(int m) const;

  std::string describe() const;

 private:
  std::variant<Rectangle, Ball> shape_;
};

/// Ordered list of pairwise distinct collocation sites.
class SiteSet {
 public:
  // Throws InputError on duplicate points (naming their coordinates) or an empty set.
  explicit SiteSet(PointMatrix points);

  Eigen::Index size() const { return points_.rows(); }
  int dimension() const { return static_cast<int>(points_.cols()); }
  const PointMatrix& points() const { return points_; }
  auto point(Eigen::Index j) const { return points_.row(j).transpose(); }

  // Throws InputError if some site lies outside the closure of `domain`.
  void require_inside(const Domain& domain) const;

  Vector bounding_lower() const;
  Vector bounding_upper() const;

 private:
  PointMatrix points_;
};

// Tensor grid with endpoints on every axis; N = points_per_axis^d.
SiteSet equispaced_grid(const Domain& domain, int points_per_axis);

// Same grid as raw coordinates (used for evaluation grids as well).
PointMatrix tensor_grid(const Vector& lower, const Vector& upper, int points_per_axis);

// q_X = half the minimum pairwise distance.
double separation_distance(const SiteSet& sites);

// Minimum pairwise distance (2 q_X).
double minimum_spacing(const SiteSet& sites);

// Mean of the full N x N matrix of pairwise distances (diagonal included).
double mean_pairwise_distance(const SiteSet& sites);

inline constexpr int kDefaultFillResolution = 200;

/// Lower approximation of sup_{x in Omega} min_j |x - x_j| by maximising over a
/// tensor candidate grid with `resolution` points per axis (clipped to the
/// ball for ball domains). Converges from below as resolution grows.
double fill_distance(const SiteSet& sites, const Domain& domain,
                     int resolution = kDefaultFillResolution);

// Empirical c_qu = fill distance / separation distance.
double quasi_uniformity(const SiteSet& sites, const Domain& domain,
                        int resolution = kDefaultFillResolution);

enum class Unisolvency { unisolvent, not_unisolvent, trivially_true };

std::string to_string(Unisolvency u);

struct UnisolvencyReport {
  Unisolvency status = Unisolvency::trivially_true;
  int rank = 0;
  int tail_size = 0;
  // N >= m and every coordinate sequence pairwise distinct.
  bool sufficient_condition = false;
};

inline constexpr double kRankThreshold = 1e-10;

/// Decides Pi_{m-1}-unisolvency from the rank of the N x Q monomial matrix
/// (singular values below kRankThreshold * sigma_max count as zero). The
/// tail defaults to one centred and scaled on the sites' bounding box.
UnisolvencyReport unisolvency_check(const SiteSet& sites, int m);
UnisolvencyReport unisolvency_check(const SiteSet& sites, const PolynomialTail& tail);

}  // namespace kansa
