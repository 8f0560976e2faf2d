#pragma once

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "kansa/solver.hpp"

namespace kansa::bench {

// -v_t + F = 0 form of  v_t + 1/2 tr(D^2 v) + 1/2 |Dv|^2 = 0.
double kpz_F(double t, const PointRef& x, double z, const PointRef& p, const Matrix& gamma);
// Linear sub-case F = -1/2 tr(Gamma).
double heat_F(double t, const PointRef& x, double z, const PointRef& p, const Matrix& gamma);

// prod_i cos(x_i); cos(x1) cos(x2) in the plane.
double kpz_terminal(const PointRef& x);

// exp(d (t - 1) / 2) prod_i cos(x_i), the heat solution with terminal time 1.
double heat_exact(double t, const PointRef& x);

ParabolicProblem kpz_problem(int d = 2);
ParabolicProblem heat_problem(int d = 2);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to one
};

// Gauss-Hermite rule for E[g(Z)], Z ~ N(0, 1), by the Golub-Welsch eigenproblem.
QuadratureRule gauss_hermite(int nodes);

inline constexpr int kDefaultHermiteNodes = 64;

/// log E[exp(f(x + sqrt(1 - t) Z))] with Z standard normal in R^d, by tensor
/// Gauss-Hermite quadrature. Deterministic. Requires 0 <= t <= 1.
double cole_hopf_quadrature(const PointRef& x, double t, int gh_nodes = kDefaultHermiteNodes);
double cole_hopf_quadrature(const PointRef& x, double t, const QuadratureRule& rule);

struct MonteCarloEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

inline constexpr std::int64_t kMonteCarloChunk = 1 << 14;

/// Monte-Carlo estimate of the same log-expectation. Samples are drawn in
/// fixed chunks, each from its own stream derived from (seed, chunk index),
/// and reduced in chunk order, so the result does not depend on `threads`.
/// The standard error is carried through the log by the delta method.
MonteCarloEstimate cole_hopf_mc(const PointRef& x, double t, std::int64_t samples,
                                std::uint64_t seed, int threads = 1);

enum class Benchmark { kpz, heat };
enum class Oracle { quadrature, monte_carlo };
enum class ShapeRule {
  mean_distance,     // eps = mean of the N x N site distance matrix
  nearest_neighbor,  // eps = minimum site spacing
};

std::string to_string(Benchmark b);
std::string to_string(Oracle o);
std::string to_string(ShapeRule r);
Benchmark parse_benchmark(const std::string& s);
Oracle parse_oracle(const std::string& s);
ShapeRule parse_shape_rule(const std::string& s);

struct BenchmarkConfig {
  std::vector<int> grids{3, 4, 5};
  double h = 1e-2;
  double theta = 1.0;
  Vector solve_lower = Vector::Constant(2, -std::numbers::pi / 2);
  Vector solve_upper = Vector::Constant(2, std::numbers::pi / 2);
  Vector eval_lower = Vector::Constant(2, -std::numbers::pi / 4);
  Vector eval_upper = Vector::Constant(2, std::numbers::pi / 4);
  int eval_per_axis = 25;
  Oracle oracle = Oracle::quadrature;
  std::int64_t mc_samples = 1'000'000;
  std::uint64_t mc_seed = 1;
  int gh_nodes = kDefaultHermiteNodes;
  ShapeRule shape_rule = ShapeRule::mean_distance;
  std::optional<double> alpha;  // overrides the shape rule
  int threads = 1;

  // Throws InputError on an inconsistent configuration.
  int validate() const;
};

// alpha = 1 / eps^2 for the selected rule.
double shape_parameter(const SiteSet& sites, ShapeRule rule);

struct BenchmarkRow {
  int per_axis = 0;
  Eigen::Index N = 0;
  double h = 0.0;
  double alpha = 0.0;
  double rms_error = 0.0;
  double max_error = 0.0;
  bool ok = false;
  std::string error;
  std::vector<double> numeric;  // v^{h,N}(0, x) on the evaluation grid
};

struct BenchmarkResult {
  Benchmark which = Benchmark::kpz;
  std::string oracle_name;
  PointMatrix eval_points;
  std::vector<double> reference;
  std::vector<BenchmarkRow> rows;

  bool all_ok() const;
};

// Reference values v(0, x) on the evaluation grid.
std::vector<double> reference_values(const BenchmarkConfig& config, Benchmark which,
                                     const PointMatrix& points);

BenchmarkResult run_benchmark(const BenchmarkConfig& config, Benchmark which);

// Header benchmark,N,h,rms_error,max_error,oracle; failed rows carry "error" markers.
void write_benchmark_csv(std::ostream& out, const BenchmarkResult& result);

// x1,x2,...,v_numeric,v_oracle for one row.
void write_grid_dump(std::ostream& out, const BenchmarkResult& result, const BenchmarkRow& row);

}  // namespace kansa::bench
