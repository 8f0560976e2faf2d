#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "kansa/interpolation.hpp"

namespace kansa {

// F(t, x, z, p, Gamma) with p the gradient and Gamma the (symmetric) Hessian.
using Nonlinearity =
    std::function<double(double t, const PointRef& x, double z, const PointRef& p, const Matrix& gamma)>;
using TerminalDatum = std::function<double(const PointRef& x)>;
using ExactSolution = std::function<double(double t, const PointRef& x)>;

/// Terminal-value problem  -v_t + F(t, x, v, Dv, D^2 v) = 0 on [0, T) x R^d,
/// v(T, .) = f.
struct ParabolicProblem {
  std::string name;
  int d = 2;
  double T = 1.0;
  Nonlinearity F;
  TerminalDatum f;
  ExactSolution exact;  // optional; empty when unknown

  void validate() const;
};

struct SchemeConfig {
  int n = 100;
  double theta = 1.0;
  double fp_tol = 1e-10;
  int fp_max_iter = 200;
  int m = 0;

  void validate() const;
};

// Random (t, x, z, p, Gamma) tuples for structural spot checks.
struct StructuralSample {
  double t = 0.0;
  Vector x;
  double z = 0.0;
  Vector p;
  Matrix gamma;
};
StructuralSample draw_structural_sample(std::mt19937_64& rng, const ParabolicProblem& problem,
                                        const std::optional<Domain>& domain);

struct StructuralCheck {
  int samples = 0;
  int violations = 0;
  double worst_excess = 0.0;
};

inline constexpr int kEllipticitySamples = 50;

/// Samples F(..., Gamma' + S) <= F(..., Gamma') + 1e-9 with S positive
/// semidefinite. Sampling can only catch sign mistakes, never prove the property.
StructuralCheck check_degenerate_ellipticity(const ParabolicProblem& problem,
                                             const std::optional<Domain>& domain,
                                             int samples = kEllipticitySamples,
                                             std::uint64_t seed = 20150101);

// |F| <= K1 (1 + |z| + |p| + |Gamma|) on random tuples; |Gamma| is the spectral norm.
StructuralCheck check_growth(const ParabolicProblem& problem, double K1,
                             const std::optional<Domain>& domain, int samples = 1000,
                             std::uint64_t seed = 20150102);

struct SolutionField {
  Matrix values;                        // (n + 1) x N, row k holds v_k
  std::vector<Interpolant> interpolants;  // interpolants[k] fitted from values.row(k)
  std::vector<double> time_grid;        // t_0 .. t_n
  std::shared_ptr<const SiteSet> sites;
  std::vector<int> fixed_point_iterations;  // per step k = 0 .. n-1

  int steps() const { return static_cast<int>(time_grid.size()) - 1; }
  double horizon() const { return time_grid.back(); }
};

// Collocated nonlinearity F(t, x_j, I(x_j), DI(x_j), D^2 I(x_j)), j = 1..N,
// through termwise differentiation of the interpolant.
Vector collocated_F(const ParabolicProblem& problem, double t, const Interpolant& interpolant);

enum class StepPath {
  automatic,  // explicit recursion when theta = 1
  general,    // always the fixed-point route
};

/// Backward theta-scheme on a fixed site set. The interpolation system is
/// factorised once and reused at every step.
class CollocationSolver {
 public:
  CollocationSolver(ParabolicProblem problem, SchemeConfig config, KernelSpec kernel, SiteSet sites,
                    std::optional<Domain> domain = std::nullopt);

  const ParabolicProblem& problem() const { return problem_; }
  const SchemeConfig& config() const { return config_; }
  const InterpolationSystem& system() const { return system_; }
  double step_size() const { return problem_.T / config_.n; }
  double time(int k) const { return problem_.T * k / config_.n; }
  const StructuralCheck& ellipticity() const { return ellipticity_; }

  // Same values as the free collocated_F, from precomputed site operators.
  Vector collocated_F(double t, const Interpolant& interpolant) const;

  // v_k from v_{k+1}; throws StepError naming k on fixed-point failure.
  Vector step_backward(int k, const Vector& v_next, StepPath path = StepPath::automatic,
                       int* iterations = nullptr) const;

  SolutionField solve(StepPath path = StepPath::automatic) const;

 private:
  Vector step_from(int k, const Vector& v_next, const Interpolant& next, StepPath path,
                   int* iterations) const;

  ParabolicProblem problem_;
  SchemeConfig config_;
  InterpolationSystem system_;
  SiteDifferentiation operators_;
  StructuralCheck ellipticity_;
};

Vector step_backward(const ParabolicProblem& problem, int k, const Vector& v_next,
                     const SchemeConfig& config, const KernelSpec& kernel, const SiteSet& sites);

SolutionField solve(const ParabolicProblem& problem, const SchemeConfig& config,
                    const KernelSpec& kernel, const SiteSet& sites,
                    const std::optional<Domain>& domain = std::nullopt);

// Interpolant value at t_k; linear in t between adjacent grid times.
double evaluate_solution(const SolutionField& sol, double t, const PointRef& x);

// Per-step CSV with header k,t,j,x1..xd,v.
void write_solution_csv(std::ostream& out, const SolutionField& sol);

}  // namespace kansa
