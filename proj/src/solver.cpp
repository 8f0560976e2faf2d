#include "kansa/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "kansa/errors.hpp"
#include "kansa/log.hpp"

namespace kansa {

void ParabolicProblem::validate() const {
  if (d < 1) throw InputError("problem dimension must be >= 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw InputError("problem horizon T must be positive");
  if (!F) throw InputError("problem '" + name + "' has no nonlinearity F");
  if (!f) throw InputError("problem '" + name + "' has no terminal datum f");
}

void SchemeConfig::validate() const {
  if (n < 1) throw InputError("scheme.n must be >= 1");
  if (!(theta >= 0.0 && theta <= 1.0)) throw InputError("scheme.theta must lie in [0, 1]");
  if (!(fp_tol > 0.0)) throw InputError("scheme.fp_tol must be positive");
  if (fp_max_iter < 1) throw InputError("scheme.fp_max_iter must be >= 1");
  if (m < 0) throw InputError("interp.m must be nonnegative");
}

StructuralSample draw_structural_sample(std::mt19937_64& rng, const ParabolicProblem& problem,
                                        const std::optional<Domain>& domain) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  const int d = problem.d;
  StructuralSample s;
  s.t = problem.T * unit(rng);
  s.x.resize(d);
  const Vector lo = domain ? domain->bounding_lower() : Vector::Constant(d, -1.0);
  const Vector hi = domain ? domain->bounding_upper() : Vector::Constant(d, 1.0);
  for (int i = 0; i < d; ++i) s.x[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
  s.z = normal(rng);
  s.p.resize(d);
  for (int i = 0; i < d; ++i) s.p[i] = normal(rng);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = normal(rng);
  s.gamma = 0.5 * (g + g.transpose());
  return s;
}

StructuralCheck check_degenerate_ellipticity(const ParabolicProblem& problem,
                                             const std::optional<Domain>& domain, int samples,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  StructuralCheck check;
  check.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const auto tuple = draw_structural_sample(rng, problem, domain);
    Matrix b(problem.d, problem.d);
    for (int i = 0; i < problem.d; ++i)
      for (int j = 0; j < problem.d; ++j) b(i, j) = normal(rng);
    const Matrix increment = b * b.transpose();
    const double base = problem.F(tuple.t, tuple.x, tuple.z, tuple.p, tuple.gamma);
    const double raised = problem.F(tuple.t, tuple.x, tuple.z, tuple.p, tuple.gamma + increment);
    const double excess = raised - base;
    if (excess > 1e-9) {
      ++check.violations;
      check.worst_excess = std::max(check.worst_excess, excess);
    }
  }
  return check;
}

StructuralCheck check_growth(const ParabolicProblem& problem, double K1,
                             const std::optional<Domain>& domain, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  StructuralCheck check;
  check.samples = samples;
  for (int s = 0; s < samples; ++s) {
    const auto t = draw_structural_sample(rng, problem, domain);
    const double gamma_norm = Eigen::JacobiSVD<Matrix>(t.gamma).singularValues()[0];
    const double bound = K1 * (1.0 + std::abs(t.z) + t.p.norm() + gamma_norm);
    const double excess = std::abs(problem.F(t.t, t.x, t.z, t.p, t.gamma)) - bound;
    if (excess > 1e-12 * bound) {  // rounding at the sample that set K1
      ++check.violations;
      check.worst_excess = std::max(check.worst_excess, excess);
    }
  }
  return check;
}

namespace {

double checked_F(const ParabolicProblem& problem, double t, Eigen::Index j, const PointRef& x,
                 double z, const PointRef& p, const Matrix& gamma) {
  double value = 0.0;
  try {
    value = problem.F(t, x, z, p, gamma);
  } catch (const std::exception& e) {
    throw NumericalError("evaluation of F failed at site " + std::to_string(j) + ": " + e.what());
  }
  if (!std::isfinite(value)) {
    throw NumericalError("F returned a non-finite value at site " + std::to_string(j));
  }
  return value;
}

InterpolationSystem make_system(const KernelSpec& kernel, SiteSet sites, int m,
                                const std::optional<Domain>& domain) {
  PolynomialTail tail = domain ? domain->tail(m)
                               : PolynomialTail::for_box(m, sites.bounding_lower(), sites.bounding_upper());
  return InterpolationSystem(kernel, std::move(sites), std::move(tail), domain);
}

}  // namespace

Vector collocated_F(const ParabolicProblem& problem, double t, const Interpolant& interpolant) {
  if (interpolant.dimension() != problem.d) {
    throw InputError("interpolant dimension does not match the problem dimension");
  }
  const auto& sites = interpolant.sites();
  Vector out(sites.size());
  for (Eigen::Index j = 0; j < sites.size(); ++j) {
    const Vector x = sites.point(j);
    out[j] = checked_F(problem, t, j, x, interpolant.evaluate(x), interpolant.gradient(x),
                       interpolant.hessian(x));
  }
  return out;
}

CollocationSolver::CollocationSolver(ParabolicProblem problem, SchemeConfig config,
                                     KernelSpec kernel, SiteSet sites, std::optional<Domain> domain)
    : problem_(std::move(problem)),
      config_(config),
      system_(make_system(kernel, std::move(sites), config.m, domain)),
      operators_(system_) {
  problem_.validate();
  config_.validate();
  if (system_.sites().dimension() != problem_.d) {
    throw InputError("site dimension " + std::to_string(system_.sites().dimension()) +
                     " does not match problem dimension " + std::to_string(problem_.d));
  }
  if (domain) system_.sites().require_inside(*domain);
  ellipticity_ = check_degenerate_ellipticity(problem_, domain);
  if (ellipticity_.violations > 0) {
    std::ostringstream msg;
    msg << "problem '" << problem_.name << "' violates degenerate ellipticity on "
        << ellipticity_.violations << " of " << ellipticity_.samples
        << " sampled tuples (worst excess " << ellipticity_.worst_excess << ")";
    log_warn(msg.str());
  }
}

Vector CollocationSolver::collocated_F(double t, const Interpolant& interpolant) const {
  const auto jets = operators_.apply(interpolant);
  const auto& sites = system_.sites();
  Vector out(sites.size());
  for (Eigen::Index j = 0; j < sites.size(); ++j) {
    out[j] = checked_F(problem_, t, j, sites.point(j), jets.values[j], jets.gradients.row(j).transpose(),
                       jets.hessians[static_cast<std::size_t>(j)]);
  }
  return out;
}

Vector CollocationSolver::step_backward(int k, const Vector& v_next, StepPath path,
                                        int* iterations) const {
  if (k < 0 || k >= config_.n) throw InputError("step index out of range");
  return step_from(k, v_next, system_.fit(v_next), path, iterations);
}

Vector CollocationSolver::step_from(int k, const Vector& v_next, const Interpolant& next,
                                    StepPath path, int* iterations) const {
  const double h = step_size();
  const double theta = config_.theta;
  try {
    const Vector f_next = collocated_F(time(k + 1), next);
    const Vector predictor = v_next - h * f_next;
    if (path == StepPath::automatic && theta == 1.0) {
      if (iterations) *iterations = 0;
      return predictor;
    }
    // v + h(1 - theta) F_k(v) = v_{k+1} - h theta F_{k+1}(v_{k+1})
    const Vector rhs = v_next - (h * theta) * f_next;
    Vector v = predictor;
    double change = 0.0;
    for (int it = 1; it <= config_.fp_max_iter; ++it) {
      Vector updated = rhs - (h * (1.0 - theta)) * collocated_F(time(k), system_.fit(v));
      change = (updated - v).lpNorm<Eigen::Infinity>();
      v = std::move(updated);
      if (change < config_.fp_tol) {
        if (iterations) *iterations = it;
        return v;
      }
    }
    std::ostringstream msg;
    msg << "step " << k << ": fixed-point iteration did not converge in " << config_.fp_max_iter
        << " iterations (last change " << change << ", tolerance " << config_.fp_tol
        << "); the implicit scheme may lack a unique solution at this resolution";
    throw StepError(msg.str(), static_cast<std::size_t>(k));
  } catch (const StepError&) {
    throw;
  } catch (const NumericalError& e) {
    throw StepError("step " + std::to_string(k) + ": " + e.what(), static_cast<std::size_t>(k));
  }
}

SolutionField CollocationSolver::solve(StepPath path) const {
  const int n = config_.n;
  const auto& sites = system_.sites();
  SolutionField sol;
  sol.sites = system_.shared_sites();
  sol.values.resize(n + 1, sites.size());
  sol.time_grid.resize(static_cast<std::size_t>(n + 1));
  sol.fixed_point_iterations.assign(static_cast<std::size_t>(n), 0);
  for (int k = 0; k <= n; ++k) sol.time_grid[static_cast<std::size_t>(k)] = time(k);

  Vector terminal(sites.size());
  for (Eigen::Index j = 0; j < sites.size(); ++j) terminal[j] = problem_.f(sites.point(j));
  sol.values.row(n) = terminal.transpose();

  std::vector<std::optional<Interpolant>> fitted(static_cast<std::size_t>(n + 1));
  fitted[static_cast<std::size_t>(n)] = system_.fit(terminal);
  for (int k = n - 1; k >= 0; --k) {
    const Vector v_next = sol.values.row(k + 1).transpose();
    const Vector v = step_from(k, v_next, *fitted[static_cast<std::size_t>(k + 1)], path,
                               &sol.fixed_point_iterations[static_cast<std::size_t>(k)]);
    sol.values.row(k) = v.transpose();
    fitted[static_cast<std::size_t>(k)] = system_.fit(v);
  }
  sol.interpolants.reserve(static_cast<std::size_t>(n + 1));
  for (auto& f : fitted) sol.interpolants.push_back(std::move(*f));
  return sol;
}

Vector step_backward(const ParabolicProblem& problem, int k, const Vector& v_next,
                     const SchemeConfig& config, const KernelSpec& kernel, const SiteSet& sites) {
  return CollocationSolver(problem, config, kernel, sites).step_backward(k, v_next);
}

SolutionField solve(const ParabolicProblem& problem, const SchemeConfig& config,
                    const KernelSpec& kernel, const SiteSet& sites,
                    const std::optional<Domain>& domain) {
  return CollocationSolver(problem, config, kernel, sites, domain).solve();
}

double evaluate_solution(const SolutionField& sol, double t, const PointRef& x) {
  const auto& grid = sol.time_grid;
  if (grid.empty()) throw InputError("empty solution field");
  const double T = grid.back();
  if (!(t >= grid.front() && t <= T)) {
    std::ostringstream msg;
    msg << "time " << t << " outside [" << grid.front() << ", " << T << "]";
    throw InputError(msg.str());
  }
  const auto upper = std::lower_bound(grid.begin(), grid.end(), t);
  const auto k1 = static_cast<std::size_t>(upper - grid.begin());
  if (grid[k1] == t) return sol.interpolants[k1].evaluate(x);
  const std::size_t k0 = k1 - 1;
  const double w = (t - grid[k0]) / (grid[k1] - grid[k0]);
  return (1.0 - w) * sol.interpolants[k0].evaluate(x) + w * sol.interpolants[k1].evaluate(x);
}

void write_solution_csv(std::ostream& out, const SolutionField& sol) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(12);
  const int d = sol.sites->dimension();
  out << "k,t,j";
  for (int i = 1; i <= d; ++i) out << ",x" << i;
  out << ",v\n";
  for (int k = 0; k <= sol.steps(); ++k) {
    for (Eigen::Index j = 0; j < sol.sites->size(); ++j) {
      out << k << ',' << sol.time_grid[static_cast<std::size_t>(k)] << ',' << j;
      for (int i = 0; i < d; ++i) out << ',' << sol.sites->points()(j, i);
      out << ',' << sol.values(k, j) << '\n';
    }
  }
  out.flags(flags);
  out.precision(prec);
}

}  // namespace kansa
