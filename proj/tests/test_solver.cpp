#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "kansa/bench.hpp"
#include "kansa/errors.hpp"
#include "kansa/solver.hpp"

using namespace kansa;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

Domain solve_domain() { return Domain::box(Vector::Constant(2, -kHalfPi), Vector::Constant(2, kHalfPi)); }

SiteSet grid(int per_axis) { return equispaced_grid(solve_domain(), per_axis); }

double shape(const SiteSet& s) {
  const double eps = mean_pairwise_distance(s);
  return 1.0 / (eps * eps);
}

ParabolicProblem constant_problem(double c) {
  ParabolicProblem p;
  p.name = "constant";
  p.F = [c](double, const PointRef&, double, const PointRef&, const Matrix&) { return c; };
  p.f = bench::kpz_terminal;
  return p;
}

Vector terminal_values(const SiteSet& s) {
  Vector v(s.size());
  for (Eigen::Index j = 0; j < s.size(); ++j) v[j] = bench::kpz_terminal(s.point(j));
  return v;
}

// Independent F~ at the sites: dense kernel matrix solved by full-pivot LU,
// derivatives from kernel jets.
Vector oracle_F(const ParabolicProblem& p, double t, const KernelSpec& k, const SiteSet& s, const Vector& v) {
  const Eigen::Index n = s.size();
  Matrix A(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = std::exp(-k.alpha * (s.point(i) - s.point(j)).squaredNorm());
  const Vector xi = A.fullPivLu().solve(v);
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector grad = Vector::Zero(2);
    Matrix hess = Matrix::Zero(2, 2);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto jet = kernel_jet(k, s.point(i), s.point(j));
      grad += xi[j] * jet.gradient;
      hess += xi[j] * jet.hessian;
    }
    out[i] = p.F(t, s.point(i), v[i], grad, hess);
  }
  return out;
}

}  // namespace

TEST(Problem, Validation) {
  ParabolicProblem p;
  EXPECT_THROW(p.validate(), InputError);
  p = constant_problem(1.0);
  p.T = 0.0;
  EXPECT_THROW(p.validate(), InputError);
  SchemeConfig c;
  c.theta = 1.5;
  EXPECT_THROW(c.validate(), InputError);
  c = SchemeConfig{};
  c.n = 0;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(Structure, KpzIsDegenerateElliptic) {
  const auto r = check_degenerate_ellipticity(bench::kpz_problem(), solve_domain());
  EXPECT_EQ(r.samples, kEllipticitySamples);
  EXPECT_EQ(r.violations, 0);
}

TEST(Structure, WrongSignIsCaught) {
  ParabolicProblem p = bench::kpz_problem();
  p.F = [](double, const PointRef&, double, const PointRef&, const Matrix& g) { return 0.5 * g.trace(); };
  EXPECT_GT(check_degenerate_ellipticity(p, solve_domain()).violations, 0);
}

TEST(Structure, Growth) {
  EXPECT_EQ(check_growth(bench::heat_problem(), 1.0, solve_domain()).violations, 0);
  EXPECT_GT(check_growth(bench::kpz_problem(), 0.01, solve_domain()).violations, 0);
}

TEST(CollocatedF, Constant) {
  const auto s = grid(3);
  const CollocationSolver solver(constant_problem(2.5), SchemeConfig{}, KernelSpec::gaussian(shape(s)), s, solve_domain());
  const auto f = solver.system().fit(terminal_values(s));
  const Vector F = solver.collocated_F(0.3, f);
  for (Eigen::Index j = 0; j < F.size(); ++j) EXPECT_EQ(F[j], 2.5);
  const Vector G = collocated_F(solver.problem(), 0.3, f);
  for (Eigen::Index j = 0; j < G.size(); ++j) EXPECT_EQ(G[j], 2.5);
}

TEST(CollocatedF, ValueArgument) {
  ParabolicProblem p = constant_problem(0.0);
  p.F = [](double, const PointRef&, double z, const PointRef&, const Matrix&) { return z; };
  const auto s = grid(4);
  const CollocationSolver solver(p, SchemeConfig{}, KernelSpec::gaussian(shape(s)), s, solve_domain());
  Vector b(s.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) b[j] = std::sin(static_cast<double>(j));
  const Vector F = solver.collocated_F(0.0, solver.system().fit(b));
  EXPECT_LE((F - b).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(CollocatedF, KpzOnQuadratic) {
  // q = x1^2 + x1 x2 - 2 x2 + 1 lies in the m = 3 tail
  const auto s = grid(4);
  SchemeConfig cfg;
  cfg.m = 3;
  const CollocationSolver solver(bench::kpz_problem(), cfg, KernelSpec::gaussian(shape(s)), s, solve_domain());
  Vector b(s.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const double x1 = s.points()(j, 0), x2 = s.points()(j, 1);
    b[j] = x1 * x1 + x1 * x2 - 2 * x2 + 1;
  }
  const auto f = solver.system().fit(b);
  const Vector F = solver.collocated_F(0.0, f);
  const Vector G = collocated_F(solver.problem(), 0.0, f);
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const double x1 = s.points()(j, 0), x2 = s.points()(j, 1);
    const double g1 = 2 * x1 + x2, g2 = x1 - 2;
    const double expected = -0.5 * 2.0 - 0.5 * (g1 * g1 + g2 * g2);
    EXPECT_NEAR(F[j], expected, 1e-6);
    EXPECT_NEAR(G[j], expected, 1e-6);
  }
}

TEST(StepBackward, ConstantFIsExactForAnyTheta) {
  const auto s = grid(3);
  for (double theta : {0.0, 0.3, 0.5, 1.0}) {
    SchemeConfig cfg;
    cfg.n = 10;
    cfg.theta = theta;
    const CollocationSolver solver(constant_problem(0.7), cfg, KernelSpec::gaussian(shape(s)), s, solve_domain());
    const Vector next = terminal_values(s);
    const Vector v = solver.step_backward(4, next);
    EXPECT_LE((v - (next - Vector::Constant(next.size(), 0.1 * 0.7))).lpNorm<Eigen::Infinity>(), 1e-15);
  }
}

TEST(StepBackward, ZeroFKeepsValues) {
  const auto s = grid(3);
  SchemeConfig cfg;
  cfg.theta = 0.5;
  const CollocationSolver solver(constant_problem(0.0), cfg, KernelSpec::gaussian(shape(s)), s, solve_domain());
  const Vector next = terminal_values(s);
  EXPECT_EQ(solver.step_backward(0, next), next);
}

TEST(StepBackward, ThetaPointThreeMatchesDampedIterationOracle) {
  const auto s = grid(3);
  const auto kernel = KernelSpec::gaussian(shape(s));
  const auto problem = bench::kpz_problem();
  SchemeConfig cfg;
  cfg.n = 100;
  cfg.theta = 0.3;
  const CollocationSolver solver(problem, cfg, kernel, s, solve_domain());
  const int k = cfg.n - 1;
  const double h = 1e-2;
  const Vector next = terminal_values(s);
  const Vector v = solver.step_backward(k, next);

  const Vector rhs = next - h * cfg.theta * oracle_F(problem, solver.time(k + 1), kernel, s, next);
  Vector w = next;
  for (int it = 0; it < 10000; ++it) {
    const Vector target = rhs - h * (1 - cfg.theta) * oracle_F(problem, solver.time(k), kernel, s, w);
    const Vector updated = 0.5 * w + 0.5 * target;
    const double change = (updated - w).lpNorm<Eigen::Infinity>();
    w = updated;
    if (change < 1e-12) break;
  }
  EXPECT_LE((v - w).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(StepBackward, IterationCapNamesStep) {
  const auto s = grid(3);
  SchemeConfig cfg;
  cfg.n = 10;
  cfg.theta = 0.5;
  cfg.fp_max_iter = 1;
  const CollocationSolver solver(bench::kpz_problem(), cfg, KernelSpec::gaussian(shape(s)), s, solve_domain());
  try {
    solver.solve();
    FAIL() << "expected StepError";
  } catch (const StepError& e) {
    EXPECT_EQ(e.step(), 9u);
    EXPECT_NE(std::string(e.what()).find("step 9"), std::string::npos);
  }
}

TEST(StepBackward, NonFiniteFNamesStep) {
  ParabolicProblem p = constant_problem(0.0);
  p.F = [](double, const PointRef&, double, const PointRef&, const Matrix&) { return NAN; };
  const auto s = grid(3);
  SchemeConfig cfg;
  cfg.n = 5;
  const CollocationSolver solver(p, cfg, KernelSpec::gaussian(shape(s)), s, solve_domain());
  try {
    solver.solve();
    FAIL() << "expected StepError";
  } catch (const StepError& e) {
    EXPECT_EQ(e.step(), 4u);
  }
}

TEST(Solve, ZeroFAndTelescoping) {
  const auto s = grid(3);
  SchemeConfig cfg;
  cfg.n = 100;
  const auto kernel = KernelSpec::gaussian(shape(s));
  const auto zero = solve(constant_problem(0.0), cfg, kernel, s, solve_domain());
  for (int k = 0; k <= cfg.n; ++k) EXPECT_EQ(Vector(zero.values.row(k).transpose()), terminal_values(s));

  const double c = 0.37;
  const auto sol = solve(constant_problem(c), cfg, kernel, s, solve_domain());
  const Vector expected = terminal_values(s) - Vector::Constant(s.size(), c);
  EXPECT_LE((Vector(sol.values.row(0).transpose()) - expected).lpNorm<Eigen::Infinity>(), 1e-13);
  EXPECT_EQ(sol.time_grid.size(), 101u);
  EXPECT_EQ(sol.interpolants.size(), 101u);
}

TEST(Solve, ExplicitPathEqualsGeneralPath) {
  const auto s = grid(4);
  SchemeConfig cfg;
  cfg.n = 20;
  const CollocationSolver solver(bench::kpz_problem(), cfg, KernelSpec::gaussian(shape(s)), s, solve_domain());
  const auto a = solver.solve(StepPath::automatic);
  const auto b = solver.solve(StepPath::general);
  EXPECT_LE((a.values - b.values).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Solve, SchemeResidualVanishesBetweenSites) {
  const auto s = grid(3);
  const auto domain = solve_domain();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-kHalfPi, kHalfPi);
  for (double theta : {1.0, 0.5}) {
    SchemeConfig cfg;
    cfg.n = 10;
    cfg.theta = theta;
    const CollocationSolver solver(bench::kpz_problem(), cfg, KernelSpec::gaussian(shape(s)), s, domain);
    const auto sol = solver.solve();
    const double h = solver.step_size();
    for (int k = 0; k < cfg.n; ++k) {
      const auto& vk = sol.interpolants[static_cast<std::size_t>(k)];
      const auto& vk1 = sol.interpolants[static_cast<std::size_t>(k + 1)];
      const auto Fk = solver.system().fit(solver.collocated_F(solver.time(k), vk));
      const auto Fk1 = solver.system().fit(solver.collocated_F(solver.time(k + 1), vk1));
      for (int i = 0; i < 20; ++i) {
        Vector x(2);
        x << u(rng), u(rng);
        const double r = vk.evaluate(x) - vk1.evaluate(x) + h * (1 - theta) * Fk.evaluate(x) + h * theta * Fk1.evaluate(x);
        EXPECT_LE(std::abs(r), 10 * cfg.fp_tol) << "theta " << theta << " k " << k;
      }
    }
  }
}

TEST(Solve, OneStepHeatErrorShrinksWithStep) {
  const auto s = grid(5);
  const auto kernel = KernelSpec::gaussian(shape(s));
  double previous = INFINITY;
  for (int n : {10, 20, 40}) {
    SchemeConfig cfg;
    cfg.n = n;
    const CollocationSolver solver(bench::heat_problem(), cfg, kernel, s, solve_domain());
    const int k = n - 1;
    Vector exact_next(s.size()), exact_now(s.size());
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      exact_next[j] = bench::heat_exact(solver.time(k + 1), s.point(j));
      exact_now[j] = bench::heat_exact(solver.time(k), s.point(j));
    }
    const double err = (solver.step_backward(k, exact_next) - exact_now).lpNorm<Eigen::Infinity>();
    EXPECT_LT(err, previous) << n;
    previous = err;
  }
}

TEST(Solve, DimensionAndDomainChecks) {
  const auto s = grid(3);
  ParabolicProblem p = bench::kpz_problem(3);
  EXPECT_THROW(CollocationSolver(p, SchemeConfig{}, KernelSpec::gaussian(1.0), s), InputError);
  const Domain small = Domain::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  EXPECT_THROW(CollocationSolver(bench::kpz_problem(), SchemeConfig{}, KernelSpec::gaussian(1.0), s, small), InputError);
}

TEST(EvaluateSolution, GridTimesAndMidpoints) {
  const auto s = grid(3);
  SchemeConfig cfg;
  cfg.n = 4;
  const auto sol = solve(bench::kpz_problem(), cfg, KernelSpec::gaussian(shape(s)), s, solve_domain());
  Vector x(2);
  x << 0.2, -0.4;
  EXPECT_EQ(evaluate_solution(sol, 1.0, x), sol.interpolants.back().evaluate(x));
  EXPECT_EQ(evaluate_solution(sol, 0.5, x), sol.interpolants[2].evaluate(x));
  const double mid = 0.5 * (sol.interpolants[1].evaluate(x) + sol.interpolants[2].evaluate(x));
  EXPECT_NEAR(evaluate_solution(sol, 0.375, x), mid, 1e-15);
  EXPECT_THROW(evaluate_solution(sol, 1.5, x), InputError);
  EXPECT_NEAR(sol.interpolants.back().evaluate(s.point(4)), 1.0, 1e-12);
}

TEST(SolutionCsv, Layout) {
  const auto s = grid(3);
  SchemeConfig cfg;
  cfg.n = 10;
  const auto sol = solve(bench::heat_problem(), cfg, KernelSpec::gaussian(shape(s)), s, solve_domain());
  std::ostringstream out;
  write_solution_csv(out, sol);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "k,t,j,x1,x2,v");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 11 * 9);
}
