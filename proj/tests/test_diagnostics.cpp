#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "kansa/bench.hpp"
#include "kansa/diagnostics.hpp"
#include "kansa/errors.hpp"

using namespace kansa;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

SiteSet two_sites(double distance) {
  PointMatrix p(2, 1);
  p << 0.0, distance;
  return SiteSet(p);
}

// Duplicate arithmetic, assembled in log space.
double oracle_stability(double LN, double K2, double K1, double N, double h, double delta, double T) {
  const double log_value = delta * std::log(h) + 0.5 * std::log(N) + std::log(LN) +
                           std::sqrt(3.0) * T * K1 * K2 * LN * (1.0 + std::sqrt(N));
  return std::exp(log_value);
}

double oracle_apriori(double sup_f, double K1, double K2, double T, double N, double LN) {
  const double exponent = std::sqrt(3.0) * T * K1 * K2 * std::sqrt(N) * (std::sqrt(N) + 1.0) * LN;
  return std::exp(std::log(sup_f + std::sqrt(0.5) / K2) + exponent);
}

// K_2 by brute force over all pairs of a tensor grid on the box.
double oracle_K2(const KernelSpec& k, const Vector& lo, const Vector& hi, int res, const PolynomialTail& tail) {
  const PointMatrix g = tensor_grid(lo, hi, res);
  const auto alphas = multi_indices_up_to(static_cast<int>(lo.size()), 3);
  double kernel_sum = 0.0, poly_sum = 0.0;
  for (const auto& a : alphas) {
    double best = 0.0, poly = 0.0;
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      for (Eigen::Index j = 0; j < g.rows(); ++j) {
        best = std::max(best, std::abs(kernel_derivative(k, a, g.row(i).transpose(), g.row(j).transpose())));
      }
      if (tail.size() > 0) poly = std::max(poly, tail.derivative(a, g.row(i).transpose()).squaredNorm());
    }
    kernel_sum += best * best;
    poly_sum += poly;
  }
  return std::sqrt(std::max(kernel_sum, poly_sum));
}

}  // namespace

TEST(LN, Examples) {
  PointMatrix one(1, 2);
  one << 0.5, 0.5;
  EXPECT_NEAR(compute_LN(KernelSpec::gaussian(1.0), SiteSet(one), PolynomialTail()), 1.0, 1e-14);
  const double two = compute_LN(KernelSpec::gaussian(1.0), two_sites(1.0), PolynomialTail());
  EXPECT_NEAR(two, 1.0 / (1.0 - std::exp(-1.0)), 1e-8);
  EXPECT_NEAR(two, 1.58198, 1e-5);
  EXPECT_NEAR(compute_LN(KernelSpec::gaussian(1.0), two_sites(10.0), PolynomialTail()), 1.0, 1e-6);
}

TEST(LN, EqualsReciprocalSmallestSingularValue) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  PointMatrix p(12, 2);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = u(rng);
  const SiteSet s(p);
  for (int m : {0, 2}) {
    const auto tail = PolynomialTail::for_box(m, s.bounding_lower(), s.bounding_upper());
    const auto kernel = KernelSpec::gaussian(2.0);
    Matrix M = Matrix::Zero(12 + tail.size(), 12 + tail.size());
    for (Eigen::Index i = 0; i < 12; ++i) {
      for (Eigen::Index j = 0; j < 12; ++j) M(i, j) = kernel_eval(kernel, s.point(i), s.point(j));
      const Vector pi = tail.evaluate(s.point(i));
      for (int l = 0; l < tail.size(); ++l) M(i, 12 + l) = M(12 + l, i) = pi[l];
    }
    const double smin = Eigen::BDCSVD<Matrix>(M).singularValues().minCoeff();
    const double LN = compute_LN(kernel, s, tail);
    EXPECT_NEAR(LN * smin, 1.0, 1e-8);
  }
}

TEST(K2, GaussianAtLeastOne) {
  const Domain square = Domain::box(vec({0, 0}), vec({1, 1}));
  for (double a : {0.1, 1.0, 10.0}) EXPECT_GE(compute_K2(KernelSpec::gaussian(a), square, PolynomialTail()), 1.0);
}

TEST(K2, MatchesPairBruteForce) {
  const Vector lo = vec({0, 0}), hi = vec({1, 1});
  const Domain square = Domain::box(lo, hi);
  const auto k = KernelSpec::gaussian(1.3);
  EXPECT_NEAR(compute_K2(k, square, PolynomialTail(), 9), oracle_K2(k, lo, hi, 9, PolynomialTail()), 1e-12);
  const auto tail = square.tail(3);
  EXPECT_NEAR(compute_K2(k, square, tail, 9), oracle_K2(k, lo, hi, 9, tail), 1e-12);
  const auto mq = KernelSpec::multiquadric(0.5, 0.5);
  const auto tail1 = square.tail(1);
  EXPECT_NEAR(compute_K2(mq, square, tail1, 7), oracle_K2(mq, lo, hi, 7, tail1), 1e-12);
}

TEST(K2, RefinementAgreesAndIsMonotoneOnNestedGrids) {
  const Domain square = Domain::box(vec({0, 0}), vec({1, 1}));
  const auto k = KernelSpec::gaussian(1.0);
  const double k41 = compute_K2(k, square, PolynomialTail(), 41);
  const double k81 = compute_K2(k, square, PolynomialTail(), 81);
  EXPECT_LE(std::abs(k41 - k81), 0.02 * k81);
  double previous = 0.0;
  for (int res : {3, 5, 9, 17, 33, 65}) {
    const double v = compute_K2(k, square, PolynomialTail(), res);
    EXPECT_GE(v, previous);
    previous = v;
  }
}

TEST(K2, BallUsesPairs) {
  const Domain disc = Domain::ball(vec({0, 0}), 1.0);
  const double v = compute_K2(KernelSpec::gaussian(1.0), disc, PolynomialTail(), 11);
  EXPECT_GE(v, 1.0);
  EXPECT_TRUE(std::isfinite(v));
}

TEST(StabilityProduct, Examples) {
  EXPECT_NEAR(stability_product(1.0, 0.0, 1.0, 25, 1e-2, 0.1, 0.0), std::pow(1e-2, 0.1) * 5.0, 1e-15);
  const double direct = std::pow(10.0, -0.2) * 5 * 2 * std::exp(std::sqrt(3.0) * 6 * 2);
  const double v = stability_product(2.0, 1.0, 1.0, 25, 1e-2, 0.1, 1.0);
  EXPECT_NEAR(v / direct, 1.0, 1e-12);
  EXPECT_NEAR(v, 6708745194.97, 0.01);
  EXPECT_GT(stability_product(2.0, 1.0, 1.0, 50, 1e-2, 0.1, 1.0), v);
  EXPECT_THROW(stability_product(2.0, 1.0, 1.0, 25, 1e-2, 0.2, 1.0), InputError);
  EXPECT_THROW(stability_product(2.0, 1.0, 1.0, 25, 1e-2, 0.0, 1.0), InputError);
}

TEST(StabilityProduct, MatchesDuplicateArithmetic) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double LN = u(rng), K2 = u(rng), K1 = u(rng), N = std::floor(10 * u(rng)) + 1, h = 0.01 * u(rng);
    const double delta = 0.05 * u(rng), T = u(rng);
    const double a = stability_product(LN, K2, K1, N, h, delta, T);
    const double b = oracle_stability(LN, K2, K1, N, h, delta, T);
    EXPECT_LE(std::abs(a - b), 1e-12 * b);
  }
}

TEST(AprioriBound, ExamplesAndDuplicateArithmetic) {
  EXPECT_NEAR(apriori_bound(1.0, 1.0, 2.0, 0.0, 25, 3.0), 1.0 + 1.0 / (std::sqrt(2.0) * 2.0), 1e-15);
  const double base = apriori_bound(1.0, 0.5, 1.2, 1.0, 9, 1.1);
  EXPECT_GT(apriori_bound(1.0, 0.5, 1.2, 1.5, 9, 1.1), base);
  EXPECT_GT(apriori_bound(1.0, 0.6, 1.2, 1.0, 9, 1.1), base);
  EXPECT_GT(apriori_bound(1.0, 0.5, 1.2, 1.0, 9, 1.2), base);
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double sup_f = u(rng), K1 = u(rng), K2 = u(rng), T = u(rng), N = std::floor(5 * u(rng)) + 1, LN = u(rng);
    const double a = apriori_bound(sup_f, K1, K2, T, N, LN);
    const double b = oracle_apriori(sup_f, K1, K2, T, N, LN);
    EXPECT_LE(std::abs(a - b), 1e-12 * b);
  }
}

TEST(InverseNormBound, Constants) {
  EXPECT_NEAR(ln_bound_c2(1), 2 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(ln_bound_c1(1), std::pow(2 * std::numbers::pi / std::sqrt(8.0), 1) / (2 * std::tgamma(1.5)), 1e-12);
}

TEST(InverseNormBound, GaussianMonotonicity) {
  double previous = 0.0;
  for (double q : {0.5, 0.4, 0.3, 0.2, 0.1}) {
    const double v = log_ln_bound_gaussian(1.0, 2, q);
    EXPECT_GT(v, previous);
    previous = v;
  }
  EXPECT_GT(log_ln_bound_gaussian(1.0, 2, 0.1), log_ln_bound_gaussian(2.0, 2, 0.1));
  EXPECT_NEAR(std::log(ln_bound_gaussian(1.0, 1, 1.0)), log_ln_bound_gaussian(1.0, 1, 1.0), 1e-12);
}

TEST(InverseNormBound, MultiquadricExponent) {
  const double c2 = ln_bound_c2(1);
  // q = 1: the power is one
  EXPECT_NEAR(ln_bound_multiquadric(0.7, 0.5, 1, 1.0), std::exp(2 * 0.7 * c2), 1e-9);
  // d = 1, alpha = 1, q = 1/2: exponent 8 pi, power 0.5^(beta)
  EXPECT_NEAR(std::log(ln_bound_multiquadric(1.0, 0.5, 1, 0.5)), 0.5 * std::log(0.5) + 8 * std::numbers::pi, 1e-12);
  const double q = 0.4;
  const double ratio = ln_bound_multiquadric(1.0, 0.5, 1, q / 2) / ln_bound_multiquadric(1.0, 0.5, 1, q);
  EXPECT_NEAR(ratio, std::pow(0.5, 0.5) * std::exp(2 * c2 / q), 1e-6 * ratio);
}

TEST(Errors, RmsAndMax) {
  const std::vector<double> a{1, 2, 3, 4};
  EXPECT_EQ(rms_error(a, a), 0.0);
  EXPECT_EQ(max_error(a, a), 0.0);
  const std::vector<double> b{1.5, 2.5, 3.5, 4.5};
  EXPECT_NEAR(rms_error(a, b), 0.5, 1e-15);
  EXPECT_NEAR(max_error(a, b), 0.5, 1e-15);
  std::mt19937_64 rng(34);
  std::normal_distribution<double> n;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x(30), y(30);
    for (auto& v : x) v = n(rng);
    for (auto& v : y) v = n(rng);
    EXPECT_LE(rms_error(x, y), max_error(x, y));
    EXPECT_GT(rms_error(x, y), 0.0);
  }
  EXPECT_THROW(rms_error(a, std::vector<double>{1.0}), InputError);
}

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;
Domain bench_domain() { return Domain::box(Vector::Constant(2, -kHalfPi), Vector::Constant(2, kHalfPi)); }

ParabolicProblem constant_problem(double c) {
  ParabolicProblem p;
  p.name = "constant";
  p.F = [c](double, const PointRef&, double, const PointRef&, const Matrix&) { return c; };
  p.f = bench::kpz_terminal;
  return p;
}

}  // namespace

TEST(SeminormTrace, ZeroAndConstantF) {
  const auto s = equispaced_grid(bench_domain(), 3);
  SchemeConfig cfg;
  cfg.n = 10;
  const CollocationSolver zero(constant_problem(0.0), cfg, KernelSpec::gaussian(0.2), s, bench_domain());
  const auto t0 = seminorm_trace(zero.solve(), zero, 1.0);
  ASSERT_EQ(t0.seminorms.size(), 10u);
  for (double v : t0.seminorms) EXPECT_EQ(v, 0.0);

  cfg.m = 1;
  const CollocationSolver constant(constant_problem(0.4), cfg, KernelSpec::gaussian(0.2), s, bench_domain());
  const auto t1 = seminorm_trace(constant.solve(), constant, 1.0);
  for (double v : t1.seminorms) EXPECT_NEAR(v, 0.0, 1e-6);
}

TEST(SeminormTrace, KpzStaysBounded) {
  const auto s = equispaced_grid(bench_domain(), 5);
  SchemeConfig cfg;
  const auto kernel = KernelSpec::gaussian(bench::shape_parameter(s, bench::ShapeRule::mean_distance));
  const CollocationSolver solver(bench::kpz_problem(), cfg, kernel, s, bench_domain());
  const auto trace = seminorm_trace(solver.solve(), solver, fill_distance(s, bench_domain()));
  for (double v : trace.seminorms) EXPECT_TRUE(std::isfinite(v));
  EXPECT_LE(trace.seminorms.front(), 10 * trace.seminorms.back());
  EXPECT_LE(trace.seminorms.back(), 10 * trace.seminorms.front());
}

TEST(K1, EstimateBoundsSamples) {
  const auto problem = bench::heat_problem();
  const double K1 = estimate_K1(problem, bench_domain());
  EXPECT_GT(K1, 0.0);
  EXPECT_EQ(check_growth(problem, K1, bench_domain(), 1000, 20150103).violations, 0);
}

TEST(Report, TwentyFiveSiteGridCompletes) {
  const auto s = equispaced_grid(bench_domain(), 5);
  SchemeConfig cfg;
  const auto kernel = KernelSpec::gaussian(bench::shape_parameter(s, bench::ShapeRule::mean_distance));
  const CollocationSolver solver(bench::kpz_problem(), cfg, kernel, s, bench_domain());
  const auto sol = solver.solve();
  const auto r = stability_report(solver, bench_domain(), StabilityOptions{}, &sol);
  EXPECT_EQ(r.N, 25);
  EXPECT_TRUE(std::isfinite(r.LN));
  EXPECT_TRUE(r.ln_bound_available);
  EXPECT_TRUE(std::isfinite(r.log_ln_bound));
  EXPECT_TRUE(r.have_solution);
  std::ostringstream text, csv;
  write_report_text(text, r);
  write_report_csv_header(csv);
  write_report_csv_row(csv, r);
  EXPECT_NE(text.str().find("L_N: "), std::string::npos);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "N,h,q_X,fill,L_N,K_2,stability_product,apriori_bound,max_site_value");
}
