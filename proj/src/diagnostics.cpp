#include "kansa/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "kansa/errors.hpp"

namespace kansa {

double compute_LN(const KernelSpec& kernel, const SiteSet& sites, const PolynomialTail& tail) {
  const Matrix m = tail.size() > 0 ? assemble_system(kernel, sites, tail) : kernel_matrix(kernel, sites);
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  const double smallest = sv[sv.size() - 1];
  if (!(smallest > sv[0] * std::numeric_limits<double>::epsilon())) {
    throw NumericalError("interpolation matrix is numerically singular; L_N undefined");
  }
  return 1.0 / smallest;
}

namespace {

// Visits every point of a tensor grid over [lower, upper] with `per_axis` points.
template <class Visit>
void visit_grid(const Vector& lower, const Vector& upper, int per_axis, Visit&& visit) {
  const PointMatrix pts = tensor_grid(lower, upper, per_axis);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) visit(Vector(pts.row(i).transpose()));
}

double sum_of_squared_maxima(const std::vector<double>& maxima) {
  double s = 0.0;
  for (double m : maxima) s += m * m;
  return s;
}

}  // namespace

double compute_K2(const KernelSpec& kernel, const Domain& domain, const PolynomialTail& tail,
                  int resolution) {
  if (resolution < 2) throw InputError("K_2 sample resolution must be >= 2");
  const int d = domain.dimension();
  const auto alphas = multi_indices_up_to(d, 3);
  const Vector zero = Vector::Zero(d);
  const Vector lo = domain.bounding_lower();
  const Vector hi = domain.bounding_upper();

  std::vector<double> kernel_max(alphas.size(), 0.0);
  auto record_difference = [&](const Vector& u) {
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      kernel_max[a] = std::max(kernel_max[a], std::abs(kernel_derivative(kernel, alphas[a], u, zero)));
    }
  };
  if (domain.is_rectangle()) {
    // Phi is translation invariant, so the pair maximum over grid x, y equals
    // the maximum over the grid of differences x - y (same spacing, twice the extent).
    visit_grid(lo - hi, hi - lo, 2 * resolution - 1, record_difference);
  } else {
    std::vector<Vector> inside;
    visit_grid(lo, hi, resolution, [&](const Vector& x) {
      if (domain.contains(x)) inside.push_back(x);
    });
    for (const auto& x : inside)
      for (const auto& y : inside) record_difference(x - y);
  }
  double best = sum_of_squared_maxima(kernel_max);

  if (tail.size() > 0) {
    std::vector<double> poly_max(alphas.size(), 0.0);
    visit_grid(lo, hi, resolution, [&](const Vector& x) {
      if (!domain.contains(x)) return;
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        poly_max[a] = std::max(poly_max[a], tail.derivative(alphas[a], x).squaredNorm());
      }
    });
    double poly = 0.0;
    for (double m : poly_max) poly += m;
    best = std::max(best, poly);
  }
  return std::sqrt(best);
}

double stability_product(double LN, double K2, double K1, double N, double h, double delta,
                         double T) {
  if (!(delta > 0.0 && delta < 0.2)) throw InputError("delta must lie in (0, 1/5)");
  if (!(LN > 0.0) || !(N > 0.0) || !(h > 0.0) || K1 < 0.0 || K2 < 0.0 || T < 0.0) {
    throw InputError("stability product needs positive L_N, N, h and nonnegative K1, K2, T");
  }
  const double sqrt_n = std::sqrt(N);
  return std::pow(h, delta) * sqrt_n * LN * std::exp(std::sqrt(3.0) * T * K1 * K2 * (1.0 + sqrt_n) * LN);
}

double ln_bound_c2(int d) {
  const double g = std::tgamma((d + 2) / 2.0);
  return 12.0 * std::pow(std::numbers::pi * g * g / 9.0, 1.0 / (d + 1));
}

double ln_bound_c1(int d) {
  return std::pow(ln_bound_c2(d) / std::sqrt(8.0), d) / (2.0 * std::tgamma((d + 2) / 2.0));
}

double log_ln_bound_gaussian(double alpha, int d, double qX) {
  if (!(alpha > 0.0) || !(qX > 0.0) || d < 1) throw InputError("Gaussian L_N bound needs alpha, q_X > 0");
  return 0.5 * d * std::log(2.0 * alpha) - std::log(ln_bound_c1(d)) + d * std::log(qX) +
         40.71 * d * d / (alpha * qX * qX);
}

double ln_bound_gaussian(double alpha, int d, double qX) {
  if (!(alpha > 0.0) || !(qX > 0.0) || d < 1) throw InputError("Gaussian L_N bound needs alpha, q_X > 0");
  return std::pow(2.0 * alpha, 0.5 * d) / ln_bound_c1(d) * std::pow(qX, d) *
         std::exp(40.71 * d * d / (alpha * qX * qX));
}

double ln_bound_multiquadric(double alpha, double beta, int d, double qX) {
  if (!(alpha > 0.0) || !(beta > 0.0) || !(qX > 0.0) || d < 1) {
    throw InputError("multiquadric L_N bound needs alpha, beta, q_X > 0");
  }
  return std::pow(qX, beta + 0.5 * d - 0.5) * std::exp(2.0 * alpha * ln_bound_c2(d) / qX);
}

double apriori_bound(double sup_f, double K1, double K2, double T, double N, double LN) {
  if (sup_f < 0.0 || K1 < 0.0 || !(K2 > 0.0) || T < 0.0 || !(N > 0.0) || LN < 0.0) {
    throw InputError("a priori bound needs K2, N > 0 and nonnegative remaining inputs");
  }
  const double sqrt_n = std::sqrt(N);
  return (sup_f + 1.0 / (std::sqrt(2.0) * K2)) *
         std::exp(std::sqrt(3.0) * T * K1 * K2 * sqrt_n * (1.0 + sqrt_n) * LN);
}

namespace {
void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InputError("error metric inputs differ in length: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  if (a.empty()) throw InputError("error metrics need at least one value");
}
}  // namespace

double rms_error(std::span<const double> numeric, std::span<const double> reference) {
  check_lengths(numeric, reference);
  double s = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) s += (numeric[i] - reference[i]) * (numeric[i] - reference[i]);
  return std::sqrt(s / static_cast<double>(numeric.size()));
}

double max_error(std::span<const double> numeric, std::span<const double> reference) {
  check_lengths(numeric, reference);
  double m = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) m = std::max(m, std::abs(numeric[i] - reference[i]));
  return m;
}

SeminormTrace seminorm_trace(const SolutionField& sol, const CollocationSolver& solver, double fill) {
  SeminormTrace trace;
  trace.fill = fill;
  trace.nu = solver.system().kernel().nu;
  const int n = sol.steps();
  trace.seminorms.resize(static_cast<std::size_t>(n));
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vector values = solver.collocated_F(sol.time_grid[static_cast<std::size_t>(k)],
                                              sol.interpolants[static_cast<std::size_t>(k)]);
    const double s = solver.system().fit(values).native_seminorm();
    trace.seminorms[static_cast<std::size_t>(k)] = s;
    worst = std::max(worst, s);
  }
  trace.indicator = std::pow(fill, trace.nu) * (1.0 + worst);
  return trace;
}

double estimate_K1(const ParabolicProblem& problem, const std::optional<Domain>& domain, int samples,
                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const auto t = draw_structural_sample(rng, problem, domain);
    const double gamma_norm = Eigen::JacobiSVD<Matrix>(t.gamma).singularValues()[0];
    const double ratio = std::abs(problem.F(t.t, t.x, t.z, t.p, t.gamma)) /
                         (1.0 + std::abs(t.z) + t.p.norm() + gamma_norm);
    best = std::max(best, ratio);
  }
  return best;
}

double max_site_value(const SolutionField& sol) {
  double best = 0.0;
  for (Eigen::Index k = 0; k < sol.values.rows(); ++k) best = std::max(best, sol.values.row(k).norm());
  return best;
}

StabilityReport stability_report(const CollocationSolver& solver, const Domain& domain,
                                 const StabilityOptions& options, const SolutionField* solution) {
  const auto& system = solver.system();
  const auto& sites = system.sites();
  const auto& kernel = system.kernel();
  const auto& problem = solver.problem();

  StabilityReport r;
  r.N = sites.size();
  r.h = solver.step_size();
  r.T = problem.T;
  r.delta = options.delta;
  r.qX = sites.size() >= 2 ? separation_distance(sites) : 0.0;
  r.fill = fill_distance(sites, domain, options.fill_resolution);
  r.LN = compute_LN(kernel, sites, system.tail());
  r.condition = system.condition();
  r.K2 = compute_K2(kernel, domain, system.tail(), options.k2_resolution);
  r.K1 = options.K1 > 0.0 ? options.K1 : estimate_K1(problem, domain);
  r.stability_product =
      stability_product(r.LN, r.K2, r.K1, static_cast<double>(r.N), r.h, r.delta, r.T);

  if (r.qX > 0.0) {
    if (kernel.family == KernelFamily::gaussian) {
      r.ln_bound_kind = "gaussian";
      r.log_ln_bound = log_ln_bound_gaussian(kernel.alpha, sites.dimension(), r.qX);
      r.ln_bound_available = true;
    } else if (kernel.beta < 0.0) {
      r.ln_bound_kind = "inverse_multiquadric (constant factor omitted)";
      r.log_ln_bound = std::log(ln_bound_multiquadric(kernel.alpha, -kernel.beta, sites.dimension(), r.qX));
      r.ln_bound_available = std::isfinite(r.log_ln_bound);
    }
  }

  double sup_f = 0.0;
  const PointMatrix probe = tensor_grid(domain.bounding_lower(), domain.bounding_upper(),
                                        std::min(options.fill_resolution, 101));
  for (Eigen::Index i = 0; i < probe.rows(); ++i) {
    const Vector x = probe.row(i).transpose();
    if (domain.contains(x)) sup_f = std::max(sup_f, std::abs(problem.f(x)));
  }
  r.sup_f = sup_f;
  r.apriori_bound = apriori_bound(sup_f, r.K1, r.K2, r.T, static_cast<double>(r.N), r.LN);

  if (solution) {
    r.have_solution = true;
    r.max_site_value = max_site_value(*solution);
    const auto trace = seminorm_trace(*solution, solver, r.fill);
    r.seminorm_trace = trace.seminorms;
    r.seminorm_indicator = trace.indicator;
  }
  return r;
}

namespace {
const char* mark(bool ok) { return ok ? "[ok]" : "[flag]"; }
}  // namespace

void write_report_text(std::ostream& out, const StabilityReport& r) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(12);
  out << "N: " << r.N << '\n'
      << "h: " << r.h << '\n'
      << "T: " << r.T << '\n'
      << "q_X: " << r.qX << '\n'
      << "fill: " << r.fill << '\n'
      << "quasi_uniformity: " << (r.qX > 0.0 ? r.fill / r.qX : 0.0) << '\n'
      << "condition: " << r.condition << '\n'
      << "L_N: " << r.LN << '\n'
      << "K_2 (sampled): " << r.K2 << '\n'
      << "K_1: " << r.K1 << '\n'
      << "delta: " << r.delta << '\n'
      << "stability_product: " << r.stability_product << '\n';
  if (r.ln_bound_available) {
    const bool ok = std::log(r.LN) <= r.log_ln_bound;
    out << "L_N_bound_kind: " << r.ln_bound_kind << '\n'
        << "log_L_N_bound: " << r.log_ln_bound << '\n'
        << "L_N_within_bound: " << mark(ok) << '\n';
  } else {
    out << "L_N_bound_kind: unavailable\n";
  }
  out << "sup_f: " << r.sup_f << '\n' << "apriori_bound: " << r.apriori_bound << '\n';
  if (r.have_solution) {
    out << "max_site_value: " << r.max_site_value << '\n'
        << "max_site_value_within_apriori_bound: " << mark(r.max_site_value <= r.apriori_bound) << '\n';
    double first = r.seminorm_trace.empty() ? 0.0 : r.seminorm_trace.front();
    double last = r.seminorm_trace.empty() ? 0.0 : r.seminorm_trace.back();
    out << "seminorm_trace_first: " << first << '\n'
        << "seminorm_trace_last: " << last << '\n'
        << "seminorm_trace_max: "
        << (r.seminorm_trace.empty() ? 0.0 : *std::max_element(r.seminorm_trace.begin(), r.seminorm_trace.end()))
        << '\n'
        << "seminorm_indicator: " << r.seminorm_indicator << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

void write_report_csv_header(std::ostream& out) {
  out << "N,h,q_X,fill,L_N,K_2,stability_product,apriori_bound,max_site_value\n";
}

void write_report_csv_row(std::ostream& out, const StabilityReport& r) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(12) << r.N << ',' << r.h << ',' << r.qX << ',' << r.fill << ',' << r.LN << ','
      << r.K2 << ',' << r.stability_product << ',' << r.apriori_bound << ',' << r.max_site_value << '\n';
  out.flags(flags);
  out.precision(prec);
}

}  // namespace kansa
