#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "kansa/solver.hpp"

namespace kansa {

/// L_N: spectral norm of the inverse of A (Q = 0) or of the full saddle
/// matrix (Q > 0), i.e. the reciprocal of its smallest singular value.
double compute_LN(const KernelSpec& kernel, const SiteSet& sites, const PolynomialTail& tail);

inline constexpr int kDefaultK2Resolution = 41;

/// Sampled K_2: the larger of
///   sqrt(sum_{|a|<=3} max_{x,y} |D^a Phi(x, y)|^2)  and
///   sqrt(sum_{|a|<=3} max_x sum_l |D^a pi_l(x)|^2),
/// with maxima over a tensor grid of `resolution` points per axis on the
/// domain's bounding box (clipped to the domain). A lower approximation of
/// the true constant.
double compute_K2(const KernelSpec& kernel, const Domain& domain, const PolynomialTail& tail,
                  int resolution = kDefaultK2Resolution);

// h^delta sqrt(N) L_N exp(sqrt(3) T K1 K2 (1 + sqrt(N)) L_N); delta in (0, 1/5).
double stability_product(double LN, double K2, double K1, double N, double h, double delta,
                         double T);

// Constants of the Gaussian inverse-norm bound.
double ln_bound_c2(int d);
double ln_bound_c1(int d);

// ((2 alpha)^{d/2} / c1) q^d exp(40.71 d^2 / (alpha q^2)), as stated.
double ln_bound_gaussian(double alpha, int d, double qX);

// Log of the above, for arguments where the bound overflows.
double log_ln_bound_gaussian(double alpha, int d, double qX);

// q^{beta + d/2 - 1/2} exp(2 alpha c2 / q), i.e. the bound without its constant factor.
double ln_bound_multiquadric(double alpha, double beta, int d, double qX);

// (sup|f| + 1 / (sqrt 2 K2)) exp(sqrt(3) T K1 K2 sqrt(N) (1 + sqrt(N)) L_N)
double apriori_bound(double sup_f, double K1, double K2, double T, double N, double LN);

double rms_error(std::span<const double> numeric, std::span<const double> reference);
double max_error(std::span<const double> numeric, std::span<const double> reference);

struct SeminormTrace {
  std::vector<double> seminorms;  // |I_{F(t_k, . ; v^h(t_k, .))}|_N for k = 0 .. n-1
  double fill = 0.0;
  int nu = 0;
  // Delta^nu (1 + max_k seminorm)
  double indicator = 0.0;
};

// Fits the collocated F values at every step k < n and records native seminorms.
SeminormTrace seminorm_trace(const SolutionField& sol, const CollocationSolver& solver,
                             double fill);

// max over tuples of |F| / (1 + |z| + |p| + |Gamma|), sampled.
double estimate_K1(const ParabolicProblem& problem, const std::optional<Domain>& domain,
                   int samples = 1000, std::uint64_t seed = 20150103);

// max_k |v_k| with |.| the Euclidean norm over sites.
double max_site_value(const SolutionField& sol);

struct StabilityReport {
  Eigen::Index N = 0;
  double h = 0.0;
  double T = 1.0;
  double qX = 0.0;
  double fill = 0.0;
  double LN = 0.0;
  double K2 = 0.0;
  double K1 = 0.0;
  double delta = 0.1;
  double stability_product = 0.0;
  double condition = 0.0;
  // Inverse-norm bound; for multiquadrics it omits the constant factor.
  std::string ln_bound_kind;
  double log_ln_bound = 0.0;
  bool ln_bound_available = false;
  double apriori_bound = 0.0;
  double sup_f = 0.0;
  // Filled in only when a solution is available.
  bool have_solution = false;
  double max_site_value = 0.0;
  std::vector<double> seminorm_trace;
  double seminorm_indicator = 0.0;
};

struct StabilityOptions {
  double delta = 0.1;
  double K1 = 0.0;  // <= 0: estimate by sampling
  int k2_resolution = kDefaultK2Resolution;
  int fill_resolution = kDefaultFillResolution;
};

// Geometry and kernel quantities plus the problem-dependent bounds.
StabilityReport stability_report(const CollocationSolver& solver, const Domain& domain,
                                 const StabilityOptions& options,
                                 const SolutionField* solution = nullptr);

// key: value lines; soft checks carry a [ok] / [flag] marker.
void write_report_text(std::ostream& out, const StabilityReport& report);
void write_report_csv_header(std::ostream& out);
void write_report_csv_row(std::ostream& out, const StabilityReport& report);

}  // namespace kansa
