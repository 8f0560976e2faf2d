#include "kansa/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <thread>

#include "kansa/diagnostics.hpp"
#include "kansa/errors.hpp"

namespace kansa::bench {

double kpz_F(double, const PointRef&, double, const PointRef& p, const Matrix& gamma) {
  return -0.5 * gamma.trace() - 0.5 * p.squaredNorm();
}

double heat_F(double, const PointRef&, double, const PointRef&, const Matrix& gamma) {
  return -0.5 * gamma.trace();
}

double kpz_terminal(const PointRef& x) { return x.array().cos().prod(); }

double heat_exact(double t, const PointRef& x) {
  return std::exp(0.5 * static_cast<double>(x.size()) * (t - 1.0)) * kpz_terminal(x);
}

ParabolicProblem kpz_problem(int d) {
  ParabolicProblem p;
  p.name = "kpz";
  p.d = d;
  p.T = 1.0;
  p.F = kpz_F;
  p.f = kpz_terminal;
  p.exact = [](double t, const PointRef& x) { return cole_hopf_quadrature(x, t); };
  return p;
}

ParabolicProblem heat_problem(int d) {
  ParabolicProblem p;
  p.name = "heat";
  p.d = d;
  p.T = 1.0;
  p.F = heat_F;
  p.f = kpz_terminal;
  p.exact = heat_exact;
  return p;
}

QuadratureRule gauss_hermite(int nodes) {
  if (nodes < 1) throw InputError("Gauss-Hermite rule needs at least one node");
  // Jacobi matrix of the probabilists' Hermite polynomials.
  Matrix jacobi = Matrix::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(nodes));
  rule.weights.resize(static_cast<std::size_t>(nodes));
  double total = 0.0;
  for (int i = 0; i < nodes; ++i) {
    rule.nodes[static_cast<std::size_t>(i)] = eig.eigenvalues()[i];
    const double v0 = eig.eigenvectors()(0, i);
    rule.weights[static_cast<std::size_t>(i)] = v0 * v0;
    total += v0 * v0;
  }
  for (auto& w : rule.weights) w /= total;
  return rule;
}

namespace {

double time_to_go(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InputError("Cole-Hopf oracle requires 0 <= t <= 1");
  return 1.0 - t;
}

}  // namespace

double cole_hopf_quadrature(const PointRef& x, double t, int gh_nodes) {
  return cole_hopf_quadrature(x, t, gauss_hermite(gh_nodes));
}

double cole_hopf_quadrature(const PointRef& x, double t, const QuadratureRule& rule) {
  const double tau = time_to_go(t);
  if (tau == 0.0) return kpz_terminal(x);
  const double sigma = std::sqrt(tau);
  const auto d = x.size();
  const auto n = rule.nodes.size();
  // cos values per axis and node; the integrand is exp(prod_i cos(x_i + sigma z_i)).
  std::vector<std::vector<double>> cosines(static_cast<std::size_t>(d), std::vector<double>(n));
  for (Eigen::Index i = 0; i < d; ++i)
    for (std::size_t a = 0; a < n; ++a) cosines[static_cast<std::size_t>(i)][a] = std::cos(x[i] + sigma * rule.nodes[a]);

  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  double sum = 0.0;
  while (true) {
    double weight = 1.0, product = 1.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      weight *= rule.weights[idx[i]];
      product *= cosines[i][idx[i]];
    }
    sum += weight * std::exp(product);
    std::size_t i = idx.size();
    while (i > 0 && ++idx[i - 1] == n) idx[--i] = 0;
    if (i == 0) break;
  }
  return std::log(sum);
}

MonteCarloEstimate cole_hopf_mc(const PointRef& x, double t, std::int64_t samples,
                                std::uint64_t seed, int threads) {
  if (samples < 1) throw InputError("Monte-Carlo oracle needs at least one sample");
  const double tau = time_to_go(t);
  if (tau == 0.0) return {kpz_terminal(x), 0.0};
  const double sigma = std::sqrt(tau);
  const Vector x0 = x;
  const auto chunks = static_cast<std::size_t>((samples + kMonteCarloChunk - 1) / kMonteCarloChunk);
  std::vector<double> sums(chunks, 0.0), squares(chunks, 0.0);

  auto run_chunk = [&](std::size_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c & 0xffffffffu), static_cast<std::uint32_t>(c >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    const std::int64_t begin = static_cast<std::int64_t>(c) * kMonteCarloChunk;
    const std::int64_t count = std::min(kMonteCarloChunk, samples - begin);
    Vector point(x0.size());
    double s = 0.0, s2 = 0.0;
    for (std::int64_t i = 0; i < count; ++i) {
      for (Eigen::Index a = 0; a < x0.size(); ++a) point[a] = x0[a] + sigma * normal(rng);
      const double y = std::exp(kpz_terminal(point));
      s += y;
      s2 += y * y;
    }
    sums[c] = s;
    squares[c] = s2;
  };

  const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, 256));
  if (workers == 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < chunks; c += workers) run_chunk(c);
      });
    }
    for (auto& th : pool) th.join();
  }

  double s = 0.0, s2 = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    s += sums[c];
    s2 += squares[c];
  }
  const double n = static_cast<double>(samples);
  const double mean = s / n;
  const double var = samples > 1 ? std::max(0.0, (s2 - n * mean * mean) / (n - 1.0)) : 0.0;
  return {std::log(mean), std::sqrt(var / n) / mean};
}

std::string to_string(Benchmark b) { return b == Benchmark::kpz ? "kpz" : "heat"; }
std::string to_string(Oracle o) { return o == Oracle::quadrature ? "quadrature" : "mc"; }
std::string to_string(ShapeRule r) {
  return r == ShapeRule::mean_distance ? "mean_distance" : "nearest_neighbor";
}

Benchmark parse_benchmark(const std::string& s) {
  if (s == "kpz") return Benchmark::kpz;
  if (s == "heat") return Benchmark::heat;
  throw InputError("unknown benchmark '" + s + "' (expected kpz or heat)");
}

Oracle parse_oracle(const std::string& s) {
  if (s == "quadrature") return Oracle::quadrature;
  if (s == "mc" || s == "monte_carlo") return Oracle::monte_carlo;
  throw InputError("unknown oracle '" + s + "' (expected quadrature or mc)");
}

ShapeRule parse_shape_rule(const std::string& s) {
  if (s == "mean_distance") return ShapeRule::mean_distance;
  if (s == "nearest_neighbor") return ShapeRule::nearest_neighbor;
  throw InputError("unknown shape rule '" + s + "' (expected mean_distance or nearest_neighbor)");
}

int BenchmarkConfig::validate() const {
  if (grids.empty()) throw InputError("benchmark needs at least one grid size");
  for (int g : grids)
    if (g < 2) throw InputError("benchmark grids need at least 2 points per axis");
  if (!(h > 0.0 && h <= 1.0)) throw InputError("benchmark time step must lie in (0, 1]");
  const double steps = 1.0 / h;
  const int n = static_cast<int>(std::lround(steps));
  if (std::abs(steps - n) > 1e-9 * steps) throw InputError("benchmark time step must divide T = 1 evenly");
  if (!(theta >= 0.0 && theta <= 1.0)) throw InputError("benchmark theta must lie in [0, 1]");
  const Domain solve_domain = Domain::box(solve_lower, solve_upper);
  const Domain eval_domain = Domain::box(eval_lower, eval_upper);
  if (!solve_domain.contains_box(eval_domain)) {
    throw InputError("evaluation domain must lie inside the solve domain");
  }
  if (eval_per_axis < 1) throw InputError("evaluation grid needs at least one point per axis");
  if (mc_samples < 1) throw InputError("bench.mc_samples must be positive");
  if (gh_nodes < 1) throw InputError("bench.gh_nodes must be positive");
  if (alpha && !(*alpha > 0.0)) throw InputError("kernel.alpha override must be positive");
  return n;
}

double shape_parameter(const SiteSet& sites, ShapeRule rule) {
  const double eps = rule == ShapeRule::mean_distance ? mean_pairwise_distance(sites) : minimum_spacing(sites);
  return 1.0 / (eps * eps);
}

bool BenchmarkResult::all_ok() const {
  return std::all_of(rows.begin(), rows.end(), [](const BenchmarkRow& r) { return r.ok; });
}

std::vector<double> reference_values(const BenchmarkConfig& config, Benchmark which,
                                     const PointMatrix& points) {
  std::vector<double> ref(static_cast<std::size_t>(points.rows()));
  if (which == Benchmark::heat) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) ref[static_cast<std::size_t>(i)] = heat_exact(0.0, points.row(i).transpose());
    return ref;
  }
  if (config.oracle == Oracle::quadrature) {
    const auto rule = gauss_hermite(config.gh_nodes);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      ref[static_cast<std::size_t>(i)] = cole_hopf_quadrature(points.row(i).transpose(), 0.0, rule);
    }
  } else {
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      // Distinct stream per evaluation point, derived from the seed.
      const std::uint64_t seed = config.mc_seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(i);
      ref[static_cast<std::size_t>(i)] =
          cole_hopf_mc(points.row(i).transpose(), 0.0, config.mc_samples, seed, config.threads).value;
    }
  }
  return ref;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config, Benchmark which) {
  const int n = config.validate();
  BenchmarkResult result;
  result.which = which;
  result.oracle_name = which == Benchmark::heat ? "exact" : to_string(config.oracle);
  result.eval_points = tensor_grid(config.eval_lower, config.eval_upper, config.eval_per_axis);
  result.reference = reference_values(config, which, result.eval_points);

  const Domain solve_domain = Domain::box(config.solve_lower, config.solve_upper);
  const int d = static_cast<int>(config.solve_lower.size());
  const ParabolicProblem problem = which == Benchmark::kpz ? kpz_problem(d) : heat_problem(d);

  for (int per_axis : config.grids) {
    BenchmarkRow row;
    row.per_axis = per_axis;
    row.h = config.h;
    try {
      SiteSet sites = equispaced_grid(solve_domain, per_axis);
      row.N = sites.size();
      row.alpha = config.alpha ? *config.alpha : shape_parameter(sites, config.shape_rule);
      SchemeConfig scheme;
      scheme.n = n;
      scheme.theta = config.theta;
      CollocationSolver solver(problem, scheme, KernelSpec::gaussian(row.alpha), std::move(sites), solve_domain);
      const auto sol = solver.solve();
      const auto& initial = sol.interpolants.front();
      row.numeric.resize(static_cast<std::size_t>(result.eval_points.rows()));
      for (Eigen::Index i = 0; i < result.eval_points.rows(); ++i) {
        row.numeric[static_cast<std::size_t>(i)] = initial.evaluate(result.eval_points.row(i).transpose());
      }
      row.rms_error = rms_error(row.numeric, result.reference);
      row.max_error = max_error(row.numeric, result.reference);
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

void write_benchmark_csv(std::ostream& out, const BenchmarkResult& result) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(12);
  out << "benchmark,N,h,rms_error,max_error,oracle\n";
  for (const auto& row : result.rows) {
    out << to_string(result.which) << ',' << row.N << ',' << row.h << ',';
    if (row.ok) {
      out << row.rms_error << ',' << row.max_error;
    } else {
      out << "error,error";
    }
    out << ',' << result.oracle_name << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

void write_grid_dump(std::ostream& out, const BenchmarkResult& result, const BenchmarkRow& row) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(12);
  const auto d = result.eval_points.cols();
  for (Eigen::Index i = 0; i < d; ++i) out << 'x' << i + 1 << ',';
  out << "v_numeric,v_oracle\n";
  for (Eigen::Index p = 0; p < result.eval_points.rows(); ++p) {
    for (Eigen::Index i = 0; i < d; ++i) out << result.eval_points(p, i) << ',';
    out << row.numeric[static_cast<std::size_t>(p)] << ',' << result.reference[static_cast<std::size_t>(p)] << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

}  // namespace kansa::bench
