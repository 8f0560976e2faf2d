#include "kansa/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "kansa/errors.hpp"

namespace kansa {

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, ProblemFactory>& registry() {
  static std::map<std::string, ProblemFactory> r{
      {"kpz", [](int d) { return bench::kpz_problem(d); }},
      {"heat", [](int d) { return bench::heat_problem(d); }},
  };
  return r;
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto path = dir / name;
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  return f;
}

bool parse_double(const std::string& s, double& v) {
  std::istringstream in(s);
  in >> v;
  return in && (in >> std::ws).eof();
}

}  // namespace

void register_problem(const std::string& name, ProblemFactory factory) {
  if (name.empty() || !factory) throw InputError("problem registration needs a name and a factory");
  std::lock_guard lock(registry_mutex());
  registry()[name] = std::move(factory);
}

ParabolicProblem make_problem(const std::string& name, int d) {
  std::lock_guard lock(registry_mutex());
  const auto it = registry().find(name);
  if (it == registry().end()) {
    std::string known;
    for (const auto& [k, v] : registry()) known += (known.empty() ? "" : ", ") + k;
    throw InputError("unknown problem '" + name + "' (known: " + known + ")");
  }
  ParabolicProblem p = it->second(d);
  p.validate();
  return p;
}

DataSet read_data(std::istream& in, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  std::size_t columns = 0;
  bool seen_content = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> row;
    std::stringstream fields(line);
    std::string field;
    bool numeric = true;
    while (std::getline(fields, field, ',')) {
      double v = 0.0;
      if (!parse_double(field, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (!seen_content) {  // header
        seen_content = true;
        continue;
      }
      throw InputError(source + ":" + std::to_string(lineno) + ": non-numeric field '" + field + "'");
    }
    seen_content = true;
    if (row.size() < 2) {
      throw InputError(source + ":" + std::to_string(lineno) + ": expected x1,...,xd,value");
    }
    if (columns == 0) columns = row.size();
    if (row.size() != columns) {
      throw InputError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                       " columns, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(source + ": no data rows");
  DataSet data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(columns - 1);
  data.points.resize(n, d);
  data.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) data.points(i, j) = r[static_cast<std::size_t>(j)];
    data.values[i] = r.back();
  }
  return data;
}

int cmd_interpolate(const RunConfig& config, const std::string& data_file, std::ostream& out) {
  std::ifstream in(data_file);
  if (!in) throw InputError("cannot open data file " + data_file);
  DataSet data = read_data(in, data_file);
  SiteSet sites(std::move(data.points));

  Domain domain = [&] {
    if (config.domain_given) {
      Domain d = config.domain();
      sites.require_inside(d);
      return d;
    }
    Vector lo = sites.bounding_lower(), hi = sites.bounding_upper();
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      if (!(lo[i] < hi[i])) {
        lo[i] -= 0.5;
        hi[i] += 0.5;
      }
    }
    return Domain::box(lo, hi);
  }();

  const KernelSpec kernel = config.kernel_for(sites);
  const PolynomialTail tail = domain.tail(config.m);
  const auto shared = std::make_shared<const SiteSet>(std::move(sites));
  InterpolationSystem system(kernel, shared, tail, domain);
  const Interpolant f = system.fit(data.values);

  const double fill = fill_distance(*shared, domain, config.diagnostics.fill_resolution);
  const double seminorm = f.native_seminorm();
  auto dump = open_output(config.output_dir, "interpolant.txt");
  write_interpolant(dump, f);

  std::ostringstream report;
  report << std::setprecision(12) << "N: " << shared->size() << '\n'
         << "kernel: " << to_string(kernel.family) << '\n'
         << "alpha: " << kernel.alpha << '\n'
         << "m: " << config.m << '\n'
         << "domain: " << domain.describe() << '\n'
         << "condition: " << system.condition() << '\n'
         << "fill: " << fill << '\n'
         << "seminorm: " << seminorm << '\n'
         << "nu: " << kernel.nu << '\n'
         << "error_indicator: " << error_indicator(f, fill, 0) << '\n';
  auto file = open_output(config.output_dir, "interpolate_report.txt");
  file << report.str();
  out << report.str();
  return kExitOk;
}

namespace {

CollocationSolver make_solver(const RunConfig& config) {
  const Domain domain = config.domain();
  SiteSet sites = config.sites();
  const KernelSpec kernel = config.kernel_for(sites);
  SchemeConfig scheme = config.scheme;
  scheme.m = config.m;
  return CollocationSolver(make_problem(config.problem, domain.dimension()), scheme, kernel,
                           std::move(sites), domain);
}

void emit_report(const RunConfig& config, const StabilityReport& report, std::ostream& out) {
  std::ostringstream text;
  write_report_text(text, report);
  auto txt = open_output(config.output_dir, "report.txt");
  txt << text.str();
  auto csv = open_output(config.output_dir, "report.csv");
  write_report_csv_header(csv);
  write_report_csv_row(csv, report);
  out << text.str();
}

}  // namespace

int cmd_solve(const RunConfig& config, std::ostream& out) {
  const CollocationSolver solver = make_solver(config);
  const SolutionField sol = solver.solve();
  auto csv = open_output(config.output_dir, "solution.csv");
  write_solution_csv(csv, sol);
  const auto report = stability_report(solver, config.domain(), config.diagnostics, &sol);
  out << "problem: " << config.problem << '\n' << "time_slices: " << sol.time_grid.size() << '\n';
  emit_report(config, report, out);
  return kExitOk;
}

int cmd_diagnose(const RunConfig& config, std::ostream& out) {
  const CollocationSolver solver = make_solver(config);
  const auto report = stability_report(solver, config.domain(), config.diagnostics);
  emit_report(config, report, out);
  return kExitOk;
}

int cmd_bench(const RunConfig& config, bench::Benchmark which, std::ostream& out) {
  const auto result = bench::run_benchmark(config.bench, which);
  std::ostringstream csv;
  bench::write_benchmark_csv(csv, result);
  const std::string name = "bench_" + bench::to_string(which);
  auto file = open_output(config.output_dir, name + ".csv");
  file << csv.str();
  for (const auto& row : result.rows) {
    if (!row.ok) continue;
    auto dump = open_output(config.output_dir, name + "_N" + std::to_string(row.N) + "_grid.csv");
    bench::write_grid_dump(dump, result, row);
  }
  out << csv.str();
  for (const auto& row : result.rows) {
    if (!row.ok) log_warn("row with " + std::to_string(row.per_axis) + " points per axis failed: " + row.error);
  }
  return result.all_ok() ? kExitOk : kExitNumerical;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  // Flat --section.key value overrides are pulled out before CLI11 sees the arguments.
  std::vector<std::pair<std::string, std::string>> overrides;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) == 0) {
      const auto eq = a.find('=');
      const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
      if (key.find('.') != std::string::npos) {
        if (eq != std::string::npos) {
          overrides.emplace_back(key, a.substr(eq + 1));
        } else if (i + 1 < args.size()) {
          overrides.emplace_back(key, args[++i]);
        } else {
          err << "error: override --" << key << " needs a value\n";
          return kExitUsage;
        }
        continue;
      }
    }
    rest.push_back(a);
  }

  CLI::App app{"Kernel collocation solver for fully nonlinear parabolic problems"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir, oracle;
  std::optional<std::int64_t> mc_seed;
  std::optional<double> theta;
  std::optional<int> steps, grid;
  bool verbose = false, quiet = false;
  app.add_option("--config", config_path, "configuration file ([section] key = value)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--oracle", oracle, "Cole-Hopf oracle for bench kpz")->check(CLI::IsMember({"quadrature", "mc"}));
  app.add_option("--mc-seed", mc_seed, "Monte-Carlo seed");
  app.add_option("--theta", theta, "theta of the time scheme");
  app.add_option("--steps", steps, "number of time steps n");
  app.add_option("--grid", grid, "sites per axis");
  app.add_flag("-v,--verbose", verbose, "info messages on stderr");
  app.add_flag("-q,--quiet", quiet, "suppress warnings");

  auto* interp = app.add_subcommand("interpolate", "fit an interpolant to x1,...,xd,value rows");
  std::string data_file;
  interp->add_option("data", data_file, "data file")->required();
  auto* solve = app.add_subcommand("solve", "run the collocation scheme and write the solution");
  auto* diagnose = app.add_subcommand("diagnose", "stability diagnostics for the configured sites");
  auto* bench_cmd = app.add_subcommand("bench", "benchmark table against an exact solution");
  std::string which;
  bench_cmd->add_option("which", which, "kpz or heat")->required()->check(CLI::IsMember({"kpz", "heat"}));

  std::vector<std::string> reversed(rest.rbegin(), rest.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Settings settings;
    if (!config_path.empty()) settings = read_settings_file(config_path);
    auto set = [&](const std::string& k, const std::string& v) { settings[k] = v; };
    if (!out_dir.empty()) set("output.dir", out_dir);
    if (!oracle.empty()) set("bench.oracle", oracle);
    if (mc_seed) set("bench.mc_seed", std::to_string(*mc_seed));
    if (theta) {
      std::ostringstream s;
      s << std::setprecision(17) << *theta;
      set("scheme.theta", s.str());
      set("bench.theta", s.str());
    }
    if (steps) {
      set("scheme.n", std::to_string(*steps));
      if (*steps < 1) throw InputError("--steps must be positive");
      std::ostringstream s;
      s << std::setprecision(17) << 1.0 / *steps;
      set("bench.h", s.str());
    }
    if (grid) {
      set("sites.per_axis", std::to_string(*grid));
      set("bench.grids", std::to_string(*grid));
    }
    for (const auto& [k, v] : overrides) set(k, v);

    const RunConfig config = build_config(settings);
    set_verbosity(quiet ? Verbosity::quiet : verbose ? Verbosity::info : config.verbosity);

    if (*interp) return cmd_interpolate(config, data_file, out);
    if (*solve) return cmd_solve(config, out);
    if (*diagnose) return cmd_diagnose(config, out);
    return cmd_bench(config, bench::parse_benchmark(which), out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace kansa
