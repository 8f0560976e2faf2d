#include "kansa/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "kansa/errors.hpp"

namespace kansa {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double parse_factor(const std::string& token, const std::string& whole) {
  if (token == "pi") return std::numbers::pi;
  double value = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (token.empty() || ec != std::errc() || ptr != last) {
    throw InputError("malformed number '" + whole + "'");
  }
  return value;
}

}  // namespace

double parse_real(const std::string& text) {
  std::string s = trim(text);
  double sign = 1.0;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    if (s[0] == '-') sign = -1.0;
    s = trim(s.substr(1));
  }
  if (s.empty()) throw InputError("malformed number '" + text + "'");
  double value = 1.0;
  char op = '*';
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i < s.size() && s[i] != '*' && s[i] != '/') continue;
    const double f = parse_factor(trim(s.substr(start, i - start)), text);
    value = op == '*' ? value * f : value / f;
    if (i < s.size()) op = s[i];
    start = i + 1;
  }
  if (!std::isfinite(value)) throw InputError("non-finite number '" + text + "'");
  return sign * value;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_real(part));
  if (out.empty()) throw InputError("empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& part : split(text, ',')) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      throw InputError("malformed integer '" + part + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw InputError("empty list");
  return out;
}

Settings read_settings(std::istream& in, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InputError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  Settings out;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      out[name] = trim(node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) {
      std::string value = trim(leaf.data());
      // trailing comments
      const auto hash = value.find_first_of("#;");
      if (hash != std::string::npos) value = trim(value.substr(0, hash));
      out[name + "." + key] = value;
    }
  }
  return out;
}

Settings read_settings_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  return read_settings(in, path.string());
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "kernel.family",          "kernel.alpha",           "kernel.beta",
      "kernel.nu",              "domain.shape",           "domain.lower",
      "domain.upper",           "domain.center",          "domain.radius",
      "sites.per_axis",         "interp.m",               "scheme.n",
      "scheme.theta",           "scheme.fp_tol",          "scheme.fp_max_iter",
      "problem.name",           "diagnostics.delta",      "diagnostics.K1",
      "diagnostics.k2_resolution", "diagnostics.fill_resolution", "bench.grids",
      "bench.h",                "bench.theta",            "bench.oracle",           "bench.mc_samples",
      "bench.mc_seed",          "bench.gh_nodes",         "bench.eval_per_axis",
      "bench.solve_lower",      "bench.solve_upper",      "bench.eval_lower",
      "bench.eval_upper",       "bench.shape_rule",       "bench.threads",
      "output.dir",             "output.verbosity",
  };
  return keys;
}

namespace {

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

int parse_int(const std::string& s) {
  const auto v = parse_int_list(s);
  if (v.size() != 1) throw InputError("expected a single integer, got '" + s + "'");
  return v.front();
}

Verbosity parse_verbosity(const std::string& s) {
  if (s == "quiet") return Verbosity::quiet;
  if (s == "warn") return Verbosity::warn;
  if (s == "info") return Verbosity::info;
  if (s == "debug") return Verbosity::debug;
  throw InputError("unknown verbosity '" + s + "' (expected quiet, warn, info or debug)");
}

}  // namespace

RunConfig build_config(const Settings& settings) {
  const auto& keys = known_keys();
  for (const auto& [key, value] : settings) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw InputError("unknown config key '" + key + "'");
    }
  }

  RunConfig c;
  std::optional<double> beta;
  for (const auto& [key, value] : settings) {
    try {
      if (key == "kernel.family") {
        c.kernel.family = parse_kernel_family(value);
      } else if (key == "kernel.alpha") {
        c.kernel.alpha = parse_real(value);
        c.alpha_given = true;
      } else if (key == "kernel.beta") {
        beta = parse_real(value);
      } else if (key == "kernel.nu") {
        c.kernel.nu = parse_int(value);
      } else if (key == "domain.shape") {
        if (value != "box" && value != "ball") throw InputError("expected box or ball");
        c.domain_shape = value;
        c.domain_given = true;
      } else if (key == "domain.lower") {
        c.lower = to_vector(parse_real_list(value));
        c.domain_given = true;
      } else if (key == "domain.upper") {
        c.upper = to_vector(parse_real_list(value));
        c.domain_given = true;
      } else if (key == "domain.center") {
        c.center = to_vector(parse_real_list(value));
        c.domain_given = true;
      } else if (key == "domain.radius") {
        c.radius = parse_real(value);
        c.domain_given = true;
      } else if (key == "sites.per_axis") {
        c.per_axis = parse_int(value);
      } else if (key == "interp.m") {
        c.m = parse_int(value);
      } else if (key == "scheme.n") {
        c.scheme.n = parse_int(value);
      } else if (key == "scheme.theta") {
        c.scheme.theta = parse_real(value);
      } else if (key == "scheme.fp_tol") {
        c.scheme.fp_tol = parse_real(value);
      } else if (key == "scheme.fp_max_iter") {
        c.scheme.fp_max_iter = parse_int(value);
      } else if (key == "problem.name") {
        c.problem = value;
      } else if (key == "diagnostics.delta") {
        c.diagnostics.delta = parse_real(value);
      } else if (key == "diagnostics.K1") {
        c.diagnostics.K1 = parse_real(value);
      } else if (key == "diagnostics.k2_resolution") {
        c.diagnostics.k2_resolution = parse_int(value);
      } else if (key == "diagnostics.fill_resolution") {
        c.diagnostics.fill_resolution = parse_int(value);
      } else if (key == "bench.grids") {
        c.bench.grids = parse_int_list(value);
      } else if (key == "bench.h") {
        c.bench.h = parse_real(value);
      } else if (key == "bench.theta") {
        c.bench.theta = parse_real(value);
      } else if (key == "bench.oracle") {
        c.bench.oracle = bench::parse_oracle(value);
      } else if (key == "bench.mc_samples") {
        c.bench.mc_samples = static_cast<std::int64_t>(parse_real(value));
      } else if (key == "bench.mc_seed") {
        const int seed = parse_int(value);
        if (seed < 0) throw InputError("seed must be nonnegative");
        c.bench.mc_seed = static_cast<std::uint64_t>(seed);
      } else if (key == "bench.gh_nodes") {
        c.bench.gh_nodes = parse_int(value);
      } else if (key == "bench.eval_per_axis") {
        c.bench.eval_per_axis = parse_int(value);
      } else if (key == "bench.solve_lower") {
        c.bench.solve_lower = to_vector(parse_real_list(value));
      } else if (key == "bench.solve_upper") {
        c.bench.solve_upper = to_vector(parse_real_list(value));
      } else if (key == "bench.eval_lower") {
        c.bench.eval_lower = to_vector(parse_real_list(value));
      } else if (key == "bench.eval_upper") {
        c.bench.eval_upper = to_vector(parse_real_list(value));
      } else if (key == "bench.shape_rule") {
        c.bench.shape_rule = bench::parse_shape_rule(value);
      } else if (key == "bench.threads") {
        c.bench.threads = parse_int(value);
      } else if (key == "output.dir") {
        c.output_dir = value;
      } else if (key == "output.verbosity") {
        c.verbosity = parse_verbosity(value);
      }
    } catch (const InputError& e) {
      throw InputError("config key '" + key + "': " + e.what());
    }
  }

  if (beta) {
    c.kernel.beta = *beta;
  } else if (c.kernel.family == KernelFamily::inverse_multiquadric) {
    c.kernel.beta = -0.5;
  } else if (c.kernel.family == KernelFamily::multiquadric) {
    c.kernel.beta = 0.5;
  }
  c.kernel.cpd_order = minimal_cpd_order(c.kernel.family, c.kernel.beta);
  if (c.alpha_given) c.bench.alpha = c.kernel.alpha;
  c.kernel.validate();
  if (c.m < c.kernel.cpd_order) {
    throw InputError("config key 'interp.m': tail order " + std::to_string(c.m) +
                     " is below the kernel's order " + std::to_string(c.kernel.cpd_order));
  }
  if (c.per_axis < 1) throw InputError("config key 'sites.per_axis': must be at least 1");
  if (c.bench.threads < 1) throw InputError("config key 'bench.threads': must be at least 1");
  c.scheme.validate();
  // Surfaces domain errors (dimension mismatch, nonpositive radius) early.
  (void)c.domain();
  return c;
}

Domain RunConfig::domain() const {
  if (domain_shape == "ball") return Domain::ball(center, radius);
  return Domain::box(lower, upper);
}

SiteSet RunConfig::sites() const {
  const Domain d = domain();
  if (d.is_rectangle()) return equispaced_grid(d, per_axis);
  // Grid over the bounding box, keeping the points inside the ball.
  const PointMatrix grid = tensor_grid(d.bounding_lower(), d.bounding_upper(), per_axis);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < grid.rows(); ++i)
    if (d.contains(grid.row(i).transpose())) keep.push_back(i);
  if (keep.empty()) throw InputError("no grid site falls inside the ball domain");
  PointMatrix pts(static_cast<Eigen::Index>(keep.size()), grid.cols());
  for (std::size_t r = 0; r < keep.size(); ++r) pts.row(static_cast<Eigen::Index>(r)) = grid.row(keep[r]);
  return SiteSet(std::move(pts));
}

KernelSpec RunConfig::kernel_for(const SiteSet& sites) const {
  KernelSpec k = kernel;
  if (!alpha_given && sites.size() >= 2) k.alpha = bench::shape_parameter(sites, bench.shape_rule);
  k.validate();
  return k;
}

}  // namespace kansa
