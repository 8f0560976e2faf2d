#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kansa/bench.hpp"
#include "kansa/diagnostics.hpp"
#include "kansa/log.hpp"

namespace kansa {

// Flattened "section.key" -> raw value.
using Settings = std::map<std::string, std::string>;

/// Parses `[section]` / `key = value` text. `source` names the input in errors.
Settings read_settings(std::istream& in, const std::string& source = "<config>");
Settings read_settings_file(const std::filesystem::path& path);

// Real number or a simple product/quotient with pi, e.g. "-pi/2", "0.5*pi", "1e-2".
double parse_real(const std::string& text);
std::vector<double> parse_real_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

struct RunConfig {
  KernelSpec kernel;
  bool alpha_given = false;

  std::string domain_shape = "box";
  Vector lower = Vector::Constant(2, -std::numbers::pi / 2);
  Vector upper = Vector::Constant(2, std::numbers::pi / 2);
  Vector center = Vector::Zero(2);
  double radius = 1.0;
  bool domain_given = false;
  int per_axis = 3;
  int m = 0;

  SchemeConfig scheme;
  std::string problem = "kpz";

  StabilityOptions diagnostics;
  bench::BenchmarkConfig bench;

  std::filesystem::path output_dir = ".";
  Verbosity verbosity = Verbosity::warn;

  Domain domain() const;
  SiteSet sites() const;
  // kernel with alpha from the bench shape rule when kernel.alpha was not given.
  KernelSpec kernel_for(const SiteSet& sites) const;
};

// Every key the configuration understands.
const std::vector<std::string>& known_keys();

// Throws InputError naming the first unknown key or malformed value.
RunConfig build_config(const Settings& settings);

}  // namespace kansa
