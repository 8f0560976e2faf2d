#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "kansa/config.hpp"

namespace kansa {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

using ProblemFactory = std::function<ParabolicProblem(int d)>;

// Makes `name` available to `problem.name`; kpz and heat are built in.
void register_problem(const std::string& name, ProblemFactory factory);
ParabolicProblem make_problem(const std::string& name, int d);

// Data rows x1,...,xd,value; an optional non-numeric header line; '#' comments.
struct DataSet {
  PointMatrix points;
  Vector values;
};
DataSet read_data(std::istream& in, const std::string& source = "<data>");

int cmd_interpolate(const RunConfig& config, const std::string& data_file, std::ostream& out);
int cmd_solve(const RunConfig& config, std::ostream& out);
int cmd_diagnose(const RunConfig& config, std::ostream& out);
int cmd_bench(const RunConfig& config, bench::Benchmark which, std::ostream& out);

// args excludes the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kansa
