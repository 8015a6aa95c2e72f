#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nvscat/grid.hpp"
#include "nvscat/scattering.hpp"
#include "nvscat/verify.hpp"

namespace nvscat {

struct RunConfig {
  Family family = Family::gaussian;
  PotentialParams params{0.5, 1.0, 1.0, {0.0, 0.0}};
  std::string potential_file;  // custom family only
  double eps = 1.0;
  double R = 8.0;
  int N = 128;
  LambdaGridSpec lambda_grid;
  ScanOptions scan;
  SuiteOptions suite;
  cplx soliton_c{0.0, 0.0};
  std::vector<std::pair<double, double>> soliton_annuli{{0.01, 0.1}, {10.0, 100.0}};
  int soliton_samples = 64;
  // Explicit samples replace the annuli when nonempty.
  std::vector<cplx> soliton_lambdas;
  std::string out_dir = "out";
  int threads = 1;
  std::uint64_t seed = 20240601;
};

// Command-line values that win over the file.
struct ConfigOverrides {
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
};

// Strict: unknown keys and bad values throw ErrorCode::schema with
// "<source>:<line>: message".
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);
void apply_overrides(RunConfig& c, const ConfigOverrides& o);
// Propagates threads and seed into the nested option structs; call after
// every change to the top-level fields.
void finalize_config(RunConfig& c);

nlohmann::json config_to_json(const RunConfig& c);
std::string config_hash(const RunConfig& c);

Potential make_potential(const RunConfig& c);

}  // namespace nvscat
