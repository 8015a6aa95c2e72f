#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nvscat/greens.hpp"
#include "nvscat/grid.hpp"
#include "nvscat/lippmann.hpp"

namespace nvscat {

// (1/2pi)^2 sum mu v h^2
cplx compute_a(const Potential& v, const MuField& mu);

// (1/2pi)^2 sum exp(-((lambda - 1/lbar) zbar - (lbar - 1/lambda) z)/2) mu v h^2.
// Throws ErrorCode::aliasing when the oscillation is under four cells.
cplx compute_b(const Potential& v, const MuField& mu);

// Largest |lambda - 1/lbar| the grid resolves with four cells per wavelength.
double b_frequency_limit(const Grid& g);
bool b_resolved(const Grid& g, cplx lambda);

// vhat(i (lambda - 1/lbar)): b with mu = 1.
cplx born_b(const Potential& v, cplx lambda);

// pi sgn(1 - |lambda|^2) b / lbar
cplx r_of_b(cplx lambda, cplx b);

struct ScanOptions {
  GreensOptions greens;
  SolverOptions solver;
  KernelOptions kernel;
  bool determinant = true;
  int threads = 1;
};

struct LambdaRecord {
  cplx lambda;
  cplx a{0, 0}, b{0, 0};
  bool has_a = false, has_b = false;
  DeterminantSample det;
  bool has_det = false;
  double mu_residual = 0.0;
  int iterations = 0;
  double table_error = -1.0;
  std::vector<std::string> flags;

  bool flagged(const std::string& f) const;
};

struct ScatteringData {
  std::vector<LambdaRecord> records;
  std::uint64_t fingerprint = 0;
  std::string family;
  double R = 0.0;
  int N = 0;
  cplx vhat0{0, 0};
  // Free-form metadata carried through serialization.
  std::string config_hash;
};

// One full pipeline evaluation at a single lambda.
LambdaRecord evaluate_lambda(const Potential& v, cplx lambda, const ScanOptions& opts);

ScatteringData scan(const Potential& v, const LambdaGrid& lg, const ScanOptions& opts = {});
ScatteringData scan(const Potential& v, const std::vector<cplx>& lambdas,
                    const ScanOptions& opts = {});

std::string to_json_string(const ScatteringData& d);
ScatteringData scattering_from_json_string(const std::string& s);
void write_scattering_json(const ScatteringData& d, const std::string& path);
ScatteringData read_scattering_json(const std::string& path);
// Columns: re, im, |lambda|, arg, Re Delta, Im Delta, method, hs_norm, flag
void write_determinant_csv(const ScatteringData& d, const std::string& path);
// Full record mirror for plotting.
void write_scattering_csv(const ScatteringData& d, const std::string& path);

}  // namespace nvscat
