#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvscat/grid.hpp"
#include "nvscat/scattering.hpp"

namespace nvscat {

enum class Status { pass, fail, inapplicable, skipped };
const char* status_name(Status s);

struct CheckRecord {
  std::string id;
  std::string anchor;  // identity under test, or "plumbing"
  double residual = 0.0;
  double tol = 0.0;
  Status status = Status::skipped;
  std::string fingerprint;
  std::string note;
  nlohmann::json details = nlohmann::json::object();
};

// Sets status from residual <= tol and returns the record.
CheckRecord make_record(std::string id, std::string anchor, double residual, double tol,
                        std::string fingerprint = "");

struct VerificationReport {
  std::vector<CheckRecord> records;
  nlohmann::json metadata = nlohmann::json::object();
  bool overall = true;
};

VerificationReport assemble_report(std::vector<CheckRecord> records,
                                   nlohmann::json metadata = nlohmann::json::object());
nlohmann::json report_to_json(const VerificationReport& r, bool with_timestamp = false);
std::string report_text(const VerificationReport& r);

// |x - y| / max(|x|, |y|), zero when both vanish.
double rel_diff(cplx x, cplx y);

// The d-bar coefficient for a and mu, measured for this normalization of
// g and b: d/dlbar a = kDbarSign * pi sgn(1 - |l|^2) |b|^2 / lbar.
inline constexpr double kDbarSign = -1.0;

// --- scattering-data checks -------------------------------------------------

CheckRecord check_ab_on_T(const ScatteringData& d, double tol = 1e-3);

struct DeltaTolerances {
  double realness = 1e-6;
  double t_spread = 1e-3;
  double limits = 1e-2;
  double inversion = 1e-4;
  std::vector<double> limit_radii{0.02, 50.0};
};

// Realness, T-constancy, limits, inversion symmetry. Continuity needs its
// own path and is produced by check_delta_continuity.
std::vector<CheckRecord> check_delta_properties(const ScatteringData& d,
                                                const DeltaTolerances& tol = {});

// Max jump along a radial path through |lambda| = r0 at spacing dr versus
// dr/2; a continuous Delta halves its jumps, a discontinuity does not.
CheckRecord check_delta_continuity(const Potential& v, double phase, double r0, double dr,
                                   int half_width, const ScanOptions& opts, double tol = 1.5);

// --- Green's function checks -----------------------------------------------

struct TIdentityResult {
  CheckRecord record;
  double normalization = 0.0;  // G / reference at |z| = 1, lambda = 1
};

TIdentityResult check_greens_T_identity(const Grid& grid, int n_phases, double r_lo, double r_hi,
                                        int ext, const GreensOptions& opts = {}, double tol = 1e-2);

CheckRecord check_greens_conj_symmetry(const Grid& grid, const std::vector<cplx>& lambdas,
                                       const GreensOptions& opts = {}, double tol = 1e-4);

// g(e^{i phi} z, e^{i phi} lambda) = g(z, lambda) for quarter turns (grid-exact).
CheckRecord check_greens_rotation(const Grid& grid, const std::vector<cplx>& lambdas,
                                  const GreensOptions& opts = {}, double tol = 1e-4);

// --- potential-level checks -------------------------------------------------

// b(1/lbar) = conj b(lambda) and b(-1/lbar) = b(lambda).
std::vector<CheckRecord> check_b_symmetry(const Potential& v, const std::vector<cplx>& lambdas,
                                          const ScanOptions& opts, double tol = 1e-4);

CheckRecord check_a_limit(const Potential& v, const std::vector<cplx>& lambdas,
                          const ScanOptions& opts, double tol = 1e-2);

// Ratios of ||b - born_b||_inf between successive doublings of the amplitude.
CheckRecord check_born_scaling(const Grid& grid, Family f, PotentialParams p,
                               const std::vector<double>& amplitudes,
                               const std::vector<cplx>& lambdas, const ScanOptions& opts,
                               double tol = 0.15);

struct DbarOptions {
  double step = 1e-3;
  double tol = 0.05;
  double t_band = 0.05;
  // Residuals below this are treated as converged for the halving test.
  double floor = 1e-9;
};

CheckRecord check_dbar_a(const Potential& v, cplx lambda, const ScanOptions& opts,
                         const DbarOptions& d = {});
CheckRecord check_dbar_mu(const Potential& v, const std::vector<cplx>& z_samples, cplx lambda,
                          const ScanOptions& opts, const DbarOptions& d = {});
CheckRecord check_dbar_lndelta(const Potential& v, cplx lambda, const ScanOptions& opts,
                               const DbarOptions& d = {});

CheckRecord check_shift_lemma(const Potential& v, cplx zeta, const std::vector<cplx>& lambdas,
                              const ScanOptions& opts, double tol = 1e-3);

// --- phase obstruction ------------------------------------------------------

// -((l - 1/lbar) cbar - (lbar - 1/l) c)/2 - (l^3 + l^-3 - lbar^3 - lbar^-3)
cplx soliton_mismatch(cplx lambda, cplx c);

std::vector<cplx> annulus_samples(double r_lo, double r_hi, int n, std::uint64_t seed);

CheckRecord soliton_obstruction(cplx c, const std::vector<cplx>& lambdas,
                                double floor = 1e-8, double min_fraction = 0.95);

CheckRecord transparency_chain_demo(const Potential& v_weak, const LambdaGrid& lg,
                                    const ScanOptions& opts);

// --- suite -----------------------------------------------------------------

struct SuiteOptions {
  ScanOptions scan;
  LambdaGridSpec lambda_grid;
  DeltaTolerances delta;
  DbarOptions dbar;
  double ab_tol = 1e-3;
  double symmetry_tol = 1e-4;
  double shift_tol = 1e-3;
  double t_identity_tol = 1e-2;
  cplx shift_zeta{1.0, 1.0};
  std::vector<cplx> soliton_c{{0, 0}, {1, 0}, {4, 3}};
  std::uint64_t seed = 20240601;
  // Empty selects all check groups.
  std::vector<std::string> select;
};

VerificationReport run_suite(const Potential& v, const SuiteOptions& opts,
                             const ScatteringData* cached_scan = nullptr,
                             ScatteringData* scan_out = nullptr);

}  // namespace nvscat
