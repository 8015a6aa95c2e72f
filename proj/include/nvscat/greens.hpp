#pragma once

#include <string>
#include <vector>

#include "nvscat/grid.hpp"

namespace nvscat {

// zeta zeta-bar + i (lambda zeta-bar + zeta / lambda)
cplx symbol_denominator(cplx zeta, cplx lambda);

// Roots of the symbol: {0} on |lambda| = 1, else {0, e^{i phi} i (1/s - s)}.
std::vector<cplx> singular_points(cplx lambda);

enum class QuadratureRule {
  // Real-contour DFT with analytic polar subtraction at each root.
  subtraction,
  // DFT on a contour shifted into the complex plane plus a residue strip.
  contour_shift,
};

const char* rule_id(QuadratureRule r);

struct GreensOptions {
  // Spectral window exp(-(|xi|^2 / q0)^8) with q0 = window_frac * K^2,
  // K = ext * pi / h.
  double window_frac = 0.6;
  // xi-grid points per output point and axis, per rule.
  int oversample = 16;
  int oversample_shift = 16;
  // |lambda| in [shift_band, 1/shift_band] uses the contour shift.
  double shift_band = 0.42;
  // Local expansion terms and polar quadrature for the subtraction rule.
  int terms = 6;
  int n_theta = 128;
  int n_rho = 64;
  // Shift beyond the lower admissible contour height.
  double tau_margin = 0.2;
  // Largest usable contour height is K / shift_kappa.
  double shift_kappa = 20.0;
  int n_residue = 64;
  // Band extension; ext > 1 gives the pointwise kernel (subsampled output).
  int ext = 1;
  // Compare against a half-density rule and store the difference.
  bool estimate_error = true;
  double error_threshold = 1e-4;
  // Force a rule instead of choosing by |lambda|.
  bool force_rule = false;
  QuadratureRule rule = QuadratureRule::subtraction;
};

struct Regularization {
  std::vector<cplx> points;
  QuadratureRule rule = QuadratureRule::subtraction;
  // max |g - g_coarse| / max |g|, negative when not estimated.
  double error_estimate = -1.0;
  bool near_T = false;
  int ext = 1;
};

// g(d, lambda) on difference vectors d = (n1 h, n2 h), n in [-N, N).
struct GreensTable {
  cplx lambda;
  Grid grid;
  Regularization reg;
  std::vector<cplx> samples;  // (2N)^2, row (n1 + N), column (n2 + N)

  int width() const { return 2 * grid.N; }
  cplx at(int n1, int n2) const {
    return samples[static_cast<std::size_t>(n1 + grid.N) * width() + (n2 + grid.N)];
  }
};

GreensTable build_greens_table(const Grid& grid, cplx lambda,
                               const GreensOptions& opts = {});

// Pointwise kernel near the origin: builds on a sub-grid of half-width
// radius with the same spacing and an extended band.
GreensTable build_pointwise_table(const Grid& grid, cplx lambda, double radius,
                                  int ext = 4, const GreensOptions& opts = {});

// False when the nonzero root of the symbol lies past the spectral window,
// so the table cannot carry its contribution.
bool root_in_band(const Grid& grid, cplx lambda, const GreensOptions& opts = {});

// e^{-(lambda zbar + z/lambda)/2} g(z) at z = n1 h + i n2 h.
cplx greens_G(const GreensTable& t, int n1, int n2);

// -K0(r) / (2 pi), the value of G on |lambda| = 1.
cplx reference_G_on_T(double r);

// Cache file: JSON header line + interleaved little-endian doubles.
void write_greens_table(const GreensTable& t, const std::string& path);
GreensTable read_greens_table(const std::string& path);
std::string greens_cache_key(const Grid& grid, cplx lambda, const GreensOptions& opts);

// Looks in $NVSCAT_CACHE_DIR when set; otherwise builds directly.
GreensTable cached_greens_table(const Grid& grid, cplx lambda,
                                const GreensOptions& opts = {});

}  // namespace nvscat
