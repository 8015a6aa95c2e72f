#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace nvscat {

using cplx = std::complex<double>;

// Uniform square grid on [-R, R)^2; node (j, k) sits at x_j + i y_k.
struct Grid {
  double R = 0.0;
  int N = 0;
  double h = 0.0;

  double coord(int j) const { return -R + j * h; }
  cplx node(int j, int k) const { return {coord(j), coord(k)}; }
  std::size_t size() const { return static_cast<std::size_t>(N) * N; }
  std::size_t index(int j, int k) const {
    return static_cast<std::size_t>(j) * N + k;
  }
  bool operator==(const Grid& o) const { return R == o.R && N == o.N; }
};

Grid make_grid(double R, int N);

enum class Family { gaussian, exp_bump, ring, custom };

const char* family_name(Family f);
Family family_from_name(const std::string& s);

struct PotentialParams {
  double A = 0.0;
  double sigma = 1.0;
  double alpha = 1.0;
  cplx center{0.0, 0.0};
};

struct DecayCertificate {
  double q = 0.0;
  double eps = 1.0;
  // sup |v| e^{alpha |z|}; alpha = 0 when no exponential certificate.
  double C_exp = 0.0;
  double alpha = 0.0;
};

struct Potential {
  Grid grid;
  Family family = Family::custom;
  PotentialParams params;
  DecayCertificate decay;
  std::vector<double> samples;  // row-major, index j*N + k

  double at(int j, int k) const { return samples[grid.index(j, k)]; }
  bool is_zero() const;
};

// Closed-form value of an analytic family (throws for custom).
double evaluate_family(Family f, const PotentialParams& p, cplx z);

Potential sample_potential(const Grid& g, Family f, const PotentialParams& p,
                           double eps = 1.0);
Potential custom_potential(const Grid& g, std::vector<double> samples,
                           double eps = 1.0);
Potential translate_potential(const Potential& v, cplx zeta);

DecayCertificate decay_certificate(const Grid& g,
                                   const std::vector<double>& s,
                                   double eps, double alpha);

// (1/2pi)^2 sum exp(i(p1 x1 + p2 x2)) v h^2
cplx fourier_hat_v(const Potential& v, cplx p);

std::uint64_t fingerprint(const Potential& v);

void write_potential(const Potential& v, const std::string& path);
Potential read_potential(const std::string& path);

enum class Region { inner, outer, circle };

struct SpectralPoint {
  cplx lambda;
  bool onT = false;
  Region region = Region::inner;
};

inline constexpr double kDefaultTolT = 1e-9;

SpectralPoint make_spectral_point(cplx lambda, double tol_T = kDefaultTolT);

struct LambdaGridSpec {
  double r_min = 0.05;
  double r_max = 0.9;
  int annuli = 6;
  int phases = 16;
  int t_points = 32;
  bool mirror = true;
  std::vector<cplx> extra;
};

struct LambdaGrid {
  LambdaGridSpec spec;
  std::vector<SpectralPoint> points;
};

LambdaGrid make_lambda_grid(const LambdaGridSpec& spec);

}  // namespace nvscat
