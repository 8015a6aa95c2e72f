#include "nvscat/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "nvscat/detail/sum.hpp"
#include "nvscat/error.hpp"

namespace nvscat {

using detail::pairwise_sum;
using std::numbers::pi;

static_assert(std::endian::native == std::endian::little,
              "payload format assumes a little-endian host");

Grid make_grid(double R, int N) {
  if (!(R > 0.0) || !std::isfinite(R))
    throw Error(ErrorCode::invalid_argument, "R must be positive");
  if (N % 2 != 0) throw Error(ErrorCode::invalid_argument, "N must be even");
  if (N < 16) throw Error(ErrorCode::invalid_argument, "N must be >= 16");
  return Grid{R, N, 2.0 * R / N};
}

const char* family_name(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::exp_bump: return "exp-bump";
    case Family::ring: return "ring";
    case Family::custom: return "custom";
  }
  return "custom";
}

Family family_from_name(const std::string& s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "exp-bump") return Family::exp_bump;
  if (s == "ring") return Family::ring;
  if (s == "custom") return Family::custom;
  throw Error(ErrorCode::invalid_argument, "unknown potential family '" + s + "'");
}

bool Potential::is_zero() const {
  return std::all_of(samples.begin(), samples.end(),
                     [](double x) { return x == 0.0; });
}

double evaluate_family(Family f, const PotentialParams& p, cplx z) {
  double r2 = std::norm(z - p.center);
  switch (f) {
    case Family::gaussian:
      return p.A * std::exp(-r2 / (p.sigma * p.sigma));
    case Family::exp_bump:
      return p.A * std::exp(-p.alpha * std::sqrt(r2 + 1.0));
    case Family::ring:
      return p.A * r2 * std::exp(-r2 / (p.sigma * p.sigma));
    case Family::custom:
      break;
  }
  throw Error(ErrorCode::unsupported, "custom potentials have no closed form");
}

DecayCertificate decay_certificate(const Grid& g, const std::vector<double>& s,
                                   double eps, double alpha) {
  DecayCertificate c;
  c.eps = eps;
  c.alpha = alpha;
  for (int j = 0; j < g.N; ++j)
    for (int k = 0; k < g.N; ++k) {
      double r = std::abs(g.node(j, k));
      double a = std::abs(s[g.index(j, k)]);
      c.q = std::max(c.q, a * std::pow(1.0 + r, 2.0 + eps));
      if (alpha > 0.0) c.C_exp = std::max(c.C_exp, a * std::exp(alpha * r));
    }
  return c;
}

static void check_params(Family f, const PotentialParams& p) {
  if (!std::isfinite(p.A))
    throw Error(ErrorCode::invalid_argument, "amplitude must be finite");
  if ((f == Family::gaussian || f == Family::ring) && !(p.sigma > 0.0))
    throw Error(ErrorCode::invalid_argument, "sigma must be positive");
  if (f == Family::exp_bump && !(p.alpha > 0.0))
    throw Error(ErrorCode::invalid_argument, "alpha must be positive");
}

static double certificate_alpha(Family f, const PotentialParams& p) {
  return f == Family::exp_bump ? p.alpha : 1.0;
}

Potential sample_potential(const Grid& g, Family f, const PotentialParams& p,
                           double eps) {
  if (f == Family::custom)
    throw Error(ErrorCode::invalid_argument, "use custom_potential for sampled data");
  check_params(f, p);
  if (!(eps > 0.0)) throw Error(ErrorCode::invalid_argument, "eps must be positive");
  Potential v;
  v.grid = g;
  v.family = f;
  v.params = p;
  v.samples.resize(g.size());
  for (int j = 0; j < g.N; ++j)
    for (int k = 0; k < g.N; ++k)
      v.samples[g.index(j, k)] = evaluate_family(f, p, g.node(j, k));
  v.decay = decay_certificate(g, v.samples, eps, certificate_alpha(f, p));
  return v;
}

Potential custom_potential(const Grid& g, std::vector<double> samples, double eps) {
  if (samples.size() != g.size())
    throw Error(ErrorCode::invalid_argument, "sample count does not match grid");
  for (double x : samples)
    if (!std::isfinite(x))
      throw Error(ErrorCode::invalid_argument, "non-finite potential sample");
  Potential v;
  v.grid = g;
  v.family = Family::custom;
  v.samples = std::move(samples);
  v.decay = decay_certificate(g, v.samples, eps, 0.0);
  return v;
}

Potential translate_potential(const Potential& v, cplx zeta) {
  if (!std::isfinite(zeta.real()) || !std::isfinite(zeta.imag()))
    throw Error(ErrorCode::invalid_argument, "translation must be finite");
  if (std::abs(zeta) > v.grid.R / 2)
    throw Error(ErrorCode::invalid_argument, "translation exceeds R/2");
  if (v.family == Family::custom)
    throw Error(ErrorCode::unsupported,
                "translation of custom potentials would need interpolation");
  PotentialParams p = v.params;
  p.center += zeta;
  return sample_potential(v.grid, v.family, p, v.decay.eps);
}

cplx fourier_hat_v(const Potential& v, cplx p) {
  if (!std::isfinite(p.real()) || !std::isfinite(p.imag()))
    throw Error(ErrorCode::invalid_argument, "frequency must be finite");
  const Grid& g = v.grid;
  std::vector<cplx> ex(g.N), ey(g.N);
  for (int j = 0; j < g.N; ++j) {
    ex[j] = std::polar(1.0, p.real() * g.coord(j));
    ey[j] = std::polar(1.0, p.imag() * g.coord(j));
  }
  cplx s = pairwise_sum<cplx>(0, g.size(), [&](std::size_t i) {
    int j = static_cast<int>(i / g.N), k = static_cast<int>(i % g.N);
    return ex[j] * ey[k] * v.samples[i];
  });
  return s * (g.h * g.h / (4.0 * pi * pi));
}

std::uint64_t fingerprint(const Potential& v) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* data, std::size_t n) {
    auto* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(&v.grid.R, sizeof v.grid.R);
  mix(&v.grid.N, sizeof v.grid.N);
  int f = static_cast<int>(v.family);
  mix(&f, sizeof f);
  mix(v.samples.data(), v.samples.size() * sizeof(double));
  return h;
}

void write_potential(const Potential& v, const std::string& path) {
  nlohmann::json hdr;
  hdr["family"] = family_name(v.family);
  hdr["params"] = {{"A", v.params.A},
                   {"sigma", v.params.sigma},
                   {"alpha", v.params.alpha},
                   {"center", {v.params.center.real(), v.params.center.imag()}}};
  hdr["R"] = v.grid.R;
  hdr["N"] = v.grid.N;
  hdr["q"] = v.decay.q;
  hdr["eps"] = v.decay.eps;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path);
  out << hdr.dump() << '\n';
  out.write(reinterpret_cast<const char*>(v.samples.data()),
            static_cast<std::streamsize>(v.samples.size() * sizeof(double)));
  if (!out) throw Error(ErrorCode::io, "write failed: " + path);
}

Potential read_potential(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  nlohmann::json hdr;
  try {
    hdr = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, "bad potential header: " + std::string(e.what()));
  }
  Grid g = make_grid(hdr.at("R").get<double>(), hdr.at("N").get<int>());
  std::vector<double> s(g.size());
  in.read(reinterpret_cast<char*>(s.data()),
          static_cast<std::streamsize>(s.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(s.size() * sizeof(double)))
    throw Error(ErrorCode::io, "truncated potential payload: " + path);
  Potential v;
  v.grid = g;
  v.family = family_from_name(hdr.at("family").get<std::string>());
  const auto& p = hdr.at("params");
  v.params.A = p.at("A").get<double>();
  v.params.sigma = p.at("sigma").get<double>();
  v.params.alpha = p.at("alpha").get<double>();
  v.params.center = {p.at("center")[0].get<double>(), p.at("center")[1].get<double>()};
  v.samples = std::move(s);
  v.decay = decay_certificate(g, v.samples, hdr.at("eps").get<double>(),
                              v.family == Family::custom ? 0.0
                                                         : certificate_alpha(v.family, v.params));
  return v;
}

SpectralPoint make_spectral_point(cplx lambda, double tol_T) {
  if (!(std::abs(lambda) > 0.0) || !std::isfinite(std::abs(lambda)))
    throw Error(ErrorCode::invalid_argument, "lambda must be nonzero and finite");
  SpectralPoint sp;
  sp.lambda = lambda;
  double s = std::abs(lambda);
  sp.onT = std::abs(s - 1.0) < tol_T;
  sp.region = sp.onT ? Region::circle : (s < 1.0 ? Region::inner : Region::outer);
  return sp;
}

LambdaGrid make_lambda_grid(const LambdaGridSpec& spec) {
  if (!(spec.r_min > 0.0) || !(spec.r_max >= spec.r_min) || spec.annuli < 0 ||
      spec.phases < 0 || spec.t_points < 0)
    throw Error(ErrorCode::invalid_argument, "bad lambda-grid descriptor");
  LambdaGrid lg;
  lg.spec = spec;
  std::vector<cplx> pts;
  for (int a = 0; a < spec.annuli; ++a) {
    double t = spec.annuli > 1 ? double(a) / (spec.annuli - 1) : 0.0;
    double r = spec.r_min * std::pow(spec.r_max / spec.r_min, t);
    for (int k = 0; k < spec.phases; ++k)
      pts.push_back(std::polar(r, 2.0 * pi * k / spec.phases));
  }
  if (spec.mirror) {
    for (int a = 0; a < spec.annuli; ++a) {
      double t = spec.annuli > 1 ? double(a) / (spec.annuli - 1) : 0.0;
      double r = 1.0 / (spec.r_min * std::pow(spec.r_max / spec.r_min, t));
      for (int k = 0; k < spec.phases; ++k)
        pts.push_back(std::polar(r, 2.0 * pi * k / spec.phases));
    }
  }
  for (int k = 0; k < spec.t_points; ++k) {
    double phi = 2.0 * pi * k / spec.t_points;
    pts.emplace_back(std::cos(phi), std::sin(phi));
  }
  for (cplx e : spec.extra) pts.push_back(e);
  for (cplx l : pts) {
    bool dup = std::any_of(lg.points.begin(), lg.points.end(), [&](const SpectralPoint& q) {
      return std::abs(q.lambda - l) <= 1e-14 * std::abs(l);
    });
    if (!dup) lg.points.push_back(make_spectral_point(l));
  }
  return lg;
}

}  // namespace nvscat
