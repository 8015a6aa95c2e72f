#include "nvscat/greens.hpp"

#include <cblas.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "nvscat/error.hpp"
#include "nvscat/fft.hpp"

namespace nvscat {

using std::numbers::pi;

cplx symbol_denominator(cplx zeta, cplx lambda) {
  cplx zb = std::conj(zeta);
  return zeta * zb + cplx(0, 1) * (lambda * zb + zeta / lambda);
}

std::vector<cplx> singular_points(cplx lambda) {
  if (lambda == cplx(0)) throw Error(ErrorCode::invalid_argument, "lambda must be nonzero");
  double s = std::abs(lambda);
  if (s == 1.0) return {cplx(0)};
  cplx ph = lambda / s;
  return {cplx(0), ph * cplx(0, 1.0 / s - s)};
}

const char* rule_id(QuadratureRule r) {
  return r == QuadratureRule::subtraction ? "polar-subtraction-1" : "contour-shift-1";
}

namespace {

// exp(-(q/q0)^8), analytic in q.
cplx window(cplx q, double q0) {
  cplx t = q / q0;
  t *= t;
  t *= t;
  t *= t;
  return std::exp(-t);
}

double window(double q, double q0) {
  double t = q / q0;
  t *= t;
  t *= t;
  t *= t;
  return std::exp(-t);
}

// C4 cutoff: 1 on [0,0], 0 from 1 on.
double cutoff(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  double t5 = t * t * t * t * t;
  return 1.0 - t5 * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + t * 70.0))));
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    x[i] = -z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// out(n1, n2) += sum_j c_j exp(i (k1_j n1 + k2_j n2) h), n in [-N, N).
void add_plane_waves(int N, double h, const std::vector<cplx>& k1,
                     const std::vector<cplx>& k2, const std::vector<cplx>& c,
                     std::vector<cplx>& out) {
  const int W = 2 * N;
  const int J = static_cast<int>(c.size());
  if (J == 0) return;
  std::vector<cplx> A(static_cast<std::size_t>(W) * J), B(static_cast<std::size_t>(J) * W);
  const cplx I(0, 1);
  for (int a = 0; a < W; ++a) {
    double n = (a - N) * h;
    for (int j = 0; j < J; ++j) A[static_cast<std::size_t>(a) * J + j] = c[j] * std::exp(I * k1[j] * n);
  }
  for (int j = 0; j < J; ++j)
    for (int b = 0; b < W; ++b) B[static_cast<std::size_t>(j) * W + b] = std::exp(I * k2[j] * ((b - N) * h));
  const cplx one(1.0);
  cblas_zgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, W, W, J, &one, A.data(), J,
              B.data(), W, &one, out.data(), W);
}

struct Box {
  int M;
  double K, delta, q0;
};

Box make_box(const Grid& g, int ext, int over, double frac) {
  Box b;
  b.K = ext * pi / g.h;
  b.M = over * g.N * ext;
  b.delta = 2.0 * b.K / b.M;
  b.q0 = frac * b.K * b.K;
  return b;
}

// Reads delta^2 e^{-iK(d1+d2)} sum_m F_m e^{i xi_m . d} back onto the table.
void gather_dft(const Grid& g, int ext, const Box& box, Fft2& F, std::vector<cplx>& out) {
  F.backward();
  const int N = g.N, W = 2 * N, M = box.M;
  const double d2 = box.delta * box.delta;
  for (int a = 0; a < W; ++a) {
    int n1 = a - N;
    int r = ((n1 * ext) % M + M) % M;
    for (int b = 0; b < W; ++b) {
      int n2 = b - N;
      int c = ((n2 * ext) % M + M) % M;
      double sgn = ((ext * (n1 + n2)) & 1) ? -1.0 : 1.0;
      out[static_cast<std::size_t>(a) * W + b] = F.data()[static_cast<std::size_t>(r) * M + c] * (sgn * d2);
    }
  }
}

// The continued window stays decaying on the shifted contour only while
// tau is small against the band edge K.
double shift_margin(const Grid& g, cplx lambda, const GreensOptions& o) {
  double s = std::abs(lambda);
  double tau_lo = (1.0 - s) * (1.0 - s) / (2.0 * s);
  double tau_max = o.ext * pi / g.h / o.shift_kappa;
  return std::max(0.0, std::min(o.tau_margin, tau_max - tau_lo));
}

struct LocalModel {
  cplx xi;      // singular point
  cplx alpha, beta;
  double rc;
  double weight;  // W(|xi|^2)
};

std::vector<cplx> table_subtraction(const Grid& g, cplx lambda, const GreensOptions& o,
                                    int over, Regularization& reg) {
  const int ext = o.ext;
  Box box = make_box(g, ext, over, o.window_frac);
  const int M = box.M;
  const cplx I(0, 1);
  auto pts = singular_points(lambda);
  double sep = pts.size() > 1 ? std::abs(pts[1]) : 1.0;

  std::vector<LocalModel> models;
  for (cplx p : pts) {
    double wk = window(std::norm(p), box.q0);
    if (wk < 1e-18) continue;
    double room = box.K - std::max(std::abs(p.real()), std::abs(p.imag())) - box.delta;
    if (room <= box.delta)
      throw Error(ErrorCode::unresolved_singularity,
                  "singular point within one cell of the xi-grid boundary");
    LocalModel m;
    m.xi = p;
    m.alpha = std::conj(p) + I / lambda;
    m.beta = p + I * lambda;
    m.rc = std::min({0.45 * sep, 1.0, room});
    m.weight = wk;
    models.push_back(m);
  }

  Fft2 F(M, M);
  const int J = o.terms;
  for (int m1 = 0; m1 < M; ++m1) {
    double x1 = -box.K + m1 * box.delta;
    for (int m2 = 0; m2 < M; ++m2) {
      double x2 = -box.K + m2 * box.delta;
      cplx z(x1, x2);
      double q = x1 * x1 + x2 * x2;
      double wv = window(q, box.q0);
      cplx val(0);
      if (wv > 1e-300) {
        bool at_root = false;
        cplx sub(0);
        for (const auto& lm : models) {
          cplx eta = z - lm.xi;
          double rho = std::abs(eta);
          if (rho >= lm.rc) continue;
          if (rho == 0.0) {
            at_root = true;
            continue;
          }
          cplx L = lm.alpha * eta + lm.beta * std::conj(eta);
          cplx x = -rho * rho / L;
          cplx s(1.0);
          for (int k = J - 1; k >= 1; --k) s = 1.0 + x * s;
          sub += cutoff(rho / lm.rc) * s / L;
        }
        cplx P = symbol_denominator(z, lambda);
        val = at_root ? -sub : 1.0 / P - sub;
        val *= wv;
      }
      F.data()[static_cast<std::size_t>(m1) * M + m2] = val;
    }
  }
  std::vector<cplx> out(static_cast<std::size_t>(4) * g.N * g.N);
  gather_dft(g, ext, box, F, out);

  std::vector<double> xr, wr;
  gauss_legendre(o.n_rho, xr, wr);
  for (const auto& lm : models) {
    std::vector<cplx> k1, k2, c;
    k1.reserve(static_cast<std::size_t>(o.n_theta) * o.n_rho);
    k2.reserve(k1.capacity());
    c.reserve(k1.capacity());
    for (int it = 0; it < o.n_theta; ++it) {
      double th = 2.0 * pi * it / o.n_theta;
      cplx e = std::polar(1.0, th);
      cplx ell = lm.alpha * e + lm.beta * std::conj(e);
      for (int j = 0; j < o.n_rho; ++j) {
        double rho = 0.5 * lm.rc * (xr[j] + 1.0);
        double w = 0.5 * lm.rc * wr[j] * (2.0 * pi / o.n_theta);
        cplx node = lm.xi + rho * e;
        // sum_m (-1)^m rho^m / ell^{m+1}
        cplx x = -rho / ell;
        cplx s(1.0);
        for (int k = J - 1; k >= 1; --k) s = 1.0 + x * s;
        s /= ell;
        k1.push_back(node.real());
        k2.push_back(node.imag());
        c.push_back(w * window(std::norm(node), box.q0) * cutoff(rho / lm.rc) * s);
      }
    }
    add_plane_waves(g.N, g.h, k1, k2, c, out);
  }
  const double scale = -1.0 / (4.0 * pi * pi);
  for (auto& x : out) x *= scale;
  reg.points = pts;
  reg.rule = QuadratureRule::subtraction;
  return out;
}

std::vector<cplx> table_shift(const Grid& g, cplx lambda, const GreensOptions& o, int over,
                              Regularization& reg) {
  const int ext = o.ext;
  Box box = make_box(g, ext, over, o.window_frac);
  const int M = box.M, N = g.N, W = 2 * N;
  const cplx I(0, 1);
  double s = std::abs(lambda);
  cplx u = lambda / s;
  double be = s + 1.0 / s, ga = s - 1.0 / s;
  double tau_lo = (1.0 - s) * (1.0 - s) / (2.0 * s);
  double tau_hi = (be + 2.0) / 2.0;
  double tau = tau_lo + shift_margin(g, lambda, o);
  if (tau >= tau_hi) throw Error(ErrorCode::invalid_argument, "contour shift outside the admissible strip");

  Fft2 F(M, M);
  for (int m1 = 0; m1 < M; ++m1) {
    cplx y1 = -box.K + m1 * box.delta - I * tau * u.real();
    for (int m2 = 0; m2 < M; ++m2) {
      cplx y2 = -box.K + m2 * box.delta - I * tau * u.imag();
      cplx zeta = y1 + I * y2, zt = y1 - I * y2;
      cplx q = zeta * zt;
      cplx P = q + I * (lambda * zt + zeta / lambda);
      F.data()[static_cast<std::size_t>(m1) * M + m2] = window(q, box.q0) / P;
    }
  }
  std::vector<cplx> out(static_cast<std::size_t>(W) * W);
  gather_dft(g, ext, box, F, out);
  for (int a = 0; a < W; ++a) {
    double d1 = (a - N) * g.h;
    for (int b = 0; b < W; ++b) {
      double d2 = (b - N) * g.h;
      out[static_cast<std::size_t>(a) * W + b] *= std::exp(tau * (u.real() * d1 + u.imag() * d2));
    }
  }

  double lo = std::min(0.0, -ga), hi = std::max(0.0, -ga);
  if (hi > lo) {
    std::vector<double> xr, wr;
    gauss_legendre(o.n_residue, xr, wr);
    std::vector<cplx> k1, k2, c;
    for (int j = 0; j < o.n_residue; ++j) {
      double x2 = lo + 0.5 * (xr[j] + 1.0) * (hi - lo);
      double w = 0.5 * wr[j] * (hi - lo);
      double cc = x2 * x2 + ga * x2;
      double sq = std::sqrt(be * be + 4.0 * cc);
      cplx t = I * (0.5 * (sq - be));
      cplx res = window(t * t + x2 * x2, box.q0) / (I * sq);
      k1.push_back(t * u.real() - x2 * u.imag());
      k2.push_back(t * u.imag() + x2 * u.real());
      c.push_back(-2.0 * pi * I * w * res);
    }
    add_plane_waves(N, g.h, k1, k2, c, out);
  }
  const double scale = -1.0 / (4.0 * pi * pi);
  for (auto& x : out) x *= scale;
  reg.points = singular_points(lambda);
  reg.rule = QuadratureRule::contour_shift;
  return out;
}

QuadratureRule choose_rule(const Grid& g, cplx lambda, const GreensOptions& o) {
  if (o.force_rule) return o.rule;
  double s = std::abs(lambda);
  if (s < o.shift_band || s > 1.0 / o.shift_band) return QuadratureRule::subtraction;
  // Roots too close for the local expansion: shift regardless of margin.
  if (std::abs(1.0 / s - s) < 0.5) return QuadratureRule::contour_shift;
  return shift_margin(g, lambda, o) >= 0.5 * o.tau_margin ? QuadratureRule::contour_shift
                                                          : QuadratureRule::subtraction;
}

std::vector<cplx> run_rule(const Grid& g, cplx lambda, const GreensOptions& o, QuadratureRule r,
                           bool coarse, Regularization& reg) {
  if (r == QuadratureRule::subtraction) {
    int over = coarse ? std::max(4, o.oversample / 2) : o.oversample;
    return table_subtraction(g, lambda, o, over, reg);
  }
  int over = coarse ? std::max(2, o.oversample_shift / 2) : o.oversample_shift;
  return table_shift(g, lambda, o, over, reg);
}

}  // namespace

GreensTable build_greens_table(const Grid& grid, cplx lambda, const GreensOptions& opts) {
  if (lambda == cplx(0) || !std::isfinite(std::abs(lambda)))
    throw Error(ErrorCode::invalid_argument, "lambda must be nonzero and finite");
  if (opts.ext < 1 || opts.terms < 2 || opts.oversample < 2 || opts.oversample_shift < 2)
    throw Error(ErrorCode::invalid_argument, "bad Green's function options");
  GreensTable t;
  t.lambda = lambda;
  t.grid = grid;
  QuadratureRule r = choose_rule(grid, lambda, opts);
  t.samples = run_rule(grid, lambda, opts, r, false, t.reg);
  t.reg.ext = opts.ext;
  t.reg.near_T = std::abs(std::abs(lambda) - 1.0) < 1e-3;
  if (opts.estimate_error) {
    Regularization tmp;
    auto coarse = run_rule(grid, lambda, opts, r, true, tmp);
    double dmax = 0.0, gmax = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      dmax = std::max(dmax, std::abs(coarse[i] - t.samples[i]));
      gmax = std::max(gmax, std::abs(t.samples[i]));
    }
    t.reg.error_estimate = gmax > 0 ? dmax / gmax : 0.0;
    if (t.reg.error_estimate > opts.error_threshold)
      throw Error(ErrorCode::quadrature, "Green's table error estimate " +
                                             std::to_string(t.reg.error_estimate) +
                                             " above threshold");
  }
  return t;
}

GreensTable build_pointwise_table(const Grid& grid, cplx lambda, double radius, int ext,
                                  const GreensOptions& opts) {
  int half = static_cast<int>(std::ceil(radius / grid.h));
  int N = std::max(16, 2 * half);
  N += N % 2;
  Grid sub{0.5 * N * grid.h, N, grid.h};
  GreensOptions o = opts;
  o.ext = ext;
  return build_greens_table(sub, lambda, o);
}

bool root_in_band(const Grid& grid, cplx lambda, const GreensOptions& opts) {
  const double K = opts.ext * std::numbers::pi / grid.h;
  return std::abs(1.0 / std::abs(lambda) - std::abs(lambda)) <= std::sqrt(opts.window_frac) * K;
}

cplx greens_G(const GreensTable& t, int n1, int n2) {
  cplx z(n1 * t.grid.h, n2 * t.grid.h);
  cplx l = t.lambda;
  return std::exp(-0.5 * (l * std::conj(z) + z / l)) * t.at(n1, n2);
}

cplx reference_G_on_T(double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "reference G needs |z| > 0");
  return -std::cyl_bessel_k(0.0, r) / (2.0 * pi);
}

std::string greens_cache_key(const Grid& grid, cplx lambda, const GreensOptions& o) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* p, std::size_t n) {
    auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  double vals[] = {lambda.real(), lambda.imag(), grid.R, o.window_frac, o.shift_band, o.tau_margin};
  int ints[] = {grid.N, o.oversample, o.oversample_shift, o.terms, o.n_theta, o.n_rho,
                o.n_residue, o.ext, o.force_rule ? 1 + int(o.rule) : 0};
  mix(vals, sizeof vals);
  mix(ints, sizeof ints);
  std::string rid = rule_id(choose_rule(grid, lambda, o));
  mix(rid.data(), rid.size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_greens_table(const GreensTable& t, const std::string& path) {
  nlohmann::json hdr;
  hdr["lambda"] = {t.lambda.real(), t.lambda.imag()};
  hdr["R"] = t.grid.R;
  hdr["N"] = t.grid.N;
  hdr["rule"] = rule_id(t.reg.rule);
  hdr["error_estimate"] = t.reg.error_estimate;
  hdr["ext"] = t.reg.ext;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path);
  out << hdr.dump() << '\n';
  out.write(reinterpret_cast<const char*>(t.samples.data()),
            static_cast<std::streamsize>(t.samples.size() * sizeof(cplx)));
  if (!out) throw Error(ErrorCode::io, "write failed: " + path);
}

GreensTable read_greens_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  nlohmann::json hdr;
  try {
    hdr = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io, std::string("bad table header: ") + e.what());
  }
  GreensTable t;
  t.lambda = {hdr.at("lambda")[0].get<double>(), hdr.at("lambda")[1].get<double>()};
  int N = hdr.at("N").get<int>();
  double R = hdr.at("R").get<double>();
  t.grid = Grid{R, N, 2.0 * R / N};
  std::string rid = hdr.at("rule").get<std::string>();
  t.reg.rule = rid == rule_id(QuadratureRule::contour_shift) ? QuadratureRule::contour_shift
                                                              : QuadratureRule::subtraction;
  t.reg.error_estimate = hdr.at("error_estimate").get<double>();
  t.reg.ext = hdr.value("ext", 1);
  t.reg.points = singular_points(t.lambda);
  t.reg.near_T = std::abs(std::abs(t.lambda) - 1.0) < 1e-3;
  t.samples.resize(static_cast<std::size_t>(4) * N * N);
  in.read(reinterpret_cast<char*>(t.samples.data()),
          static_cast<std::streamsize>(t.samples.size() * sizeof(cplx)));
  if (in.gcount() != static_cast<std::streamsize>(t.samples.size() * sizeof(cplx)))
    throw Error(ErrorCode::io, "truncated table payload: " + path);
  return t;
}

GreensTable cached_greens_table(const Grid& grid, cplx lambda, const GreensOptions& opts) {
  const char* dir = std::getenv("NVSCAT_CACHE_DIR");
  if (!dir || !*dir) return build_greens_table(grid, lambda, opts);
  namespace fs = std::filesystem;
  fs::path p = fs::path(dir) / ("g_" + greens_cache_key(grid, lambda, opts) + ".bin");
  if (fs::exists(p)) {
    try {
      GreensTable t = read_greens_table(p.string());
      if (t.grid == grid && t.lambda == lambda) return t;
    } catch (const Error&) {
    }
  }
  GreensTable t = build_greens_table(grid, lambda, opts);
  std::error_code ec;
  fs::create_directories(dir, ec);
  fs::path tmp = p;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  try {
    write_greens_table(t, tmp.string());
    fs::rename(tmp, p, ec);
  } catch (const Error&) {
  }
  return t;
}

}  // namespace nvscat
