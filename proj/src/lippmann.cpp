#include "nvscat/lippmann.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nvscat/error.hpp"
#include "nvscat/simd/kernels.hpp"

namespace nvscat {

Convolver::Convolver(const GreensTable& table) : grid_(table.grid) {
  const int N = grid_.N, W = 2 * N;
  fft_ = std::make_unique<Fft2>(W, W);
  cplx* b = fft_->data();
  for (int n1 = -N; n1 < N; ++n1)
    for (int n2 = -N; n2 < N; ++n2)
      b[static_cast<std::size_t>((n1 + W) % W) * W + (n2 + W) % W] = table.at(n1, n2);
  fft_->forward();
  ghat_.assign(b, b + fft_->size());
}

void Convolver::apply(const cplx* f, cplx* out) {
  const int N = grid_.N, W = 2 * N;
  cplx* b = fft_->data();
  std::fill(b, b + fft_->size(), cplx(0));
  for (int j = 0; j < N; ++j)
    std::copy(f + static_cast<std::size_t>(j) * N, f + static_cast<std::size_t>(j + 1) * N,
              b + static_cast<std::size_t>(j) * W);
  fft_->forward();
  simd::kernels().cmul(b, ghat_.data(), fft_->size());
  fft_->backward();
  const double s = grid_.h * grid_.h / (double(W) * W);
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k)
      out[static_cast<std::size_t>(j) * N + k] = b[static_cast<std::size_t>(j) * W + k] * s;
}

namespace {

// y = x - K(v x)
struct Operator {
  Convolver& conv;
  const std::vector<double>& v;
  std::vector<cplx> tmp;

  void apply(const cplx* x, cplx* y) {
    const auto& kr = simd::kernels();
    kr.rscale(tmp.data(), x, v.data(), v.size());
    conv.apply(tmp.data(), y);
    for (std::size_t i = 0; i < v.size(); ++i) y[i] = x[i] - y[i];
  }
};

double norm2(const std::vector<cplx>& x) { return std::sqrt(simd::kernels().nrm2sq(x.data(), x.size())); }

// Restarted GMRES with modified Gram-Schmidt; returns false on stagnation.
bool gmres(Operator& op, const std::vector<cplx>& rhs, std::vector<cplx>& x,
           const SolverOptions& o, int& iters) {
  const auto& kr = simd::kernels();
  const std::size_t n = rhs.size();
  const int m = std::max(2, o.restart);
  const double bnorm = norm2(rhs);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), cplx(0));
    return true;
  }
  std::vector<std::vector<cplx>> V(m + 1, std::vector<cplx>(n));
  std::vector<cplx> H(static_cast<std::size_t>(m + 1) * m), cs(m), sn(m), gvec(m + 1), w(n);
  auto Hat = [&](int i, int j) -> cplx& { return H[static_cast<std::size_t>(j) * (m + 1) + i]; };
  iters = 0;
  int stagnant = 0;
  while (iters < o.max_iter) {
    op.apply(x.data(), w.data());
    for (std::size_t i = 0; i < n; ++i) V[0][i] = rhs[i] - w[i];
    double beta = norm2(V[0]);
    if (beta / bnorm <= o.tol) return true;
    double cycle_start = beta;
    for (auto& e : V[0]) e /= beta;
    std::fill(gvec.begin(), gvec.end(), cplx(0));
    gvec[0] = beta;
    int k = 0;
    for (; k < m && iters < o.max_iter; ++k, ++iters) {
      op.apply(V[k].data(), w.data());
      for (int i = 0; i <= k; ++i) {
        cplx hij = kr.cdotc(V[i].data(), w.data(), n);
        Hat(i, k) = hij;
        kr.caxpy(-hij, V[i].data(), w.data(), n);
      }
      double hn = norm2(w);
      Hat(k + 1, k) = hn;
      if (hn > 0)
        for (std::size_t i = 0; i < n; ++i) V[k + 1][i] = w[i] / hn;
      for (int i = 0; i < k; ++i) {
        cplx a = Hat(i, k), b = Hat(i + 1, k);
        Hat(i, k) = std::conj(cs[i]) * a + std::conj(sn[i]) * b;
        Hat(i + 1, k) = -sn[i] * a + cs[i] * b;
      }
      cplx a = Hat(k, k), b = Hat(k + 1, k);
      double r = std::sqrt(std::norm(a) + std::norm(b));
      if (r == 0.0) {
        cs[k] = 1.0;
        sn[k] = 0.0;
      } else {
        cs[k] = a / r;
        sn[k] = b / r;
      }
      Hat(k, k) = r;
      Hat(k + 1, k) = 0.0;
      gvec[k + 1] = -sn[k] * gvec[k];
      gvec[k] = std::conj(cs[k]) * gvec[k];
      if (std::abs(gvec[k + 1]) / bnorm <= o.tol || hn == 0.0) {
        ++k;
        ++iters;
        break;
      }
    }
    std::vector<cplx> y(k);
    for (int i = k - 1; i >= 0; --i) {
      cplx s = gvec[i];
      for (int j = i + 1; j < k; ++j) s -= Hat(i, j) * y[j];
      y[i] = s / Hat(i, i);
    }
    for (int i = 0; i < k; ++i) kr.caxpy(y[i], V[i].data(), x.data(), n);
    double est = std::abs(gvec[k]);
    if (est / bnorm <= o.tol) {
      op.apply(x.data(), w.data());
      for (std::size_t i = 0; i < n; ++i) w[i] = rhs[i] - w[i];
      if (norm2(w) / bnorm <= 10 * o.tol) return true;
    }
    if (est > 0.5 * cycle_start) {
      if (++stagnant >= 2) return false;
    } else {
      stagnant = 0;
    }
  }
  return false;
}

double weight_pow(double r, double eps) { return std::pow(1.0 + r, 0.5 * (2.0 + eps)); }

void ring_diagnostics(MuField& m) {
  const Grid& g = m.grid;
  double sb = 0, sm = 0;
  int nb = 0, nm = 0;
  for (int j = 0; j < g.N; ++j)
    for (int k = 0; k < g.N; ++k) {
      double d = std::abs(m.mu[g.index(j, k)] - 1.0);
      if (j == 0 || k == 0 || j == g.N - 1 || k == g.N - 1) {
        sb += d;
        ++nb;
      }
      if (std::abs(std::abs(g.node(j, k)) - 0.5 * g.R) < 0.5 * g.h) {
        sm += d;
        ++nm;
      }
    }
  m.boundary_dev = nb ? sb / nb : 0.0;
  m.mid_dev = nm ? sm / nm : 0.0;
}

double explicit_residual(Convolver& conv, const Potential& v, const std::vector<cplx>& mu) {
  Operator op{conv, v.samples, std::vector<cplx>(mu.size())};
  std::vector<cplx> y(mu.size());
  op.apply(mu.data(), y.data());
  double s = 0;
  for (auto& e : y) s += std::norm(e - 1.0);
  return std::sqrt(s / static_cast<double>(mu.size()));
}

}  // namespace

MuField solve_mu(const Potential& v, const GreensTable& table, const SolverOptions& opts) {
  if (!(v.grid == table.grid))
    throw Error(ErrorCode::invalid_argument, "table and potential grids differ");
  MuField m;
  m.lambda = table.lambda;
  m.grid = v.grid;
  const std::size_t n = v.grid.size();
  m.mu.assign(n, cplx(1.0));
  if (v.is_zero()) {
    m.method = "trivial";
    return m;
  }
  Convolver conv(table);
  Operator op{conv, v.samples, std::vector<cplx>(n)};
  std::vector<cplx> rhs(n, cplx(1.0));
  bool ok = gmres(op, rhs, m.mu, opts, m.iterations);
  m.method = "gmres";
  m.residual = explicit_residual(conv, v, m.mu);
  if (!ok || m.residual > 10 * opts.tol) {
    if (!opts.dense_fallback || v.grid.N > kDenseCap)
      throw Error(ErrorCode::nonconvergent,
                  "non-convergent: lambda likely in the exceptional set");
    KernelOptions ko;
    ko.support_threshold = opts.support_threshold;
    KernelMatrix k = build_kernel(v, table, ko);
    m.mu = solve_dense(k, v, table);
    m.method = "dense";
    m.residual = explicit_residual(conv, v, m.mu);
    if (!std::isfinite(m.residual) || m.residual > 1e3 * opts.tol)
      throw Error(ErrorCode::nonconvergent,
                  "non-convergent: lambda likely in the exceptional set");
  }
  ring_diagnostics(m);
  return m;
}

cplx psi_from_mu(const MuField& m, int j, int k) {
  cplx z = m.grid.node(j, k);
  return std::exp(-0.5 * (m.lambda * std::conj(z) + z / m.lambda)) * m.at(j, k);
}

KernelMatrix build_kernel(const Potential& v, const GreensTable& table, const KernelOptions& o) {
  if (!(v.grid == table.grid))
    throw Error(ErrorCode::invalid_argument, "table and potential grids differ");
  if (v.grid.N > o.dense_cap)
    throw Error(ErrorCode::memory_cap, "dense kernel disabled above N=" + std::to_string(o.dense_cap) +
                                           ": determinant unavailable at this resolution");
  if (!(o.eps > 0.0)) throw Error(ErrorCode::invalid_argument, "eps must be positive");
  const Grid& g = v.grid;
  KernelMatrix K;
  K.lambda = table.lambda;
  K.grid = g;
  K.eps = o.eps;
  double vmax = 0;
  for (double x : v.samples) vmax = std::max(vmax, std::abs(x));
  if (vmax == 0.0) return K;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (std::abs(v.samples[i]) > o.support_threshold * vmax) K.support.push_back(i);
  const std::size_t n = K.support.size();
  if (n > 20000) throw Error(ErrorCode::memory_cap, "support too large for a dense kernel");
  K.a.resize(n * n);
  std::vector<double> w(n), winv(n);
  std::vector<int> jj(n), kk(n);
  for (std::size_t i = 0; i < n; ++i) {
    jj[i] = static_cast<int>(K.support[i] / g.N);
    kk[i] = static_cast<int>(K.support[i] % g.N);
    w[i] = weight_pow(std::abs(g.node(jj[i], kk[i])), o.eps);
    winv[i] = 1.0 / w[i];
  }
  const double h2 = g.h * g.h;
  double hs = 0;
  for (std::size_t c = 0; c < n; ++c) {
    double colw = v.samples[K.support[c]] * w[c] * h2;
    cplx* col = K.a.data() + c * n;
    for (std::size_t r = 0; r < n; ++r) {
      col[r] = winv[r] * table.at(jj[r] - jj[c], kk[r] - kk[c]) * colw;
      hs += std::norm(col[r]);
    }
  }
  K.hs_norm = std::sqrt(hs);
  return K;
}

std::vector<cplx> solve_dense(const KernelMatrix& k, const Potential& v, const GreensTable& table) {
  const Grid& g = v.grid;
  const std::size_t n = k.n();
  std::vector<cplx> full(g.size(), cplx(0));
  if (n > 0) {
    std::vector<cplx> B(k.a.size());
    for (std::size_t i = 0; i < B.size(); ++i) B[i] = -k.a[i];
    for (std::size_t i = 0; i < n; ++i) B[i * n + i] += 1.0;
    std::vector<cplx> rhs(n);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = weight_pow(std::abs(g.node(int(k.support[i] / g.N), int(k.support[i] % g.N))), k.eps);
      rhs[i] = 1.0 / w[i];
    }
    std::vector<lapack_int> piv(n);
    auto* Bp = reinterpret_cast<lapack_complex_double*>(B.data());
    auto* rp = reinterpret_cast<lapack_complex_double*>(rhs.data());
    lapack_int info = LAPACKE_zgesv(LAPACK_COL_MAJOR, static_cast<lapack_int>(n), 1, Bp,
                                    static_cast<lapack_int>(n), piv.data(), rp,
                                    static_cast<lapack_int>(n));
    if (info != 0)
      throw Error(ErrorCode::exceptional, "dense solve singular: lambda in the exceptional set");
    for (std::size_t i = 0; i < n; ++i) full[k.support[i]] = v.samples[k.support[i]] * rhs[i] * w[i];
  }
  Convolver conv(table);
  std::vector<cplx> mu(g.size());
  conv.apply(full.data(), mu.data());
  for (auto& e : mu) e += 1.0;
  return mu;
}

const char* det_method_name(DetMethod m) { return m == DetMethod::lu ? "lu-logdet" : "eigen"; }

DeterminantSample modified_fredholm_det(const KernelMatrix& k, DetMethod method) {
  DeterminantSample d;
  d.lambda = k.lambda;
  d.method = method;
  d.count = k.n();
  d.hs_norm = k.hs_norm;
  const std::size_t n = k.n();
  if (n == 0) return d;
  const lapack_int ln = static_cast<lapack_int>(n);
  if (method == DetMethod::lu) {
    std::vector<cplx> B(k.a.size());
    cplx tr(0);
    for (std::size_t i = 0; i < B.size(); ++i) B[i] = -k.a[i];
    for (std::size_t i = 0; i < n; ++i) {
      B[i * n + i] += 1.0;
      tr += k.a[i * n + i];
    }
    std::vector<lapack_int> piv(n);
    lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, ln, ln,
                                     reinterpret_cast<lapack_complex_double*>(B.data()), ln, piv.data());
    if (info < 0) throw Error(ErrorCode::invalid_argument, "zgetrf argument error");
    if (info > 0) {
      d.delta = 0.0;
      d.exceptional = true;
      return d;
    }
    cplx logdet(0);
    int swaps = 0;
    for (std::size_t i = 0; i < n; ++i) {
      logdet += std::log(B[i * n + i]);
      if (piv[i] != static_cast<lapack_int>(i + 1)) ++swaps;
    }
    d.delta = std::exp(logdet + tr) * ((swaps & 1) ? -1.0 : 1.0);
    d.exceptional = std::abs(d.delta) < 1e-12;
  } else {
    std::vector<cplx> A(k.a);
    std::vector<cplx> ev(n);
    lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', ln,
                                    reinterpret_cast<lapack_complex_double*>(A.data()), ln,
                                    reinterpret_cast<lapack_complex_double*>(ev.data()), nullptr, 1,
                                    nullptr, 1);
    if (info != 0) throw Error(ErrorCode::nonconvergent, "zgeev failed");
    cplx prod(1.0), sum(0.0);
    for (cplx mu : ev) {
      if (std::abs(1.0 - mu) < 1e-12) d.exceptional = true;
      prod *= (1.0 - mu) * std::exp(mu);
      sum += std::log(1.0 - mu) + mu;
    }
    d.delta_product = prod;
    d.delta_expsum = std::exp(sum);
    d.delta = d.exceptional ? cplx(0) : d.delta_expsum;
  }
  d.im_residue = std::abs(d.delta.imag());
  return d;
}

ExceptionalReport detect_exceptional(const std::vector<DeterminantSample>& samples, double rel_tol) {
  ExceptionalReport r;
  if (samples.empty()) return r;
  r.min_abs_delta = std::abs(samples[0].delta);
  for (const auto& s : samples) {
    r.max_abs_delta = std::max(r.max_abs_delta, std::abs(s.delta));
    r.min_abs_delta = std::min(r.min_abs_delta, std::abs(s.delta));
  }
  r.threshold = rel_tol * r.max_abs_delta;
  cplx tsum(0);
  int tn = 0;
  for (const auto& s : samples) {
    if (std::abs(s.delta) < r.threshold || s.exceptional) r.flagged.push_back(s.lambda);
    if (std::abs(std::abs(s.lambda) - 1.0) < kDefaultTolT) {
      tsum += s.delta;
      ++tn;
    }
  }
  if (tn) {
    r.has_T = true;
    r.delta_on_T = tsum / double(tn);
  }
  return r;
}

ExceptionalReport detect_exceptional(const Potential& v, const LambdaGrid& lg,
                                     const GreensOptions& gopts, const KernelOptions& kopts,
                                     double rel_tol) {
  std::vector<DeterminantSample> out;
  for (const auto& p : lg.points) {
    if (v.is_zero()) {
      DeterminantSample d;
      d.lambda = p.lambda;
      out.push_back(d);
      continue;
    }
    GreensTable t = cached_greens_table(v.grid, p.lambda, gopts);
    out.push_back(modified_fredholm_det(build_kernel(v, t, kopts)));
  }
  return detect_exceptional(out, rel_tol);
}

}  // namespace nvscat
