#include "nvscat/simd/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace nvscat::simd {

namespace {

// Two interleaved complex values per register: [re0 im0 re1 im1].
inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }

inline __m256d mul2(__m256d a, __m256d b) {
  __m256d ar = _mm256_movedup_pd(a);
  __m256d ai = _mm256_permute_pd(a, 0xF);
  __m256d bs = _mm256_permute_pd(b, 0x5);
  return _mm256_fmaddsub_pd(ar, b, _mm256_mul_pd(ai, bs));
}

// [w0 w0 w1 w1]
inline __m256d widen(const double* w) {
  __m128d v = _mm_loadu_pd(w);
  return _mm256_permute4x64_pd(_mm256_castpd128_pd256(v), 0x50);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v), hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

// (lane0 + lane2, lane1 + lane3) as a complex
inline cplx csum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v), hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  return {_mm_cvtsd_f64(s), _mm_cvtsd_f64(_mm_unpackhi_pd(s, s))};
}

void cmul(cplx* a, const cplx* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store2(a + i, mul2(load2(a + i), load2(b + i)));
  for (; i < n; ++i) {
    double ar = a[i].real(), ai = a[i].imag(), br = b[i].real(), bi = b[i].imag();
    a[i] = {ar * br - ai * bi, ar * bi + ai * br};
  }
}

void caxpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  __m256d al = _mm256_setr_pd(alpha.real(), alpha.imag(), alpha.real(), alpha.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store2(y + i, _mm256_add_pd(load2(y + i), mul2(al, load2(x + i))));
  double c = alpha.real(), d = alpha.imag();
  for (; i < n; ++i) y[i] += cplx(c * x[i].real() - d * x[i].imag(), c * x[i].imag() + d * x[i].real());
}

cplx cdotc(const cplx* x, const cplx* y, std::size_t n) {
  __m256d a1 = _mm256_setzero_pd(), a2 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d xv = load2(x + i), yv = load2(y + i);
    a1 = _mm256_fmadd_pd(xv, yv, a1);
    a2 = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0x5), a2);
  }
  // a2 lanes: xr*yi, xi*yr
  __m256d sgn = _mm256_setr_pd(1.0, -1.0, 1.0, -1.0);
  double re = hsum(a1), im = hsum(_mm256_mul_pd(a2, sgn));
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

double nrm2sq(const cplx* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d v = load2(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

cplx wsum(const cplx* x, const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = _mm256_fmadd_pd(load2(x + i), widen(w + i), acc);
  cplx s = csum(acc);
  for (; i < n; ++i) s += x[i] * w[i];
  return s;
}

cplx wsum2(const cplx* x, const cplx* y, const double* w, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc = _mm256_fmadd_pd(mul2(load2(x + i), load2(y + i)), widen(w + i), acc);
  cplx s = csum(acc);
  for (; i < n; ++i) {
    double pr = x[i].real() * y[i].real() - x[i].imag() * y[i].imag();
    double pi = x[i].real() * y[i].imag() + x[i].imag() * y[i].real();
    s += cplx(pr * w[i], pi * w[i]);
  }
  return s;
}

void rscale(cplx* x, const cplx* y, const double* w, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) store2(x + i, _mm256_mul_pd(load2(y + i), widen(w + i)));
  for (; i < n; ++i) x[i] = {y[i].real() * w[i], y[i].imag() * w[i]};
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable t{"avx2", cmul, caxpy, cdotc, nrm2sq, wsum, wsum2, rscale};
  return &t;
}

}  // namespace nvscat::simd

#else

namespace nvscat::simd {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace nvscat::simd

#endif
