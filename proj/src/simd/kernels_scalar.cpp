#include "nvscat/simd/kernels.hpp"

namespace nvscat::simd {

namespace {

void cmul(cplx* a, const cplx* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double ar = a[i].real(), ai = a[i].imag();
    double br = b[i].real(), bi = b[i].imag();
    a[i] = {ar * br - ai * bi, ar * bi + ai * br};
  }
}

void caxpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  double c = alpha.real(), d = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    double xr = x[i].real(), xi = x[i].imag();
    y[i] += cplx(c * xr - d * xi, c * xi + d * xr);
  }
}

cplx cdotc(const cplx* x, const cplx* y, std::size_t n) {
  double re = 0, im = 0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

double nrm2sq(const cplx* x, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

cplx wsum(const cplx* x, const double* w, std::size_t n) {
  double re = 0, im = 0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[i].real() * w[i];
    im += x[i].imag() * w[i];
  }
  return {re, im};
}

cplx wsum2(const cplx* x, const cplx* y, const double* w, std::size_t n) {
  double re = 0, im = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double pr = x[i].real() * y[i].real() - x[i].imag() * y[i].imag();
    double pi = x[i].real() * y[i].imag() + x[i].imag() * y[i].real();
    re += pr * w[i];
    im += pi * w[i];
  }
  return {re, im};
}

void rscale(cplx* x, const cplx* y, const double* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = {y[i].real() * w[i], y[i].imag() * w[i]};
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable t{"scalar", cmul, caxpy, cdotc, nrm2sq, wsum, wsum2, rscale};
  return t;
}

}  // namespace nvscat::simd
