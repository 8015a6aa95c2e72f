#pragma once

#include <complex>
#include <cstddef>

namespace nvscat::simd {

using cplx = std::complex<double>;

// a[i] *= b[i]
using CmulFn = void (*)(cplx* a, const cplx* b, std::size_t n);
// y[i] += alpha * x[i]
using CaxpyFn = void (*)(cplx alpha, const cplx* x, cplx* y, std::size_t n);
// sum conj(x[i]) * y[i]
using CdotcFn = cplx (*)(const cplx* x, const cplx* y, std::size_t n);
// sum |x[i]|^2
using Nrm2sqFn = double (*)(const cplx* x, std::size_t n);
// sum x[i] * w[i]
using WsumFn = cplx (*)(const cplx* x, const double* w, std::size_t n);
// sum x[i] * y[i] * w[i]
using Wsum2Fn = cplx (*)(const cplx* x, const cplx* y, const double* w, std::size_t n);
// x[i] = w[i] * y[i]
using RscaleFn = void (*)(cplx* x, const cplx* y, const double* w, std::size_t n);

struct KernelTable {
  const char* name;
  CmulFn cmul;
  CaxpyFn caxpy;
  CdotcFn cdotc;
  Nrm2sqFn nrm2sq;
  WsumFn wsum;
  Wsum2Fn wsum2;
  RscaleFn rscale;
};

const KernelTable& scalar_kernels();
// Null when the binary was built without AVX2 support.
const KernelTable* avx2_kernels();
bool avx2_available();

// Runtime-selected table; NVSCAT_SIMD=scalar forces the reference path.
const KernelTable& kernels();

}  // namespace nvscat::simd
