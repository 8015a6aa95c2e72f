#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nvscat/fft.hpp"
#include "nvscat/greens.hpp"
#include "nvscat/grid.hpp"

namespace nvscat {

// (Kf)(z) = h^2 sum_zeta g(z - zeta) f(zeta) through a zero-padded 2N x 2N FFT.
class Convolver {
 public:
  explicit Convolver(const GreensTable& table);
  void apply(const cplx* f, cplx* out);
  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  std::vector<cplx> ghat_;
  std::unique_ptr<Fft2> fft_;
};

struct SolverOptions {
  double tol = 1e-10;
  int restart = 40;
  int max_iter = 600;
  // Fall back to a dense support-restricted solve on stagnation.
  bool dense_fallback = true;
  double support_threshold = 1e-10;
};

struct MuField {
  cplx lambda;
  Grid grid;
  std::vector<cplx> mu;
  double residual = 0.0;  // ||mu - 1 - K(v mu)|| / ||1||
  int iterations = 0;
  std::string method;     // "gmres" | "dense" | "trivial"
  // Mean |mu - 1| on the outermost ring of nodes and on the ring at R/2.
  double boundary_dev = 0.0;
  double mid_dev = 0.0;

  cplx at(int j, int k) const { return mu[grid.index(j, k)]; }
};

MuField solve_mu(const Potential& v, const GreensTable& table,
                 const SolverOptions& opts = {});

// psi = e^{-(lambda zbar + z/lambda)/2} mu
cplx psi_from_mu(const MuField& m, int j, int k);

inline constexpr int kDenseCap = 128;

// Weighted kernel (1+|z|)^{-(2+eps)/2} g(z-zeta) v(zeta) (1+|zeta|)^{(2+eps)/2} h^2
// restricted to the support of v; rows and columns outside it are zero.
struct KernelMatrix {
  cplx lambda;
  Grid grid;
  double eps = 1.0;
  std::vector<std::size_t> support;  // grid indices
  std::vector<cplx> a;               // column-major n x n
  double hs_norm = 0.0;

  std::size_t n() const { return support.size(); }
  cplx operator()(std::size_t i, std::size_t j) const { return a[j * n() + i]; }
};

struct KernelOptions {
  double eps = 1.0;
  int dense_cap = kDenseCap;
  // Relative to max |v|; 1e-6 moves Delta by about 1e-10 on the Gaussian default.
  double support_threshold = 1e-6;
};

KernelMatrix build_kernel(const Potential& v, const GreensTable& table,
                          const KernelOptions& opts = {});

// Solves (I - A) m = (1+|z|)^{-(2+eps)/2} on the support and returns
// mu = (1+|z|)^{(2+eps)/2} m extended to the grid by one application of K.
std::vector<cplx> solve_dense(const KernelMatrix& k, const Potential& v,
                              const GreensTable& table);

enum class DetMethod { lu, eigen };

struct DeterminantSample {
  cplx lambda;
  cplx delta{1.0, 0.0};
  double im_residue = 0.0;
  std::size_t count = 0;  // matrix size used
  DetMethod method = DetMethod::lu;
  double hs_norm = 0.0;
  bool exceptional = false;
  // Eigen backend only: product and exp-sum accumulations.
  cplx delta_product{1.0, 0.0};
  cplx delta_expsum{1.0, 0.0};
};

const char* det_method_name(DetMethod m);

DeterminantSample modified_fredholm_det(const KernelMatrix& k, DetMethod m = DetMethod::lu);

struct ExceptionalReport {
  std::vector<cplx> flagged;
  double min_abs_delta = 0.0;
  double max_abs_delta = 0.0;
  cplx delta_on_T{0.0, 0.0};
  bool has_T = false;
  double threshold = 1e-6;
};

ExceptionalReport detect_exceptional(const std::vector<DeterminantSample>& samples,
                                     double rel_tol = 1e-6);
ExceptionalReport detect_exceptional(const Potential& v, const LambdaGrid& lg,
                                     const GreensOptions& gopts = {},
                                     const KernelOptions& kopts = {},
                                     double rel_tol = 1e-6);

}  // namespace nvscat
