#include "nvscat/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <new>

namespace nvscat {

namespace {
// fftw's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft2::Fft2(int n0, int n1) : n0_(n0), n1_(n1) {
  std::lock_guard<std::mutex> lk(planner_mutex());
  buf_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * size()));
  if (!buf_) throw std::bad_alloc();
  auto* p = reinterpret_cast<fftw_complex*>(buf_);
  fwd_ = fftw_plan_dft_2d(n0, n1, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft_2d(n0, n1, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft2::~Fft2() {
  std::lock_guard<std::mutex> lk(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  fftw_free(buf_);
}

void Fft2::forward() { fftw_execute(static_cast<fftw_plan>(fwd_)); }
void Fft2::backward() { fftw_execute(static_cast<fftw_plan>(bwd_)); }

}  // namespace nvscat
