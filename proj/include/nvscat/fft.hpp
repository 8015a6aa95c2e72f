#pragma once

#include <complex>
#include <cstddef>

namespace nvscat {

// Owning 2D complex transform on an n0 x n1 row-major buffer.
// Both directions are unnormalized; backward uses exp(+i...).
class Fft2 {
 public:
  Fft2(int n0, int n1);
  ~Fft2();
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  std::complex<double>* data() { return buf_; }
  const std::complex<double>* data() const { return buf_; }
  std::size_t size() const { return static_cast<std::size_t>(n0_) * n1_; }
  int rows() const { return n0_; }
  int cols() const { return n1_; }

  void forward();
  void backward();

 private:
  int n0_, n1_;
  std::complex<double>* buf_ = nullptr;
  void* fwd_ = nullptr;
  void* bwd_ = nullptr;
};

}  // namespace nvscat
