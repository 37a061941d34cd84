#pragma once

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <unordered_map>

namespace asl::detail {

// The FFTW planner is not re-entrant; execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place unnormalized 2D complex DFT of size n x n, one per thread and size.
class Fft2d {
 public:
  explicit Fft2d(int n) : n_(n) {
    const std::size_t count = static_cast<std::size_t>(n) * n;
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * count));
    if (!buf_) throw std::bad_alloc();
    std::lock_guard lock(fftw_planner_mutex());
    fwd_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!fwd_ || !bwd_) throw std::runtime_error("FFTW planning failed");
  }
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;
  ~Fft2d() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }

  std::span<std::complex<double>> buffer() {
    return {reinterpret_cast<std::complex<double>*>(buf_), static_cast<std::size_t>(n_) * n_};
  }
  void forward() { fftw_execute(fwd_); }
  void backward() { fftw_execute(bwd_); }

 private:
  int n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

inline Fft2d& thread_fft(int n) {
  thread_local std::unordered_map<int, std::unique_ptr<Fft2d>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fft2d>(n);
  return *slot;
}

}  // namespace asl::detail
