#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace evospec {

/// Complex DFT of a fixed length backed by FFTW. Plan creation is
/// serialized internally; each instance owns its buffers, so use one
/// instance per thread. Conventions:
///   forward:  X_k = sum_t x_t e^{-2 pi i k t / N}
///   inverse:  y_t = sum_k X_k e^{+2 pi i k t / N}   (unnormalized)
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  Fft(Fft&& other) noexcept;
  Fft& operator=(Fft&&) = delete;

  std::size_t size() const { return n_; }

  std::vector<std::complex<double>> forward(std::span<const std::complex<double>> x);
  std::vector<std::complex<double>> forward(std::span<const double> x);
  std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> x);

 private:
  std::vector<std::complex<double>> run(std::span<const std::complex<double>> x, bool fwd);

  std::size_t n_;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
  std::complex<double>* in_ = nullptr;
  std::complex<double>* out_ = nullptr;
};

/// Periodogram ordinates |DFT(x)|^2 / (2 pi N) at omega_j = 2 pi j / N.
std::vector<double> periodogram(std::span<const double> x);

/// Per-thread plan cache keyed by length; use for repeated transforms of
/// the same size on one thread.
Fft& thread_local_fft(std::size_t n);

}  // namespace evospec
