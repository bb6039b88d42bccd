#include "evospec/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include "evospec/common.hpp"

namespace evospec {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
  if (n == 0) throw ConfigError("Fft: length must be positive");
  in_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
  out_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_fwd_ = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in_),
                               reinterpret_cast<fftw_complex*>(out_), FFTW_FORWARD, FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in_),
                               reinterpret_cast<fftw_complex*>(out_), FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  if (in_) fftw_free(in_);
  if (out_) fftw_free(out_);
}

Fft::Fft(Fft&& other) noexcept
    : n_(other.n_), plan_fwd_(other.plan_fwd_), plan_inv_(other.plan_inv_), in_(other.in_), out_(other.out_) {
  other.plan_fwd_ = nullptr;
  other.plan_inv_ = nullptr;
  other.in_ = nullptr;
  other.out_ = nullptr;
}

std::vector<std::complex<double>> Fft::run(std::span<const std::complex<double>> x, bool fwd) {
  if (x.size() != n_) throw ConfigError("Fft: length mismatch");
  for (std::size_t i = 0; i < n_; ++i) in_[i] = x[i];
  fftw_execute(static_cast<fftw_plan>(fwd ? plan_fwd_ : plan_inv_));
  return std::vector<std::complex<double>>(out_, out_ + n_);
}

std::vector<std::complex<double>> Fft::forward(std::span<const std::complex<double>> x) {
  return run(x, true);
}

std::vector<std::complex<double>> Fft::forward(std::span<const double> x) {
  std::vector<std::complex<double>> xc(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xc[i] = x[i];
  return run(xc, true);
}

std::vector<std::complex<double>> Fft::inverse(std::span<const std::complex<double>> x) {
  return run(x, false);
}

std::vector<double> periodogram(std::span<const double> x) {
  auto coef = thread_local_fft(x.size()).forward(x);
  std::vector<double> out(x.size());
  const double scale = 1.0 / (kTwoPi * static_cast<double>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = std::norm(coef[j]) * scale;
  return out;
}

Fft& thread_local_fft(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<Fft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fft>(n);
  return *slot;
}

}  // namespace evospec
