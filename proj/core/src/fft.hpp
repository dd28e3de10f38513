#pragma once

#include <complex>
#include <span>
#include <vector>

namespace pdvoice::detail {

/// Mixed-radix decimation-in-time FFT for arbitrary lengths. Radix passes
/// use the smallest prime factor at each level; prime lengths degrade to a
/// direct DFT.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const;

 private:
  void recurse(const std::complex<double>* in, std::size_t stride, std::size_t n,
               std::complex<double>* out) const;

  std::size_t n_;
  std::vector<std::complex<double>> twiddles_;  // exp(-2*pi*i*k/n_)
};

}  // namespace pdvoice::detail
