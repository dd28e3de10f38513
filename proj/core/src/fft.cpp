#include "fft.hpp"

#include <cmath>
#include <numbers>

namespace pdvoice::detail {

FftPlan::FftPlan(std::size_t n) : n_(n), twiddles_(n) {
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }
}

void FftPlan::forward(std::span<const std::complex<double>> in,
                      std::span<std::complex<double>> out) const {
  recurse(in.data(), 1, n_, out.data());
}

void FftPlan::recurse(const std::complex<double>* in, std::size_t stride, std::size_t n,
                      std::complex<double>* out) const {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  std::size_t radix = n;
  for (std::size_t f = 2; f * f <= n; ++f) {
    if (n % f == 0) {
      radix = f;
      break;
    }
  }
  const std::size_t m = n / radix;
  const std::size_t tw_step = n_ / n;

  if (m == 1) {
    // Prime length: direct DFT.
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += in[j * stride] * twiddles_[((j * k) % n) * tw_step];
      out[k] = acc;
    }
    return;
  }

  for (std::size_t r = 0; r < radix; ++r) recurse(in + r * stride, stride * radix, m, out + r * m);

  std::vector<std::complex<double>> column(radix);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t r = 0; r < radix; ++r) column[r] = out[r * m + k];
    for (std::size_t q = 0; q < radix; ++q) {
      const std::size_t bin = k + q * m;
      std::complex<double> acc = 0.0;
      for (std::size_t r = 0; r < radix; ++r) acc += column[r] * twiddles_[((r * bin) % n) * tw_step];
      out[bin] = acc;
    }
  }
}

}  // namespace pdvoice::detail
