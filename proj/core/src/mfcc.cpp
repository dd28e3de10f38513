#include "pdvoice/mfcc.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "pdvoice/error.hpp"

namespace pdvoice {
namespace {

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  }
  return out;
}

// Orthonormal DCT-II basis restricted to the first n_out rows.
Matrix dct_basis(int n_in, int n_out) {
  Matrix basis(static_cast<std::size_t>(n_out), static_cast<std::size_t>(n_in));
  for (int k = 0; k < n_out; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / n_in) : std::sqrt(2.0 / n_in);
    for (int n = 0; n < n_in; ++n) {
      basis(static_cast<std::size_t>(k), static_cast<std::size_t>(n)) =
          scale * std::cos(std::numbers::pi * k * (2.0 * n + 1.0) / (2.0 * n_in));
    }
  }
  return basis;
}

// Rows k >= 1 of the DCT basis sum to zero, so they are applied to the input
// shifted by its first element; constant inputs then give exact zeros.
void apply_dct(const Matrix& basis, std::span<const double> x, std::span<double> out) {
  const double shift = x[0];
  for (std::size_t k = 0; k < basis.rows(); ++k) {
    auto b = basis.row(k);
    double acc = 0.0;
    if (k == 0) {
      for (std::size_t n = 0; n < x.size(); ++n) acc += b[n] * x[n];
    } else {
      for (std::size_t n = 0; n < x.size(); ++n) acc += b[n] * (x[n] - shift);
    }
    out[k] = acc;
  }
}

}  // namespace

void MfccParams::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (n_mfcc < 1 || n_mels < 1 || n_fft < 2 || hop < 1 || sample_rate < 1) {
    fail("MFCC sizes must be positive");
  }
  if (n_mfcc > n_mels) fail("n_mfcc must not exceed n_mels");
  if (n_fft < hop) fail("n_fft must be at least hop");
  if (fmin < 0.0 || fmax <= fmin) fail("need 0 <= fmin < fmax");
  if (fmax > sample_rate / 2.0) fail("fmax exceeds Nyquist");
  if (!(log_floor > 0.0)) fail("log_floor must be positive");
  if (!(target_duration > 0.0)) fail("target_duration must be positive");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  }
  return w;
}

Matrix stft_power(const AudioClip& clip, const MfccParams& params) {
  params.validate();
  const auto n_fft = static_cast<std::size_t>(params.n_fft);
  const auto hop = static_cast<std::size_t>(params.hop);
  const std::size_t len = clip.samples.size();
  if (len < n_fft) {
    throw Error(ErrorCode::ClipTooShort,
                std::to_string(len) + " samples < n_fft " + std::to_string(n_fft));
  }
  const std::size_t n_frames = 1 + (len - n_fft) / hop;
  const auto n_bins = static_cast<std::size_t>(params.n_bins());
  const auto window = hann_window(params.n_fft);
  const detail::FftPlan plan(n_fft);

  Matrix power(n_frames, n_bins);
  std::vector<std::complex<double>> frame(n_fft), spectrum(n_fft);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * hop;
    for (std::size_t i = 0; i < n_fft; ++i) frame[i] = clip.samples[start + i] * window[i];
    plan.forward(frame, spectrum);
    auto out = power.row(f);
    for (std::size_t b = 0; b < n_bins; ++b) out[b] = std::norm(spectrum[b]);
  }
  return power;
}

std::vector<double> mel_edge_frequencies(const MfccParams& params) {
  params.validate();
  auto mels = linspace(hz_to_mel(params.fmin), hz_to_mel(params.fmax), params.n_mels + 2);
  for (double& m : mels) m = mel_to_hz(m);
  return mels;
}

Matrix mel_filterbank(const MfccParams& params) {
  const auto edges = mel_edge_frequencies(params);
  const auto bin_freqs = linspace(0.0, params.sample_rate / 2.0, params.n_bins());
  Matrix fb(static_cast<std::size_t>(params.n_mels), bin_freqs.size());
  for (std::size_t m = 0; m < fb.rows(); ++m) {
    const double left = edges[m];
    const double centre = edges[m + 1];
    const double right = edges[m + 2];
    for (std::size_t b = 0; b < bin_freqs.size(); ++b) {
      const double f = bin_freqs[b];
      const double rising = (f - left) / (centre - left);
      const double falling = (right - f) / (right - centre);
      fb(m, b) = std::max(0.0, std::min(rising, falling));
    }
  }
  return fb;
}

std::vector<double> dct_ortho(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> out(x.size());
  if (x.empty()) return out;
  apply_dct(dct_basis(n, n), x, out);
  return out;
}

std::vector<double> idct_ortho(std::span<const double> coeffs) {
  const int n = static_cast<int>(coeffs.size());
  const Matrix basis = dct_basis(n, n);
  std::vector<double> out(coeffs.size(), 0.0);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    for (std::size_t i = 0; i < coeffs.size(); ++i) out[i] += basis(k, i) * coeffs[k];
  }
  return out;
}

MfccSequence mfcc(const AudioClip& clip, const MfccParams& params) {
  const Matrix power = stft_power(clip, params);
  const Matrix fb = mel_filterbank(params);
  const Matrix basis = dct_basis(params.n_mels, params.n_mfcc);

  MfccSequence seq(power.rows(), static_cast<std::size_t>(params.n_mfcc));
  std::vector<double> log_mel(fb.rows());
  for (std::size_t f = 0; f < power.rows(); ++f) {
    auto spectrum = power.row(f);
    for (std::size_t m = 0; m < fb.rows(); ++m) {
      auto weights = fb.row(m);
      double energy = 0.0;
      for (std::size_t b = 0; b < weights.size(); ++b) energy += weights[b] * spectrum[b];
      log_mel[m] = std::log(std::max(energy, params.log_floor));
    }
    apply_dct(basis, log_mel, seq.row(f));
  }
  return seq;
}

FeatureVector temporal_mean(const MfccSequence& seq) {
  if (seq.rows() == 0) throw Error(ErrorCode::EmptyInput, "MFCC sequence has no frames");
  FeatureVector mean(seq.cols(), 0.0);
  for (std::size_t f = 0; f < seq.rows(); ++f) {
    auto r = seq.row(f);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += r[c];
  }
  for (double& v : mean) v /= static_cast<double>(seq.rows());
  return mean;
}

FeatureVector extract_features(const AudioClip& clip, const MfccParams& params) {
  params.validate();
  const AudioClip standard = fix_duration(resample(clip, params.sample_rate), params.target_duration);
  return temporal_mean(mfcc(standard, params));
}

}  // namespace pdvoice
