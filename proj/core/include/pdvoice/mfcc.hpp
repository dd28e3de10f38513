#pragma once

#include <span>
#include <vector>

#include "pdvoice/audio.hpp"
#include "pdvoice/matrix.hpp"

namespace pdvoice {

/// Feature-extraction settings. Defaults: 13 coefficients from 40 HTK mel
/// bands over a 400-point FFT with a 160-sample hop on 1 s of 16 kHz audio.
struct MfccParams {
  int n_mfcc = 13;
  int n_mels = 40;
  int n_fft = 400;
  int hop = 160;
  int sample_rate = 16000;
  double target_duration = 1.0;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;

  int n_bins() const { return n_fft / 2 + 1; }
  /// Throws Error(InvalidArgument) when the invariants are violated.
  void validate() const;
};

/// n_frames x n_mfcc coefficient matrix.
using MfccSequence = Matrix;
using FeatureVector = std::vector<double>;

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Periodic Hann window of length n.
std::vector<double> hann_window(int n);

/// Power spectrogram (n_frames x n_fft/2+1). Frames start at multiples of
/// hop with no centre padding, so n_frames = 1 + (N - n_fft) / hop.
/// Throws Error(ClipTooShort) when the clip is shorter than n_fft.
Matrix stft_power(const AudioClip& clip, const MfccParams& params);

/// The n_mels + 2 band edge frequencies in Hz, equally spaced in mel.
std::vector<double> mel_edge_frequencies(const MfccParams& params);

/// Triangular filters (n_mels x n_fft/2+1) evaluated at the FFT bin
/// centre frequencies; unnormalised, peak height 1.
Matrix mel_filterbank(const MfccParams& params);

/// Orthonormal DCT-II and its inverse.
std::vector<double> dct_ortho(std::span<const double> x);
std::vector<double> idct_ortho(std::span<const double> coeffs);

MfccSequence mfcc(const AudioClip& clip, const MfccParams& params);

/// Throws Error(EmptyInput) for a sequence with no frames.
FeatureVector temporal_mean(const MfccSequence& seq);

/// Whole chain: resample, fix duration, MFCC, temporal mean.
FeatureVector extract_features(const AudioClip& clip, const MfccParams& params);

}  // namespace pdvoice
