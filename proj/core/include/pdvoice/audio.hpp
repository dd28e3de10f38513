#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pdvoice {

/// Mono sample buffer. Amplitudes are nominally in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

enum class WavEncoding { Pcm16, Pcm24, Float32 };

/// Decodes a RIFF/WAVE byte stream (PCM 16/24-bit or IEEE float32, one or
/// two channels). Stereo is mixed down by averaging the channels of each
/// frame; integer samples are divided by 32768 (16-bit) or 8388608 (24-bit).
///
/// Throws Error(MalformedWav) for bad headers or truncated data and
/// Error(UnsupportedEncoding) for any other format tag or bit depth.
AudioClip decode_wav(std::span<const std::uint8_t> bytes);

AudioClip read_wav_file(const std::filesystem::path& path);

/// Interleaved encoder, used to write fixtures and extracted clips.
std::vector<std::uint8_t> encode_wav(std::span<const double> interleaved, int channels,
                                     int sample_rate, WavEncoding encoding);

/// Band-limited resampling with a Kaiser-windowed sinc kernel spanning 64
/// zero crossings on each side of the output instant. When downsampling
/// the kernel cutoff drops to the target Nyquist frequency. Returns the
/// clip unchanged when the rates already match.
AudioClip resample(const AudioClip& clip, int target_rate);

/// Zero-pads at the tail or keeps the leading segment so the clip holds
/// exactly round(target_seconds * sample_rate) samples.
AudioClip fix_duration(const AudioClip& clip, double target_seconds);

}  // namespace pdvoice
