#include "pdvoice/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <numbers>
#include <string>

#include "pdvoice/error.hpp"

namespace pdvoice {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  std::uint16_t block_align = 0;
};

double bessel_i0(double x) { return std::cyl_bessel_i(0.0, x); }

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw Error(ErrorCode::MalformedWav, "missing RIFF/WAVE header");
  }
  FormatChunk fmt;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16 || body + size > bytes.size()) {
        throw Error(ErrorCode::MalformedWav, "truncated fmt chunk");
      }
      fmt.format = read_u16(bytes, body);
      fmt.channels = read_u16(bytes, body + 2);
      fmt.sample_rate = read_u32(bytes, body + 4);
      fmt.block_align = read_u16(bytes, body + 12);
      fmt.bits = read_u16(bytes, body + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorCode::MalformedWav, "truncated extensible fmt chunk");
        // The first two bytes of the sub-format GUID carry the real tag.
        fmt.format = read_u16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (body + size > bytes.size()) {
        throw Error(ErrorCode::MalformedWav, "data chunk declares " + std::to_string(size) +
                                                 " bytes but only " +
                                                 std::to_string(bytes.size() - body) + " remain");
      }
      data = bytes.subspan(body, size);
      have_data = true;
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw Error(ErrorCode::MalformedWav, "no fmt chunk");
  if (!have_data) throw Error(ErrorCode::MalformedWav, "no data chunk");

  const bool pcm16 = fmt.format == kFormatPcm && fmt.bits == 16;
  const bool pcm24 = fmt.format == kFormatPcm && fmt.bits == 24;
  const bool f32 = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!(pcm16 || pcm24 || f32)) {
    throw Error(ErrorCode::UnsupportedEncoding, "format tag " + std::to_string(fmt.format) +
                                                    " with " + std::to_string(fmt.bits) +
                                                    " bits per sample");
  }
  if (fmt.channels < 1 || fmt.channels > 2) {
    throw Error(ErrorCode::UnsupportedEncoding,
                std::to_string(fmt.channels) + " channels (1 or 2 supported)");
  }
  if (fmt.sample_rate == 0) throw Error(ErrorCode::MalformedWav, "zero sample rate");

  const std::size_t bytes_per_sample = fmt.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  if (data.size() % frame_bytes != 0) {
    throw Error(ErrorCode::MalformedWav, "data chunk is not a whole number of frames");
  }
  const std::size_t frames = data.size() / frame_bytes;
  if (frames == 0) throw Error(ErrorCode::MalformedWav, "no samples");

  auto sample_at = [&](std::size_t offset) -> double {
    if (pcm16) {
      auto v = static_cast<std::int16_t>(read_u16(data, offset));
      return v / 32768.0;
    }
    if (pcm24) {
      std::int32_t v = data[offset] | (data[offset + 1] << 8) | (data[offset + 2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    return static_cast<double>(std::bit_cast<float>(read_u32(data, offset)));
  };

  AudioClip clip;
  clip.sample_rate = static_cast<int>(fmt.sample_rate);
  clip.samples.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) {
      acc += sample_at(f * frame_bytes + c * bytes_per_sample);
    }
    const double v = acc / fmt.channels;
    if (!std::isfinite(v)) throw Error(ErrorCode::MalformedWav, "non-finite sample");
    clip.samples[f] = v;
  }
  return clip;
}

AudioClip read_wav_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(std::span<const double> interleaved, int channels,
                                     int sample_rate, WavEncoding encoding) {
  if (channels < 1 || sample_rate <= 0 || interleaved.size() % channels != 0) {
    throw Error(ErrorCode::InvalidArgument, "bad channel count or sample rate");
  }
  const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : encoding == WavEncoding::Pcm24 ? 24 : 32;
  const std::uint16_t format = encoding == WavEncoding::Float32 ? kFormatFloat : kFormatPcm;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(interleaved.size() * (bits / 8));

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate * channels * (bits / 8)));
  put_u16(out, static_cast<std::uint16_t>(channels * (bits / 8)));
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : interleaved) {
    const double c = std::clamp(s, -1.0, 1.0);
    switch (encoding) {
      case WavEncoding::Pcm16: {
        auto v = static_cast<std::int32_t>(std::lround(c * 32768.0));
        put_u16(out, static_cast<std::uint16_t>(std::clamp(v, -32768, 32767)));
        break;
      }
      case WavEncoding::Pcm24: {
        auto v = static_cast<std::int32_t>(std::lround(c * 8388608.0));
        v = std::clamp(v, -8388608, 8388607);
        for (int i = 0; i < 3; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        break;
      }
      case WavEncoding::Float32:
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
        break;
    }
  }
  return out;
}

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0 || clip.sample_rate <= 0) {
    throw Error(ErrorCode::InvalidArgument, "sample rates must be positive");
  }
  if (target_rate == clip.sample_rate) return clip;

  constexpr double kZeroCrossings = 64.0;
  constexpr double kKaiserBeta = 8.6;
  // Output instant i sits at source position i * step / phases, so the
  // fractional offset cycles through `phases` values and one kernel per
  // phase can be tabulated.
  const auto g = std::gcd(clip.sample_rate, target_rate);
  const auto step = static_cast<std::int64_t>(clip.sample_rate / g);
  const auto phases = static_cast<std::int64_t>(target_rate / g);
  const double ratio = static_cast<double>(target_rate) / clip.sample_rate;
  const double cutoff = std::min(1.0, ratio);
  const double half_width = kZeroCrossings / cutoff;  // in source samples
  const auto reach = static_cast<std::int64_t>(std::floor(half_width)) + 1;
  const double i0_beta = bessel_i0(kKaiserBeta);

  auto tap = [&](double d) {
    if (std::abs(d) > half_width) return 0.0;
    const double x = cutoff * d;
    const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double r = d / half_width;
    return cutoff * sinc * bessel_i0(kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
  };

  const auto n_in = static_cast<std::int64_t>(clip.samples.size());
  const auto n_out = static_cast<std::int64_t>(std::llround(static_cast<double>(n_in) * ratio));
  const bool tabulate = phases <= 4096;
  const std::int64_t width = 2 * reach + 1;
  // Corpora usually share one source rate, so the last table is kept.
  struct KernelCache {
    int from = 0, to = 0;
    std::vector<double> table;
  };
  static thread_local KernelCache cache;
  if (tabulate && (cache.from != clip.sample_rate || cache.to != target_rate)) {
    cache.table.assign(static_cast<std::size_t>(phases * width), 0.0);
    for (std::int64_t p = 0; p < phases; ++p) {
      const double frac = static_cast<double>(p) / static_cast<double>(phases);
      for (std::int64_t j = -reach; j <= reach; ++j) {
        cache.table[static_cast<std::size_t>(p * width + j + reach)] = tap(frac - static_cast<double>(j));
      }
    }
    cache.from = clip.sample_rate;
    cache.to = target_rate;
  }
  const std::vector<double>& table = cache.table;

  AudioClip out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(n_out));
  for (std::int64_t i = 0; i < n_out; ++i) {
    const std::int64_t base = (i * step) / phases;
    const std::int64_t phase = (i * step) % phases;
    const double frac = static_cast<double>(phase) / static_cast<double>(phases);
    const std::int64_t lo = std::max<std::int64_t>(0, base - reach);
    const std::int64_t hi = std::min<std::int64_t>(n_in - 1, base + reach);
    double acc = 0.0;
    for (std::int64_t k = lo; k <= hi; ++k) {
      const std::int64_t j = k - base;
      const double w = tabulate ? table[static_cast<std::size_t>(phase * width + j + reach)]
                                : tap(frac - static_cast<double>(j));
      acc += clip.samples[static_cast<std::size_t>(k)] * w;
    }
    out.samples[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

AudioClip fix_duration(const AudioClip& clip, double target_seconds) {
  if (clip.samples.empty()) throw Error(ErrorCode::InvalidArgument, "empty clip");
  const auto target = static_cast<std::size_t>(std::llround(target_seconds * clip.sample_rate));
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.assign(clip.samples.begin(),
                     clip.samples.begin() + static_cast<std::ptrdiff_t>(std::min(target, clip.samples.size())));
  out.samples.resize(target, 0.0);
  return out;
}

}  // namespace pdvoice
