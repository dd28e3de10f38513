#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>

#include "pdvoice/audio.hpp"
#include "pdvoice/error.hpp"
#include "pdvoice/mfcc.hpp"
#include "support.hpp"

using namespace pdvoice;
using testing_support::data_dir;

namespace {

AudioClip sine(double hz, int sr, std::size_t n, double amp = 0.5) {
  AudioClip c;
  c.sample_rate = sr;
  c.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.samples[i] = amp * std::sin(2 * std::numbers::pi * hz * i / sr);
  return c;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected pdvoice::Error");
  return ErrorCode::InvalidArgument;
}

void put_u32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace

TEST_CASE("wav: 16-bit silence decodes to zeros") {
  std::vector<double> zeros(16000, 0.0);
  auto clip = decode_wav(encode_wav(zeros, 1, 16000, WavEncoding::Pcm16));
  CHECK(clip.sample_rate == 16000);
  CHECK(clip.samples == zeros);
}

TEST_CASE("wav: stereo frames are averaged") {
  std::vector<double> frames{1.0, -1.0, 0.5, 0.25};
  for (auto enc : {WavEncoding::Float32, WavEncoding::Pcm24, WavEncoding::Pcm16}) {
    auto clip = decode_wav(encode_wav(frames, 2, 8000, enc));
    REQUIRE(clip.samples.size() == 2);
    CHECK(std::abs(clip.samples[0]) < 1e-4);
    CHECK(clip.samples[1] == doctest::Approx(0.375).epsilon(1e-4));
  }
}

TEST_CASE("wav: round trip per encoding") {
  pdvoice::Rng rng(3);
  std::vector<double> x(1000);
  for (auto& v : x) v = rng.uniform(-0.9, 0.9);
  auto f32 = decode_wav(encode_wav(x, 1, 22050, WavEncoding::Float32));
  auto p24 = decode_wav(encode_wav(x, 1, 22050, WavEncoding::Pcm24));
  auto p16 = decode_wav(encode_wav(x, 1, 22050, WavEncoding::Pcm16));
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(f32.samples[i] - x[i]) < 1e-7);
    CHECK(std::abs(p24.samples[i] - x[i]) <= 1.0 / 8388608);
    CHECK(std::abs(p16.samples[i] - x[i]) <= 1.0 / 32768);
  }
}

TEST_CASE("wav: truncated data chunk is malformed") {
  std::vector<double> x(500, 0.1);
  auto bytes = encode_wav(x, 1, 16000, WavEncoding::Pcm16);
  bytes.resize(bytes.size() - 100);
  CHECK(code_of([&] { decode_wav(bytes); }) == ErrorCode::MalformedWav);
  CHECK(code_of([&] { decode_wav(std::vector<std::uint8_t>{'R', 'I', 'F', 'F'}); }) == ErrorCode::MalformedWav);
}

TEST_CASE("wav: 8-bit PCM is unsupported") {
  std::vector<double> x(10, 0.0);
  auto bytes = encode_wav(x, 1, 16000, WavEncoding::Pcm16);
  // fmt chunk: bits per sample at offset 34, block align at 32, byte rate at 28.
  bytes[34] = 8;
  bytes[32] = 1;
  put_u32(bytes, 28, 16000);
  CHECK(code_of([&] { decode_wav(bytes); }) == ErrorCode::UnsupportedEncoding);
}

TEST_CASE("wav: golden fixtures decode") {
  auto noise = read_wav_file(data_dir() / "noise_f32.wav");
  CHECK(noise.sample_rate == 16000);
  CHECK(noise.samples.size() == 16000);
  auto chirp = read_wav_file(data_dir() / "chirp_pcm16.wav");
  CHECK(chirp.samples.size() == 16000);
  CHECK(code_of([] { read_wav_file(data_dir() / "missing.wav"); }) == ErrorCode::IoError);
}

TEST_CASE("resample: identity and length") {
  auto c = sine(440, 16000, 16000);
  CHECK(resample(c, 16000).samples == c.samples);
  auto up = resample(sine(440, 8000, 8000), 16000);
  CHECK(up.samples.size() == 16000);
  CHECK(up.sample_rate == 16000);
  CHECK(resample(sine(440, 44100, 44100), 16000).samples.size() == 16000);
}

TEST_CASE("resample: DC level matches a direct sinc interpolation") {
  AudioClip dc;
  dc.sample_rate = 44100;
  dc.samples.assign(44100, 0.5);
  auto out = resample(dc, 16000);
  // Direct evaluation of the windowed-sinc sum at each output instant.
  const double ratio = 16000.0 / 44100.0, half = 64.0 / ratio, beta = 8.6;
  auto direct = [&](std::size_t i) {
    const double t = i / ratio;
    double acc = 0.0;
    for (long k = std::max(0L, long(std::ceil(t - half))); k <= std::min(44099L, long(std::floor(t + half))); ++k) {
      const double d = t - k, x = ratio * d;
      const double s = x == 0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      const double r = d / half;
      acc += 0.5 * ratio * s * std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1 - r * r))) /
             std::cyl_bessel_i(0.0, beta);
    }
    return acc;
  };
  for (std::size_t i = 200; i < out.samples.size() - 200; i += 97) {
    CHECK(std::abs(out.samples[i] - 0.5) < 1e-3);
    CHECK(std::abs(out.samples[i] - direct(i)) < 1e-9);
  }
}

TEST_CASE("resample: in-band sine survives downsampling") {
  auto out = resample(sine(440, 44100, 44100), 16000);
  auto ref = sine(440, 16000, 16000);
  for (std::size_t i = 300; i < 15700; ++i) CHECK(std::abs(out.samples[i] - ref.samples[i]) < 2e-3);
}

TEST_CASE("fix_duration: pad, truncate, identity") {
  AudioClip c;
  c.sample_rate = 16000;
  c.samples.assign(8000, 0.25);
  auto padded = fix_duration(c, 1.0);
  REQUIRE(padded.samples.size() == 16000);
  CHECK(std::all_of(padded.samples.begin() + 8000, padded.samples.end(), [](double v) { return v == 0.0; }));
  CHECK(padded.samples[7999] == 0.25);

  c.samples.resize(32000);
  for (std::size_t i = 0; i < c.samples.size(); ++i) c.samples[i] = static_cast<double>(i);
  auto cut = fix_duration(c, 1.0);
  REQUIRE(cut.samples.size() == 16000);
  CHECK(cut.samples.back() == 15999.0);

  c.samples.resize(16000);
  CHECK(fix_duration(c, 1.0).samples == c.samples);
}

TEST_CASE("mel scale") {
  CHECK(hz_to_mel(0.0) == 0.0);
  CHECK(hz_to_mel(1000.0) == doctest::Approx(2595.0 * std::log10(1.0 + 1000.0 / 700.0)));
  for (double f : {10.0, 440.0, 3999.0, 8000.0}) CHECK(mel_to_hz(hz_to_mel(f)) == doctest::Approx(f).epsilon(1e-12));
}

TEST_CASE("hann window is periodic") {
  auto w = hann_window(400);
  CHECK(w[0] == 0.0);
  CHECK(w[200] == doctest::Approx(1.0));
  CHECK(w[100] == doctest::Approx(0.5));
  CHECK(w[1] == doctest::Approx(w[399]));
}

TEST_CASE("stft: shape, zeros, bin-40 sine") {
  MfccParams p;
  auto zero = stft_power(AudioClip{std::vector<double>(16000, 0.0), 16000}, p);
  CHECK(zero.rows() == 98);
  CHECK(zero.cols() == 201);
  CHECK(std::all_of(zero.data().begin(), zero.data().end(), [](double v) { return v == 0.0; }));

  auto s = stft_power(sine(1600, 16000, 16000), p);
  for (std::size_t f = 0; f < s.rows(); ++f) {
    auto r = s.row(f);
    CHECK(std::max_element(r.begin(), r.end()) - r.begin() == 40);
  }
  CHECK_THROWS_AS(stft_power(AudioClip{std::vector<double>(399, 0.0), 16000}, p), Error);
}

TEST_CASE("stft matches a direct DFT for several FFT sizes") {
  pdvoice::Rng rng(11);
  AudioClip c;
  c.sample_rate = 16000;
  c.samples.resize(2000);
  for (auto& v : c.samples) v = rng.uniform(-1, 1);
  for (int n_fft : {400, 512, 401, 210}) {
    MfccParams p;
    p.n_fft = n_fft;
    p.hop = 200;
    auto s = stft_power(c, p);
    auto w = hann_window(n_fft);
    for (std::size_t f = 0; f < s.rows(); f += 2) {
      for (int k = 0; k <= n_fft / 2; k += 7) {
        std::complex<double> acc = 0.0;
        for (int t = 0; t < n_fft; ++t) {
          acc += c.samples[f * 200 + t] * w[t] * std::polar(1.0, -2.0 * std::numbers::pi * k * t / n_fft);
        }
        CHECK(s(f, k) == doctest::Approx(std::norm(acc)).epsilon(1e-9).scale(1e-9));
      }
    }
  }
}

TEST_CASE("mel filterbank shape and triangles") {
  MfccParams p;
  auto fb = mel_filterbank(p);
  CHECK(fb.rows() == 40);
  CHECK(fb.cols() == 201);
  for (std::size_t m = 0; m < fb.rows(); ++m) {
    auto r = fb.row(m);
    std::size_t first = r.size(), last = 0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (r[k] > 0) {
        first = std::min(first, k);
        last = k;
      }
    }
    REQUIRE(first <= last);
    std::size_t peak = std::max_element(r.begin(), r.end()) - r.begin();
    for (std::size_t k = first; k <= last; ++k) CHECK(r[k] > 0);
    for (std::size_t k = first; k < peak; ++k) CHECK(r[k] <= r[k + 1]);
    for (std::size_t k = peak; k < last; ++k) CHECK(r[k] >= r[k + 1]);
  }
  auto edges = mel_edge_frequencies(p);
  REQUIRE(edges.size() == 42);
  const double top = 2595.0 * std::log10(1.0 + 8000.0 / 700.0);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double m = top * i / 41.0;
    const double expect = 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
    CHECK(edges[i] == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("dct: orthonormal round trip") {
  pdvoice::Rng rng(5);
  std::vector<double> x(40);
  for (auto& v : x) v = rng.normal();
  auto c = dct_ortho(x);
  auto back = idct_ortho(c);
  double ex = 0, ec = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(back[i] - x[i]) < 1e-12);
    ex += x[i] * x[i];
    ec += c[i] * c[i];
  }
  CHECK(ec == doctest::Approx(ex).epsilon(1e-12));
}

TEST_CASE("mfcc: silence has the canonical form") {
  MfccParams p;
  auto m = mfcc(AudioClip{std::vector<double>(16000, 0.0), 16000}, p);
  CHECK(m.rows() == 98);
  CHECK(m.cols() == 13);
  const double c0 = std::sqrt(40.0) * std::log(1e-10);
  for (std::size_t f = 0; f < m.rows(); ++f) {
    CHECK(m(f, 0) == doctest::Approx(c0).epsilon(1e-12));
    for (std::size_t k = 1; k < 13; ++k) CHECK(m(f, k) == 0.0);
  }
}

TEST_CASE("mfcc: matches the frozen reference frames") {
  auto golden = testing_support::load_json("mfcc_golden.json");
  MfccParams p;
  for (const char* name : {"noise_f32.wav", "chirp_pcm16.wav"}) {
    CAPTURE(name);
    auto clip = read_wav_file(data_dir() / name);
    auto m = mfcc(clip, p);
    const auto& frames = golden[name]["frames"];
    REQUIRE(m.rows() == frames.size());
    double worst = 0.0;
    for (std::size_t f = 0; f < m.rows(); ++f) {
      for (std::size_t k = 0; k < 13; ++k) worst = std::max(worst, std::abs(m(f, k) - frames[f][k].get<double>()));
    }
    CHECK(worst < 1e-4);
    auto mean = temporal_mean(m);
    for (std::size_t k = 0; k < 13; ++k) CHECK(std::abs(mean[k] - golden[name]["mean"][k].get<double>()) < 1e-6);
  }
}

TEST_CASE("temporal mean") {
  Matrix one(1, 3, {1.5, -2.0, 7.0});
  CHECK(temporal_mean(one) == std::vector<double>{1.5, -2.0, 7.0});
  Matrix two(2, 13);
  for (std::size_t k = 0; k < 13; ++k) {
    two(0, k) = 1.0;
    two(1, k) = 3.0;
  }
  CHECK(temporal_mean(two) == std::vector<double>(13, 2.0));
  CHECK_THROWS_AS(temporal_mean(Matrix(0, 13)), Error);
}

TEST_CASE("extract_features: any rate and length gives 13 values") {
  pdvoice::Rng rng(9);
  for (int sr : {8000, 16000, 22050, 44100, 48000}) {
    auto x = testing_support::synthetic_voice(1, sr, 0.7, rng);
    auto f = extract_features(AudioClip{x, sr}, MfccParams{});
    CHECK(f.size() == 13);
    for (double v : f) CHECK(std::isfinite(v));
  }
}

TEST_CASE("property: silence MFCC canonical form over random clips") {
  pdvoice::Rng rng(42);
  const int rates[] = {8000, 11025, 16000, 22050, 44100, 48000};
  for (int seed = 0; seed < 100; ++seed) {
    const int sr = rates[rng.uniform_index(6)];
    const auto n = static_cast<std::size_t>(sr * rng.uniform(0.2, 2.0));
    auto f = extract_features(AudioClip{std::vector<double>(n, 0.0), sr}, MfccParams{});
    CHECK(f[0] == doctest::Approx(std::sqrt(40.0) * std::log(1e-10)).epsilon(1e-12));
    for (std::size_t k = 1; k < f.size(); ++k) CHECK(f[k] == 0.0);
  }
}

TEST_CASE("params validation") {
  MfccParams p;
  p.n_mfcc = 41;
  CHECK_THROWS_AS(p.validate(), Error);
  p = MfccParams{};
  p.hop = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}
