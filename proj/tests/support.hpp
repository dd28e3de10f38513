#pragma once

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdvoice/audio.hpp"
#include "pdvoice/dataset.hpp"
#include "pdvoice/matrix.hpp"
#include "pdvoice/random.hpp"

namespace testing_support {

inline std::filesystem::path data_dir() { return PDVOICE_TEST_DATA_DIR; }

inline nlohmann::json load_json(const std::string& name) {
  std::ifstream in(data_dir() / name);
  return nlohmann::json::parse(in);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("pdvoice-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Two Gaussian blobs in d dimensions at -center and +center.
inline pdvoice::LabeledDataset blobs(std::size_t n, std::size_t d, double center, double sd, std::uint64_t seed,
                                     double frac_one = 0.5) {
  pdvoice::Rng rng(seed);
  pdvoice::LabeledDataset ds;
  ds.features = pdvoice::Matrix(0, 0);
  const auto n1 = static_cast<std::size_t>(std::llround(n * frac_one));
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i < n - n1 ? 0 : 1;
    for (auto& v : row) v = (label ? center : -center) + sd * rng.normal();
    ds.features.append_row(row);
    ds.labels.push_back(label);
  }
  ds.source_name = "blobs";
  return ds;
}

inline pdvoice::LabeledDataset xor_points() {
  pdvoice::LabeledDataset ds;
  ds.features = pdvoice::Matrix(4, 2, {0, 0, 0, 1, 1, 0, 1, 1});
  ds.labels = {0, 1, 1, 0};
  return ds;
}

inline double accuracy(const pdvoice::LabelVector& a, const pdvoice::LabelVector& b) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return static_cast<double>(hit) / static_cast<double>(a.size());
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

/// Synthetic "voice" clip: a harmonic tone whose fundamental, jitter and
/// breathiness depend on the class, so MFCC means separate the groups.
inline std::vector<double> synthetic_voice(int label, int sample_rate, double seconds, pdvoice::Rng& rng) {
  const auto n = static_cast<std::size_t>(seconds * sample_rate);
  const double f0 = (label ? 150.0 : 120.0) + rng.uniform(-15.0, 15.0);
  const double noise = label ? 0.08 : 0.02;
  const double tilt = label ? 0.5 : 0.8;
  std::vector<double> x(n);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double jitter = label ? 0.02 * rng.normal() : 0.002 * rng.normal();
    phase += 2.0 * std::numbers::pi * f0 * (1.0 + jitter) / sample_rate;
    double s = 0.0, amp = 0.3;
    for (int h = 1; h <= 8; ++h, amp *= tilt) s += amp * std::sin(h * phase);
    x[i] = s + noise * rng.normal();
  }
  return x;
}

/// healthy/ and pd/ subdirectories of WAV files plus manifest.csv.
inline void write_synthetic_corpus(const std::filesystem::path& root, int per_class_healthy, int per_class_pd,
                                   std::uint64_t seed) {
  pdvoice::Rng rng(seed);
  const int rates[] = {16000, 22050, 44100};
  auto emit = [&](const std::string& group, int label, int count) {
    for (int i = 0; i < count; ++i) {
      const int sr = rates[rng.uniform_index(3)];
      auto x = synthetic_voice(label, sr, rng.uniform(0.6, 1.4), rng);
      char name[32];
      std::snprintf(name, sizeof name, "rec_%03d.wav", i);
      write_bytes(root / group / name, pdvoice::encode_wav(x, 1, sr, pdvoice::WavEncoding::Pcm16));
    }
  };
  emit("healthy", 0, per_class_healthy);
  emit("pd", 1, per_class_pd);
  std::ofstream(root / "manifest.csv") << "group,label\nhealthy,0\npd,1\n";
}

template <typename F>
double seconds_of(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace testing_support
