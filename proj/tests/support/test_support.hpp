/**
 * Copyright 2026 The vcrobust Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef VCROBUST_TEST_SUPPORT_HPP
#define VCROBUST_TEST_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vcrobust/audio.hpp"

namespace vcrobust::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "vcrobust") {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(++counter));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  operator const std::filesystem::path&() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline audio::AudioBuffer sine(double freq, double amp, double seconds, int rate, double phase = 0.0) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate + phase);
  return audio::AudioBuffer(std::move(x), rate);
}

/// Independent generator for fixtures, deliberately not the library RNG.
inline audio::AudioBuffer white_noise(std::size_t n, double amp, int rate, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-amp, amp);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(gen);
  return audio::AudioBuffer(std::move(x), rate);
}

/// Speech-like fixture: a few harmonics under a slow envelope, quantized to
/// the PCM16 grid so it survives a write/read round trip exactly.
inline audio::AudioBuffer speechish(double seconds, int rate, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> f0d(90.0, 220.0);
  const double f0 = f0d(gen);
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    double v = 0.0;
    for (int h = 1; h <= 6; ++h) v += std::sin(2.0 * std::numbers::pi * f0 * h * t) / h;
    const double env = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * 3.0 * t);
    x[i] = std::round(0.2 * env * v * 32768.0) / 32768.0;
  }
  return audio::AudioBuffer(std::move(x), rate);
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& s) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << s;
}

/// Amplitude of a tone at freq by correlation with sin/cos over whole periods.
inline double tone_amplitude(std::span<const double> x, double freq, int rate, std::size_t begin = 0,
                             std::size_t end = 0) {
  if (end == 0 || end > x.size()) end = x.size();
  double s = 0, c = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const double w = 2.0 * std::numbers::pi * freq * i / rate;
    s += x[i] * std::sin(w);
    c += x[i] * std::cos(w);
  }
  const double n = static_cast<double>(end - begin);
  return 2.0 * std::sqrt(s * s + c * c) / n;
}

inline double db(double ratio) { return 20.0 * std::log10(ratio); }

// Schroeder backward integration, T20 line fit between -5 and -25 dB.
inline double schroeder_rt60(std::span<const double> h, int rate) {
  std::vector<double> edc(h.size());
  double acc = 0;
  for (std::size_t i = h.size(); i-- > 0;) {
    acc += h[i] * h[i];
    edc[i] = acc;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double level = 10.0 * std::log10(edc[i] / edc[0]);
    if (level > -5.0 || level < -25.0) continue;
    const double t = static_cast<double>(i) / rate;
    sx += t;
    sy += level;
    sxx += t * t;
    sxy += t * level;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -60.0 / slope;
}

}  // namespace vcrobust::testing

#endif  // VCROBUST_TEST_SUPPORT_HPP
