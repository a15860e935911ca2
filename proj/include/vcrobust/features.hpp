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

#ifndef VCROBUST_FEATURES_HPP
#define VCROBUST_FEATURES_HPP

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "vcrobust/audio.hpp"

namespace vcrobust::features {

struct MelConfig {
  int sample_rate = 16000;
  int win_length = 400;
  int hop_length = 160;
  int fft_size = 512;
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;

  int n_bins() const noexcept { return fft_size / 2 + 1; }
  bool operator==(const MelConfig&) const = default;
};

void validate(const MelConfig& cfg);

/// Row-major frames x columns matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

struct MelFrames {
  Matrix matrix;  // frames x n_mels, natural-log values
  MelConfig config;
};

/// 1 + floor(length / hop).
std::size_t frame_count(std::size_t length, int hop_length) noexcept;

/// Hann-windowed magnitude spectra, frames centred on multiples of the hop
/// with win_length/2 samples of reflection padding on each side.
Matrix stft_magnitude(const audio::AudioBuffer& buf, const MelConfig& cfg);

double hz_to_mel(double hz) noexcept;
double mel_to_hz(double mel) noexcept;

/// n_mels x (fft_size/2 + 1) triangular filters, uniformly spaced on the
/// HTK mel scale between fmin and fmax.
Matrix mel_filterbank(const MelConfig& cfg);

/// Centre frequency (Hz) of every filter, in filter order.
std::vector<double> mel_centers_hz(const MelConfig& cfg);

MelFrames log_mel(const audio::AudioBuffer& buf, const MelConfig& cfg);

/// Eight text header lines followed by little-endian float32 values, row-major.
void write_mel_binary(const MelFrames& frames, const std::filesystem::path& path);
MelFrames read_mel_binary(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const MelConfig& cfg);
/// Fields absent from j keep their defaults.
void from_json(const nlohmann::json& j, MelConfig& cfg);

}  // namespace vcrobust::features

#endif  // VCROBUST_FEATURES_HPP
