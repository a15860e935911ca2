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

#ifndef VCROBUST_AUDIO_HPP
#define VCROBUST_AUDIO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vcrobust::audio {

/// Mono sample sequence. Nominal range is [-1, 1]; nothing here clamps, the
/// PCM writer does that at quantization time.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  AudioBuffer(std::vector<double> samples, int sample_rate);
  AudioBuffer(std::size_t length, int sample_rate);

  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double duration_s() const noexcept {
    return sample_rate_ > 0 ? static_cast<double>(samples_.size()) / sample_rate_ : 0.0;
  }

  std::span<const double> samples() const noexcept { return samples_; }
  std::span<double> samples() noexcept { return samples_; }
  std::vector<double>& data() noexcept { return samples_; }
  const std::vector<double>& data() const noexcept { return samples_; }

  double operator[](std::size_t i) const noexcept { return samples_[i]; }
  double& operator[](std::size_t i) noexcept { return samples_[i]; }

  bool operator==(const AudioBuffer&) const = default;

 private:
  std::vector<double> samples_;
  int sample_rate_ = 0;
};

enum class WavEncoding { PCM16, PCM24, FLOAT32 };

std::string_view to_string(WavEncoding enc) noexcept;
WavEncoding parse_wav_encoding(std::string_view name);

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  std::size_t frames = 0;
  WavEncoding encoding = WavEncoding::PCM16;
  double duration_s() const noexcept {
    return sample_rate > 0 ? static_cast<double>(frames) / sample_rate : 0.0;
  }
};

/// Header-only probe; does not decode sample data.
WavInfo wav_info(const std::filesystem::path& path);

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes, WavInfo* info = nullptr);
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buf, WavEncoding enc);

/// Reads RIFF/WAVE (PCM 16/24-bit, IEEE float 32-bit). Multi-channel input is
/// downmixed by per-frame mean. Unknown chunks are skipped.
AudioBuffer read_wav(const std::filesystem::path& path, WavInfo* info = nullptr);

/// Writes a canonical RIFF/WAVE file (44-byte header for PCM16). PCM paths
/// clamp to [-1, 1] and round half away from zero.
void write_wav(const AudioBuffer& buf, const std::filesystem::path& path, WavEncoding enc);

/// Band-limited rational-ratio resampling with a Kaiser-windowed sinc kernel.
/// Output length is round(n * target / source).
AudioBuffer resample(const AudioBuffer& buf, int target_rate);

double rms(const AudioBuffer& buf);
double rms(std::span<const double> samples);
double peak(const AudioBuffer& buf) noexcept;

/// Throws InvalidParams if any sample is NaN or infinite.
void require_finite(const AudioBuffer& buf, std::string_view where);

}  // namespace vcrobust::audio

#endif  // VCROBUST_AUDIO_HPP
