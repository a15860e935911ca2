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

#include "vcrobust/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "vcrobust/dsp.hpp"
#include "vcrobust/error.hpp"

namespace vcrobust::features {

namespace {

[[noreturn]] void bad_config(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

// Mirror index into [0, n) without repeating the edge sample.
std::size_t reflect(std::int64_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::int64_t>(2 * (n - 1));
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<std::int64_t>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

}  // namespace

void validate(const MelConfig& cfg) {
  if (cfg.sample_rate <= 0) bad_config("sample_rate must be positive");
  if (cfg.win_length <= 0) bad_config("win_length must be positive");
  if (cfg.hop_length <= 0) bad_config("hop_length must be positive");
  if (cfg.fft_size < cfg.win_length) bad_config("fft_size must be >= win_length");
  if (cfg.n_mels < 1) bad_config("n_mels must be >= 1");
  if (!(cfg.fmin >= 0.0 && cfg.fmin < cfg.fmax && cfg.fmax <= cfg.sample_rate / 2.0)) {
    bad_config("need 0 <= fmin < fmax <= sample_rate / 2");
  }
  if (!(cfg.log_floor > 0.0)) bad_config("log_floor must be positive");
}

std::size_t frame_count(std::size_t length, int hop_length) noexcept {
  return 1 + length / static_cast<std::size_t>(hop_length);
}

Matrix stft_magnitude(const audio::AudioBuffer& buf, const MelConfig& cfg) {
  validate(cfg);
  if (buf.sample_rate() != cfg.sample_rate) {
    throw Error(ErrorCode::RateMismatch, "buffer is " + std::to_string(buf.sample_rate()) + " Hz, config expects " +
                                             std::to_string(cfg.sample_rate) + " Hz");
  }
  const std::size_t n = buf.size();
  const std::size_t frames = frame_count(n, cfg.hop_length);
  const auto win = static_cast<std::size_t>(cfg.win_length);
  const auto fft_size = static_cast<std::size_t>(cfg.fft_size);
  const std::int64_t pad = cfg.win_length / 2;
  // The window sits in the middle of the FFT frame when fft_size > win_length.
  const std::size_t lead = (fft_size - win) / 2;

  std::vector<double> window(win);
  for (std::size_t i = 0; i < win; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(win));
  }

  Matrix out(frames, static_cast<std::size_t>(cfg.n_bins()));
  if (n == 0) return out;
  std::vector<dsp::Complex> frame(fft_size);
  for (std::size_t f = 0; f < frames; ++f) {
    std::fill(frame.begin(), frame.end(), dsp::Complex{});
    const std::int64_t start = static_cast<std::int64_t>(f) * cfg.hop_length - pad;
    for (std::size_t i = 0; i < win; ++i) {
      frame[lead + i] = buf[reflect(start + static_cast<std::int64_t>(i), n)] * window[i];
    }
    dsp::fft(frame);
    for (std::size_t k = 0; k < out.cols; ++k) out(f, k) = std::abs(frame[k]);
  }
  return out;
}

double hz_to_mel(double hz) noexcept { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) noexcept { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<double> mel_edges_hz(const MelConfig& cfg) {
  const double lo = hz_to_mel(cfg.fmin);
  const double hi = hz_to_mel(cfg.fmax);
  const int points = cfg.n_mels + 2;
  std::vector<double> edges(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    edges[static_cast<std::size_t>(i)] = mel_to_hz(lo + (hi - lo) * i / (points - 1));
  }
  return edges;
}

}  // namespace

std::vector<double> mel_centers_hz(const MelConfig& cfg) {
  validate(cfg);
  auto edges = mel_edges_hz(cfg);
  return {edges.begin() + 1, edges.end() - 1};
}

Matrix mel_filterbank(const MelConfig& cfg) {
  validate(cfg);
  const auto edges = mel_edges_hz(cfg);
  const auto bins = static_cast<std::size_t>(cfg.n_bins());
  Matrix fb(static_cast<std::size_t>(cfg.n_mels), bins);
  const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.fft_size;
  for (std::size_t m = 0; m < fb.rows; ++m) {
    const double left = edges[m];
    const double centre = edges[m + 1];
    const double right = edges[m + 2];
    double total = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= centre) {
        w = (f - left) / (centre - left);
      } else if (f > centre && f < right) {
        w = (right - f) / (right - centre);
      }
      fb(m, k) = w;
      total += w;
    }
    if (total <= 0.0) {
      bad_config("mel filter " + std::to_string(m) + " covers no FFT bin; raise fft_size or lower n_mels");
    }
  }
  return fb;
}

MelFrames log_mel(const audio::AudioBuffer& buf, const MelConfig& cfg) {
  const Matrix mag = stft_magnitude(buf, cfg);
  const Matrix fb = mel_filterbank(cfg);
  MelFrames out{Matrix(mag.rows, fb.rows), cfg};
  for (std::size_t f = 0; f < mag.rows; ++f) {
    const auto spectrum = mag.row(f);
    for (std::size_t m = 0; m < fb.rows; ++m) {
      const auto weights = fb.row(m);
      double e = 0.0;
      for (std::size_t k = 0; k < weights.size(); ++k) e += weights[k] * spectrum[k];
      out.matrix(f, m) = std::log(std::max(e, cfg.log_floor));
    }
  }
  return out;
}

void write_mel_binary(const MelFrames& frames, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  const auto& c = frames.config;
  out << "VCROBUST-MEL 1\n"
      << "frames " << frames.matrix.rows << "\n"
      << "n_mels " << frames.matrix.cols << "\n"
      << "sample_rate " << c.sample_rate << "\n"
      << "win_length " << c.win_length << " hop_length " << c.hop_length << "\n"
      << "fft_size " << c.fft_size << "\n"
      << "fmin " << c.fmin << " fmax " << c.fmax << "\n"
      << "log_floor " << c.log_floor << " dtype float32le order row-major\n";
  for (double v : frames.matrix.values) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    const char bytes[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                           static_cast<char>((bits >> 16) & 0xFF), static_cast<char>((bits >> 24) & 0xFF)};
    out.write(bytes, 4);
  }
  if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

MelFrames read_mel_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::string lines[8];
  for (auto& l : lines) {
    if (!std::getline(in, l)) throw Error(ErrorCode::InvalidArgument, path.string() + ": truncated header");
  }
  if (lines[0] != "VCROBUST-MEL 1") throw Error(ErrorCode::InvalidArgument, path.string() + ": bad magic");
  MelFrames out;
  std::string key;
  std::size_t rows = 0, cols = 0;
  auto& c = out.config;
  std::istringstream(lines[1]) >> key >> rows;
  std::istringstream(lines[2]) >> key >> cols;
  std::istringstream(lines[3]) >> key >> c.sample_rate;
  std::istringstream(lines[4]) >> key >> c.win_length >> key >> c.hop_length;
  std::istringstream(lines[5]) >> key >> c.fft_size;
  std::istringstream(lines[6]) >> key >> c.fmin >> key >> c.fmax;
  std::istringstream(lines[7]) >> key >> c.log_floor;
  c.n_mels = static_cast<int>(cols);
  out.matrix = Matrix(rows, cols);
  for (double& v : out.matrix.values) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorCode::IoFailure, path.string() + ": truncated data");
    const std::uint32_t bits = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    v = static_cast<double>(std::bit_cast<float>(bits));
  }
  return out;
}

void to_json(nlohmann::json& j, const MelConfig& cfg) {
  j = nlohmann::json{{"sample_rate", cfg.sample_rate}, {"win_length", cfg.win_length}, {"hop_length", cfg.hop_length},
                     {"fft_size", cfg.fft_size},       {"n_mels", cfg.n_mels},         {"fmin", cfg.fmin},
                     {"fmax", cfg.fmax},               {"log_floor", cfg.log_floor}};
}

void from_json(const nlohmann::json& j, MelConfig& cfg) {
  cfg.sample_rate = j.value("sample_rate", cfg.sample_rate);
  cfg.win_length = j.value("win_length", cfg.win_length);
  cfg.hop_length = j.value("hop_length", cfg.hop_length);
  cfg.fft_size = j.value("fft_size", cfg.fft_size);
  cfg.n_mels = j.value("n_mels", cfg.n_mels);
  cfg.fmin = j.value("fmin", cfg.fmin);
  cfg.fmax = j.value("fmax", cfg.fmax);
  cfg.log_floor = j.value("log_floor", cfg.log_floor);
}

}  // namespace vcrobust::features
