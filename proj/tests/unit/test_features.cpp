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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <cstring>
#include <random>

#include "test_support.hpp"
#include "vcrobust/error.hpp"
#include "vcrobust/features.hpp"

namespace vcrobust {
namespace {

using audio::AudioBuffer;
using features::MelConfig;

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

TEST(StftTest, SilenceShape) {
  const MelConfig cfg;
  const auto m = features::stft_magnitude(AudioBuffer(std::vector<double>(16000, 0.0), 16000), cfg);
  EXPECT_EQ(m.rows, 101U);
  EXPECT_EQ(m.cols, 257U);
  for (double v : m.values) ASSERT_EQ(v, 0.0);
}

TEST(StftTest, FrameCountForAllLengths) {
  const MelConfig cfg;
  for (std::size_t n : {0, 1, 2, 3, 159, 160, 161, 199, 200, 401, 1234, 16000}) {
    const auto x = testing::white_noise(n, 0.5, 16000, static_cast<std::uint32_t>(n));
    const auto m = features::stft_magnitude(x, cfg);
    EXPECT_EQ(m.rows, 1 + n / 160) << n;
    EXPECT_EQ(features::frame_count(n, 160), 1 + n / 160);
    for (double v : m.values) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(StftTest, MatchesNaiveWindowedDft) {
  const MelConfig cfg;
  const auto x = testing::white_noise(4000, 0.5, 16000, 4);
  const auto m = features::stft_magnitude(x, cfg);
  // Interior frame: no padding involved. Window centred in the FFT frame.
  const std::size_t f = 10;
  const std::int64_t start = static_cast<std::int64_t>(f) * 160 - 200;
  const std::size_t lead = (512 - 400) / 2;
  std::vector<double> frame(512, 0.0);
  for (std::size_t i = 0; i < 400; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / 400.0);
    frame[lead + i] = x[static_cast<std::size_t>(start) + i] * w;
  }
  for (std::size_t k = 0; k < 257; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < 512; ++i) acc += frame[i] * std::polar(1.0, -2.0 * std::numbers::pi * ((i * k) % 512) / 512.0);
    ASSERT_NEAR(m(f, k), std::abs(acc), 1e-9) << k;
  }
}

TEST(StftTest, ReflectionPaddingAtStart) {
  const MelConfig cfg;
  const auto x = testing::white_noise(1000, 0.5, 16000, 5);
  const auto m = features::stft_magnitude(x, cfg);
  std::vector<double> frame(512, 0.0);
  for (std::size_t i = 0; i < 400; ++i) {
    const std::int64_t idx = static_cast<std::int64_t>(i) - 200;
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / 400.0);
    frame[56 + i] = x[static_cast<std::size_t>(std::llabs(idx))] * w;
  }
  std::complex<double> acc = 0;
  for (std::size_t i = 0; i < 512; ++i) acc += frame[i] * std::polar(1.0, -2.0 * std::numbers::pi * ((i * 7) % 512) / 512.0);
  EXPECT_NEAR(m(0, 7), std::abs(acc), 1e-9);
}

TEST(StftTest, ToneAndDcPeaks) {
  const MelConfig cfg;
  const auto tone = features::stft_magnitude(testing::sine(1000.0, 1.0, 1.0, 16000), cfg);
  const auto expected = static_cast<std::size_t>(std::lround(1000.0 * 512 / 16000));
  for (std::size_t f = 2; f + 2 < tone.rows; ++f) ASSERT_EQ(argmax(tone.row(f)), expected) << f;
  const auto dc = features::stft_magnitude(AudioBuffer(std::vector<double>(4000, 0.3), 16000), cfg);
  for (std::size_t f = 0; f < dc.rows; ++f) ASSERT_EQ(argmax(dc.row(f)), 0U);
}

TEST(StftTest, RateMismatch) {
  try {
    features::stft_magnitude(AudioBuffer(std::vector<double>(100, 0.0), 8000), MelConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RateMismatch);
  }
}

TEST(MelTest, ScaleFormula) {
  EXPECT_NEAR(features::hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  EXPECT_NEAR(features::mel_to_hz(features::hz_to_mel(1234.5)), 1234.5, 1e-9);
  EXPECT_EQ(features::hz_to_mel(0.0), 0.0);
}

TEST(MelTest, CentersMatchClosedFormGrid) {
  for (int n_mels : {1, 10, 40, 80}) {
    MelConfig cfg;
    cfg.n_mels = n_mels;
    cfg.fmin = 20.0;
    cfg.fmax = 7600.0;
    const auto centers = features::mel_centers_hz(cfg);
    ASSERT_EQ(centers.size(), static_cast<std::size_t>(n_mels));
    const double lo = 2595.0 * std::log10(1.0 + 20.0 / 700.0);
    const double hi = 2595.0 * std::log10(1.0 + 7600.0 / 700.0);
    for (int k = 0; k < n_mels; ++k) {
      const double mel = lo + (hi - lo) * (k + 1) / (n_mels + 1);
      const double hz = 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
      EXPECT_NEAR(centers[k], hz, 1e-6) << n_mels << " " << k;
    }
  }
}

TEST(MelTest, FilterbankShapeAndCoverage) {
  MelConfig cfg;
  const auto fb = features::mel_filterbank(cfg);
  const auto centers = features::mel_centers_hz(cfg);
  ASSERT_EQ(fb.rows, 80U);
  ASSERT_EQ(fb.cols, 257U);
  const double bin_hz = 16000.0 / 512;
  for (std::size_t m = 0; m < fb.rows; ++m) {
    double sum = 0;
    std::size_t first = fb.cols, last = 0;
    for (std::size_t k = 0; k < fb.cols; ++k) {
      ASSERT_GE(fb(m, k), 0.0);
      sum += fb(m, k);
      if (fb(m, k) > 0) {
        first = std::min(first, k);
        last = std::max(last, k);
      }
    }
    ASSERT_GT(sum, 0.0) << m;
    for (std::size_t k = first; k <= last; ++k) ASSERT_GT(fb(m, k), 0.0) << "gap in filter " << m;
    // Peak sits on a bin adjacent to the filter centre.
    EXPECT_LE(std::abs(static_cast<double>(argmax(fb.row(m))) * bin_hz - centers[m]), bin_hz) << m;
  }
  const auto first_bin = static_cast<std::size_t>(std::ceil(centers.front() / bin_hz));
  const auto last_bin = static_cast<std::size_t>(std::floor(centers.back() / bin_hz));
  for (std::size_t k = first_bin; k <= last_bin; ++k) {
    double col = 0;
    for (std::size_t m = 0; m < fb.rows; ++m) col += fb(m, k);
    ASSERT_GT(col, 0.0) << "bin " << k;
  }
}

TEST(MelTest, SingleFilterPeaksAtMelMidpoint) {
  MelConfig cfg;
  cfg.n_mels = 1;
  const auto fb = features::mel_filterbank(cfg);
  const double mid_hz = features::mel_to_hz(features::hz_to_mel(8000.0) / 2);
  EXPECT_NEAR(static_cast<double>(argmax(fb.row(0))) * 16000.0 / 512, mid_hz, 16000.0 / 512);
}

TEST(MelTest, ConfigValidation) {
  auto expect_invalid = [](MelConfig cfg) {
    try {
      features::validate(cfg);
      features::mel_filterbank(cfg);
      ADD_FAILURE() << "expected InvalidConfig";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    }
  };
  MelConfig c;
  c.fft_size = 256;
  expect_invalid(c);
  c = {};
  c.fmax = 9000;
  expect_invalid(c);
  c = {};
  c.fmin = 8000;
  expect_invalid(c);
  c = {};
  c.n_mels = 0;
  expect_invalid(c);
  c = {};
  c.log_floor = 0;
  expect_invalid(c);
  c = {};
  c.n_mels = 400;  // far narrower than one FFT bin at the low end
  expect_invalid(c);
}

TEST(LogMelTest, SilenceIsFloor) {
  const MelConfig cfg;
  const auto mel = features::log_mel(AudioBuffer(std::vector<double>(3200, 0.0), 16000), cfg);
  EXPECT_EQ(mel.matrix.rows, 21U);
  EXPECT_EQ(mel.matrix.cols, 80U);
  for (double v : mel.matrix.values) ASSERT_EQ(v, std::log(1e-10));
}

TEST(LogMelTest, ScaleCovariance) {
  const MelConfig cfg;
  const auto x = testing::speechish(0.5, 16000, 6);
  const auto base = features::log_mel(x, cfg);
  for (double k : {2.0, 0.25, 10.0}) {
    auto y = x;
    for (auto& v : y.data()) v *= k;
    const auto scaled = features::log_mel(y, cfg);
    const double floor = std::log(cfg.log_floor);
    for (std::size_t i = 0; i < base.matrix.values.size(); ++i) {
      if (base.matrix.values[i] <= floor || scaled.matrix.values[i] <= floor) continue;
      ASSERT_NEAR(scaled.matrix.values[i] - base.matrix.values[i], std::log(k), 1e-6);
    }
  }
}

TEST(LogMelTest, ToneLandsInContainingFilter) {
  const MelConfig cfg;
  const auto mel = features::log_mel(testing::sine(1000.0, 0.5, 0.5, 16000), cfg);
  const auto fb = features::mel_filterbank(cfg);
  const auto bin = static_cast<std::size_t>(std::lround(1000.0 * 512 / 16000));
  for (std::size_t f = 2; f + 2 < mel.matrix.rows; ++f) {
    const auto m = argmax(mel.matrix.row(f));
    ASSERT_GT(fb(m, bin), 0.0) << "frame " << f << " filter " << m;
  }
}

TEST(MelBinaryTest, RoundTripAndHeader) {
  testing::TempDir dir;
  MelConfig cfg;
  cfg.n_mels = 40;
  const auto mel = features::log_mel(testing::speechish(0.3, 16000, 2), cfg);
  features::write_mel_binary(mel, dir / "m.bin");
  const auto bytes = testing::read_file(dir / "m.bin");
  std::size_t pos = 0;
  for (int line = 0; line < 8; ++line) {
    pos = bytes.find('\n', pos);
    ASSERT_NE(pos, std::string::npos);
    ++pos;
  }
  EXPECT_EQ(bytes.size() - pos, mel.matrix.rows * mel.matrix.cols * 4);
  float first;
  std::memcpy(&first, bytes.data() + pos, 4);
  EXPECT_EQ(first, static_cast<float>(mel.matrix.values[0]));
  const auto back = features::read_mel_binary(dir / "m.bin");
  EXPECT_EQ(back.matrix.rows, mel.matrix.rows);
  EXPECT_EQ(back.matrix.cols, mel.matrix.cols);
  EXPECT_EQ(back.config, cfg);
  for (std::size_t i = 0; i < mel.matrix.values.size(); ++i) {
    ASSERT_EQ(back.matrix.values[i], static_cast<double>(static_cast<float>(mel.matrix.values[i])));
  }
}

TEST(MelConfigJsonTest, PartialOverride) {
  const auto cfg = nlohmann::json::parse(R"({"n_mels": 64, "fmax": 7600})").get<MelConfig>();
  EXPECT_EQ(cfg.n_mels, 64);
  EXPECT_EQ(cfg.fmax, 7600.0);
  EXPECT_EQ(cfg.hop_length, 160);
  EXPECT_EQ(nlohmann::json(cfg).get<MelConfig>(), cfg);
}

}  // namespace
}  // namespace vcrobust
