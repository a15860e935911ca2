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
#include <random>

#include "test_support.hpp"
#include "vcrobust/dsp.hpp"

namespace vcrobust {
namespace {

using dsp::Complex;

std::vector<Complex> naive_dft(const std::vector<Complex>& x) {
  const auto n = x.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((i * k) % n) / n);
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> brute_convolve(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> y(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) y[i + j] += a[i] * b[j];
  }
  return y;
}

std::vector<double> random_vec(std::size_t n, std::mt19937& gen) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

TEST(FftTest, MatchesNaiveDftForManyLengths) {
  std::mt19937 gen(1);
  for (std::size_t n : {1, 2, 3, 5, 8, 12, 17, 64, 100, 127, 256, 400}) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = {std::normal_distribution<double>()(gen), std::normal_distribution<double>()(gen)};
    const auto expect = naive_dft(x);
    auto got = x;
    dsp::fft(got);
    for (std::size_t k = 0; k < n; ++k) ASSERT_LT(std::abs(got[k] - expect[k]), 1e-9 * (1 + n)) << n << " " << k;
    dsp::ifft(got);
    for (std::size_t k = 0; k < n; ++k) ASSERT_LT(std::abs(got[k] - x[k]), 1e-9) << n;
  }
}

TEST(FftTest, RealFftBinsAndPadding) {
  std::mt19937 gen(2);
  const auto x = random_vec(30, gen);
  const auto bins = dsp::rfft(x, 64);
  ASSERT_EQ(bins.size(), 33U);
  std::vector<Complex> padded(64, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) padded[i] = x[i];
  const auto ref = naive_dft(padded);
  for (std::size_t k = 0; k < bins.size(); ++k) EXPECT_LT(std::abs(bins[k] - ref[k]), 1e-9);
}

TEST(FftTest, NextPow2) {
  EXPECT_EQ(dsp::next_pow2(1), 1U);
  EXPECT_EQ(dsp::next_pow2(2), 2U);
  EXPECT_EQ(dsp::next_pow2(3), 4U);
  EXPECT_EQ(dsp::next_pow2(513), 1024U);
}

TEST(ConvolveTest, AllRoutesMatchBruteForce) {
  std::mt19937 gen(3);
  for (auto [na, nb] : std::vector<std::pair<std::size_t, std::size_t>>{
           {1, 1}, {1, 50}, {7, 3}, {64, 64}, {65, 200}, {1000, 333}, {4096, 17}}) {
    const auto a = random_vec(na, gen);
    const auto b = random_vec(nb, gen);
    const auto ref = brute_convolve(a, b);
    for (const auto& got : {dsp::convolve_fft(a, b), dsp::convolve_direct(a, b), dsp::convolve(a, b)}) {
      ASSERT_EQ(got.size(), ref.size());
      for (std::size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(got[i], ref[i], 1e-9) << na << "x" << nb;
    }
  }
  EXPECT_TRUE(dsp::convolve(std::vector<double>{}, std::vector<double>{1.0}).empty());
}

TEST(ConvolveTest, IdentityKernel) {
  std::mt19937 gen(4);
  const auto a = random_vec(500, gen);
  const auto y = dsp::convolve(a, std::vector<double>{1.0});
  ASSERT_EQ(y.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_DOUBLE_EQ(y[i], a[i]);
}

Complex response(const std::vector<dsp::Biquad>& cascade, double f, double fs) {
  const Complex z1 = std::polar(1.0, -2.0 * std::numbers::pi * f / fs);
  const Complex z2 = z1 * z1;
  Complex h = 1.0;
  for (const auto& s : cascade) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return h;
}

// Analog Butterworth magnitude at the bilinear-warped frequency.
double butterworth_mag(int order, double f, double fc, double fs, bool high) {
  double w = std::tan(std::numbers::pi * f / fs) / std::tan(std::numbers::pi * fc / fs);
  if (high) w = 1.0 / w;
  return 1.0 / std::sqrt(1.0 + std::pow(w, 2 * order));
}

TEST(ButterworthTest, MagnitudeMatchesAnalogPrototype) {
  const double fs = 16000;
  for (int order : {2, 4, 6}) {
    const auto lp = dsp::butterworth_lowpass(order, 3400, fs);
    const auto hp = dsp::butterworth_highpass(order, 300, fs);
    EXPECT_EQ(lp.size(), static_cast<std::size_t>(order / 2));
    for (double f : {50.0, 150.0, 300.0, 1000.0, 3000.0, 3400.0, 5000.0, 7000.0}) {
      EXPECT_NEAR(std::abs(response(lp, f, fs)), butterworth_mag(order, f, 3400, fs, false), 1e-9) << order << " " << f;
      EXPECT_NEAR(std::abs(response(hp, f, fs)), butterworth_mag(order, f, 300, fs, true), 1e-9) << order << " " << f;
    }
  }
  EXPECT_THROW(dsp::butterworth_lowpass(3, 1000, fs), std::exception);
}

TEST(ButterworthTest, FilterSteadyStateMatchesResponse) {
  const double fs = 16000;
  const auto lp = dsp::butterworth_lowpass(4, 1000, fs);
  for (double f : {200.0, 1000.0, 3000.0}) {
    const auto x = testing::sine(f, 1.0, 1.0, 16000);
    const auto y = dsp::filter(lp, x.samples());
    ASSERT_EQ(y.size(), x.size());
    const double amp = testing::tone_amplitude(y, f, 16000, 8000, 16000);
    EXPECT_NEAR(amp, std::abs(response(lp, f, fs)), 2e-3) << f;
  }
}

TEST(ButterworthTest, ImpulseResponseStartsAtB0) {
  const auto lp = dsp::butterworth_lowpass(2, 2000, 16000);
  std::vector<double> impulse(4, 0.0);
  impulse[0] = 1.0;
  const auto y = dsp::filter(lp, impulse);
  EXPECT_DOUBLE_EQ(y[0], lp[0].b0);
  EXPECT_NEAR(y[1], lp[0].b1 - lp[0].a1 * lp[0].b0, 1e-15);
}

}  // namespace
}  // namespace vcrobust
