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

#include "vcrobust/dsp.hpp"

#include <cmath>

#include "vcrobust/error.hpp"

namespace vcrobust::dsp {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void radix2(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::size_t half = len / 2;
    // Twiddles computed directly rather than by repeated multiplication, to
    // keep the error at O(eps log n).
    std::vector<Complex> w(half);
    for (std::size_t k = 0; k < half; ++k) {
      w[k] = std::polar(1.0, angle * static_cast<double>(k));
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + half] * w[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

void bluestein(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  const std::size_t m = next_pow2(2 * n - 1);
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle argument small for large n.
    const auto k2 = static_cast<double>((k * k) % (2 * n));
    chirp[k] = std::polar(1.0, sign * M_PI * k2 / static_cast<double>(n));
  }
  std::vector<Complex> x(m), y(m);
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
  y[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    y[k] = std::conj(chirp[k]);
    y[m - k] = std::conj(chirp[k]);
  }
  radix2(x, false);
  radix2(y, false);
  for (std::size_t i = 0; i < m; ++i) x[i] *= y[i];
  radix2(x, true);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] / static_cast<double>(m) * chirp[k];
}

void transform(std::vector<Complex>& a, bool inverse) {
  if (a.size() <= 1) return;
  if (is_pow2(a.size())) {
    radix2(a, inverse);
  } else {
    bluestein(a, inverse);
  }
}

}  // namespace

std::size_t next_pow2(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<Complex>& data) { transform(data, false); }

void ifft(std::vector<Complex>& data) {
  transform(data, true);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

std::vector<Complex> rfft(std::span<const double> x, std::size_t n) {
  std::vector<Complex> buf(n);
  for (std::size_t i = 0; i < std::min(n, x.size()); ++i) buf[i] = x[i];
  fft(buf);
  buf.resize(n / 2 + 1);
  return buf;
}

std::vector<double> convolve_direct(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

std::vector<double> convolve_fft(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(len);
  std::vector<Complex> fa(n), fb(n);
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  fft(fa);
  fft(fb);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  ifft(fa);
  std::vector<double> out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = fa[i].real();
  return out;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  const std::size_t shorter = std::min(a.size(), b.size());
  if (shorter <= 64) return convolve_direct(a, b);
  return convolve_fft(a, b);
}

Biquad Biquad::lowpass(double cutoff_hz, double q, double sample_rate) {
  const double w0 = 2.0 * M_PI * cutoff_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  Biquad s;
  s.b0 = (1.0 - cw) / 2.0 / a0;
  s.b1 = (1.0 - cw) / a0;
  s.b2 = s.b0;
  s.a1 = -2.0 * cw / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

Biquad Biquad::highpass(double cutoff_hz, double q, double sample_rate) {
  const double w0 = 2.0 * M_PI * cutoff_hz / sample_rate;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  Biquad s;
  s.b0 = (1.0 + cw) / 2.0 / a0;
  s.b1 = -(1.0 + cw) / a0;
  s.b2 = s.b0;
  s.a1 = -2.0 * cw / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

namespace {

std::vector<double> butterworth_qs(int order) {
  if (order <= 0 || order % 2 != 0) {
    throw Error(ErrorCode::InvalidParams, "Butterworth order must be a positive even number");
  }
  std::vector<double> qs;
  for (int k = 0; k < order / 2; ++k) {
    const double theta = M_PI * (2.0 * k + 1.0) / (2.0 * order);
    qs.push_back(1.0 / (2.0 * std::cos(theta)));
  }
  return qs;
}

}  // namespace

std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double sample_rate) {
  std::vector<Biquad> out;
  for (double q : butterworth_qs(order)) out.push_back(Biquad::lowpass(cutoff_hz, q, sample_rate));
  return out;
}

std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double sample_rate) {
  std::vector<Biquad> out;
  for (double q : butterworth_qs(order)) out.push_back(Biquad::highpass(cutoff_hz, q, sample_rate));
  return out;
}

std::vector<double> filter(std::span<const Biquad> cascade, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const auto& s : cascade) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

}  // namespace vcrobust::dsp
