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

#ifndef VCROBUST_DSP_HPP
#define VCROBUST_DSP_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vcrobust::dsp {

using Complex = std::complex<double>;

/// In-place forward DFT of any length (radix-2 for powers of two, Bluestein
/// otherwise). No normalization.
void fft(std::vector<Complex>& data);
/// In-place inverse DFT, normalized by 1/n.
void ifft(std::vector<Complex>& data);

/// DFT of a real sequence zero-padded to n points; returns the n/2 + 1
/// non-negative-frequency bins.
std::vector<Complex> rfft(std::span<const double> x, std::size_t n);

std::size_t next_pow2(std::size_t n) noexcept;

/// Full linear convolution, length |a| + |b| - 1 (empty if either is empty).
std::vector<double> convolve_fft(std::span<const double> a, std::span<const double> b);
std::vector<double> convolve_direct(std::span<const double> a, std::span<const double> b);
/// Picks the cheaper of the two routes.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

/// Second-order IIR section, transposed direct form II.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;

  static Biquad lowpass(double cutoff_hz, double q, double sample_rate);
  static Biquad highpass(double cutoff_hz, double q, double sample_rate);
};

/// Butterworth cascades built from biquads with the standard pole Q values.
/// order must be even.
std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double sample_rate);
std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double sample_rate);

/// Runs the cascade forward over x from zero initial state.
std::vector<double> filter(std::span<const Biquad> cascade, std::span<const double> x);

}  // namespace vcrobust::dsp

#endif  // VCROBUST_DSP_HPP
