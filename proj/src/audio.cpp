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

#include "vcrobust/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

#include "vcrobust/error.hpp"

namespace vcrobust::audio {

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate <= 0) {
    throw Error(ErrorCode::InvalidRate, "sample rate must be positive, got " + std::to_string(sample_rate));
  }
}

AudioBuffer::AudioBuffer(std::size_t length, int sample_rate)
    : AudioBuffer(std::vector<double>(length, 0.0), sample_rate) {}

std::string_view to_string(WavEncoding enc) noexcept {
  switch (enc) {
    case WavEncoding::PCM16: return "pcm16";
    case WavEncoding::PCM24: return "pcm24";
    case WavEncoding::FLOAT32: return "float32";
  }
  return "unknown";
}

WavEncoding parse_wav_encoding(std::string_view name) {
  if (name == "pcm16") return WavEncoding::PCM16;
  if (name == "pcm24") return WavEncoding::PCM24;
  if (name == "float32") return WavEncoding::FLOAT32;
  throw Error(ErrorCode::UnsupportedEncoding, "unknown encoding '" + std::string(name) + "'");
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

struct ParsedHeader {
  WavInfo info;
  std::size_t data_offset = 0;
  std::size_t data_bytes = 0;
  int bytes_per_sample = 0;
};

ParsedHeader parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::MalformedWav, "missing RIFF/WAVE signature");
  }
  ParsedHeader h;
  bool have_fmt = false;
  bool have_data = false;
  std::uint16_t format = 0;
  std::uint16_t bits = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + 16 > bytes.size()) {
        throw Error(ErrorCode::MalformedWav, "truncated fmt chunk");
      }
      const std::uint8_t* f = bytes.data() + body;
      format = le16(f);
      h.info.channels = le16(f + 2);
      h.info.sample_rate = static_cast<int>(le32(f + 4));
      bits = le16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40 || body + 40 > bytes.size()) {
          throw Error(ErrorCode::MalformedWav, "truncated WAVE_FORMAT_EXTENSIBLE fmt chunk");
        }
        format = le16(f + 24);  // first two bytes of the sub-format GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      h.data_offset = body;
      // Streaming writers sometimes leave a placeholder size; trust the file.
      h.data_bytes = std::min(size, bytes.size() - std::min(body, bytes.size()));
      have_data = true;
      break;
    }
    // Unknown chunks are skipped; RIFF pads odd-sized chunks by one byte.
    pos = body + size + (size & 1U);
  }
  if (!have_fmt) throw Error(ErrorCode::MalformedWav, "no fmt chunk before data");
  if (!have_data) throw Error(ErrorCode::MalformedWav, "no data chunk");
  if (h.info.channels <= 0) throw Error(ErrorCode::MalformedWav, "channel count is zero");
  if (h.info.sample_rate <= 0) throw Error(ErrorCode::MalformedWav, "sample rate is zero");

  if (format == kFormatPcm && bits == 16) {
    h.info.encoding = WavEncoding::PCM16;
  } else if (format == kFormatPcm && bits == 24) {
    h.info.encoding = WavEncoding::PCM24;
  } else if (format == kFormatFloat && bits == 32) {
    h.info.encoding = WavEncoding::FLOAT32;
  } else {
    throw Error(ErrorCode::UnsupportedEncoding,
                "format code " + std::to_string(format) + " with " + std::to_string(bits) + " bits per sample");
  }
  h.bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = static_cast<std::size_t>(h.bytes_per_sample) * h.info.channels;
  h.info.frames = h.data_bytes / frame_bytes;
  return h;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path, std::size_t limit = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes;
  if (limit == 0) {
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } else {
    bytes.resize(limit);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(limit));
    bytes.resize(static_cast<std::size_t>(in.gcount()));
  }
  return bytes;
}

double decode_sample(const std::uint8_t* p, WavEncoding enc) {
  switch (enc) {
    case WavEncoding::PCM16:
      return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case WavEncoding::PCM24: {
      std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
      if (v & 0x800000) v |= ~0xFFFFFF;
      return v / 8388608.0;
    }
    case WavEncoding::FLOAT32:
      return static_cast<double>(std::bit_cast<float>(le32(p)));
  }
  return 0.0;
}

std::int32_t quantize(double x, double scale, std::int32_t lo, std::int32_t hi) {
  const double clamped = std::clamp(x, -1.0, 1.0);
  // std::round is round-half-away-from-zero.
  const double q = std::round(clamped * scale);
  return static_cast<std::int32_t>(std::clamp(q, static_cast<double>(lo), static_cast<double>(hi)));
}

// Zeroth-order modified Bessel function of the first kind, power series.
double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

}  // namespace

WavInfo wav_info(const std::filesystem::path& path) {
  // Headers of files from phones can carry large metadata chunks before data.
  auto bytes = slurp(path, 1 << 16);
  try {
    auto h = parse_header(bytes);
    const auto file_size = std::filesystem::file_size(path);
    const std::size_t available = file_size > h.data_offset ? file_size - h.data_offset : 0;
    const auto& raw = bytes;
    const std::size_t declared = le32(raw.data() + h.data_offset - 4);
    const std::size_t data_bytes = std::min(declared, available);
    h.info.frames = data_bytes / (static_cast<std::size_t>(h.bytes_per_sample) * h.info.channels);
    return h.info;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedWav && bytes.size() == (1 << 16)) {
      return parse_header(slurp(path)).info;
    }
    throw;
  }
}

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes, WavInfo* info) {
  const auto h = parse_header(bytes);
  const int channels = h.info.channels;
  std::vector<double> mono(h.info.frames, 0.0);
  const std::uint8_t* p = bytes.data() + h.data_offset;
  for (std::size_t i = 0; i < h.info.frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      acc += decode_sample(p, h.info.encoding);
      p += h.bytes_per_sample;
    }
    mono[i] = channels == 1 ? acc : acc / channels;
  }
  if (info != nullptr) *info = h.info;
  AudioBuffer out(std::move(mono), h.info.sample_rate);
  require_finite(out, "decode_wav");
  return out;
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buf, WavEncoding enc) {
  const std::uint16_t bits = enc == WavEncoding::PCM16 ? 16 : (enc == WavEncoding::PCM24 ? 24 : 32);
  const std::uint16_t format = enc == WavEncoding::FLOAT32 ? kFormatFloat : kFormatPcm;
  const std::uint32_t bytes_per_sample = bits / 8U;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(buf.size() * bytes_per_sample);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, format);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(buf.sample_rate()));
  put32(out, static_cast<std::uint32_t>(buf.sample_rate()) * bytes_per_sample);
  put16(out, static_cast<std::uint16_t>(bytes_per_sample));
  put16(out, bits);
  put_tag(out, "data");
  put32(out, data_bytes);

  for (double x : buf.samples()) {
    switch (enc) {
      case WavEncoding::PCM16:
        put16(out, static_cast<std::uint16_t>(quantize(x, 32768.0, -32768, 32767)));
        break;
      case WavEncoding::PCM24: {
        const auto v = static_cast<std::uint32_t>(quantize(x, 8388608.0, -8388608, 8388607));
        out.push_back(static_cast<std::uint8_t>(v & 0xFF));
        out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
        out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
        break;
      }
      case WavEncoding::FLOAT32:
        put32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
        break;
    }
  }
  return out;
}

AudioBuffer read_wav(const std::filesystem::path& path, WavInfo* info) {
  const auto bytes = slurp(path);
  try {
    return decode_wav(bytes, info);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write_wav(const AudioBuffer& buf, const std::filesystem::path& path, WavEncoding enc) {
  if (buf.sample_rate() <= 0) throw Error(ErrorCode::InvalidRate, "buffer has no sample rate");
  const auto bytes = encode_wav(buf, enc);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

AudioBuffer resample(const AudioBuffer& buf, int target_rate) {
  if (target_rate <= 0) {
    throw Error(ErrorCode::InvalidRate, "target rate must be positive, got " + std::to_string(target_rate));
  }
  const int source_rate = buf.sample_rate();
  if (target_rate == source_rate) return buf;

  const std::int64_t g = std::gcd(static_cast<std::int64_t>(source_rate), static_cast<std::int64_t>(target_rate));
  const std::int64_t up = target_rate / g;    // L
  const std::int64_t down = source_rate / g;  // M
  const std::size_t n_in = buf.size();
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_in) * static_cast<double>(target_rate) / source_rate));

  // 64 zero-crossings of the lower-rate sinc; expressed in input samples.
  constexpr double kZeroCrossings = 64.0;
  constexpr double kKaiserBeta = 8.6;
  const double ratio = static_cast<double>(source_rate) / target_rate;
  const double half_width = 0.5 * kZeroCrossings * std::max(1.0, ratio);
  const double cutoff_hz = 0.95 * 0.5 * std::min(source_rate, target_rate);
  const double fc = cutoff_hz / source_rate;  // cycles per input sample
  const double i0_beta = bessel_i0(kKaiserBeta);
  const auto taps = static_cast<std::int64_t>(std::ceil(half_width));

  auto kernel = [&](double tau) {
    const double r = tau / half_width;
    if (r <= -1.0 || r >= 1.0) return 0.0;
    const double w = bessel_i0(kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
    const double arg = 2.0 * fc * tau;
    const double sinc = arg == 0.0 ? 1.0 : std::sin(M_PI * arg) / (M_PI * arg);
    return 2.0 * fc * sinc * w;
  };

  // The fractional offset of output n is (n*M mod L)/L, so L phase tables
  // cover every output sample.
  const std::size_t row = static_cast<std::size_t>(2 * taps);
  std::vector<double> table(static_cast<std::size_t>(up) * row);
  for (std::int64_t phase = 0; phase < up; ++phase) {
    const double frac = static_cast<double>(phase) / static_cast<double>(up);
    for (std::int64_t k = 0; k < 2 * taps; ++k) {
      const std::int64_t j = k - taps + 1;  // input offset relative to floor(t)
      table[static_cast<std::size_t>(phase) * row + static_cast<std::size_t>(k)] = kernel(frac - static_cast<double>(j));
    }
  }

  std::vector<double> out(n_out, 0.0);
  const auto& x = buf.data();
  const auto n_in_signed = static_cast<std::int64_t>(n_in);
  for (std::size_t n = 0; n < n_out; ++n) {
    const std::int64_t num = static_cast<std::int64_t>(n) * down;
    const std::int64_t base = num / up;
    const std::int64_t phase = num % up;
    const double* h = table.data() + static_cast<std::size_t>(phase) * row;
    const std::int64_t j0 = base - taps + 1;
    const std::int64_t k_begin = std::max<std::int64_t>(0, -j0);
    const std::int64_t k_end = std::min<std::int64_t>(2 * taps, n_in_signed - j0);
    double acc = 0.0;
    for (std::int64_t k = k_begin; k < k_end; ++k) {
      acc += h[k] * x[static_cast<std::size_t>(j0 + k)];
    }
    out[n] = acc;
  }
  return AudioBuffer(std::move(out), target_rate);
}

double rms(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::EmptyBuffer, "rms of an empty buffer");
  double acc = 0.0;
  for (double s : samples) acc += s * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

double rms(const AudioBuffer& buf) { return rms(buf.samples()); }

double peak(const AudioBuffer& buf) noexcept {
  double p = 0.0;
  for (double s : buf.samples()) p = std::max(p, std::abs(s));
  return p;
}

void require_finite(const AudioBuffer& buf, std::string_view where) {
  for (std::size_t i = 0; i < buf.size(); ++i) {
    if (!std::isfinite(buf[i])) {
      throw Error(ErrorCode::InvalidParams,
                  std::string(where) + ": non-finite sample at index " + std::to_string(i));
    }
  }
}

}  // namespace vcrobust::audio
