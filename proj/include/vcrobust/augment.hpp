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

#ifndef VCROBUST_AUGMENT_HPP
#define VCROBUST_AUGMENT_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "vcrobust/audio.hpp"
#include "vcrobust/rng.hpp"

namespace vcrobust::augment {

using audio::AudioBuffer;

// ---------------------------------------------------------------------------
// Effects

struct Gain {
  double gain_db = 0.0;
  bool operator==(const Gain&) const = default;
};

enum class OffsetPolicy { Random, Fixed };

struct AdditiveNoise {
  std::string noise_id;
  double snr_db = 20.0;
  OffsetPolicy offset_policy = OffsetPolicy::Random;
  std::uint64_t offset = 0;  // meaningful only for OffsetPolicy::Fixed
  bool operator==(const AdditiveNoise&) const = default;
};

struct Reverb {
  double rt60_s = 0.3;
  double predelay_ms = 0.0;
  double wet_dry = 0.5;
  /// Filled in when the chain is applied so replay regenerates the same RIR.
  std::optional<std::uint64_t> rir_seed;
  bool operator==(const Reverb&) const = default;
};

struct Telephony {
  int codec_rate_hz = 8000;
  double bandpass_low_hz = 300.0;
  double bandpass_high_hz = 3400.0;
  double mu = 255.0;
  bool operator==(const Telephony&) const = default;
};

using Effect = std::variant<Gain, AdditiveNoise, Reverb, Telephony>;

/// Throws InvalidParams when an effect violates its parameter invariants.
void validate(const Effect& effect);

std::string_view family_name(const Effect& effect);

// ---------------------------------------------------------------------------
// Primitive operations

/// Multiplies every sample by 10^(gain_db/20). No clamping.
AudioBuffer apply_gain(const AudioBuffer& buf, double gain_db);

/// signal + k * noise_segment, where the segment tiles `noise` cyclically from
/// `offset` and k sets rms(signal)/rms(k * segment) to 10^(snr_db/20).
AudioBuffer mix_noise(const AudioBuffer& signal, const AudioBuffer& noise, double snr_db, std::uint64_t offset);

/// Synthetic room impulse response: a unit direct-path impulse, silence for
/// the predelay, then Gaussian noise under the envelope 10^(-3 t / rt60_s)
/// with t measured from the tail onset. The tail carries the same energy as
/// the direct path and never exceeds it in magnitude.
AudioBuffer gen_rir(double rt60_s, double predelay_ms, double duration_s, int sample_rate, SeededRng& rng);

/// (1 - wet_dry) * buf + wet_dry * (buf * rir), convolution trimmed to |buf|.
AudioBuffer apply_reverb(const AudioBuffer& buf, const AudioBuffer& rir, double wet_dry);

/// Continuous mu-law compression F(x) = sign(x) ln(1 + mu|x|) / ln(1 + mu),
/// inputs clamped to [-1, 1].
double mulaw_compress(double x, double mu);
double mulaw_expand(double y, double mu);

/// 8-bit code for F(x): 128 + round(127 F(x)). The quantizer is mid-tread so
/// zero maps to a code that decodes to exactly zero.
int mulaw_encode(double x, double mu);
/// Expands the centre of the code's quantization cell.
double mulaw_decode(int code, double mu);

/// Bandpass (Butterworth HP + LP, 4th order each) -> resample to the codec
/// rate -> mu-law encode/decode -> resample back, trimmed/padded to |buf|.
AudioBuffer apply_telephony(const AudioBuffer& buf, const Telephony& eff);

// ---------------------------------------------------------------------------
// Chain configuration and sampling

struct Range {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const Range&) const = default;
};

struct GainFamily {
  double probability = 0.5;
  Range gain_db{-10.0, 6.0};
  bool operator==(const GainFamily&) const = default;
};

struct NoiseFamily {
  double probability = 0.5;
  Range snr_db{0.0, 30.0};
  bool operator==(const NoiseFamily&) const = default;
};

struct ReverbFamily {
  double probability = 0.5;
  Range rt60_s{0.1, 0.8};
  Range predelay_ms{0.0, 20.0};
  Range wet_dry{0.2, 0.7};
  bool operator==(const ReverbFamily&) const = default;
};

struct TelephonyFamily {
  double probability = 0.5;
  std::vector<int> codec_rates_hz{8000};
  Range bandpass_low_hz{300.0, 300.0};
  Range bandpass_high_hz{3400.0, 3400.0};
  Range mu{255.0, 255.0};
  bool operator==(const TelephonyFamily&) const = default;
};

/// The only accepted effect order.
inline const std::vector<std::string> kEffectOrder = {"gain", "noise", "reverb", "telephony"};

struct EffectChainConfig {
  GainFamily gain;
  NoiseFamily noise;
  ReverbFamily reverb;
  TelephonyFamily telephony;
  /// Noise clip references (paths relative to the config file, or ids
  /// registered in a NoiseBank).
  std::vector<std::string> noise_bank;
  int max_chain_length = 4;
  /// Whether suite building also noises target-speaker material.
  bool augment_targets = false;

  bool operator==(const EffectChainConfig&) const = default;

  /// Every family probability set to zero.
  static EffectChainConfig disabled();
};

/// Throws InvalidConfig on any violated invariant.
void validate(const EffectChainConfig& cfg);

/// Includes each family, in the fixed order, with its probability; draws
/// every numeric parameter uniformly from its range. Once max_chain_length
/// effects are included the remaining families are skipped.
std::vector<Effect> sample_chain(const EffectChainConfig& cfg, SeededRng& rng);

// ---------------------------------------------------------------------------
// Noise bank

/// Read-only after loading. Resampled copies are cached per rate, so lookups
/// are safe from concurrent workers.
class NoiseBank {
 public:
  NoiseBank() = default;

  void add(std::string id, AudioBuffer clip);
  /// Loads each reference as a WAV path relative to base_dir; the reference
  /// string is the clip id.
  static NoiseBank from_files(const std::vector<std::string>& refs, const std::filesystem::path& base_dir);

  bool contains(const std::string& id) const;
  std::size_t size() const { return clips_.size(); }

  /// Throws UnresolvableNoiseRef for unknown ids.
  std::shared_ptr<const AudioBuffer> get(const std::string& id, int sample_rate) const;

 private:
  std::map<std::string, std::shared_ptr<const AudioBuffer>> clips_;
  mutable std::map<std::pair<std::string, int>, std::shared_ptr<const AudioBuffer>> resampled_;
  mutable std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
};

// ---------------------------------------------------------------------------
// Application and provenance

struct AppliedChainRecord {
  std::uint64_t seed = 0;
  std::vector<Effect> effects;
  std::string input_clip_id;
  std::string output_clip_id;
  double output_peak = 0.0;
  std::vector<std::string> warnings;

  bool operator==(const AppliedChainRecord&) const = default;
};

struct ChainResult {
  AudioBuffer audio;
  AppliedChainRecord record;
};

/// Applies effects in order, resolving every random choice (noise offset,
/// RIR seed) from rng and recording the resolved values.
ChainResult apply_chain(const AudioBuffer& buf, const std::vector<Effect>& chain, const NoiseBank& bank,
                        SeededRng& rng);

/// Re-applies a stored record to its input. Bit-identical to the original
/// output when the input and noise bank are unchanged.
AudioBuffer replay(const AudioBuffer& input, const AppliedChainRecord& record, const NoiseBank& bank);

/// sample_chain + apply_chain on the clip's own substream.
ChainResult augment_clip(const AudioBuffer& buf, const EffectChainConfig& cfg, const NoiseBank& bank,
                         std::uint64_t global_seed, const std::string& clip_id);

// ---------------------------------------------------------------------------
// JSON

void to_json(nlohmann::json& j, const Effect& effect);
void from_json(const nlohmann::json& j, Effect& effect);
void to_json(nlohmann::json& j, const EffectChainConfig& cfg);
/// Fields absent from j keep their built-in defaults.
void from_json(const nlohmann::json& j, EffectChainConfig& cfg);
void to_json(nlohmann::json& j, const AppliedChainRecord& rec);
void from_json(const nlohmann::json& j, AppliedChainRecord& rec);

/// Loads a chain config file; validates it.
EffectChainConfig load_chain_config(const std::filesystem::path& path);

}  // namespace vcrobust::augment

#endif  // VCROBUST_AUGMENT_HPP
