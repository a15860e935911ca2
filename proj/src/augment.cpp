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

#include "vcrobust/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vcrobust/dsp.hpp"
#include "vcrobust/error.hpp"

namespace vcrobust::augment {

namespace {

[[noreturn]] void bad_params(const std::string& msg) { throw Error(ErrorCode::InvalidParams, msg); }
[[noreturn]] void bad_config(const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); }

void require_rate_match(const AudioBuffer& a, const AudioBuffer& b, std::string_view what) {
  if (a.sample_rate() != b.sample_rate()) {
    throw Error(ErrorCode::RateMismatch, std::string(what) + ": " + std::to_string(a.sample_rate()) + " Hz vs " +
                                             std::to_string(b.sample_rate()) + " Hz");
  }
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void validate(const Effect& effect) {
  std::visit(Overloaded{
                 [](const Gain& g) {
                   if (!std::isfinite(g.gain_db)) bad_params("gain_db must be finite");
                 },
                 [](const AdditiveNoise& n) {
                   if (!std::isfinite(n.snr_db)) bad_params("snr_db must be finite");
                   if (n.noise_id.empty()) bad_params("noise_id is empty");
                 },
                 [](const Reverb& r) {
                   if (!(r.rt60_s > 0.0) || !std::isfinite(r.rt60_s)) bad_params("rt60_s must be > 0");
                   if (!(r.predelay_ms >= 0.0) || !std::isfinite(r.predelay_ms)) bad_params("predelay_ms must be >= 0");
                   if (!(r.wet_dry >= 0.0 && r.wet_dry <= 1.0)) bad_params("wet_dry must lie in [0, 1]");
                 },
                 [](const Telephony& t) {
                   if (t.codec_rate_hz <= 0) bad_params("codec_rate_hz must be positive");
                   if (!(t.bandpass_low_hz > 0.0)) bad_params("bandpass_low_hz must be positive");
                   if (!(t.bandpass_low_hz < t.bandpass_high_hz)) bad_params("bandpass_low_hz must be below bandpass_high_hz");
                   if (!(t.bandpass_high_hz < t.codec_rate_hz / 2.0)) {
                     bad_params("bandpass_high_hz must be below half the codec rate");
                   }
                   if (!(t.mu > 0.0) || !std::isfinite(t.mu)) bad_params("mu must be positive");
                 },
             },
             effect);
}

std::string_view family_name(const Effect& effect) {
  static constexpr std::string_view names[] = {"gain", "noise", "reverb", "telephony"};
  return names[effect.index()];
}

AudioBuffer apply_gain(const AudioBuffer& buf, double gain_db) {
  if (!std::isfinite(gain_db)) bad_params("gain_db must be finite");
  const double factor = std::pow(10.0, gain_db / 20.0);
  AudioBuffer out = buf;
  for (double& s : out.samples()) s *= factor;
  return out;
}

AudioBuffer mix_noise(const AudioBuffer& signal, const AudioBuffer& noise, double snr_db, std::uint64_t offset) {
  require_rate_match(signal, noise, "mix_noise");
  if (!std::isfinite(snr_db)) bad_params("snr_db must be finite");
  if (signal.empty()) throw Error(ErrorCode::SilentSignal, "signal is empty");
  if (noise.empty()) throw Error(ErrorCode::SilentNoise, "noise clip is empty");

  const double signal_rms = audio::rms(signal);
  if (signal_rms == 0.0) throw Error(ErrorCode::SilentSignal, "signal RMS is zero; SNR undefined");

  const std::size_t n = signal.size();
  const std::size_t period = noise.size();
  std::vector<double> segment(n);
  std::size_t idx = static_cast<std::size_t>(offset % period);
  for (std::size_t i = 0; i < n; ++i) {
    segment[i] = noise[idx];
    if (++idx == period) idx = 0;
  }
  const double noise_rms = audio::rms(segment);
  if (noise_rms == 0.0) throw Error(ErrorCode::SilentNoise, "noise segment RMS is zero");

  const double k = signal_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
  AudioBuffer out = signal;
  auto s = out.samples();
  for (std::size_t i = 0; i < n; ++i) s[i] += k * segment[i];
  return out;
}

AudioBuffer gen_rir(double rt60_s, double predelay_ms, double duration_s, int sample_rate, SeededRng& rng) {
  if (!(rt60_s > 0.0) || !std::isfinite(rt60_s)) bad_params("rt60_s must be > 0");
  if (!(predelay_ms >= 0.0) || !std::isfinite(predelay_ms)) bad_params("predelay_ms must be >= 0");
  if (!(duration_s >= rt60_s / 2.0) || !std::isfinite(duration_s)) bad_params("duration_s must be >= rt60_s / 2");
  if (sample_rate <= 0) bad_params("sample_rate must be positive");

  const auto length = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(duration_s * sample_rate)));
  const auto predelay = static_cast<std::size_t>(std::llround(predelay_ms * 1e-3 * sample_rate));
  const std::size_t tail_start = std::max<std::size_t>(1, predelay);

  std::vector<double> h(length, 0.0);
  h[0] = 1.0;
  double energy = 0.0;
  double tail_peak = 0.0;
  for (std::size_t i = tail_start; i < length; ++i) {
    const double t = static_cast<double>(i - tail_start) / sample_rate;
    const double envelope = std::pow(10.0, -3.0 * t / rt60_s);
    h[i] = rng.gaussian() * envelope;
    energy += h[i] * h[i];
    tail_peak = std::max(tail_peak, std::abs(h[i]));
  }
  if (energy > 0.0) {
    double scale = 1.0 / std::sqrt(energy);
    if (tail_peak * scale > 1.0) scale = 1.0 / tail_peak;
    for (std::size_t i = tail_start; i < length; ++i) h[i] *= scale;
  }
  return AudioBuffer(std::move(h), sample_rate);
}

AudioBuffer apply_reverb(const AudioBuffer& buf, const AudioBuffer& rir, double wet_dry) {
  require_rate_match(buf, rir, "apply_reverb");
  if (!(wet_dry >= 0.0 && wet_dry <= 1.0)) bad_params("wet_dry must lie in [0, 1]");
  if (wet_dry == 0.0 || buf.empty()) return buf;
  const auto wet = dsp::convolve(buf.samples(), rir.samples());
  AudioBuffer out = buf;
  auto s = out.samples();
  const double dry = 1.0 - wet_dry;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double w = i < wet.size() ? wet[i] : 0.0;
    s[i] = dry * s[i] + wet_dry * w;
  }
  return out;
}

double mulaw_compress(double x, double mu) {
  if (!(mu > 0.0)) bad_params("mu must be positive");
  const double c = std::clamp(x, -1.0, 1.0);
  const double y = std::log1p(mu * std::abs(c)) / std::log1p(mu);
  return c < 0.0 ? -y : y;
}

double mulaw_expand(double y, double mu) {
  if (!(mu > 0.0)) bad_params("mu must be positive");
  const double c = std::clamp(y, -1.0, 1.0);
  const double x = std::expm1(std::abs(c) * std::log1p(mu)) / mu;
  return c < 0.0 ? -x : x;
}

int mulaw_encode(double x, double mu) {
  const double y = mulaw_compress(x, mu);
  return 128 + static_cast<int>(std::round(127.0 * y));
}

double mulaw_decode(int code, double mu) {
  const int c = std::clamp(code, 1, 255);
  return mulaw_expand(static_cast<double>(c - 128) / 127.0, mu);
}

AudioBuffer apply_telephony(const AudioBuffer& buf, const Telephony& eff) {
  validate(Effect{eff});
  const int rate = buf.sample_rate();
  if (rate <= eff.codec_rate_hz) {
    bad_params("telephony needs an input rate above the codec rate (" + std::to_string(rate) + " <= " +
               std::to_string(eff.codec_rate_hz) + ")");
  }
  if (!(eff.bandpass_high_hz < rate / 2.0)) bad_params("bandpass_high_hz must be below the input Nyquist");

  auto cascade = dsp::butterworth_highpass(4, eff.bandpass_low_hz, rate);
  const auto lp = dsp::butterworth_lowpass(4, eff.bandpass_high_hz, rate);
  cascade.insert(cascade.end(), lp.begin(), lp.end());
  AudioBuffer band(dsp::filter(cascade, buf.samples()), rate);

  AudioBuffer narrow = audio::resample(band, eff.codec_rate_hz);
  for (double& s : narrow.samples()) s = mulaw_decode(mulaw_encode(s, eff.mu), eff.mu);
  AudioBuffer back = audio::resample(narrow, rate);
  back.data().resize(buf.size(), 0.0);
  return back;
}

EffectChainConfig EffectChainConfig::disabled() {
  EffectChainConfig cfg;
  cfg.gain.probability = 0.0;
  cfg.noise.probability = 0.0;
  cfg.reverb.probability = 0.0;
  cfg.telephony.probability = 0.0;
  return cfg;
}

namespace {

void check_probability(double p, std::string_view family) {
  if (!(p >= 0.0 && p <= 1.0)) bad_config(std::string(family) + ".probability must lie in [0, 1]");
}

void check_range(const Range& r, std::string_view name) {
  if (!std::isfinite(r.min) || !std::isfinite(r.max)) bad_config(std::string(name) + " bounds must be finite");
  if (r.min > r.max) bad_config(std::string(name) + " has min > max");
}

}  // namespace

void validate(const EffectChainConfig& cfg) {
  check_probability(cfg.gain.probability, "gain");
  check_probability(cfg.noise.probability, "noise");
  check_probability(cfg.reverb.probability, "reverb");
  check_probability(cfg.telephony.probability, "telephony");
  check_range(cfg.gain.gain_db, "gain.gain_db");
  check_range(cfg.noise.snr_db, "noise.snr_db");
  check_range(cfg.reverb.rt60_s, "reverb.rt60_s");
  check_range(cfg.reverb.predelay_ms, "reverb.predelay_ms");
  check_range(cfg.reverb.wet_dry, "reverb.wet_dry");
  check_range(cfg.telephony.bandpass_low_hz, "telephony.bandpass_low_hz");
  check_range(cfg.telephony.bandpass_high_hz, "telephony.bandpass_high_hz");
  check_range(cfg.telephony.mu, "telephony.mu");
  if (cfg.reverb.rt60_s.min <= 0.0) bad_config("reverb.rt60_s must be > 0");
  if (cfg.reverb.predelay_ms.min < 0.0) bad_config("reverb.predelay_ms must be >= 0");
  if (cfg.reverb.wet_dry.min < 0.0 || cfg.reverb.wet_dry.max > 1.0) bad_config("reverb.wet_dry must lie in [0, 1]");
  if (cfg.telephony.codec_rates_hz.empty()) bad_config("telephony.codec_rates_hz is empty");
  for (int r : cfg.telephony.codec_rates_hz) {
    if (r <= 0) bad_config("telephony codec rates must be positive");
    if (!(cfg.telephony.bandpass_high_hz.max < r / 2.0)) {
      bad_config("telephony.bandpass_high_hz must stay below half of every codec rate");
    }
  }
  if (cfg.telephony.bandpass_low_hz.min <= 0.0) bad_config("telephony.bandpass_low_hz must be positive");
  if (!(cfg.telephony.bandpass_low_hz.max < cfg.telephony.bandpass_high_hz.min)) {
    bad_config("telephony bandpass ranges overlap: every low edge must be below every high edge");
  }
  if (cfg.telephony.mu.min <= 0.0) bad_config("telephony.mu must be positive");
  if (cfg.max_chain_length <= 0) bad_config("max_chain_length must be positive");
  if (cfg.noise.probability > 0.0 && cfg.noise_bank.empty()) {
    bad_config("noise bank is empty but noise.probability > 0");
  }
}

std::vector<Effect> sample_chain(const EffectChainConfig& cfg, SeededRng& rng) {
  validate(cfg);
  std::vector<Effect> chain;
  const auto full = [&] { return static_cast<int>(chain.size()) >= cfg.max_chain_length; };

  // Every family consumes its inclusion draw even when the chain is full, so
  // one family's parameters never shift another family's draws.
  const bool use_gain = rng.bernoulli(cfg.gain.probability);
  if (use_gain && !full()) {
    chain.emplace_back(Gain{rng.uniform(cfg.gain.gain_db.min, cfg.gain.gain_db.max)});
  }
  const bool use_noise = rng.bernoulli(cfg.noise.probability);
  if (use_noise && !full()) {
    AdditiveNoise n;
    n.noise_id = cfg.noise_bank[rng.below(cfg.noise_bank.size())];
    n.snr_db = rng.uniform(cfg.noise.snr_db.min, cfg.noise.snr_db.max);
    n.offset_policy = OffsetPolicy::Random;
    chain.emplace_back(std::move(n));
  }
  const bool use_reverb = rng.bernoulli(cfg.reverb.probability);
  if (use_reverb && !full()) {
    Reverb r;
    r.rt60_s = rng.uniform(cfg.reverb.rt60_s.min, cfg.reverb.rt60_s.max);
    r.predelay_ms = rng.uniform(cfg.reverb.predelay_ms.min, cfg.reverb.predelay_ms.max);
    r.wet_dry = rng.uniform(cfg.reverb.wet_dry.min, cfg.reverb.wet_dry.max);
    chain.emplace_back(r);
  }
  const bool use_telephony = rng.bernoulli(cfg.telephony.probability);
  if (use_telephony && !full()) {
    const auto& fam = cfg.telephony;
    Telephony t;
    t.codec_rate_hz = fam.codec_rates_hz[rng.below(fam.codec_rates_hz.size())];
    t.bandpass_low_hz = rng.uniform(fam.bandpass_low_hz.min, fam.bandpass_low_hz.max);
    t.bandpass_high_hz = rng.uniform(fam.bandpass_high_hz.min, fam.bandpass_high_hz.max);
    t.mu = rng.uniform(fam.mu.min, fam.mu.max);
    chain.emplace_back(t);
  }
  return chain;
}

void NoiseBank::add(std::string id, AudioBuffer clip) {
  clips_[std::move(id)] = std::make_shared<const AudioBuffer>(std::move(clip));
}

NoiseBank NoiseBank::from_files(const std::vector<std::string>& refs, const std::filesystem::path& base_dir) {
  NoiseBank bank;
  for (const auto& ref : refs) {
    std::filesystem::path p(ref);
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::exists(p)) {
      throw Error(ErrorCode::UnresolvableNoiseRef, "noise clip '" + ref + "' not found at " + p.string());
    }
    bank.add(ref, audio::read_wav(p));
  }
  return bank;
}

bool NoiseBank::contains(const std::string& id) const { return clips_.count(id) != 0; }

std::shared_ptr<const AudioBuffer> NoiseBank::get(const std::string& id, int sample_rate) const {
  const auto it = clips_.find(id);
  if (it == clips_.end()) throw Error(ErrorCode::UnresolvableNoiseRef, "noise clip '" + id + "' is not in the bank");
  if (it->second->sample_rate() == sample_rate) return it->second;
  std::lock_guard lock(*mutex_);
  auto& slot = resampled_[{id, sample_rate}];
  if (!slot) slot = std::make_shared<const AudioBuffer>(audio::resample(*it->second, sample_rate));
  return slot;
}

ChainResult apply_chain(const AudioBuffer& buf, const std::vector<Effect>& chain, const NoiseBank& bank,
                        SeededRng& rng) {
  ChainResult result{buf, {}};
  result.record.seed = rng.seed();
  for (const Effect& effect : chain) {
    validate(effect);
    Effect resolved = effect;
    std::visit(Overloaded{
                   [&](Gain& g) { result.audio = apply_gain(result.audio, g.gain_db); },
                   [&](AdditiveNoise& n) {
                     const auto noise = bank.get(n.noise_id, result.audio.sample_rate());
                     if (n.offset_policy == OffsetPolicy::Random) {
                       n.offset = noise->empty() ? 0 : rng.below(noise->size());
                       n.offset_policy = OffsetPolicy::Fixed;
                     }
                     result.audio = mix_noise(result.audio, *noise, n.snr_db, n.offset);
                   },
                   [&](Reverb& r) {
                     if (!r.rir_seed) r.rir_seed = rng.next_u64();
                     SeededRng rir_rng(*r.rir_seed);
                     const double duration = r.predelay_ms * 1e-3 + 1.2 * r.rt60_s;
                     const auto rir = gen_rir(r.rt60_s, r.predelay_ms, duration, result.audio.sample_rate(), rir_rng);
                     result.audio = apply_reverb(result.audio, rir, r.wet_dry);
                   },
                   [&](Telephony& t) { result.audio = apply_telephony(result.audio, t); },
               },
               resolved);
    result.record.effects.push_back(std::move(resolved));
  }
  audio::require_finite(result.audio, "apply_chain");
  result.record.output_peak = audio::peak(result.audio);
  if (result.record.output_peak > 1.0) {
    std::ostringstream msg;
    msg << "peak " << result.record.output_peak << " exceeds full scale; PCM output will be clamped";
    result.record.warnings.push_back(msg.str());
  }
  return result;
}

AudioBuffer replay(const AudioBuffer& input, const AppliedChainRecord& record, const NoiseBank& bank) {
  for (const auto& e : record.effects) {
    if (const auto* n = std::get_if<AdditiveNoise>(&e); n && n->offset_policy == OffsetPolicy::Random) {
      bad_params("record has an unresolved noise offset");
    }
    if (const auto* r = std::get_if<Reverb>(&e); r && !r->rir_seed) bad_params("record has no RIR seed");
  }
  SeededRng rng(record.seed);
  return apply_chain(input, record.effects, bank, rng).audio;
}

ChainResult augment_clip(const AudioBuffer& buf, const EffectChainConfig& cfg, const NoiseBank& bank,
                         std::uint64_t global_seed, const std::string& clip_id) {
  auto rng = SeededRng::for_clip(global_seed, clip_id);
  const auto chain = sample_chain(cfg, rng);
  auto result = apply_chain(buf, chain, bank, rng);
  result.record.input_clip_id = clip_id;
  result.record.output_clip_id = clip_id;
  return result;
}

// ---------------------------------------------------------------------------
// JSON

using nlohmann::json;

void to_json(json& j, const Effect& effect) {
  std::visit(Overloaded{
                 [&](const Gain& g) { j = json{{"type", "gain"}, {"gain_db", g.gain_db}}; },
                 [&](const AdditiveNoise& n) {
                   j = json{{"type", "noise"}, {"noise_id", n.noise_id}, {"snr_db", n.snr_db}};
                   if (n.offset_policy == OffsetPolicy::Random) {
                     j["offset_policy"] = "random";
                   } else {
                     j["offset_policy"] = "fixed";
                     j["offset"] = n.offset;
                   }
                 },
                 [&](const Reverb& r) {
                   j = json{{"type", "reverb"}, {"rt60_s", r.rt60_s}, {"predelay_ms", r.predelay_ms}, {"wet_dry", r.wet_dry}};
                   if (r.rir_seed) j["rir_seed"] = *r.rir_seed;
                 },
                 [&](const Telephony& t) {
                   j = json{{"type", "telephony"},
                            {"codec_rate_hz", t.codec_rate_hz},
                            {"bandpass_low_hz", t.bandpass_low_hz},
                            {"bandpass_high_hz", t.bandpass_high_hz},
                            {"mu", t.mu}};
                 },
             },
             effect);
}

void from_json(const json& j, Effect& effect) {
  const auto type = j.at("type").get<std::string>();
  if (type == "gain") {
    effect = Gain{j.at("gain_db").get<double>()};
  } else if (type == "noise") {
    AdditiveNoise n;
    n.noise_id = j.at("noise_id").get<std::string>();
    n.snr_db = j.at("snr_db").get<double>();
    const auto policy = j.value("offset_policy", std::string("random"));
    if (policy == "fixed") {
      n.offset_policy = OffsetPolicy::Fixed;
      n.offset = j.at("offset").get<std::uint64_t>();
    } else if (policy != "random") {
      bad_config("unknown offset_policy '" + policy + "'");
    }
    effect = std::move(n);
  } else if (type == "reverb") {
    Reverb r;
    r.rt60_s = j.at("rt60_s").get<double>();
    r.predelay_ms = j.at("predelay_ms").get<double>();
    r.wet_dry = j.at("wet_dry").get<double>();
    if (j.contains("rir_seed")) r.rir_seed = j.at("rir_seed").get<std::uint64_t>();
    effect = r;
  } else if (type == "telephony") {
    Telephony t;
    t.codec_rate_hz = j.at("codec_rate_hz").get<int>();
    t.bandpass_low_hz = j.at("bandpass_low_hz").get<double>();
    t.bandpass_high_hz = j.at("bandpass_high_hz").get<double>();
    t.mu = j.at("mu").get<double>();
    effect = t;
  } else {
    bad_config("unknown effect type '" + type + "'");
  }
}

namespace {

json range_json(const Range& r) { return json{{"min", r.min}, {"max", r.max}}; }

void read_range(const json& j, const char* key, Range& r) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (v.is_number()) {
    r.min = r.max = v.get<double>();
  } else {
    r.min = v.at("min").get<double>();
    r.max = v.at("max").get<double>();
  }
}

void read_probability(const json& j, double& p) {
  if (j.contains("probability")) p = j.at("probability").get<double>();
}

}  // namespace

void to_json(json& j, const EffectChainConfig& cfg) {
  j = json{
      {"schema_version", 1},
      {"ordering", kEffectOrder},
      {"max_chain_length", cfg.max_chain_length},
      {"augment_targets", cfg.augment_targets},
      {"noise_bank", cfg.noise_bank},
      {"gain", {{"probability", cfg.gain.probability}, {"gain_db", range_json(cfg.gain.gain_db)}}},
      {"noise", {{"probability", cfg.noise.probability}, {"snr_db", range_json(cfg.noise.snr_db)}}},
      {"reverb",
       {{"probability", cfg.reverb.probability},
        {"rt60_s", range_json(cfg.reverb.rt60_s)},
        {"predelay_ms", range_json(cfg.reverb.predelay_ms)},
        {"wet_dry", range_json(cfg.reverb.wet_dry)}}},
      {"telephony",
       {{"probability", cfg.telephony.probability},
        {"codec_rates_hz", cfg.telephony.codec_rates_hz},
        {"bandpass_low_hz", range_json(cfg.telephony.bandpass_low_hz)},
        {"bandpass_high_hz", range_json(cfg.telephony.bandpass_high_hz)},
        {"mu", range_json(cfg.telephony.mu)}}},
  };
}

void from_json(const json& j, EffectChainConfig& cfg) {
  if (!j.is_object()) bad_config("chain config must be a JSON object");
  if (j.contains("ordering") && j.at("ordering").get<std::vector<std::string>>() != kEffectOrder) {
    bad_config("ordering is fixed to gain, noise, reverb, telephony");
  }
  // Families missing from the file are disabled, so "{}" is the empty chain.
  if (!j.contains("gain")) cfg.gain.probability = 0.0;
  if (!j.contains("noise")) cfg.noise.probability = 0.0;
  if (!j.contains("reverb")) cfg.reverb.probability = 0.0;
  if (!j.contains("telephony")) cfg.telephony.probability = 0.0;
  if (j.contains("max_chain_length")) cfg.max_chain_length = j.at("max_chain_length").get<int>();
  if (j.contains("augment_targets")) cfg.augment_targets = j.at("augment_targets").get<bool>();
  if (j.contains("noise_bank")) cfg.noise_bank = j.at("noise_bank").get<std::vector<std::string>>();
  if (j.contains("gain")) {
    const auto& g = j.at("gain");
    read_probability(g, cfg.gain.probability);
    read_range(g, "gain_db", cfg.gain.gain_db);
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    read_probability(n, cfg.noise.probability);
    read_range(n, "snr_db", cfg.noise.snr_db);
  }
  if (j.contains("reverb")) {
    const auto& r = j.at("reverb");
    read_probability(r, cfg.reverb.probability);
    read_range(r, "rt60_s", cfg.reverb.rt60_s);
    read_range(r, "predelay_ms", cfg.reverb.predelay_ms);
    read_range(r, "wet_dry", cfg.reverb.wet_dry);
  }
  if (j.contains("telephony")) {
    const auto& t = j.at("telephony");
    read_probability(t, cfg.telephony.probability);
    if (t.contains("codec_rates_hz")) cfg.telephony.codec_rates_hz = t.at("codec_rates_hz").get<std::vector<int>>();
    read_range(t, "bandpass_low_hz", cfg.telephony.bandpass_low_hz);
    read_range(t, "bandpass_high_hz", cfg.telephony.bandpass_high_hz);
    read_range(t, "mu", cfg.telephony.mu);
  }
}

void to_json(json& j, const AppliedChainRecord& rec) {
  j = json{{"input_clip_id", rec.input_clip_id},
           {"output_clip_id", rec.output_clip_id},
           {"seed", rec.seed},
           {"rng", SeededRng::kAlgorithm},
           {"effects", rec.effects},
           {"output_peak", rec.output_peak},
           {"warnings", rec.warnings}};
}

void from_json(const json& j, AppliedChainRecord& rec) {
  rec.input_clip_id = j.at("input_clip_id").get<std::string>();
  rec.output_clip_id = j.at("output_clip_id").get<std::string>();
  rec.seed = j.at("seed").get<std::uint64_t>();
  rec.effects = j.at("effects").get<std::vector<Effect>>();
  rec.output_peak = j.value("output_peak", 0.0);
  rec.warnings = j.value("warnings", std::vector<std::string>{});
}

EffectChainConfig load_chain_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open chain config " + path.string());
  EffectChainConfig cfg;
  try {
    cfg = json::parse(in).get<EffectChainConfig>();
  } catch (const json::exception& e) {
    bad_config(path.string() + ": " + e.what());
  }
  validate(cfg);
  return cfg;
}

}  // namespace vcrobust::augment
