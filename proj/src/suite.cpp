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

#include "vcrobust/suite.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "vcrobust/error.hpp"
#include "vcrobust/parallel.hpp"
#include "vcrobust/rng.hpp"

namespace vcrobust::suite {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::string_view to_string(Gender g) noexcept {
  switch (g) {
    case Gender::Male: return "Male";
    case Gender::Female: return "Female";
    case Gender::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::string_view to_string(DemographicGroup g) noexcept {
  switch (g) {
    case DemographicGroup::English: return "English";
    case DemographicGroup::Spanish: return "Spanish";
    case DemographicGroup::Indian: return "Indian";
    case DemographicGroup::Chinese: return "Chinese";
    case DemographicGroup::Other: return "Other";
    case DemographicGroup::Unknown: return "Unknown";
  }
  return "Unknown";
}

Gender parse_gender(std::string_view s) {
  const auto v = lower(trim(s));
  // CommonVoice has used both "male" and "male_masculine".
  if (v == "m" || v == "male" || v.rfind("male_", 0) == 0) return Gender::Male;
  if (v == "f" || v == "female" || v.rfind("female_", 0) == 0) return Gender::Female;
  return Gender::Unknown;
}

DemographicGroup parse_group(std::string_view s) {
  const auto v = lower(trim(s));
  if (v == "english") return DemographicGroup::English;
  if (v == "spanish") return DemographicGroup::Spanish;
  if (v == "indian") return DemographicGroup::Indian;
  if (v == "chinese") return DemographicGroup::Chinese;
  if (v == "other") return DemographicGroup::Other;
  if (v == "unknown" || v.empty()) return DemographicGroup::Unknown;
  throw Error(ErrorCode::InvalidArgument, "unknown demographic group '" + std::string(s) + "'");
}

GroupMapping GroupMapping::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open group mapping " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
  GroupMapping m;
  if (j.contains("accents")) {
    for (const auto& [accent, group] : j.at("accents").items()) {
      m.by_accent[lower(trim(accent))] = parse_group(group.get<std::string>());
    }
  }
  if (j.contains("clips")) {
    for (const auto& [clip, group] : j.at("clips").items()) m.by_clip[clip] = parse_group(group.get<std::string>());
  }
  return m;
}

DemographicGroup GroupMapping::lookup(const std::string& clip_id, const std::optional<std::string>& accent) const {
  if (const auto it = by_clip.find(clip_id); it != by_clip.end()) return it->second;
  if (accent) {
    if (const auto it = by_accent.find(lower(trim(*accent))); it != by_accent.end()) return it->second;
  }
  return DemographicGroup::Unknown;
}

std::string anonymized_id(std::string_view relative_path) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "clip_%016llx", static_cast<unsigned long long>(fnv1a64(relative_path)));
  return buf;
}

IngestResult ingest_commonvoice(const fs::path& tsv_path, const fs::path& clips_dir, const IngestOptions& opts) {
  std::ifstream in(tsv_path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + tsv_path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MissingHeader, tsv_path.string() + " is empty");
  const auto header = split(strip_cr(line), '\t');
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    return std::nullopt;
  };
  const auto col_client = column("client_id");
  const auto col_path = column("path");
  const auto col_sentence = column("sentence");
  if (!col_client || !col_path || !col_sentence) {
    throw Error(ErrorCode::MissingHeader, tsv_path.string() + ": header must contain client_id, path and sentence");
  }
  const auto col_gender = column("gender");
  auto col_accent = column("accents");
  if (!col_accent) col_accent = column("accent");

  IngestResult result;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    auto field = [&](std::optional<std::size_t> c) -> std::string {
      return c && *c < fields.size() ? fields[*c] : std::string();
    };
    const std::string rel = field(col_path);
    fs::path audio_rel(rel);
    if (lower(audio_rel.extension().string()) != ".wav") {
      const fs::path original = clips_dir / audio_rel;
      audio_rel.replace_extension(".wav");
      if (!fs::exists(clips_dir / audio_rel) && fs::exists(original)) {
        throw Error(ErrorCode::UnsupportedAudio,
                    "clip " + rel + " is not WAV; convert CommonVoice audio to WAV first (e.g. "
                    "`ffmpeg -i clip.mp3 -ac 1 -ar 16000 clip.wav`) and keep the same file stem in " +
                        clips_dir.string());
      }
    }
    const fs::path audio_path = clips_dir / audio_rel;
    if (!fs::exists(audio_path)) {
      ++result.skipped_missing;
      continue;
    }
    ClipRecord rec;
    rec.clip_id = opts.anonymize ? anonymized_id(audio_rel.generic_string()) : audio_rel.stem().string();
    if (!seen.insert(rec.clip_id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate clip id '" + rec.clip_id + "' in " + tsv_path.string());
    }
    rec.speaker_id = field(col_client);
    rec.path = audio_path;
    rec.gender = col_gender ? parse_gender(field(col_gender)) : Gender::Unknown;
    if (col_accent && !trim(field(col_accent)).empty()) rec.accent = trim(field(col_accent));
    rec.demographic_group = opts.mapping ? opts.mapping->lookup(rec.clip_id, rec.accent) : DemographicGroup::Unknown;
    rec.transcript = field(col_sentence);
    rec.duration_s = audio::wav_info(audio_path).duration_s();
    result.records.push_back(std::move(rec));
  }
  if (result.records.empty()) {
    throw Error(ErrorCode::EmptyManifest, tsv_path.string() + ": no usable rows (" +
                                              std::to_string(result.skipped_missing) + " skipped for missing audio)");
  }
  return result;
}

IngestResult ingest_vctk(const fs::path& root_dir, const fs::path& speaker_info_path, const IngestOptions& opts) {
  std::ifstream in(speaker_info_path);
  if (!in) throw Error(ErrorCode::MissingSpeakerInfo, "cannot open speaker info " + speaker_info_path.string());
  std::string line;
  std::optional<std::size_t> col_id, col_gender, col_accent;
  std::map<std::string, std::pair<Gender, std::optional<std::string>>> speakers;
  while (std::getline(in, line)) {
    const auto tokens = split_ws(strip_cr(line));
    if (tokens.empty()) continue;
    if (!col_id) {
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto t = lower(tokens[i]);
        if (t == "id") col_id = i;
        if (t == "gender") col_gender = i;
        if (t == "accents" || t == "accent") col_accent = i;
      }
      if (!col_id || !col_gender) {
        throw Error(ErrorCode::MissingSpeakerInfo, speaker_info_path.string() + ": header needs ID and GENDER columns");
      }
      continue;
    }
    if (tokens.size() <= std::max(*col_id, *col_gender)) continue;
    std::string id = tokens[*col_id];
    // Older releases list bare numbers ("225") for directory "p225".
    if (!id.empty() && std::isdigit(static_cast<unsigned char>(id[0]))) id = "p" + id;
    std::optional<std::string> accent;
    if (col_accent && *col_accent < tokens.size()) accent = tokens[*col_accent];
    speakers[id] = {parse_gender(tokens[*col_gender]), accent};
  }
  if (!col_id) throw Error(ErrorCode::MissingSpeakerInfo, speaker_info_path.string() + ": no header row");

  if (!fs::is_directory(root_dir)) throw Error(ErrorCode::IoFailure, root_dir.string() + " is not a directory");
  std::vector<fs::path> speaker_dirs;
  for (const auto& entry : fs::directory_iterator(root_dir)) {
    if (entry.is_directory()) speaker_dirs.push_back(entry.path());
  }
  std::sort(speaker_dirs.begin(), speaker_dirs.end());

  IngestResult result;
  for (const auto& dir : speaker_dirs) {
    const std::string speaker = dir.filename().string();
    std::vector<fs::path> wavs;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && lower(entry.path().extension().string()) == ".wav") wavs.push_back(entry.path());
    }
    if (wavs.empty()) continue;
    std::sort(wavs.begin(), wavs.end());
    const auto info = speakers.find(speaker);
    if (info == speakers.end()) ++result.unknown_speakers;
    for (const auto& wav : wavs) {
      ClipRecord rec;
      const std::string rel = speaker + "/" + wav.filename().string();
      rec.clip_id = opts.anonymize ? anonymized_id(rel) : wav.stem().string();
      rec.speaker_id = speaker;
      rec.path = wav;
      if (info != speakers.end()) {
        rec.gender = info->second.first;
        rec.accent = info->second.second;
      }
      rec.demographic_group = opts.mapping ? opts.mapping->lookup(rec.clip_id, rec.accent) : DemographicGroup::Unknown;
      rec.duration_s = audio::wav_info(wav).duration_s();
      result.records.push_back(std::move(rec));
    }
  }
  if (result.records.empty()) throw Error(ErrorCode::EmptyManifest, root_dir.string() + ": no WAV clips found");
  return result;
}

const EvalPair* SuiteManifest::find_pair(std::string_view pair_id) const {
  for (const auto& p : pairs) {
    if (p.pair_id == pair_id) return &p;
  }
  return nullptr;
}

std::vector<ClipRecord> select_sources(const std::vector<ClipRecord>& eligible, std::size_t n_pairs,
                                       std::uint64_t seed) {
  auto rng = SeededRng::for_clip(seed, "suite/select");
  std::map<std::string, std::vector<const ClipRecord*>> by_speaker;
  for (const auto& rec : eligible) by_speaker[rec.speaker_id].push_back(&rec);

  std::vector<std::string> order;
  for (auto& [speaker, clips] : by_speaker) {
    std::sort(clips.begin(), clips.end(), [](auto* a, auto* b) { return a->clip_id < b->clip_id; });
    rng.shuffle(clips);
    order.push_back(speaker);
  }
  rng.shuffle(order);

  std::vector<ClipRecord> picked;
  picked.reserve(n_pairs);
  std::map<std::string, std::size_t> cursor;
  bool progress = true;
  while (picked.size() < n_pairs && progress) {
    progress = false;
    for (const auto& speaker : order) {
      if (picked.size() == n_pairs) break;
      auto& c = cursor[speaker];
      const auto& clips = by_speaker[speaker];
      if (c < clips.size()) {
        picked.push_back(*clips[c++]);
        progress = true;
      }
    }
  }
  return picked;
}

SuiteManifest build_suite(const std::vector<ClipRecord>& records, const BuildOptions& opts) {
  augment::validate(opts.chain_config);
  if (opts.model_ids.empty()) throw Error(ErrorCode::InvalidArgument, "model_ids must not be empty");
  if (opts.target_speaker_id.empty()) throw Error(ErrorCode::InvalidArgument, "target speaker id is empty");
  if (std::find(opts.source_speakers.begin(), opts.source_speakers.end(), opts.target_speaker_id) !=
      opts.source_speakers.end()) {
    throw Error(ErrorCode::TargetInSources, "target speaker " + opts.target_speaker_id + " is listed as a source");
  }

  std::vector<ClipRecord> eligible;
  std::set<std::string> ids;
  const std::set<std::string> allowed(opts.source_speakers.begin(), opts.source_speakers.end());
  for (const auto& rec : records) {
    if (rec.speaker_id == opts.target_speaker_id) continue;
    if (!allowed.empty() && !allowed.count(rec.speaker_id)) continue;
    if (ids.insert(rec.clip_id).second) eligible.push_back(rec);
  }
  if (eligible.size() < opts.n_pairs) {
    throw Error(ErrorCode::InsufficientClips, "need " + std::to_string(opts.n_pairs) + " source clips, have " +
                                                  std::to_string(eligible.size()) + " eligible");
  }

  const auto selected = select_sources(eligible, opts.n_pairs, opts.seed);
  const auto bank = augment::NoiseBank::from_files(
      opts.chain_config.noise.probability > 0.0 ? opts.chain_config.noise_bank : std::vector<std::string>{},
      opts.noise_base_dir);

  fs::create_directories(opts.out_dir / "audio");
  const int width = std::max<int>(3, static_cast<int>(std::to_string(opts.n_pairs).size()));
  auto pair_name = [&](std::size_t i) {
    std::ostringstream s;
    s << "pair_" << std::setw(width) << std::setfill('0') << (i + 1);
    return s.str();
  };

  std::vector<EvalPair> pairs(selected.size());
  std::vector<augment::AppliedChainRecord> chains(selected.size());
  parallel_for(selected.size(), opts.jobs, [&](std::size_t i) {
    const auto& src = selected[i];
    auto buf = audio::read_wav(src.path);
    if (buf.sample_rate() != opts.sample_rate) buf = audio::resample(buf, opts.sample_rate);
    auto result = augment::augment_clip(buf, opts.chain_config, bank, opts.seed, src.clip_id);

    EvalPair& pair = pairs[i];
    pair.pair_id = pair_name(i);
    pair.target_speaker_id = opts.target_speaker_id;
    pair.source_clip = src;
    pair.source_clip.path = fs::path("audio") / (pair.pair_id + ".wav");
    pair.source_clip.duration_s = result.audio.duration_s();
    audio::write_wav(result.audio, opts.out_dir / pair.source_clip.path, audio::WavEncoding::PCM16);

    result.record.output_clip_id = pair.pair_id;
    chains[i] = std::move(result.record);
  });

  SuiteManifest m;
  m.suite_id = opts.suite_id.empty() ? "suite-" + std::to_string(opts.seed) : opts.suite_id;
  m.pairs = std::move(pairs);
  m.model_ids = opts.model_ids;
  m.chain_config = opts.chain_config;
  m.seed = opts.seed;
  m.target_speaker_id = opts.target_speaker_id;
  m.sample_rate = opts.sample_rate;

  std::map<std::string, int> effect_counts{{"gain", 0}, {"noise", 0}, {"reverb", 0}, {"telephony", 0}};
  std::size_t warnings = 0;
  {
    std::ofstream out(opts.out_dir / "chains.jsonl", std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + (opts.out_dir / "chains.jsonl").string());
    for (const auto& rec : chains) {
      out << json(rec).dump() << '\n';
      for (const auto& e : rec.effects) ++effect_counts[std::string(augment::family_name(e))];
      warnings += rec.warnings.size();
    }
  }
  std::set<std::string> speakers;
  for (const auto& p : m.pairs) speakers.insert(p.source_clip.speaker_id);
  m.metadata = {
      {"generator", "vcrobust"},
      {"rng", SeededRng::kAlgorithm},
      {"source_speakers", speakers.size()},
      {"effect_counts", effect_counts},
      {"clip_warnings", warnings},
      {"chains", "chains.jsonl"},
      {"note",
       "Source clips are drawn from user-supplied public corpora; they stand in for private self-recorded name "
       "clips and are noised to reproduce real-world recording conditions."},
  };
  save_manifest(m, opts.out_dir / "manifest.json");
  return m;
}

void attach_outputs(SuiteManifest& manifest, const fs::path& suite_dir, const std::string& model_id,
                    const fs::path& outputs_dir) {
  if (std::find(manifest.model_ids.begin(), manifest.model_ids.end(), model_id) == manifest.model_ids.end()) {
    throw Error(ErrorCode::UnknownModel, "model '" + model_id + "' is not declared in the suite");
  }
  const auto root = fs::weakly_canonical(suite_dir);
  const auto src_dir = fs::weakly_canonical(outputs_dir);
  const auto rel_dir = src_dir.lexically_relative(root);
  const bool inside = !rel_dir.empty() && *rel_dir.begin() != "..";

  std::vector<std::string> missing;
  for (const auto& pair : manifest.pairs) {
    const auto file = src_dir / (pair.pair_id + ".wav");
    if (!fs::exists(file)) missing.push_back(pair.pair_id);
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 5; ++i) list += (i ? ", " : "") + missing[i];
    throw Error(ErrorCode::NotFound, std::to_string(missing.size()) + " outputs missing for model '" + model_id +
                                         "' in " + outputs_dir.string() + " (" + list + (missing.size() > 5 ? ", ..." : "") + ")");
  }
  for (auto& pair : manifest.pairs) {
    const auto file = src_dir / (pair.pair_id + ".wav");
    (void)audio::wav_info(file);  // must at least parse
    fs::path rel;
    if (inside) {
      rel = rel_dir / (pair.pair_id + ".wav");
    } else {
      rel = fs::path("outputs") / model_id / (pair.pair_id + ".wav");
      fs::create_directories(root / rel.parent_path());
      fs::copy_file(file, root / rel, fs::copy_options::overwrite_existing);
    }
    pair.model_outputs[model_id] = rel.generic_string();
  }
}

// ---------------------------------------------------------------------------
// JSON

void to_json(json& j, const ClipRecord& c) {
  j = json{{"clip_id", c.clip_id},
           {"speaker_id", c.speaker_id},
           {"path", c.path.generic_string()},
           {"gender", to_string(c.gender)},
           {"demographic_group", to_string(c.demographic_group)},
           {"duration_s", c.duration_s}};
  if (c.transcript) j["transcript"] = *c.transcript;
  if (c.accent) j["accent"] = *c.accent;
}

void from_json(const json& j, ClipRecord& c) {
  c.clip_id = j.at("clip_id").get<std::string>();
  c.speaker_id = j.at("speaker_id").get<std::string>();
  c.path = j.at("path").get<std::string>();
  c.gender = parse_gender(j.value("gender", std::string("Unknown")));
  c.demographic_group = parse_group(j.value("demographic_group", std::string("Unknown")));
  c.duration_s = j.value("duration_s", 0.0);
  if (j.contains("transcript")) c.transcript = j.at("transcript").get<std::string>();
  if (j.contains("accent")) c.accent = j.at("accent").get<std::string>();
}

void to_json(json& j, const SuiteManifest& m) {
  json pairs = json::array();
  for (const auto& p : m.pairs) {
    pairs.push_back({{"pair_id", p.pair_id},
                     {"source_clip", p.source_clip},
                     {"target_speaker_id", p.target_speaker_id},
                     {"model_outputs", p.model_outputs}});
  }
  j = json{{"schema_version", SuiteManifest::kSchemaVersion},
           {"suite_id", m.suite_id},
           {"target_speaker_id", m.target_speaker_id},
           {"seed", m.seed},
           {"sample_rate", m.sample_rate},
           {"model_ids", m.model_ids},
           {"chain_config", m.chain_config},
           {"metadata", m.metadata},
           {"pairs", pairs}};
}

void from_json(const json& j, SuiteManifest& m) {
  const int version = j.at("schema_version").get<int>();
  if (version != SuiteManifest::kSchemaVersion) {
    throw Error(ErrorCode::InvalidArgument, "unsupported manifest schema_version " + std::to_string(version));
  }
  m.suite_id = j.at("suite_id").get<std::string>();
  m.target_speaker_id = j.value("target_speaker_id", std::string());
  m.seed = j.value("seed", std::uint64_t{0});
  m.sample_rate = j.value("sample_rate", 16000);
  m.model_ids = j.at("model_ids").get<std::vector<std::string>>();
  m.chain_config = j.value("chain_config", augment::EffectChainConfig{});
  m.metadata = j.value("metadata", json::object());
  m.pairs.clear();
  for (const auto& p : j.at("pairs")) {
    EvalPair pair;
    pair.pair_id = p.at("pair_id").get<std::string>();
    pair.source_clip = p.at("source_clip").get<ClipRecord>();
    pair.target_speaker_id = p.value("target_speaker_id", m.target_speaker_id);
    pair.model_outputs = p.value("model_outputs", std::map<std::string, std::string>{});
    m.pairs.push_back(std::move(pair));
  }
}

SuiteManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open manifest " + path.string());
  try {
    return json::parse(in).get<SuiteManifest>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
}

void save_manifest(const SuiteManifest& m, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write manifest " + path.string());
  out << json(m).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

}  // namespace vcrobust::suite
