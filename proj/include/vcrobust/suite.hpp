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

#ifndef VCROBUST_SUITE_HPP
#define VCROBUST_SUITE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vcrobust/augment.hpp"

namespace vcrobust::suite {

enum class Gender { Male, Female, Unknown };
enum class DemographicGroup { English, Spanish, Indian, Chinese, Other, Unknown };

std::string_view to_string(Gender g) noexcept;
std::string_view to_string(DemographicGroup g) noexcept;
Gender parse_gender(std::string_view s);
DemographicGroup parse_group(std::string_view s);

struct ClipRecord {
  std::string clip_id;
  std::string speaker_id;
  std::filesystem::path path;
  Gender gender = Gender::Unknown;
  DemographicGroup demographic_group = DemographicGroup::Unknown;
  double duration_s = 0.0;
  std::optional<std::string> transcript;
  /// Raw accent string from the corpus, when it has one.
  std::optional<std::string> accent;

  bool operator==(const ClipRecord&) const = default;
};

/// Explicit group assignments. Groups are never guessed from names or audio.
struct GroupMapping {
  std::map<std::string, DemographicGroup> by_accent;  // keys lower-cased, trimmed
  std::map<std::string, DemographicGroup> by_clip;

  /// {"accents": {...}, "clips": {...}}
  static GroupMapping load(const std::filesystem::path& path);
  DemographicGroup lookup(const std::string& clip_id, const std::optional<std::string>& accent) const;
};

struct IngestOptions {
  std::optional<GroupMapping> mapping;
  /// Replace clip ids with a hash of the clip's relative path.
  bool anonymize = false;
};

struct IngestResult {
  std::vector<ClipRecord> records;
  std::size_t skipped_missing = 0;
  std::size_t unknown_speakers = 0;  // VCTK speakers absent from speaker-info
};

/// CommonVoice-style TSV: header row with at least client_id, path, sentence;
/// optional gender and accent(s) columns. Audio must already be WAV.
IngestResult ingest_commonvoice(const std::filesystem::path& tsv_path, const std::filesystem::path& clips_dir,
                                const IngestOptions& opts = {});

/// VCTK-style tree root/<speaker>/<speaker>_<utt>.wav plus the whitespace
/// aligned speaker-info table (needs ID and GENDER columns).
IngestResult ingest_vctk(const std::filesystem::path& root_dir, const std::filesystem::path& speaker_info_path,
                         const IngestOptions& opts = {});

std::string anonymized_id(std::string_view relative_path);

struct EvalPair {
  std::string pair_id;
  /// Noised copy of the corpus clip; path is relative to the suite directory.
  ClipRecord source_clip;
  std::string target_speaker_id;
  std::map<std::string, std::string> model_outputs;  // model id -> path relative to the suite dir

  bool operator==(const EvalPair&) const = default;
};

struct SuiteManifest {
  static constexpr int kSchemaVersion = 1;

  std::string suite_id;
  std::vector<EvalPair> pairs;
  std::vector<std::string> model_ids{"model_1", "model_2", "model_3", "model_4"};
  augment::EffectChainConfig chain_config;
  std::uint64_t seed = 0;
  std::string target_speaker_id;
  int sample_rate = 16000;
  nlohmann::json metadata = nlohmann::json::object();

  bool operator==(const SuiteManifest&) const = default;

  const EvalPair* find_pair(std::string_view pair_id) const;
};

struct BuildOptions {
  std::size_t n_pairs = 64;
  std::string target_speaker_id;
  augment::EffectChainConfig chain_config;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  std::vector<std::string> model_ids{"model_1", "model_2", "model_3", "model_4"};
  /// Restrict sources to these speakers (empty = every non-target speaker).
  std::vector<std::string> source_speakers;
  int sample_rate = 16000;
  unsigned jobs = 1;
  /// Base directory for relative noise-bank references.
  std::filesystem::path noise_base_dir = ".";
  std::string suite_id;
};

/// Seeded, stratified selection of source clips: speakers in shuffled order
/// are visited round-robin, each taking its next shuffled clip.
std::vector<ClipRecord> select_sources(const std::vector<ClipRecord>& eligible, std::size_t n_pairs, std::uint64_t seed);

/// Selects, noises (via augment::augment_clip) and writes the suite:
///   out_dir/audio/<pair_id>.wav  (PCM16)
///   out_dir/chains.jsonl         (one AppliedChainRecord per pair)
///   out_dir/manifest.json
SuiteManifest build_suite(const std::vector<ClipRecord>& records, const BuildOptions& opts);

/// Attaches converted outputs for one model: expects <dir>/<pair_id>.wav for
/// every pair and only validates that each file exists and decodes.
void attach_outputs(SuiteManifest& manifest, const std::filesystem::path& suite_dir, const std::string& model_id,
                    const std::filesystem::path& outputs_dir);

void to_json(nlohmann::json& j, const ClipRecord& c);
void from_json(const nlohmann::json& j, ClipRecord& c);
void to_json(nlohmann::json& j, const SuiteManifest& m);
void from_json(const nlohmann::json& j, SuiteManifest& m);

SuiteManifest load_manifest(const std::filesystem::path& path);
/// Pretty-printed, deterministic.
void save_manifest(const SuiteManifest& m, const std::filesystem::path& path);

}  // namespace vcrobust::suite

#endif  // VCROBUST_SUITE_HPP
