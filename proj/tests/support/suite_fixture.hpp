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

#ifndef VCROBUST_SUITE_FIXTURE_HPP
#define VCROBUST_SUITE_FIXTURE_HPP

#include <string>

#include "test_support.hpp"
#include "vcrobust/suite.hpp"

namespace vcrobust::testing {

/// Writes a ready-to-serve suite: every pair has a source clip and one output
/// per model, all short PCM16 tones. Genders and groups cycle over the pairs.
inline suite::SuiteManifest make_served_suite(const std::filesystem::path& dir, std::size_t n_models,
                                              std::size_t n_pairs, const std::string& suite_id = "suite-test") {
  suite::SuiteManifest m;
  m.suite_id = suite_id;
  m.target_speaker_id = "target";
  m.model_ids.clear();
  for (std::size_t i = 0; i < n_models; ++i) m.model_ids.push_back("model_" + std::to_string(i + 1));
  const suite::Gender genders[] = {suite::Gender::Male, suite::Gender::Female};
  const suite::DemographicGroup groups[] = {suite::DemographicGroup::English, suite::DemographicGroup::Spanish,
                                            suite::DemographicGroup::Indian, suite::DemographicGroup::Chinese,
                                            suite::DemographicGroup::Other};
  for (std::size_t p = 0; p < n_pairs; ++p) {
    char id[32];
    std::snprintf(id, sizeof id, "pair_%03zu", p + 1);
    suite::EvalPair pair;
    pair.pair_id = id;
    pair.target_speaker_id = "target";
    pair.source_clip.clip_id = "clip_" + std::to_string(p);
    pair.source_clip.speaker_id = "spk_" + std::to_string(p % 8);
    pair.source_clip.gender = genders[p % 2];
    pair.source_clip.demographic_group = groups[p % 5];
    pair.source_clip.path = std::filesystem::path("audio") / (pair.pair_id + ".wav");
    std::filesystem::create_directories(dir / "audio");
    audio::write_wav(sine(200.0 + p, 0.3, 0.05, 16000), dir / pair.source_clip.path, audio::WavEncoding::PCM16);
    for (std::size_t k = 0; k < n_models; ++k) {
      const auto rel = std::filesystem::path("outputs") / m.model_ids[k] / (pair.pair_id + ".wav");
      std::filesystem::create_directories((dir / rel).parent_path());
      audio::write_wav(sine(300.0 + 50.0 * k + p, 0.3, 0.05, 16000), dir / rel, audio::WavEncoding::PCM16);
      pair.model_outputs[m.model_ids[k]] = rel.generic_string();
    }
    m.pairs.push_back(std::move(pair));
  }
  suite::save_manifest(m, dir / "manifest.json");
  return m;
}

}  // namespace vcrobust::testing

#endif  // VCROBUST_SUITE_FIXTURE_HPP
