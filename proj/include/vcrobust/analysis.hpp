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

#ifndef VCROBUST_ANALYSIS_HPP
#define VCROBUST_ANALYSIS_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcrobust/evalsvc.hpp"
#include "vcrobust/suite.hpp"

namespace vcrobust::analysis {

struct Rating {
  std::string annotator_id;
  std::string model_id;
  std::string pair_id;
  std::string speaker_id;
  suite::Gender gender = suite::Gender::Unknown;
  suite::DemographicGroup group = suite::DemographicGroup::Unknown;
  int score = 0;
};

/// Authoritative scores joined with speaker metadata from the suite manifest.
struct RatingsTable {
  std::vector<Rating> rows;

  std::vector<std::string> annotators() const;  // sorted
  std::vector<std::string> models() const;      // sorted
};

/// Rejects duplicate (annotator, model, pair) keys, scores outside 1..5 and
/// pairs the manifest does not know.
RatingsTable join(const std::vector<evalsvc::RatingRecord>& ratings, const suite::SuiteManifest& manifest);

/// Pearson correlation. NaN when either input has zero variance.
double pcc(std::span<const double> x, std::span<const double> y);

struct PairwisePcc {
  std::string model_id;
  std::string annotator_a;
  std::string annotator_b;
  std::size_t overlap = 0;
  std::optional<double> value;  // nullopt: overlap < 2 or zero variance
};

struct PccMatrix {
  std::vector<std::string> annotators;
  /// Row-major |annotators|^2; nullopt marks an undefined entry.
  std::vector<std::optional<double>> values;
  /// Per-model PCC for every annotator pair (a < b), model-major.
  std::vector<PairwisePcc> per_model;

  std::size_t size() const noexcept { return annotators.size(); }
  std::optional<double> at(std::size_t i, std::size_t j) const { return values[i * annotators.size() + j]; }
};

/// Per model, correlate each annotator pair over the pairs both rated; the
/// matrix entry is the unweighted mean over models with a defined value.
PccMatrix pcc_matrix(const RatingsTable& table);

struct SpeakerMean {
  double mean = 0.0;
  std::size_t n = 0;
};

std::map<std::string, SpeakerMean> speaker_means(const RatingsTable& table, const std::string& model_id);

/// Bins [lo, lo+w) ... with the last bin closed at hi.
std::vector<std::size_t> histogram(std::span<const double> values, double bin_width, double lo = 1.0, double hi = 5.0);

enum class Grouping { All, Gender, Demographic };
std::string_view to_string(Grouping g) noexcept;

struct GroupStat {
  std::string group;
  std::string model_id;
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

struct GroupStats {
  Grouping grouping = Grouping::All;
  std::vector<GroupStat> rows;
  std::vector<std::string> notices;  // omitted empty (group, model) cells
};

/// ddof = 0 gives the population standard deviation, 1 the sample one.
GroupStats group_stats(const RatingsTable& table, Grouping grouping, int ddof = 0);

struct ModelHistogram {
  std::string model_id;
  double bin_width = 0.5;
  std::vector<std::size_t> counts;
  std::map<std::string, SpeakerMean> speaker_means;
};

std::vector<ModelHistogram> speaker_histograms(const RatingsTable& table, double bin_width);

/// Two-decimal rendering with trailing zeros dropped: 0.4500001 -> "0.45",
/// 0.60 -> "0.6", 1 -> "1". Undefined entries render as "NA".
std::string format_pcc(std::optional<double> v);

/// Annotators labelled A1..An (sorted id order) on both axes.
std::string render_pcc_table(const PccMatrix& matrix);

struct ReportOptions {
  double bin_width = 0.5;
  int ddof = 0;
};

struct ReportBundle {
  std::vector<std::filesystem::path> files;
};

ReportBundle render_report(const PccMatrix& matrix, const std::vector<GroupStats>& stats,
                           const std::vector<ModelHistogram>& histograms, const std::filesystem::path& out_dir,
                           const ReportOptions& options = {});

/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

}  // namespace vcrobust::analysis

#endif  // VCROBUST_ANALYSIS_HPP
