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

#include "vcrobust/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include "vcrobust/error.hpp"

namespace vcrobust::analysis {

using nlohmann::json;

namespace {

std::vector<std::string> distinct(const RatingsTable& t, std::string Rating::*field) {
  std::set<std::string> s;
  for (const auto& r : t.rows) s.insert(r.*field);
  return {s.begin(), s.end()};
}

// Shortest representation that round-trips.
std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

json opt_json(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

std::string label(std::size_t i) { return "A" + std::to_string(i + 1); }

void write_file(const std::filesystem::path& path, const std::string& content, ReportBundle& bundle) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed: " + path.string());
  bundle.files.push_back(path);
}

}  // namespace

std::vector<std::string> RatingsTable::annotators() const { return distinct(*this, &Rating::annotator_id); }
std::vector<std::string> RatingsTable::models() const { return distinct(*this, &Rating::model_id); }

RatingsTable join(const std::vector<evalsvc::RatingRecord>& ratings, const suite::SuiteManifest& manifest) {
  RatingsTable table;
  table.rows.reserve(ratings.size());
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const auto& r : ratings) {
    if (r.score < 1 || r.score > 5) {
      throw Error(ErrorCode::ScoreOutOfRange, "score " + std::to_string(r.score) + " for " + r.pair_id);
    }
    if (!seen.emplace(r.annotator_id, r.model_id, r.pair_id).second) {
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate rating for " + r.annotator_id + "/" + r.model_id + "/" + r.pair_id);
    }
    const auto* pair = manifest.find_pair(r.pair_id);
    if (!pair) throw Error(ErrorCode::NotFound, "rating references unknown pair " + r.pair_id);
    table.rows.push_back({r.annotator_id, r.model_id, r.pair_id, pair->source_clip.speaker_id,
                          pair->source_clip.gender, pair->source_clip.demographic_group, r.score});
  }
  return table;
}

double pcc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::LengthMismatch, "pcc inputs differ in length");
  if (x.size() < 2) throw Error(ErrorCode::TooFewPoints, "pcc needs at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

PccMatrix pcc_matrix(const RatingsTable& table) {
  PccMatrix m;
  m.annotators = table.annotators();
  const auto n = m.annotators.size();
  const auto models = table.models();

  // model -> annotator -> pair -> score
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> scores;
  for (const auto& r : table.rows) scores[r.model_id][r.annotator_id][r.pair_id] = r.score;

  std::vector<double> sum(n * n, 0.0);
  std::vector<std::size_t> count(n * n, 0);
  for (const auto& model : models) {
    auto& by_annotator = scores[model];
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        PairwisePcc p{model, m.annotators[a], m.annotators[b], 0, std::nullopt};
        const auto& sa = by_annotator[m.annotators[a]];
        const auto& sb = by_annotator[m.annotators[b]];
        std::vector<double> x, y;
        for (const auto& [pair, score] : sa) {
          if (auto it = sb.find(pair); it != sb.end()) {
            x.push_back(score);
            y.push_back(it->second);
          }
        }
        p.overlap = x.size();
        if (x.size() >= 2) {
          const double v = pcc(x, y);
          if (!std::isnan(v)) {
            p.value = v;
            sum[a * n + b] += v;
            ++count[a * n + b];
          }
        }
        m.per_model.push_back(std::move(p));
      }
    }
  }

  m.values.assign(n * n, std::nullopt);
  for (std::size_t a = 0; a < n; ++a) {
    m.values[a * n + a] = 1.0;
    for (std::size_t b = a + 1; b < n; ++b) {
      if (count[a * n + b] == 0) continue;
      const double v = sum[a * n + b] / static_cast<double>(count[a * n + b]);
      m.values[a * n + b] = v;
      m.values[b * n + a] = v;
    }
  }
  return m;
}

std::map<std::string, SpeakerMean> speaker_means(const RatingsTable& table, const std::string& model_id) {
  std::map<std::string, std::pair<double, std::size_t>> acc;
  for (const auto& r : table.rows) {
    if (r.model_id != model_id) continue;
    auto& [s, c] = acc[r.speaker_id];
    s += r.score;
    ++c;
  }
  if (acc.empty()) throw Error(ErrorCode::UnknownModel, "no ratings for model '" + model_id + "'");
  std::map<std::string, SpeakerMean> out;
  for (const auto& [speaker, sc] : acc) out[speaker] = {sc.first / static_cast<double>(sc.second), sc.second};
  return out;
}

std::vector<std::size_t> histogram(std::span<const double> values, double bin_width, double lo, double hi) {
  if (!(bin_width > 0.0) || !(hi > lo)) throw Error(ErrorCode::BadBinWidth, "bin width must be positive");
  const double bins_exact = (hi - lo) / bin_width;
  const double bins_round = std::round(bins_exact);
  if (bins_round < 1 || std::abs(bins_exact - bins_round) > 1e-9) {
    throw Error(ErrorCode::BadBinWidth, "bin width " + fmt(bin_width) + " does not divide [" + fmt(lo) + ", " +
                                            fmt(hi) + "]");
  }
  const auto nbins = static_cast<std::size_t>(bins_round);
  std::vector<std::size_t> counts(nbins, 0);
  for (double v : values) {
    if (!(v >= lo && v <= hi)) throw Error(ErrorCode::InvalidArgument, "value " + fmt(v) + " outside histogram range");
    auto idx = static_cast<std::size_t>(std::floor((v - lo) / bin_width));
    ++counts[std::min(idx, nbins - 1)];
  }
  return counts;
}

std::string_view to_string(Grouping g) noexcept {
  switch (g) {
    case Grouping::All: return "all";
    case Grouping::Gender: return "gender";
    case Grouping::Demographic: return "demographic";
  }
  return "all";
}

GroupStats group_stats(const RatingsTable& table, Grouping grouping, int ddof) {
  if (ddof < 0) throw Error(ErrorCode::InvalidArgument, "ddof must be non-negative");
  GroupStats out;
  out.grouping = grouping;

  std::vector<std::string> groups;
  switch (grouping) {
    case Grouping::All: groups = {"all"}; break;
    case Grouping::Gender:
      for (auto g : {suite::Gender::Male, suite::Gender::Female, suite::Gender::Unknown}) {
        groups.emplace_back(suite::to_string(g));
      }
      break;
    case Grouping::Demographic:
      for (auto g : {suite::DemographicGroup::English, suite::DemographicGroup::Spanish, suite::DemographicGroup::Indian,
                     suite::DemographicGroup::Chinese, suite::DemographicGroup::Other,
                     suite::DemographicGroup::Unknown}) {
        groups.emplace_back(suite::to_string(g));
      }
      break;
  }

  auto group_of = [grouping](const Rating& r) -> std::string {
    switch (grouping) {
      case Grouping::Gender: return std::string(suite::to_string(r.gender));
      case Grouping::Demographic: return std::string(suite::to_string(r.group));
      default: return "all";
    }
  };

  std::map<std::pair<std::string, std::string>, std::vector<double>> cells;
  for (const auto& r : table.rows) cells[{group_of(r), r.model_id}].push_back(r.score);

  for (const auto& g : groups) {
    for (const auto& model : table.models()) {
      auto it = cells.find({g, model});
      if (it == cells.end()) {
        out.notices.push_back("no ratings for group " + g + " on " + model);
        continue;
      }
      const auto& v = it->second;
      GroupStat s{g, model, 0.0, 0.0, v.size()};
      for (double x : v) s.mean += x;
      s.mean /= static_cast<double>(v.size());
      if (v.size() > static_cast<std::size_t>(ddof)) {
        double ss = 0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(v.size() - static_cast<std::size_t>(ddof)));
      } else {
        s.std = std::numeric_limits<double>::quiet_NaN();
      }
      out.rows.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<ModelHistogram> speaker_histograms(const RatingsTable& table, double bin_width) {
  std::vector<ModelHistogram> out;
  for (const auto& model : table.models()) {
    ModelHistogram h;
    h.model_id = model;
    h.bin_width = bin_width;
    h.speaker_means = speaker_means(table, model);
    std::vector<double> means;
    for (const auto& [_, sm] : h.speaker_means) means.push_back(sm.mean);
    h.counts = histogram(means, bin_width);
    out.push_back(std::move(h));
  }
  return out;
}

std::string format_pcc(std::optional<double> v) {
  if (!v || std::isnan(*v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::string render_pcc_table(const PccMatrix& matrix) {
  const auto n = matrix.size();
  std::vector<std::vector<std::string>> cells(n + 1, std::vector<std::string>(n + 1));
  cells[0][0] = "Annotator";
  for (std::size_t i = 0; i < n; ++i) {
    cells[0][i + 1] = label(i);
    cells[i + 1][0] = label(i);
    for (std::size_t j = 0; j < n; ++j) cells[i + 1][j + 1] = format_pcc(matrix.at(i, j));
  }
  std::vector<std::size_t> width(n + 1, 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c <= n; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c <= n; ++c) {
      line += row[c];
      if (c < n) line += std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << line << '\n';
  }
  return out.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

ReportBundle render_report(const PccMatrix& matrix, const std::vector<GroupStats>& stats,
                           const std::vector<ModelHistogram>& histograms, const std::filesystem::path& out_dir,
                           const ReportOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());

  ReportBundle bundle;
  const auto n = matrix.size();

  {
    std::ostringstream csv;
    csv << "label,annotator_id";
    for (std::size_t i = 0; i < n; ++i) csv << ',' << label(i);
    csv << '\n';
    for (std::size_t i = 0; i < n; ++i) {
      csv << label(i) << ',' << csv_field(matrix.annotators[i]);
      for (std::size_t j = 0; j < n; ++j) {
        const auto v = matrix.at(i, j);
        csv << ',' << (v ? fmt(*v) : "NA");
      }
      csv << '\n';
    }
    write_file(out_dir / "pcc_matrix.csv", csv.str(), bundle);
  }

  write_file(out_dir / "pcc_table.txt", render_pcc_table(matrix), bundle);

  {
    std::ostringstream csv;
    csv << "model_id,annotator_a,annotator_b,overlap,pcc\n";
    for (const auto& p : matrix.per_model) {
      csv << csv_field(p.model_id) << ',' << csv_field(p.annotator_a) << ',' << csv_field(p.annotator_b) << ','
          << p.overlap << ',' << (p.value ? fmt(*p.value) : "NA") << '\n';
    }
    write_file(out_dir / "pcc_per_model.csv", csv.str(), bundle);
  }

  {
    std::ostringstream csv;
    csv << "grouping,group,model_id,mean,std,n\n";
    for (const auto& gs : stats) {
      for (const auto& r : gs.rows) {
        csv << to_string(gs.grouping) << ',' << csv_field(r.group) << ',' << csv_field(r.model_id) << ','
            << fmt(r.mean) << ',' << fmt(r.std) << ',' << r.n << '\n';
      }
    }
    write_file(out_dir / "group_stats.csv", csv.str(), bundle);
  }

  {
    std::ostringstream hist, means;
    hist << "model_id,bin_lo,bin_hi,count\n";
    means << "model_id,speaker_id,mean,n\n";
    for (const auto& h : histograms) {
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        hist << csv_field(h.model_id) << ',' << fmt(1.0 + b * h.bin_width) << ','
             << fmt(1.0 + (b + 1) * h.bin_width) << ',' << h.counts[b] << '\n';
      }
      for (const auto& [speaker, sm] : h.speaker_means) {
        means << csv_field(h.model_id) << ',' << csv_field(speaker) << ',' << fmt(sm.mean) << ',' << sm.n << '\n';
      }
    }
    write_file(out_dir / "histograms.csv", hist.str(), bundle);
    write_file(out_dir / "speaker_means.csv", means.str(), bundle);
  }

  json j;
  j["schema_version"] = 1;
  j["options"] = {{"bin_width", options.bin_width}, {"ddof", options.ddof}};
  json legend = json::object();
  for (std::size_t i = 0; i < n; ++i) legend[label(i)] = matrix.annotators[i];
  j["annotators"] = legend;
  json rows = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json row = json::array();
    for (std::size_t jx = 0; jx < n; ++jx) row.push_back(opt_json(matrix.at(i, jx)));
    rows.push_back(row);
  }
  j["pcc_matrix"] = rows;
  json per_model = json::array();
  for (const auto& p : matrix.per_model) {
    per_model.push_back({{"model_id", p.model_id},
                         {"annotator_a", p.annotator_a},
                         {"annotator_b", p.annotator_b},
                         {"overlap", p.overlap},
                         {"pcc", opt_json(p.value)}});
  }
  j["pcc_per_model"] = per_model;
  json gs_json = json::array();
  for (const auto& gs : stats) {
    json rows_json = json::array();
    for (const auto& r : gs.rows) {
      rows_json.push_back({{"group", r.group},
                           {"model_id", r.model_id},
                           {"mean", r.mean},
                           {"std", std::isnan(r.std) ? json(nullptr) : json(r.std)},
                           {"n", r.n}});
    }
    gs_json.push_back({{"grouping", to_string(gs.grouping)}, {"rows", rows_json}, {"notices", gs.notices}});
  }
  j["group_stats"] = gs_json;
  json hist_json = json::array();
  for (const auto& h : histograms) {
    json sm = json::object();
    for (const auto& [speaker, m] : h.speaker_means) sm[speaker] = {{"mean", m.mean}, {"n", m.n}};
    hist_json.push_back({{"model_id", h.model_id}, {"bin_width", h.bin_width}, {"counts", h.counts},
                         {"speaker_means", sm}});
  }
  j["histograms"] = hist_json;
  write_file(out_dir / "report.json", j.dump(2) + "\n", bundle);
  return bundle;
}

}  // namespace vcrobust::analysis
