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

#ifndef VCROBUST_EVALSVC_HPP
#define VCROBUST_EVALSVC_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcrobust/error.hpp"
#include "vcrobust/suite.hpp"

namespace vcrobust::evalsvc {

struct RubricEntry {
  int score = 0;
  std::string description;
};

using Rubric = std::array<RubricEntry, 5>;

/// The five-point intelligibility rubric used by the listening test.
Rubric default_rubric();
void validate(const Rubric& rubric);
nlohmann::json rubric_json(const Rubric& rubric);

struct RatingRecord {
  std::string annotator_id;
  std::string model_id;
  std::string pair_id;
  int score = 0;
  std::string submitted_at;  // ISO-8601 UTC
  int revision = 1;

  bool operator==(const RatingRecord&) const = default;
};

void to_json(nlohmann::json& j, const RatingRecord& r);
void from_json(const nlohmann::json& j, RatingRecord& r);

/// Append-only newline-delimited JSON. Every line carries a "checksum" field
/// (FNV-1a-64 of the line's JSON without that field). Appends are serialized
/// and fsync'd before append() returns.
class RatingStore {
 public:
  explicit RatingStore(std::filesystem::path path);

  const std::filesystem::path& path() const noexcept { return path_; }

  /// Reads every event. A malformed line (bad JSON or checksum) throws
  /// CorruptStore naming the line; an unterminated final line is a torn
  /// write that was never acknowledged and is dropped.
  std::vector<nlohmann::json> read_all(std::size_t* torn_lines = nullptr) const;

  /// Cuts a torn final line so later appends start on a fresh line.
  void repair_tail() const;

  void append(nlohmann::json event);

 private:
  std::filesystem::path path_;
  std::mutex write_mutex_;
};

/// Latest revision per (annotator, model, pair), sorted by that key.
std::vector<RatingRecord> authoritative_ratings(const std::vector<nlohmann::json>& events);

/// Offline export straight from a store file.
std::vector<RatingRecord> export_ratings(const std::filesystem::path& store_path);

void write_ratings(const std::vector<RatingRecord>& records, std::ostream& out);
std::string ratings_ndjson(const std::vector<RatingRecord>& records);
std::vector<RatingRecord> read_ratings(const std::filesystem::path& path);

struct ServiceOptions {
  Rubric rubric = default_rubric();
  /// Attach the noised source clip to every item as a reference.
  bool reference_clip = false;
  std::string admin_token;
};

struct SessionInfo {
  std::string session_id;
  std::string annotator_id;
  std::string token;
  std::size_t total = 0;
  std::size_t cursor = 0;
  bool resumed = false;
};

struct ItemView {
  std::size_t index = 0;
  std::size_t total = 0;
  std::string label;  // blinded system label
  std::string clip_locator;
  std::optional<std::string> reference_locator;
};

struct SubmitAck {
  std::size_t index = 0;
  int revision = 1;
  std::size_t cursor = 0;
};

struct ClipData {
  std::string bytes;
  std::string media_type = "audio/wav";
};

struct RecoveryStats {
  std::size_t sessions = 0;
  std::size_t ratings = 0;
  std::size_t torn_lines = 0;
  std::size_t foreign_events = 0;  // events for a different suite
};

/// Transport-independent listening-test logic. Thread-safe.
class EvalService {
 public:
  EvalService(suite::SuiteManifest manifest, std::filesystem::path suite_dir, std::filesystem::path store_path,
              ServiceOptions options = {});

  /// Rebuilds sessions, cursors and revisions from the store.
  RecoveryStats recover();

  const suite::SuiteManifest& manifest() const noexcept { return manifest_; }
  const Rubric& rubric() const noexcept { return options_.rubric; }
  std::size_t item_count() const noexcept { return items_.size(); }

  /// Returns the annotator's existing session for this suite if there is one.
  SessionInfo create_session(const std::string& annotator_id, std::optional<std::uint64_t> seed = std::nullopt);

  /// Item at the cursor, or nullopt when every item has a score.
  std::optional<ItemView> next_item(const std::string& session_id, const std::string& token) const;

  SubmitAck submit_score(const std::string& session_id, const std::string& token, std::size_t index, int score);

  /// Any live session token grants clip access.
  ClipData get_clip(const std::string& locator, const std::string& token) const;

  bool is_admin(const std::string& token) const;
  std::vector<RatingRecord> export_records() const;

  /// Server-side only; tests use it to check blinding.
  std::map<std::string, std::string> blinding_map(const std::string& session_id) const;
  std::vector<std::pair<std::string, std::string>> item_order(const std::string& session_id) const;

 private:
  struct Item {
    std::string model_id;
    std::string pair_id;
  };
  struct SessionState {
    std::string session_id;
    std::string annotator_id;
    std::string token;
    std::uint64_t seed = 0;
    std::vector<std::size_t> order;
    std::size_t cursor = 0;
    std::map<std::string, std::string> blinding;
    mutable std::mutex mutex;
  };

  SessionState& session_for(const std::string& session_id, const std::string& token) const;
  void load_session_event(const nlohmann::json& e);
  std::string locator_for(const std::string& kind, const std::string& model_id, const std::string& pair_id) const;

  suite::SuiteManifest manifest_;
  std::filesystem::path suite_dir_;
  ServiceOptions options_;
  RatingStore store_;
  std::vector<Item> items_;
  std::string locator_salt_;
  std::map<std::string, std::filesystem::path> clips_;  // locator -> relative path

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::unique_ptr<SessionState>> sessions_;
  std::map<std::string, std::string> session_by_annotator_;
  std::map<std::string, std::string> session_by_token_;

  mutable std::mutex ratings_mutex_;
  std::map<std::tuple<std::string, std::string, std::string>, RatingRecord> latest_;
};

/// HTTP/1.1 JSON front end over an EvalService.
class HttpServer {
 public:
  explicit HttpServer(EvalService& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP status used for each error code.
int http_status(ErrorCode code) noexcept;

std::string utc_now_iso8601();

}  // namespace vcrobust::evalsvc

#endif  // VCROBUST_EVALSVC_HPP
