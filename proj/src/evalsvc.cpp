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

#include "vcrobust/evalsvc.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "vcrobust/error.hpp"
#include "vcrobust/rng.hpp"

namespace vcrobust::evalsvc {

namespace fs = std::filesystem;
using nlohmann::json;

Rubric default_rubric() {
  return {{
      {1, "doesn't sound like speech"},
      {2, "sounds like speech, weird noise and incomprehensible"},
      {3, "some comprehensible bits, can't fully parse name"},
      {4, "can hear what the name is, still some noise or quality issues"},
      {5, "clearly can hear the name, sounds clean"},
  }};
}

void validate(const Rubric& rubric) {
  for (std::size_t i = 0; i < rubric.size(); ++i) {
    if (rubric[i].score != static_cast<int>(i) + 1) {
      throw Error(ErrorCode::InvalidConfig, "rubric scores must be exactly 1..5 in order");
    }
    if (rubric[i].description.empty()) throw Error(ErrorCode::InvalidConfig, "rubric description is empty");
  }
}

json rubric_json(const Rubric& rubric) {
  json out = json::array();
  for (const auto& e : rubric) out.push_back({{"score", e.score}, {"description", e.description}});
  return out;
}

void to_json(json& j, const RatingRecord& r) {
  j = json{{"annotator_id", r.annotator_id}, {"model_id", r.model_id},         {"pair_id", r.pair_id},
           {"score", r.score},               {"submitted_at", r.submitted_at}, {"revision", r.revision}};
}

void from_json(const json& j, RatingRecord& r) {
  r.annotator_id = j.at("annotator_id").get<std::string>();
  r.model_id = j.at("model_id").get<std::string>();
  r.pair_id = j.at("pair_id").get<std::string>();
  r.score = j.at("score").get<int>();
  r.submitted_at = j.value("submitted_at", std::string());
  r.revision = j.value("revision", 1);
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string random_hex(std::size_t words) {
  static thread_local std::random_device rd;
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    out += hex64(v);
  }
  return out;
}

std::string checksum_of(const json& body) { return hex64(fnv1a64(body.dump())); }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

// ---------------------------------------------------------------------------
// RatingStore

RatingStore::RatingStore(fs::path path) : path_(std::move(path)) {}

std::vector<json> RatingStore::read_all(std::size_t* torn_lines) const {
  std::vector<json> events;
  if (torn_lines) *torn_lines = 0;
  if (!fs::exists(path_)) return events;
  const std::string content = read_file(path_);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    ++line_no;
    if (nl == std::string::npos) {
      if (torn_lines) ++*torn_lines;
      break;
    }
    const std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    json e;
    try {
      e = json::parse(line);
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::CorruptStore, path_.string() + " line " + std::to_string(line_no) + ": " + ex.what());
    }
    if (!e.is_object() || !e.contains("checksum") || !e.at("checksum").is_string()) {
      throw Error(ErrorCode::CorruptStore, path_.string() + " line " + std::to_string(line_no) + ": missing checksum");
    }
    const std::string sum = e.at("checksum").get<std::string>();
    e.erase("checksum");
    if (checksum_of(e) != sum) {
      throw Error(ErrorCode::CorruptStore, path_.string() + " line " + std::to_string(line_no) + ": checksum mismatch");
    }
    events.push_back(std::move(e));
  }
  return events;
}

void RatingStore::repair_tail() const {
  if (!fs::exists(path_)) return;
  const std::string content = read_file(path_);
  if (content.empty() || content.back() == '\n') return;
  const auto last = content.rfind('\n');
  fs::resize_file(path_, last == std::string::npos ? 0 : last + 1);
}

void RatingStore::append(json event) {
  event.erase("checksum");
  const std::string sum = checksum_of(event);
  event["checksum"] = sum;
  const std::string line = event.dump() + "\n";

  std::lock_guard lock(write_mutex_);
  const int fd = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::IoFailure, "cannot open store " + path_.string());
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      ::close(fd);
      throw Error(ErrorCode::IoFailure, "write to store " + path_.string() + " failed");
    }
    written += static_cast<std::size_t>(n);
  }
  const int sync = ::fsync(fd);
  ::close(fd);
  if (sync != 0) throw Error(ErrorCode::IoFailure, "fsync of store " + path_.string() + " failed");
}

std::vector<RatingRecord> authoritative_ratings(const std::vector<json>& events) {
  std::map<std::tuple<std::string, std::string, std::string>, RatingRecord> latest;
  for (const auto& e : events) {
    if (e.value("type", std::string()) != "rating") continue;
    auto r = e.get<RatingRecord>();
    auto key = std::make_tuple(r.annotator_id, r.model_id, r.pair_id);
    auto it = latest.find(key);
    if (it == latest.end() || it->second.revision < r.revision) latest[key] = std::move(r);
  }
  std::vector<RatingRecord> out;
  out.reserve(latest.size());
  for (auto& [key, r] : latest) out.push_back(std::move(r));
  return out;
}

std::vector<RatingRecord> export_ratings(const fs::path& store_path) {
  if (!fs::exists(store_path)) throw Error(ErrorCode::IoFailure, "store " + store_path.string() + " does not exist");
  return authoritative_ratings(RatingStore(store_path).read_all());
}

void write_ratings(const std::vector<RatingRecord>& records, std::ostream& out) {
  for (const auto& r : records) out << json(r).dump() << '\n';
}

std::string ratings_ndjson(const std::vector<RatingRecord>& records) {
  std::ostringstream out;
  write_ratings(records, out);
  return out.str();
}

std::vector<RatingRecord> read_ratings(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open ratings " + path.string());
  std::vector<RatingRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line).get<RatingRecord>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::CorruptStore, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// EvalService

EvalService::EvalService(suite::SuiteManifest manifest, fs::path suite_dir, fs::path store_path,
                         ServiceOptions options)
    : manifest_(std::move(manifest)),
      suite_dir_(std::move(suite_dir)),
      options_(std::move(options)),
      store_(std::move(store_path)),
      locator_salt_(random_hex(2)) {
  validate(options_.rubric);
  if (manifest_.model_ids.empty() || manifest_.pairs.empty()) {
    throw Error(ErrorCode::SuiteNotLoaded, "suite has no models or no pairs");
  }
  for (const auto& model : manifest_.model_ids) {
    for (const auto& pair : manifest_.pairs) {
      const auto it = pair.model_outputs.find(model);
      if (it == pair.model_outputs.end()) {
        throw Error(ErrorCode::SuiteNotLoaded, "no output attached for model '" + model + "', pair " + pair.pair_id);
      }
      items_.push_back({model, pair.pair_id});
      clips_[locator_for("out", model, pair.pair_id)] = it->second;
    }
  }
  for (const auto& pair : manifest_.pairs) {
    clips_[locator_for("ref", "", pair.pair_id)] = pair.source_clip.path;
  }
}

std::string EvalService::locator_for(const std::string& kind, const std::string& model_id,
                                     const std::string& pair_id) const {
  return hex64(fnv1a64(locator_salt_ + "\x1f" + kind + "\x1f" + model_id + "\x1f" + pair_id));
}

void EvalService::load_session_event(const json& e) {
  auto s = std::make_unique<SessionState>();
  s->session_id = e.at("session_id").get<std::string>();
  s->annotator_id = e.at("annotator_id").get<std::string>();
  s->token = e.at("token").get<std::string>();
  s->seed = e.at("seed").get<std::uint64_t>();
  s->order = e.at("item_order").get<std::vector<std::size_t>>();
  s->blinding = e.at("blinding").get<std::map<std::string, std::string>>();
  if (s->order.size() != items_.size()) {
    throw Error(ErrorCode::CorruptStore, "session " + s->session_id + " has " + std::to_string(s->order.size()) +
                                             " items but the suite has " + std::to_string(items_.size()));
  }
  session_by_annotator_[s->annotator_id] = s->session_id;
  session_by_token_[s->token] = s->session_id;
  sessions_[s->session_id] = std::move(s);
}

RecoveryStats EvalService::recover() {
  RecoveryStats stats;
  const auto events = store_.read_all(&stats.torn_lines);
  if (stats.torn_lines) store_.repair_tail();
  std::unique_lock lock(sessions_mutex_);
  std::lock_guard rlock(ratings_mutex_);
  sessions_.clear();
  session_by_annotator_.clear();
  session_by_token_.clear();
  latest_.clear();
  for (const auto& e : events) {
    if (e.value("suite_id", std::string()) != manifest_.suite_id) {
      ++stats.foreign_events;
      continue;
    }
    const auto type = e.value("type", std::string());
    if (type == "session") {
      load_session_event(e);
      ++stats.sessions;
    } else if (type == "rating") {
      const auto sid = e.at("session_id").get<std::string>();
      const auto it = sessions_.find(sid);
      if (it == sessions_.end()) throw Error(ErrorCode::CorruptStore, "rating for unknown session " + sid);
      auto& s = *it->second;
      const auto index = e.at("item_index").get<std::size_t>();
      if (index == s.cursor) ++s.cursor;
      auto r = e.get<RatingRecord>();
      auto key = std::make_tuple(r.annotator_id, r.model_id, r.pair_id);
      auto lit = latest_.find(key);
      if (lit == latest_.end() || lit->second.revision < r.revision) latest_[key] = std::move(r);
      ++stats.ratings;
    }
  }
  return stats;
}

SessionInfo EvalService::create_session(const std::string& annotator_id, std::optional<std::uint64_t> seed) {
  if (annotator_id.empty()) throw Error(ErrorCode::InvalidArgument, "annotator_id must not be empty");
  std::unique_lock lock(sessions_mutex_);
  if (const auto it = session_by_annotator_.find(annotator_id); it != session_by_annotator_.end()) {
    const auto& s = *sessions_.at(it->second);
    std::lock_guard slock(s.mutex);
    return {s.session_id, s.annotator_id, s.token, s.order.size(), s.cursor, true};
  }

  const std::uint64_t session_seed = seed ? *seed : (std::random_device{}() * 0x100000001ULL) ^ std::random_device{}();
  SeededRng rng(session_seed);
  std::vector<std::size_t> order(items_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<std::size_t> label_numbers(manifest_.model_ids.size());
  for (std::size_t i = 0; i < label_numbers.size(); ++i) label_numbers[i] = i + 1;
  rng.shuffle(label_numbers);
  std::map<std::string, std::string> blinding;
  for (std::size_t i = 0; i < manifest_.model_ids.size(); ++i) {
    blinding[manifest_.model_ids[i]] = "system-" + std::to_string(label_numbers[i]);
  }

  json event = {{"type", "session"},
                {"suite_id", manifest_.suite_id},
                {"session_id", random_hex(1)},
                {"annotator_id", annotator_id},
                {"token", random_hex(2)},
                {"seed", session_seed},
                {"item_order", order},
                {"blinding", blinding},
                {"created_at", utc_now_iso8601()}};
  store_.append(event);
  load_session_event(event);
  const auto& s = *sessions_.at(event.at("session_id").get<std::string>());
  return {s.session_id, s.annotator_id, s.token, s.order.size(), 0, false};
}

EvalService::SessionState& EvalService::session_for(const std::string& session_id, const std::string& token) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session '" + session_id + "'");
  if (it->second->token != token) throw Error(ErrorCode::Unauthorized, "bearer token does not match the session");
  return *it->second;
}

std::optional<ItemView> EvalService::next_item(const std::string& session_id, const std::string& token) const {
  auto& s = session_for(session_id, token);
  std::lock_guard lock(s.mutex);
  if (s.cursor >= s.order.size()) return std::nullopt;
  const auto& item = items_[s.order[s.cursor]];
  ItemView view;
  view.index = s.cursor;
  view.total = s.order.size();
  view.label = s.blinding.at(item.model_id);
  view.clip_locator = locator_for("out", item.model_id, item.pair_id);
  if (options_.reference_clip) view.reference_locator = locator_for("ref", "", item.pair_id);
  return view;
}

SubmitAck EvalService::submit_score(const std::string& session_id, const std::string& token, std::size_t index,
                                    int score) {
  if (score < 1 || score > 5) {
    throw Error(ErrorCode::ScoreOutOfRange, "score " + std::to_string(score) + " is outside 1..5");
  }
  auto& s = session_for(session_id, token);
  std::lock_guard lock(s.mutex);
  if (index > s.cursor || index >= s.order.size()) {
    throw Error(ErrorCode::IndexAhead, "item " + std::to_string(index) + " is ahead of the cursor (" +
                                           std::to_string(s.cursor) + ")");
  }
  const auto& item = items_[s.order[index]];
  RatingRecord rec{s.annotator_id, item.model_id, item.pair_id, score, utc_now_iso8601(), 1};
  const auto key = std::make_tuple(rec.annotator_id, rec.model_id, rec.pair_id);
  {
    std::lock_guard rlock(ratings_mutex_);
    if (const auto it = latest_.find(key); it != latest_.end()) rec.revision = it->second.revision + 1;
  }
  json event = rec;
  event["type"] = "rating";
  event["suite_id"] = manifest_.suite_id;
  event["session_id"] = s.session_id;
  event["item_index"] = index;
  store_.append(event);  // durable before the state change is visible

  {
    std::lock_guard rlock(ratings_mutex_);
    latest_[key] = rec;
  }
  if (index == s.cursor) ++s.cursor;
  return {index, rec.revision, s.cursor};
}

ClipData EvalService::get_clip(const std::string& locator, const std::string& token) const {
  {
    std::shared_lock lock(sessions_mutex_);
    if (!is_admin(token) && !session_by_token_.count(token)) {
      throw Error(ErrorCode::Unauthorized, "a session token is required for clip access");
    }
  }
  const auto it = clips_.find(locator);
  if (it == clips_.end()) throw Error(ErrorCode::NotFound, "no clip '" + locator + "'");
  const auto root = fs::weakly_canonical(suite_dir_);
  const auto full = fs::weakly_canonical(suite_dir_ / it->second);
  const auto rel = full.lexically_relative(root);
  if (rel.empty() || *rel.begin() == "..") throw Error(ErrorCode::Forbidden, "clip lies outside the suite directory");
  if (!fs::exists(full)) throw Error(ErrorCode::NotFound, "clip file is missing");
  return {read_file(full), "audio/wav"};
}

bool EvalService::is_admin(const std::string& token) const {
  return !options_.admin_token.empty() && token == options_.admin_token;
}

std::vector<RatingRecord> EvalService::export_records() const {
  std::lock_guard lock(ratings_mutex_);
  std::vector<RatingRecord> out;
  out.reserve(latest_.size());
  for (const auto& [key, r] : latest_) out.push_back(r);
  return out;
}

std::map<std::string, std::string> EvalService::blinding_map(const std::string& session_id) const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.at(session_id)->blinding;
}

std::vector<std::pair<std::string, std::string>> EvalService::item_order(const std::string& session_id) const {
  std::shared_lock lock(sessions_mutex_);
  std::vector<std::pair<std::string, std::string>> out;
  for (auto i : sessions_.at(session_id)->order) out.emplace_back(items_[i].model_id, items_[i].pair_id);
  return out;
}

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::Unauthorized:
      return 401;
    case ErrorCode::Forbidden:
      return 403;
    case ErrorCode::IndexAhead:
      return 409;
    case ErrorCode::ScoreOutOfRange:
    case ErrorCode::InvalidArgument:
      return 400;
    case ErrorCode::SuiteNotLoaded:
      return 503;
    default:
      return 500;
  }
}

}  // namespace vcrobust::evalsvc
