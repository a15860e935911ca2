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

#include <gtest/gtest.h>

#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "suite_fixture.hpp"
#include "test_support.hpp"
#include "vcrobust/evalsvc.hpp"

namespace vcrobust {
namespace {

using nlohmann::json;
using testing::TempDir;

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    manifest = testing::make_served_suite(dir.path(), 4, 8);
    evalsvc::ServiceOptions opts;
    opts.admin_token = "admin-secret";
    opts.reference_clip = true;
    service = std::make_unique<evalsvc::EvalService>(manifest, dir.path(), dir / "ratings.ndjson", opts);
    service->recover();
    server = std::make_unique<evalsvc::HttpServer>(*service);
    port = server->bind("127.0.0.1", 0);
    thread = std::thread([this] { server->listen(); });
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
    client->set_read_timeout(10, 0);
  }

  void TearDown() override {
    server->stop();
    thread.join();
  }

  // Every body a rater can see must be free of true model ids.
  void expect_blinded(const std::string& body) {
    for (const auto& id : manifest.model_ids) EXPECT_EQ(body.find(id), std::string::npos) << body;
  }

  httplib::Result get(const std::string& path, const std::string& token = {}) {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
    auto r = client->Get(path, h);
    if (r) expect_blinded(r->body);
    return r;
  }

  httplib::Result post(const std::string& path, const json& body, const std::string& token = {}) {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
    auto r = client->Post(path, h, body.dump(), "application/json");
    if (r) expect_blinded(r->body);
    return r;
  }

  static void expect_error(const httplib::Result& r, int status, const std::string& code) {
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, status);
    const auto j = json::parse(r->body);
    EXPECT_EQ(j.at("code"), code);
    EXPECT_TRUE(j.at("message").is_string());
  }

  TempDir dir;
  suite::SuiteManifest manifest;
  std::unique_ptr<evalsvc::EvalService> service;
  std::unique_ptr<evalsvc::HttpServer> server;
  std::unique_ptr<httplib::Client> client;
  std::thread thread;
  int port = 0;
};

TEST_F(HttpTest, HealthAndRubric) {
  auto r = get("/api/health");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  r = get("/api/rubric");
  ASSERT_TRUE(r);
  const auto rubric = json::parse(r->body).at("rubric");
  ASSERT_EQ(rubric.size(), 5u);
  EXPECT_EQ(rubric[0].at("score"), 1);
  EXPECT_EQ(rubric[4].at("score"), 5);
}

TEST_F(HttpTest, FullSessionFlow) {
  auto r = post("/api/sessions", {{"annotator_id", "ann1"}, {"seed", 7}});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 201);
  const auto session = json::parse(r->body);
  const std::string sid = session.at("session_id");
  const std::string token = session.at("token");
  EXPECT_EQ(session.at("total"), 32);
  EXPECT_EQ(session.at("cursor"), 0);
  EXPECT_EQ(session.at("resumed"), false);
  EXPECT_EQ(session.at("rubric").size(), 5u);

  for (int i = 0; i < 32; ++i) {
    r = get("/api/sessions/" + sid + "/next", token);
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200);
    const auto next = json::parse(r->body);
    ASSERT_FALSE(next.at("done").get<bool>());
    const auto item = next.at("item");
    EXPECT_EQ(item.at("index"), i);
    EXPECT_EQ(item.at("total"), 32);
    EXPECT_EQ(item.at("label").get<std::string>().rfind("system-", 0), 0u);
    ASSERT_TRUE(item.contains("reference_clip"));

    const auto clip = get(item.at("clip").get<std::string>(), token);
    ASSERT_TRUE(clip);
    EXPECT_EQ(clip->status, 200);
    EXPECT_EQ(clip->get_header_value("Content-Type"), "audio/wav");
    EXPECT_EQ(clip->get_header_value("Accept-Ranges"), "bytes");
    EXPECT_EQ(clip->get_header_value("Cache-Control"), "no-store");
    EXPECT_EQ(clip->body.substr(0, 4), "RIFF");

    r = post("/api/sessions/" + sid + "/scores", {{"index", i}, {"score", 1 + i % 5}}, token);
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200);
    const auto ack = json::parse(r->body);
    EXPECT_TRUE(ack.at("stored").get<bool>());
    EXPECT_EQ(ack.at("revision"), 1);
    EXPECT_EQ(ack.at("cursor"), i + 1);
  }
  r = get("/api/sessions/" + sid + "/next", token);
  ASSERT_TRUE(r);
  EXPECT_TRUE(json::parse(r->body).at("done").get<bool>());

  r = post("/api/sessions", {{"annotator_id", "ann1"}});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body).at("resumed"), true);
  EXPECT_EQ(json::parse(r->body).at("cursor"), 32);

  auto ex = client->Get("/api/export", {{"Authorization", "Bearer admin-secret"}});
  ASSERT_TRUE(ex);
  EXPECT_EQ(ex->status, 200);
  std::size_t lines = 0;
  std::istringstream in(ex->body);
  for (std::string line; std::getline(in, line);) {
    const auto rec = json::parse(line).get<evalsvc::RatingRecord>();
    EXPECT_EQ(rec.annotator_id, "ann1");
    EXPECT_NE(std::find(manifest.model_ids.begin(), manifest.model_ids.end(), rec.model_id), manifest.model_ids.end());
    ++lines;
  }
  EXPECT_EQ(lines, 32u);
}

TEST_F(HttpTest, RangeRequestReturnsSlice) {
  const auto s = json::parse(post("/api/sessions", {{"annotator_id", "ann1"}})->body);
  const std::string token = s.at("token");
  const auto next = json::parse(get("/api/sessions/" + s.at("session_id").get<std::string>() + "/next", token)->body);
  const std::string path = next.at("item").at("clip");
  const auto full = get(path, token);
  auto part = client->Get(path, {{"Authorization", "Bearer " + token}, {"Range", "bytes=4-11"}});
  ASSERT_TRUE(part);
  EXPECT_EQ(part->status, 206);
  EXPECT_EQ(part->body, full->body.substr(4, 8));
  // Query-string token for <audio> elements.
  auto q = client->Get(path + "?token=" + token);
  ASSERT_TRUE(q);
  EXPECT_EQ(q->status, 200);
  EXPECT_EQ(q->body, full->body);
}

TEST_F(HttpTest, ErrorResponses) {
  const auto s = json::parse(post("/api/sessions", {{"annotator_id", "ann1"}})->body);
  const std::string sid = s.at("session_id");
  const std::string token = s.at("token");

  expect_error(post("/api/sessions", {{"annotator_id", ""}}), 400, "InvalidArgument");
  expect_error(client->Post("/api/sessions", "not json", "application/json"), 400, "InvalidArgument");
  expect_error(get("/api/sessions/0123456789abcdef/next", token), 404, "UnknownSession");
  expect_error(get("/api/sessions/" + sid + "/next", "wrong"), 401, "Unauthorized");
  expect_error(get("/api/sessions/" + sid + "/next"), 401, "Unauthorized");
  expect_error(post("/api/sessions/" + sid + "/scores", {{"index", 0}, {"score", 0}}, token), 400, "ScoreOutOfRange");
  expect_error(post("/api/sessions/" + sid + "/scores", {{"index", 0}, {"score", 6}}, token), 400, "ScoreOutOfRange");
  expect_error(post("/api/sessions/" + sid + "/scores", {{"index", 0}, {"score", 3.5}}, token), 400,
               "InvalidArgument");
  expect_error(post("/api/sessions/" + sid + "/scores", {{"index", 4}, {"score", 3}}, token), 409, "IndexAhead");
  expect_error(post("/api/sessions/" + sid + "/scores", {{"index", -1}, {"score", 3}}, token), 400,
               "InvalidArgument");
  expect_error(post("/api/sessions/" + sid + "/scores", {{"score", 3}}, token), 400, "InvalidArgument");
  expect_error(get("/api/clips/ffffffffffffffff", token), 404, "NotFound");
  expect_error(get("/api/clips/ffffffffffffffff"), 401, "Unauthorized");
  expect_error(get("/api/export", token), 401, "Unauthorized");
}

TEST_F(HttpTest, ResubmitReturnsRevision) {
  const auto s = json::parse(post("/api/sessions", {{"annotator_id", "ann1"}})->body);
  const std::string sid = s.at("session_id");
  const std::string token = s.at("token");
  for (int i = 0; i < 4; ++i) post("/api/sessions/" + sid + "/scores", {{"index", i}, {"score", 2}}, token);
  const auto r = post("/api/sessions/" + sid + "/scores", {{"index", 3}, {"score", 5}}, token);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  const auto ack = json::parse(r->body);
  EXPECT_EQ(ack.at("revision"), 2);
  EXPECT_EQ(ack.at("cursor"), 4);
}

TEST_F(HttpTest, ConcurrentAnnotators) {
  std::vector<std::thread> workers;
  std::atomic<int> failures{0};
  for (int a = 0; a < 4; ++a) {
    workers.emplace_back([&, a] {
      httplib::Client c("127.0.0.1", port);
      auto r = c.Post("/api/sessions", json{{"annotator_id", "w" + std::to_string(a)}}.dump(), "application/json");
      if (!r || r->status != 201) {
        ++failures;
        return;
      }
      const auto s = json::parse(r->body);
      const httplib::Headers h{{"Authorization", "Bearer " + s.at("token").get<std::string>()}};
      for (int i = 0; i < 32; ++i) {
        auto ack = c.Post("/api/sessions/" + s.at("session_id").get<std::string>() + "/scores", h,
                          json{{"index", i}, {"score", 3}}.dump(), "application/json");
        if (!ack || ack->status != 200) ++failures;
      }
    });
  }
  for (auto& w : workers) w.join();
  EXPECT_EQ(failures.load(), 0);
  EXPECT_EQ(service->export_records().size(), 128u);
  evalsvc::EvalService fresh(manifest, dir.path(), dir / "ratings.ndjson", {});
  const auto stats = fresh.recover();
  EXPECT_EQ(stats.sessions, 4u);
  EXPECT_EQ(stats.ratings, 128u);
}

}  // namespace
}  // namespace vcrobust
