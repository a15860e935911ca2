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

#include "httplib.h"
#include "vcrobust/error.hpp"
#include "vcrobust/evalsvc.hpp"

namespace vcrobust::evalsvc {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, http_status(code), {{"code", std::string(to_string(code))}, {"message", message}});
}

std::string bearer_token(const httplib::Request& req) {
  const auto auth = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (auth.size() > prefix.size() && auth.compare(0, prefix.size(), prefix) == 0) return auth.substr(prefix.size());
  // <audio src=...> cannot send headers, so clips also accept ?token=.
  return req.has_param("token") ? req.get_param_value("token") : std::string();
}

json parse_body(const httplib::Request& req) {
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed JSON body: ") + e.what());
  }
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.detail());
    } catch (const json::exception& e) {
      send_error(res, ErrorCode::InvalidArgument, e.what());
    } catch (const std::exception& e) {
      send_json(res, 500, {{"code", "Internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace

struct HttpServer::Impl {
  EvalService& service;
  httplib::Server server;

  explicit Impl(EvalService& s) : service(s) {}

  json item_json(const ItemView& item) const {
    json j = {{"index", item.index},
              {"total", item.total},
              {"label", item.label},
              {"clip", "/api/clips/" + item.clip_locator}};
    if (item.reference_locator) j["reference_clip"] = "/api/clips/" + *item.reference_locator;
    return j;
  }

  void routes() {
    server.Get("/api/health", guarded([](const httplib::Request&, httplib::Response& res) {
                 send_json(res, 200, {{"status", "ok"}});
               }));

    server.Get("/api/rubric", guarded([this](const httplib::Request&, httplib::Response& res) {
                 send_json(res, 200, {{"rubric", rubric_json(service.rubric())}});
               }));

    server.Post("/api/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  const auto annotator = body.value("annotator_id", std::string());
                  std::optional<std::uint64_t> seed;
                  if (body.contains("seed") && !body.at("seed").is_null()) seed = body.at("seed").get<std::uint64_t>();
                  const auto info = service.create_session(annotator, seed);
                  send_json(res, info.resumed ? 200 : 201,
                            {{"session_id", info.session_id},
                             {"annotator_id", info.annotator_id},
                             {"token", info.token},
                             {"total", info.total},
                             {"cursor", info.cursor},
                             {"resumed", info.resumed},
                             {"rubric", rubric_json(service.rubric())}});
                }));

    server.Get(R"(/api/sessions/([0-9a-f]+)/next)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto item = service.next_item(req.matches[1], bearer_token(req));
                 if (!item) {
                   send_json(res, 200, {{"done", true}, {"total", service.item_count()}});
                   return;
                 }
                 send_json(res, 200, {{"done", false}, {"item", item_json(*item)}, {"rubric", rubric_json(service.rubric())}});
               }));

    server.Post(R"(/api/sessions/([0-9a-f]+)/scores)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  if (!body.contains("index") || !body.contains("score")) {
                    throw Error(ErrorCode::InvalidArgument, "body needs index and score");
                  }
                  if (!body.at("index").is_number_integer() || !body.at("score").is_number_integer()) {
                    throw Error(ErrorCode::InvalidArgument, "index and score must be integers");
                  }
                  const auto index = body.at("index").get<std::int64_t>();
                  if (index < 0) throw Error(ErrorCode::InvalidArgument, "index must be non-negative");
                  const auto ack = service.submit_score(req.matches[1], bearer_token(req), static_cast<std::size_t>(index),
                                                        body.at("score").get<int>());
                  send_json(res, 200,
                            {{"stored", true}, {"index", ack.index}, {"revision", ack.revision}, {"cursor", ack.cursor}});
                }));

    server.Get(R"(/api/clips/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 auto clip = service.get_clip(req.matches[1], bearer_token(req));
                 res.set_header("Accept-Ranges", "bytes");
                 res.set_header("Cache-Control", "no-store");
                 // httplib slices the body for Range requests.
                 res.set_content(std::move(clip.bytes), clip.media_type);
               }));

    server.Get("/api/export", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 if (!service.is_admin(bearer_token(req))) {
                   throw Error(ErrorCode::Unauthorized, "export needs the admin token");
                 }
                 res.set_content(ratings_ndjson(service.export_records()), "application/x-ndjson");
               }));
  }
};

HttpServer::HttpServer(EvalService& service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  impl_->routes();
  if (static_dir) impl_->server.set_mount_point("/", static_dir->string());
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::IoFailure, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::IoFailure, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace vcrobust::evalsvc
