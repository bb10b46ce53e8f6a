/*
 * Copyright 2026 The pairrank Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pairrank/server.hpp"

#include <pthread.h>
#include <signal.h>

#include <stdexcept>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace pairrank {
namespace {

using json = nlohmann::json;

int status_for(SurveyError::Kind kind) {
  switch (kind) {
    case SurveyError::Kind::kBadRequest:
      return 400;
    case SurveyError::Kind::kNotFound:
      return 404;
    case SurveyError::Kind::kConflict:
      return 409;
    case SurveyError::Kind::kGone:
      return 410;
  }
  return 500;
}

void send_json(httplib::Response& res, const std::string& body, int status = 200) {
  res.status = status;
  res.set_header("Cache-Control", "no-store");
  res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, json{{"error", message}}.dump(), status);
}

json rating_json(const std::optional<RatingView>& r) {
  if (!r) return nullptr;
  return {{"score", r->score}, {"mu", r->mu}, {"sigma", r->sigma}};
}

// Runs a handler, translating exceptions into JSON error responses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const SurveyError& e) {
      send_error(res, status_for(e.kind()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("malformed request body: ") + e.what());
    } catch (const std::invalid_argument& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

}  // namespace

struct SurveyServer::Impl {
  Impl(SurveyService& s, ServerConfig c) : service(s), config(std::move(c)) {}

  SurveyService& service;
  ServerConfig config;
  httplib::Server http;
  int port = -1;
};

SurveyServer::SurveyServer(SurveyService& service, ServerConfig config)
    : impl_(std::make_unique<Impl>(service, std::move(config))) {
  auto& http = impl_->http;
  auto& svc = impl_->service;
  const Strategy fallback = impl_->config.default_strategy;

  http.Post("/api/sessions", guarded([&svc](const httplib::Request&, httplib::Response& res) {
    send_json(res, json{{"session_id", svc.create_session()}}.dump(), 201);
  }));

  http.Get(R"(/api/sessions/([^/]+)/next)",
           guarded([&svc, fallback](const httplib::Request& req, httplib::Response& res) {
             const Strategy strategy = req.has_param("strategy")
                                           ? parse_strategy(req.get_param_value("strategy"))
                                           : fallback;
             const auto t = svc.next_pair(req.matches[1], strategy);
             send_json(res, json{{"token", t.token},
                                 {"left", {{"id", t.left.id.str()}, {"image", t.left.image}}},
                                 {"right", {{"id", t.right.id.str()}, {"image", t.right.image}}}}
                                .dump());
           }));

  http.Post(R"(/api/sessions/([^/]+)/vote)",
            guarded([&svc](const httplib::Request& req, httplib::Response& res) {
              const auto body = json::parse(req.body);
              if (!body.is_object() || !body.contains("token") || !body["token"].is_string() ||
                  !body.contains("outcome") || !body["outcome"].is_string()) {
                throw SurveyError(SurveyError::Kind::kBadRequest,
                                  "body must be {\"token\": string, \"outcome\": string}");
              }
              const auto choice = parse_vote_choice(body["outcome"].get<std::string>());
              const auto r = svc.record_vote(req.matches[1], body["token"].get<std::string>(),
                                             choice);
              send_json(res, json{{"recorded", r.recorded},
                                  {"updated",
                                   {{"left", rating_json(r.left)},
                                    {"right", rating_json(r.right)}}}}
                                 .dump());
            }));

  http.Get("/api/scores", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
    const std::string name = req.has_param("method") ? req.get_param_value("method") : "elo";
    send_json(res, svc.scores_json(parse_method(name)));
  }));

  http.Get("/api/items", guarded([&svc](const httplib::Request&, httplib::Response& res) {
    send_json(res, svc.items_json());
  }));

  if (!impl_->config.image_dir.empty() &&
      !http.set_mount_point("/images", impl_->config.image_dir.string())) {
    throw std::invalid_argument("image directory not found: " +
                                impl_->config.image_dir.string());
  }
  if (!impl_->config.ui_dir.empty() &&
      !http.set_mount_point("/", impl_->config.ui_dir.string())) {
    throw std::invalid_argument("ui directory not found: " + impl_->config.ui_dir.string());
  }
}

SurveyServer::~SurveyServer() = default;

int SurveyServer::bind() {
  if (impl_->config.port == 0) {
    impl_->port = impl_->http.bind_to_any_port(impl_->config.host);
  } else if (impl_->http.bind_to_port(impl_->config.host, impl_->config.port)) {
    impl_->port = impl_->config.port;
  }
  if (impl_->port < 0) {
    throw std::runtime_error("cannot bind " + impl_->config.host + ":" +
                             std::to_string(impl_->config.port));
  }
  return impl_->port;
}

void SurveyServer::serve() {
  if (impl_->port < 0) bind();
  impl_->http.listen_after_bind();
}

void SurveyServer::stop() { impl_->http.stop(); }

void run_server(SurveyConfig survey, ServerConfig server,
                const std::function<void(int)>& on_ready) {
  // Block termination signals in every thread; a dedicated thread waits on them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  SurveyService service(std::move(survey));
  SurveyServer http(service, std::move(server));
  const int port = http.bind();
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    http.stop();
  });
  if (on_ready) on_ready(port);
  http.serve();
  // serve() also returns on internal failure; wake the waiter either way.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
}

}  // namespace pairrank
