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

#ifndef PAIRRANK_SERVER_HPP_
#define PAIRRANK_SERVER_HPP_

#include <filesystem>
#include <functional>
#include <memory>
#include <string>

#include "pairrank/survey.hpp"

namespace pairrank {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path image_dir;
  std::filesystem::path ui_dir;
  Strategy default_strategy = Strategy::kUniform;
};

// HTTP front end for a SurveyService.
class SurveyServer {
 public:
  SurveyServer(SurveyService& service, ServerConfig config);
  ~SurveyServer();

  // Binds and returns the bound port.
  int bind();
  // Blocks until stop().
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Runs until SIGINT/SIGTERM. `on_ready` receives the bound port.
void run_server(SurveyConfig survey, ServerConfig server,
                const std::function<void(int)>& on_ready = {});

}  // namespace pairrank

#endif  // PAIRRANK_SERVER_HPP_
