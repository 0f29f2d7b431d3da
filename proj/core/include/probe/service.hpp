// Copyright 2026 The Scene Probe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace probe {

struct ServiceConfig {
  /// Either one scene directory (containing scene.json) or a directory of
  /// scene directories. Products are read from `<scene>/products`.
  std::filesystem::path scenes_dir;
  std::chrono::seconds session_ttl{1800};
  /// Defaults to std::chrono::steady_clock::now.
  std::function<std::chrono::steady_clock::time_point()> clock;
};

/// PROBE_PORT, if set and valid.
std::optional<int> port_from_env();
/// PROBE_SESSION_TTL in seconds, if set and valid.
std::optional<std::chrono::seconds> session_ttl_from_env();

/// HTTP facade over scene products and compositing sessions.
///
///   GET    /scenes
///   GET    /scenes/{s}/background.png
///   GET    /scenes/{s}/maps/{occlusion|lighting}.png
///   GET    /scenes/{s}/products
///   POST   /scenes/{s}/sessions
///   GET    /sessions/{id}
///   DELETE /sessions/{id}
///   POST   /sessions/{id}/sprites              (PNG body)
///   POST   /sessions/{id}/placements           (JSON body, PNG response)
///   PATCH  /sessions/{id}/placements/{p}       (JSON body, PNG response)
///   DELETE /sessions/{id}/placements/{p}
///   GET    /sessions/{id}/composite.png?shadow=&occlusion=&lighting=&scale=
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. Requires a successful bind().
  void run();
  void stop();

  std::size_t session_count() const;
  /// Drops sessions idle for longer than the TTL. Also runs on every request.
  void evict_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace probe
