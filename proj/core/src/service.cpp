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

#include "probe/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <json.hpp>
#include <map>
#include <mutex>
#include <random>

#include "probe/composer.hpp"
#include "probe/png_io.hpp"

namespace probe {
namespace {

using nlohmann::json;
using TimePoint = std::chrono::steady_clock::time_point;

struct HttpError {
  int status;
  std::string message;
  std::string stage;
};

struct Session {
  std::mutex mutex;
  std::string id;
  std::string scene_id;
  std::shared_ptr<const SceneProducts> products;
  std::map<int, std::shared_ptr<const Sprite>> sprites;
  std::vector<Placement> placements;
  std::map<int, int> placement_sprite;
  TimePoint created;
  TimePoint touched;
};

struct SceneEntry {
  std::string id;
  std::filesystem::path dir;
  SceneManifest manifest;
  std::shared_ptr<const SceneProducts> products;  // loaded lazily
};

std::optional<long> parse_long_env(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') return std::nullopt;
  char* end = nullptr;
  const long v = std::strtol(value, &end, 10);
  if (*end != '\0' || v <= 0) return std::nullopt;
  return v;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_png(httplib::Response& res, const Image& image) {
  const std::vector<std::uint8_t> png = encode_png(image);
  res.status = 200;
  res.set_content(reinterpret_cast<const char*>(png.data()), png.size(), "image/png");
}

bool parse_flag(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) return true;
  const std::string v = req.get_param_value(name);
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw HttpError{400, std::string("bad value for '") + name + "'", ""};
}

StageToggles toggles_of(const httplib::Request& req) {
  StageToggles t;
  t.shadow = parse_flag(req, "shadow");
  t.occlusion = parse_flag(req, "occlusion");
  t.lighting = parse_flag(req, "lighting");
  t.scale = parse_flag(req, "scale");
  return t;
}

json parse_body(const httplib::Request& req) {
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw HttpError{400, "expected a JSON object", ""};
    return j;
  } catch (const json::exception& e) {
    throw HttpError{400, std::string("malformed JSON: ") + e.what(), ""};
  }
}

double number_field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end() || !it->is_number()) {
    throw HttpError{400, std::string("missing numeric field '") + name + "'", ""};
  }
  return it->get<double>();
}

std::optional<double> optional_number(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw HttpError{400, std::string("field '") + name + "' must be a number", ""};
  return it->get<double>();
}

// Library errors raised while placing or moving an object.
HttpError placement_error(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kOffPlane:
      return {422, e.what(), "groundplane"};
    case ErrorCode::kInvalidArgument:
      return {400, e.what(), ""};
    default:
      return {500, e.what(), ""};
  }
}

json placement_json(const Placement& p, int sprite_id) {
  return {{"id", p.id},
          {"sprite_id", sprite_id},
          {"x", p.x},
          {"y", p.y},
          {"anchor_x", p.anchor_x},
          {"anchor_y", p.anchor_y},
          {"height_override", p.height_override},
          {"brightness", p.brightness}};
}

}  // namespace

std::optional<int> port_from_env() {
  const std::optional<long> v = parse_long_env("PROBE_PORT");
  if (!v || *v > 65535) return std::nullopt;
  return static_cast<int>(*v);
}

std::optional<std::chrono::seconds> session_ttl_from_env() {
  const std::optional<long> v = parse_long_env("PROBE_SESSION_TTL");
  if (!v) return std::nullopt;
  return std::chrono::seconds(*v);
}

struct Service::Impl {
  ServiceConfig config;
  httplib::Server server;
  std::mutex scenes_mutex;
  std::map<std::string, SceneEntry> scenes;
  mutable std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::mt19937_64 rng{std::random_device{}()};
  std::uint64_t session_counter = 0;
  // Sprite and placement ids are unique across all sessions of this server.
  std::atomic<int> next_id{1};

  TimePoint now() const {
    return config.clock ? config.clock() : std::chrono::steady_clock::now();
  }

  void discover() {
    auto add = [&](const std::filesystem::path& dir) {
      if (!std::filesystem::exists(dir / "scene.json")) return;
      SceneEntry e;
      e.id = dir.filename().string();
      e.dir = dir;
      e.manifest = parse_manifest([&] {
        const std::vector<std::uint8_t> b = read_file_bytes(dir / "scene.json");
        return std::string(b.begin(), b.end());
      }());
      scenes.emplace(e.id, std::move(e));
    };
    const std::filesystem::path root = std::filesystem::absolute(config.scenes_dir).lexically_normal();
    if (std::filesystem::exists(root / "scene.json")) {
      add(root.has_filename() ? root : root.parent_path());
      return;
    }
    if (!std::filesystem::is_directory(root)) {
      throw Error(ErrorCode::kNotFound, "no scenes directory at " + root.string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(root)) {
      if (entry.is_directory()) add(entry.path());
    }
  }

  SceneEntry& scene(const std::string& id) {
    const auto it = scenes.find(id);
    if (it == scenes.end()) throw HttpError{404, "unknown scene '" + id + "'", ""};
    return it->second;
  }

  bool has_products(const SceneEntry& s) const {
    return std::filesystem::exists(s.dir / "products" / kProductsFile);
  }

  std::shared_ptr<const SceneProducts> products(const std::string& id) {
    std::lock_guard lock(scenes_mutex);
    SceneEntry& s = scene(id);
    if (!s.products) {
      if (!has_products(s)) {
        throw HttpError{409, "products missing for scene '" + id + "'", "build"};
      }
      try {
        s.products = std::make_shared<const SceneProducts>(load_products(s.dir / "products"));
      } catch (const Error& e) {
        throw HttpError{409, std::string("products unreadable: ") + e.what(), "build"};
      }
    }
    return s.products;
  }

  std::shared_ptr<Session> session(const std::string& id) {
    std::lock_guard lock(sessions_mutex);
    const auto it = sessions.find(id);
    if (it == sessions.end()) throw HttpError{404, "unknown session '" + id + "'", ""};
    return it->second;
  }

  void evict_idle() {
    const TimePoint t = now();
    std::lock_guard lock(sessions_mutex);
    for (auto it = sessions.begin(); it != sessions.end();) {
      std::unique_lock session_lock(it->second->mutex, std::try_to_lock);
      if (session_lock.owns_lock() && t - it->second->touched > config.session_ttl) {
        session_lock.unlock();
        it = sessions.erase(it);
      } else {
        ++it;
      }
    }
  }

  std::string new_session_id() {
    std::lock_guard lock(sessions_mutex);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%016llx%llu",
                  static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(++session_counter));
    return buf;
  }

  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [this, f](const httplib::Request& req, httplib::Response& res) {
      try {
        evict_idle();
        f(req, res);
      } catch (const HttpError& e) {
        json body = {{"error", e.message}};
        if (!e.stage.empty()) body["stage"] = e.stage;
        send_json(res, e.status, body);
      } catch (const Error& e) {
        const int status = e.code() == ErrorCode::kNotFound ? 404
                           : e.code() == ErrorCode::kFormat ||
                                   e.code() == ErrorCode::kInvalidArgument
                               ? 400
                               : 500;
        send_json(res, status, {{"error", e.what()}, {"code", std::string(to_string(e.code()))}});
      } catch (const std::exception& e) {
        send_json(res, 500, {{"error", e.what()}});
      }
    };
  }

  void render(Session& s, const StageToggles& toggles, httplib::Response& res) {
    const CompositeResult r = render_composite(*s.products, s.placements, toggles);
    send_png(res, r.final_image);
    res.set_header("X-Render-Ms", std::to_string(r.timings.total_ms));
  }

  std::vector<Placement>::iterator find_placement(Session& s, const std::string& text) {
    int id = 0;
    try {
      id = std::stoi(text);
    } catch (const std::exception&) {
      throw HttpError{404, "unknown placement '" + text + "'", ""};
    }
    const auto it = std::find_if(s.placements.begin(), s.placements.end(),
                                 [&](const Placement& p) { return p.id == id; });
    if (it == s.placements.end()) throw HttpError{404, "unknown placement '" + text + "'", ""};
    return it;
  }

  void routes() {
    server.Get("/scenes", guarded([this](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      std::lock_guard lock(scenes_mutex);
      for (const auto& [id, s] : scenes) {
        list.push_back({{"id", id},
                        {"width", s.manifest.width},
                        {"height", s.manifest.height},
                        {"frame_count", s.manifest.frame_count},
                        {"products", has_products(s)}});
      }
      send_json(res, 200, list);
    }));

    server.Get(R"(/scenes/([^/]+)/background\.png)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_png(res, products(req.matches[1])->background);
               }));

    server.Get(R"(/scenes/([^/]+)/maps/([a-z]+)\.png)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string kind = req.matches[2];
                 if (kind != "occlusion" && kind != "lighting") {
                   throw HttpError{404, "unknown map '" + kind + "'", ""};
                 }
                 const auto p = products(req.matches[1]);
                 send_png(res, kind == "occlusion" ? visualize_occlusion(p->occlusion)
                                                   : visualize_lighting(p->lighting));
               }));

    server.Get(R"(/scenes/([^/]+)/products)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 res.status = 200;
                 res.set_content(products_to_json(*products(req.matches[1])),
                                 "application/json");
               }));

    server.Post(R"(/scenes/([^/]+)/sessions)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string scene_id = req.matches[1];
                  auto s = std::make_shared<Session>();
                  s->products = products(scene_id);
                  s->scene_id = scene_id;
                  s->id = new_session_id();
                  s->created = s->touched = now();
                  {
                    std::lock_guard lock(sessions_mutex);
                    sessions.emplace(s->id, s);
                  }
                  send_json(res, 201, {{"session_id", s->id}, {"scene_id", scene_id}});
                }));

    server.Get(R"(/sessions/([^/]+))",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 auto s = session(req.matches[1]);
                 std::lock_guard lock(s->mutex);
                 s->touched = now();
                 json sprites = json::array();
                 for (const auto& [id, sp] : s->sprites) {
                   sprites.push_back({{"id", id}, {"width", sp->width()}, {"height", sp->height()}});
                 }
                 json placements = json::array();
                 for (const Placement& p : s->placements) {
                   placements.push_back(placement_json(p, s->placement_sprite.at(p.id)));
                 }
                 send_json(res, 200,
                           {{"session_id", s->id},
                            {"scene_id", s->scene_id},
                            {"sprites", sprites},
                            {"placements", placements}});
               }));

    server.Delete(R"(/sessions/([^/]+))",
                  guarded([this](const httplib::Request& req, httplib::Response& res) {
                    std::lock_guard lock(sessions_mutex);
                    if (sessions.erase(req.matches[1]) == 0) {
                      throw HttpError{404, "unknown session", ""};
                    }
                    res.status = 204;
                  }));

    server.Post(R"(/sessions/([^/]+)/sprites)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  auto s = session(req.matches[1]);
                  std::shared_ptr<const Sprite> sprite;
                  try {
                    const auto* data = reinterpret_cast<const std::uint8_t*>(req.body.data());
                    sprite = std::make_shared<const Sprite>(
                        Sprite::from_png({data, req.body.size()}));
                  } catch (const Error& e) {
                    throw HttpError{400, std::string("bad sprite: ") + e.what(), ""};
                  }
                  std::lock_guard lock(s->mutex);
                  s->touched = now();
                  const int id = next_id++;
                  s->sprites.emplace(id, sprite);
                  send_json(res, 201,
                            {{"sprite_id", id}, {"width", sprite->width()}, {"height", sprite->height()}});
                }));

    server.Post(R"(/sessions/([^/]+)/placements)",
                guarded([this](const httplib::Request& req, httplib::Response& res) {
                  auto s = session(req.matches[1]);
                  const json body = parse_body(req);
                  const StageToggles toggles = toggles_of(req);
                  const auto sid = body.find("sprite_id");
                  if (sid == body.end() || !sid->is_number_integer()) {
                    throw HttpError{400, "missing integer field 'sprite_id'", ""};
                  }
                  const double x = number_field(body, "x");
                  const double y = number_field(body, "y");
                  const double height = optional_number(body, "height_override").value_or(1.0);
                  const double brightness = optional_number(body, "brightness").value_or(1.0);
                  std::lock_guard lock(s->mutex);
                  s->touched = now();
                  const auto sprite = s->sprites.find(sid->get<int>());
                  if (sprite == s->sprites.end()) throw HttpError{404, "unknown sprite", ""};
                  Placement p;
                  try {
                    p = place(*s->products, sprite->second, x, y, height, brightness,
                              next_id++);
                  } catch (const Error& e) {
                    throw placement_error(e);
                  }
                  s->placements.push_back(p);
                  s->placement_sprite[p.id] = sprite->first;
                  res.set_header("X-Placement-Id", std::to_string(p.id));
                  render(*s, toggles, res);
                }));

    server.Patch(R"(/sessions/([^/]+)/placements/([^/]+))",
                 guarded([this](const httplib::Request& req, httplib::Response& res) {
                   auto s = session(req.matches[1]);
                   const json body = parse_body(req);
                   const StageToggles toggles = toggles_of(req);
                   const std::optional<double> x = optional_number(body, "x");
                   const std::optional<double> y = optional_number(body, "y");
                   const std::optional<double> height = optional_number(body, "height_override");
                   const std::optional<double> brightness = optional_number(body, "brightness");
                   std::lock_guard lock(s->mutex);
                   s->touched = now();
                   auto it = find_placement(*s, req.matches[2]);
                   Placement p = *it;
                   try {
                     if (x || y) p = move(*s->products, p, x.value_or(p.x), y.value_or(p.y));
                     if (height || brightness) {
                       p = adjust(*s->products, p, height.value_or(p.height_override),
                                  brightness.value_or(p.brightness));
                     }
                   } catch (const Error& e) {
                     throw placement_error(e);
                   }
                   *it = p;
                   res.set_header("X-Placement-Id", std::to_string(p.id));
                   render(*s, toggles, res);
                 }));

    server.Delete(R"(/sessions/([^/]+)/placements/([^/]+))",
                  guarded([this](const httplib::Request& req, httplib::Response& res) {
                    auto s = session(req.matches[1]);
                    std::lock_guard lock(s->mutex);
                    s->touched = now();
                    auto it = find_placement(*s, req.matches[2]);
                    s->placement_sprite.erase(it->id);
                    s->placements.erase(it);
                    res.status = 204;
                  }));

    server.Get(R"(/sessions/([^/]+)/composite\.png)",
               guarded([this](const httplib::Request& req, httplib::Response& res) {
                 auto s = session(req.matches[1]);
                 const StageToggles toggles = toggles_of(req);
                 std::lock_guard lock(s->mutex);
                 s->touched = now();
                 render(*s, toggles, res);
               }));
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
  impl_->discover();
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void Service::run() { impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

std::size_t Service::session_count() const {
  std::lock_guard lock(impl_->sessions_mutex);
  return impl_->sessions.size();
}

void Service::evict_idle() { impl_->evict_idle(); }

}  // namespace probe
