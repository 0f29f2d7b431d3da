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


#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <set>
#include <json.hpp>
#include <thread>

#include "fixtures.hpp"
#include "probe/png_io.hpp"
#include "probe/service.hpp"
#include "scenes.hpp"

namespace probe {
namespace {

using nlohmann::json;

constexpr int kFrames = 60;

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = new std::filesystem::path(testing::temp_dir("service_scenes"));
    testing::export_and_build(testing::small_scene_config(kFrames), kFrames, *root_ / "yard");
    synth::export_scene(testing::small_scene_config(3, 9), 3, *root_ / "raw");
  }

  static void TearDownTestSuite() {
    std::filesystem::remove_all(*root_);
    delete root_;
  }

  void SetUp() override {
    ServiceConfig config;
    config.scenes_dir = *root_;
    config.clock = [this] { return now_; };
    service_ = std::make_unique<Service>(config);
    port_ = service_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { service_->run(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    for (int i = 0; i < 100 && !client_->Get("/scenes"); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }

  void TearDown() override {
    service_->stop();
    thread_.join();
  }

  std::string new_session(const std::string& scene = "yard") {
    auto res = client_->Post("/scenes/" + scene + "/sessions", "", "application/json");
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 201);
    return json::parse(res->body).at("session_id").get<std::string>();
  }

  int upload(const std::string& session, int w = 10, int h = 30) {
    const auto png = testing::sprite_png(w, h);
    auto res = client_->Post("/sessions/" + session + "/sprites",
                             std::string(png.begin(), png.end()), "image/png");
    EXPECT_EQ(res->status, 201);
    return json::parse(res->body).at("sprite_id").get<int>();
  }

  httplib::Result add(const std::string& session, const json& body,
                      const std::string& query = "") {
    return client_->Post("/sessions/" + session + "/placements" + query, body.dump(),
                         "application/json");
  }

  static std::filesystem::path* root_;
  std::chrono::steady_clock::time_point now_{};
  std::unique_ptr<Service> service_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

std::filesystem::path* ServiceTest::root_ = nullptr;

TEST_F(ServiceTest, ListsScenes) {
  auto res = client_->Get("/scenes");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  const json list = json::parse(res->body);
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[0]["id"], "raw");
  EXPECT_EQ(list[0]["products"], false);
  EXPECT_EQ(list[1]["id"], "yard");
  EXPECT_EQ(list[1]["products"], true);
  EXPECT_EQ(list[1]["width"], 200);
  EXPECT_EQ(list[1]["height"], 150);
  EXPECT_EQ(list[1]["frame_count"], kFrames);
}

TEST_F(ServiceTest, ServesSceneImagesAndProducts) {
  auto bg = client_->Get("/scenes/yard/background.png");
  ASSERT_EQ(bg->status, 200);
  EXPECT_EQ(bg->get_header_value("Content-Type"), "image/png");
  const auto bytes = std::vector<std::uint8_t>(bg->body.begin(), bg->body.end());
  EXPECT_EQ(decode_png(bytes), read_png(*root_ / "yard" / "products" / "background.png"));
  for (const char* map : {"occlusion", "lighting"}) {
    auto res = client_->Get(std::string("/scenes/yard/maps/") + map + ".png");
    ASSERT_EQ(res->status, 200) << map;
    const Image img = decode_png({reinterpret_cast<const std::uint8_t*>(res->body.data()),
                                  res->body.size()});
    EXPECT_EQ(img.width(), 200);
  }
  EXPECT_EQ(client_->Get("/scenes/yard/maps/depth.png")->status, 404);
  auto products = client_->Get("/scenes/yard/products");
  ASSERT_EQ(products->status, 200);
  EXPECT_EQ(json::parse(products->body)["format"], "probe_products");
  EXPECT_EQ(client_->Get("/scenes/nowhere/background.png")->status, 404);
}

TEST_F(ServiceTest, SessionWithoutProductsIsAConflict) {
  auto res = client_->Post("/scenes/raw/sessions", "", "application/json");
  ASSERT_EQ(res->status, 409);
  EXPECT_EQ(json::parse(res->body)["stage"], "build");
  EXPECT_EQ(client_->Post("/scenes/nowhere/sessions", "", "application/json")->status, 404);
}

TEST_F(ServiceTest, PlacementLifecycle) {
  const std::string s = new_session();
  const int sprite = upload(s);
  auto placed = add(s, {{"sprite_id", sprite}, {"x", 100}, {"y", 30}});
  ASSERT_EQ(placed->status, 200);
  EXPECT_EQ(placed->get_header_value("Content-Type"), "image/png");
  EXPECT_TRUE(placed->has_header("X-Render-Ms"));
  const std::string pid = placed->get_header_value("X-Placement-Id");

  json state = json::parse(client_->Get("/sessions/" + s)->body);
  ASSERT_EQ(state["placements"].size(), 1u);
  EXPECT_EQ(state["placements"][0]["sprite_id"], sprite);
  EXPECT_EQ(state["placements"][0]["x"], 100.0);

  auto moved = client_->Patch("/sessions/" + s + "/placements/" + pid,
                              json{{"x", 120}, {"y", 40}}.dump(), "application/json");
  ASSERT_EQ(moved->status, 200);
  EXPECT_NE(moved->body, placed->body);
  state = json::parse(client_->Get("/sessions/" + s)->body);
  EXPECT_EQ(state["placements"][0]["x"], 120.0);
  EXPECT_EQ(state["placements"][0]["anchor_x"], 100.0);

  auto composite = client_->Get("/sessions/" + s + "/composite.png");
  EXPECT_EQ(composite->body, moved->body);

  EXPECT_EQ(client_->Delete("/sessions/" + s + "/placements/" + pid)->status, 204);
  EXPECT_EQ(client_->Delete("/sessions/" + s + "/placements/" + pid)->status, 404);
  auto empty = client_->Get("/sessions/" + s + "/composite.png");
  EXPECT_EQ(empty->body, client_->Get("/scenes/yard/background.png")->body);

  EXPECT_EQ(client_->Delete("/sessions/" + s)->status, 204);
  EXPECT_EQ(client_->Get("/sessions/" + s)->status, 404);
}

TEST_F(ServiceTest, RejectsBadRequests) {
  const std::string s = new_session();
  auto bad_png = client_->Post("/sessions/" + s + "/sprites", "not a png", "image/png");
  EXPECT_EQ(bad_png->status, 400);
  const int sprite = upload(s);
  EXPECT_EQ(add(s, {{"sprite_id", sprite + 1000}, {"x", 10}, {"y", 10}})->status, 404);
  EXPECT_EQ(add(s, {{"sprite_id", sprite}, {"x", 10}})->status, 400);
  EXPECT_EQ(add(s, {{"sprite_id", sprite}, {"x", 500}, {"y", 10}})->status, 400);
  EXPECT_EQ(add(s, {{"sprite_id", sprite}, {"x", 10}, {"y", 10}, {"brightness", 0}})->status,
            400);
  EXPECT_EQ(client_->Post("/sessions/" + s + "/placements", "{oops", "application/json")->status,
            400);
  EXPECT_EQ(client_->Get("/sessions/" + s + "/composite.png?shadow=maybe")->status, 400);
  EXPECT_EQ(client_->Get("/sessions/nope/composite.png")->status, 404);
  const json err = json::parse(client_->Get("/sessions/nope")->body);
  EXPECT_TRUE(err.contains("error"));
}

TEST_F(ServiceTest, OffPlanePlacementNamesTheStage) {
  const std::string s = new_session();
  const int sprite = upload(s);
  // Heights reach zero a little above the horizon of this camera.
  auto res = add(s, {{"sprite_id", sprite}, {"x", 100}, {"y", 149}});
  ASSERT_EQ(res->status, 422);
  EXPECT_EQ(json::parse(res->body)["stage"], "groundplane");

  auto ok = add(s, {{"sprite_id", sprite}, {"x", 100}, {"y", 30}});
  const std::string pid = ok->get_header_value("X-Placement-Id");
  const std::string before = client_->Get("/sessions/" + s)->body;
  auto moved = client_->Patch("/sessions/" + s + "/placements/" + pid,
                              json{{"y", 149}}.dump(), "application/json");
  EXPECT_EQ(moved->status, 422);
  EXPECT_EQ(client_->Get("/sessions/" + s)->body, before);
}

TEST_F(ServiceTest, TogglesChangeTheComposite) {
  const std::string s = new_session();
  const int sprite = upload(s);
  auto all = add(s, {{"sprite_id", sprite}, {"x", 100}, {"y", 30}});
  auto no_shadow = client_->Get("/sessions/" + s + "/composite.png?shadow=0");
  auto still = client_->Get("/sessions/" + s + "/composite.png?shadow=1&occlusion=true");
  EXPECT_NE(all->body, no_shadow->body);
  EXPECT_EQ(all->body, still->body);
  auto raw = client_->Get("/sessions/" + s +
                          "/composite.png?shadow=off&occlusion=off&lighting=off&scale=off");
  EXPECT_EQ(raw->status, 200);
  EXPECT_NE(raw->body, no_shadow->body);
}

TEST_F(ServiceTest, RenderingIsStateless) {
  const std::string s = new_session();
  const int sprite = upload(s);
  add(s, {{"sprite_id", sprite}, {"x", 60}, {"y", 20}});
  add(s, {{"sprite_id", sprite}, {"x", 140}, {"y", 50}, {"height_override", 1.2}});
  const auto a = client_->Get("/sessions/" + s + "/composite.png")->body;
  const auto b = client_->Get("/sessions/" + s + "/composite.png")->body;
  EXPECT_EQ(a, b);
}

TEST_F(ServiceTest, SessionsAreIsolated) {
  const std::string a = new_session();
  const std::string b = new_session();
  const int sa = upload(a);
  const int sb = upload(b);
  EXPECT_NE(sa, sb);
  // Another session's sprite is not visible here.
  EXPECT_EQ(add(b, {{"sprite_id", sa}, {"x", 60}, {"y", 20}})->status, 404);

  std::atomic<int> failures{0};
  auto worker = [&](const std::string& s, int sprite, double x) {
    httplib::Client c("127.0.0.1", port_);
    for (int i = 0; i < 5; ++i) {
      auto r = c.Post("/sessions/" + s + "/placements",
                      json{{"sprite_id", sprite}, {"x", x + i}, {"y", 20 + i}}.dump(),
                      "application/json");
      if (!r || r->status != 200) ++failures;
    }
  };
  std::thread ta(worker, a, sa, 40.0);
  std::thread tb(worker, b, sb, 140.0);
  ta.join();
  tb.join();
  EXPECT_EQ(failures, 0);
  const json ja = json::parse(client_->Get("/sessions/" + a)->body);
  const json jb = json::parse(client_->Get("/sessions/" + b)->body);
  ASSERT_EQ(ja["placements"].size(), 5u);
  ASSERT_EQ(jb["placements"].size(), 5u);
  std::set<int> ids;
  for (const auto& p : ja["placements"]) {
    EXPECT_LT(p["x"].get<double>(), 100.0);
    ids.insert(p["id"].get<int>());
  }
  for (const auto& p : jb["placements"]) {
    EXPECT_GT(p["x"].get<double>(), 100.0);
    ids.insert(p["id"].get<int>());
  }
  EXPECT_EQ(ids.size(), 10u);
}

TEST_F(ServiceTest, IdleSessionsAreEvicted) {
  const std::string keep = new_session();
  const std::string stale = new_session();
  EXPECT_EQ(service_->session_count(), 2u);
  now_ += std::chrono::seconds(1000);
  client_->Get("/sessions/" + keep);
  now_ += std::chrono::seconds(1000);
  EXPECT_EQ(client_->Get("/sessions/" + stale)->status, 404);
  EXPECT_EQ(client_->Get("/sessions/" + keep)->status, 200);
  EXPECT_EQ(service_->session_count(), 1u);
}

TEST(ServiceEnv, PortAndTtlOverrides) {
  ::setenv("PROBE_PORT", "8123", 1);
  ::setenv("PROBE_SESSION_TTL", "60", 1);
  EXPECT_EQ(port_from_env(), 8123);
  EXPECT_EQ(session_ttl_from_env(), std::chrono::seconds(60));
  ::setenv("PROBE_PORT", "http", 1);
  EXPECT_FALSE(port_from_env().has_value());
  ::unsetenv("PROBE_PORT");
  ::unsetenv("PROBE_SESSION_TTL");
  EXPECT_FALSE(port_from_env().has_value());
  EXPECT_FALSE(session_ttl_from_env().has_value());
}

#ifdef PROBE_CLI_PATH
TEST_F(ServiceTest, CliInsertMatchesService) {
  const auto dir = testing::temp_dir("cli_parity");
  const auto png = testing::sprite_png(12, 28);
  write_file_bytes(dir / "sprite.png", png);
  struct Case {
    double x, y;
    std::string flags;
    std::string query;
  };
  const std::vector<Case> cases{{100, 30, "", ""},
                                {50.4, 12.6, "--no-shadow", "?shadow=0"},
                                {170, 25, "--no-occlusion --no-lighting", "?occlusion=0&lighting=0"},
                                {80, 60, "--no-scale", "?scale=0"}};
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const auto out = dir / ("cli_" + std::to_string(i) + ".png");
    const std::string cmd = std::string(PROBE_CLI_PATH) + " insert --scene " +
                            (*root_ / "yard").string() + " --sprite " +
                            (dir / "sprite.png").string() + " --x " + std::to_string(c.x) +
                            " --y " + std::to_string(c.y) + " " + c.flags + " --out " +
                            out.string();
    ASSERT_EQ(std::system(cmd.c_str()), 0) << cmd;
    const std::string s = new_session();
    const auto up = client_->Post("/sessions/" + s + "/sprites",
                                  std::string(png.begin(), png.end()), "image/png");
    const int sprite = json::parse(up->body)["sprite_id"].get<int>();
    auto res = add(s, {{"sprite_id", sprite}, {"x", c.x}, {"y", c.y}}, c.query);
    ASSERT_EQ(res->status, 200);
    const auto cli = read_file_bytes(out);
    EXPECT_EQ(std::string(cli.begin(), cli.end()), res->body) << "case " << i;
  }
}
#endif

}  // namespace
}  // namespace probe
