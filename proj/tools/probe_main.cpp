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

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <json.hpp>

#include "probe/composer.hpp"
#include "probe/png_io.hpp"
#include "probe/service.hpp"
#include "probe/synth.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

probe::SceneProducts build(const fs::path& scene) {
  const probe::DiskDataset dataset = probe::DiskDataset::open(scene);
  return probe::build_products(dataset);
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

json plane_json(const probe::SceneProducts& p) {
  if (!p.plane) return nullptr;
  return {{"a", p.plane->a},
          {"b", p.plane->b},
          {"c", p.plane->c},
          {"sample_count", p.plane->sample_count},
          {"inlier_count", p.plane->inlier_count},
          {"rms_residual", p.plane->rms_residual},
          {"condition", p.plane->condition}};
}

void report_errors(const probe::SceneProducts& p) {
  for (const probe::StageError& e : p.errors) {
    std::cerr << "warning: " << e.stage << ": " << e.message << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene probing and object insertion for fixed-camera video"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "Render a synthetic scene with ground truth");
  std::string preset = "street";
  int frames = 200;
  std::uint64_t seed = 1;
  fs::path synth_out;
  synth->add_option("--preset", preset, "Scene recipe")
      ->check(CLI::IsMember(probe::synth::preset_names()));
  synth->add_option("--frames", frames, "Frame count")->check(CLI::PositiveNumber);
  synth->add_option("--seed", seed, "Random seed");
  synth->add_option("--out", synth_out, "Output scene directory")->required();

  fs::path scene;
  auto* plate = app.add_subcommand("plate", "Median background plate around a frame");
  int plate_frame = 0;
  int plate_window = 0;
  fs::path plate_out;
  plate->add_option("--scene", scene)->required();
  plate->add_option("--frame", plate_frame);
  plate->add_option("--window", plate_window, "Frames (default: one second)");
  plate->add_option("--out", plate_out)->required();

  auto* occmap = app.add_subcommand("occmap", "Build the occlusion map");
  fs::path occ_out, occ_viz;
  occmap->add_option("--scene", scene)->required();
  occmap->add_option("--out", occ_out);
  occmap->add_option("--viz", occ_viz);

  auto* lightmap = app.add_subcommand("lightmap", "Build the lighting map");
  fs::path light_out, light_viz;
  lightmap->add_option("--scene", scene)->required();
  lightmap->add_option("--out", light_out);
  lightmap->add_option("--viz", light_viz);

  auto* plane = app.add_subcommand("plane", "Fit the ground-plane height model");
  plane->add_option("--scene", scene)->required();

  auto* shadowfit = app.add_subcommand("shadowfit", "Fit the cast-shadow model");
  shadowfit->add_option("--scene", scene)->required();

  auto* buildcmd = app.add_subcommand("build", "Build and save all scene products");
  fs::path products_dir;
  buildcmd->add_option("--scene", scene)->required();
  buildcmd->add_option("--out", products_dir, "Default: <scene>/products");

  auto* insert = app.add_subcommand("insert", "Insert a cut-out into a scene");
  fs::path sprite_path, insert_out, comp_out;
  double x = 0.0, y = 0.0, height = 1.0, brightness = 1.0;
  bool no_shadow = false, no_occlusion = false, no_lighting = false, no_scale = false;
  insert->add_option("--scene", scene)->required();
  insert->add_option("--products", products_dir, "Default: <scene>/products");
  insert->add_option("--sprite", sprite_path, "RGBA PNG cut-out")->required();
  insert->add_option("--x", x, "Bottom-middle x (bottom-left origin)")->required();
  insert->add_option("--y", y, "Bottom-middle y (bottom-left origin)")->required();
  insert->add_option("--height", height, "Height override factor");
  insert->add_option("--brightness", brightness, "Brightness factor");
  insert->add_flag("--no-shadow", no_shadow);
  insert->add_flag("--no-occlusion", no_occlusion);
  insert->add_flag("--no-lighting", no_lighting);
  insert->add_flag("--no-scale", no_scale);
  insert->add_option("--out", insert_out)->required();
  insert->add_option("--comp", comp_out, "Also write the shadow-free composite");

  auto* serve = app.add_subcommand("serve", "Serve scenes over HTTP");
  fs::path scenes_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  serve->add_option("--scenes", scenes_dir)->required();
  serve->add_option("--host", host);
  auto* port_opt = serve->add_option("--port", port);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const probe::synth::SynthConfig config = probe::synth::preset(preset, frames, seed);
      const probe::SceneManifest m = probe::synth::export_scene(config, frames, synth_out);
      print({{"scene", synth_out.string()}, {"frames", m.frame_count},
             {"width", m.width}, {"height", m.height}});
    } else if (*plate) {
      const probe::DiskDataset dataset = probe::DiskDataset::open(scene);
      const int window =
          plate_window > 0 ? plate_window : probe::one_second_window(dataset.manifest());
      probe::write_png(plate_out, probe::plate_for_frame(dataset, plate_frame, window).pixels);
    } else if (*occmap) {
      const probe::SceneProducts p = build(scene);
      if (!occ_out.empty()) probe::save_occlusion_map(p.occlusion, occ_out);
      if (!occ_viz.empty()) probe::write_png(occ_viz, probe::visualize_occlusion(p.occlusion));
      print({{"observations", p.stats.observations}});
    } else if (*lightmap) {
      const probe::SceneProducts p = build(scene);
      if (!light_out.empty()) probe::save_lighting_map(p.lighting, light_out);
      if (!light_viz.empty()) probe::write_png(light_viz, probe::visualize_lighting(p.lighting));
      print({{"observations", p.stats.observations},
             {"sampled_pixels", p.lighting.sampled_pixels()},
             {"median_luminance", p.lighting.median_luminance()}});
    } else if (*plane) {
      const probe::SceneProducts p = build(scene);
      report_errors(p);
      if (!p.plane) return 1;
      print(plane_json(p));
    } else if (*shadowfit) {
      const probe::SceneProducts p = build(scene);
      report_errors(p);
      print({{"mode", std::string(probe::to_string(p.shadow.mode))},
             {"k_x", p.shadow.k_x},
             {"k_y", p.shadow.k_y},
             {"g", p.shadow.g},
             {"cutoff", p.shadow.cutoff},
             {"observation_count", p.shadow.observation_count},
             {"mean_iou", p.shadow.mean_iou},
             {"iou_std", p.shadow.iou_std}});
    } else if (*buildcmd) {
      const probe::SceneProducts p = build(scene);
      report_errors(p);
      const fs::path out = products_dir.empty() ? scene / "products" : products_dir;
      probe::save_products(p, out);
      print({{"products", out.string()},
             {"observations", p.stats.observations},
             {"plane", plane_json(p)},
             {"shadow_mode", std::string(probe::to_string(p.shadow.mode))}});
    } else if (*insert) {
      const fs::path dir = products_dir.empty() ? scene / "products" : products_dir;
      const probe::SceneProducts p = probe::load_products(dir);
      auto sprite = std::make_shared<const probe::Sprite>(
          probe::Sprite::from_png(probe::read_file_bytes(sprite_path)));
      const probe::Placement placement =
          probe::place(p, sprite, x, y, height, brightness, 1);
      probe::StageToggles toggles;
      toggles.shadow = !no_shadow;
      toggles.occlusion = !no_occlusion;
      toggles.lighting = !no_lighting;
      toggles.scale = !no_scale;
      const probe::CompositeResult r =
          probe::render_composite(p, std::span(&placement, 1), toggles);
      probe::write_png(insert_out, r.final_image);
      if (!comp_out.empty()) probe::write_png(comp_out, r.comp);
    } else if (*serve) {
      probe::ServiceConfig config;
      config.scenes_dir = scenes_dir;
      if (const auto ttl = probe::session_ttl_from_env()) config.session_ttl = *ttl;
      if (port_opt->count() == 0) {
        if (const auto env_port = probe::port_from_env()) port = *env_port;
      }
      probe::Service service(std::move(config));
      const int bound = service.bind(host, port);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      service.run();
    }
  } catch (const probe::Error& e) {
    std::cerr << "error (" << probe::to_string(e.code()) << "): " << e.what() << "\n";
    return e.code() == probe::ErrorCode::kOffPlane ? 3 : 1;
  }
  return 0;
}
