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

#include <algorithm>
#include <json.hpp>

#include "probe/composer.hpp"
#include "probe/png_io.hpp"

namespace probe {
namespace {

using nlohmann::json;

constexpr const char* kBackgroundFile = "background.png";
constexpr const char* kOcclusionFile = "occlusion.bin";
constexpr const char* kLightingFile = "lighting.bin";

// Consecutive blocks of `window` frames over [0, count); a short tail joins
// the block before it.
std::vector<std::pair<int, int>> blocks(int count, int window) {
  std::vector<std::pair<int, int>> out;
  window = std::max(window, 1);
  for (int first = 0; first < count; first += window) {
    int last = std::min(first + window, count);
    if (last < count && count - last < window) last = count;
    out.emplace_back(first, last);
    if (last == count) break;
  }
  return out;
}

std::vector<Image> load_block(const Dataset& dataset, int first, int last) {
  std::vector<Image> frames;
  frames.reserve(static_cast<std::size_t>(last - first));
  for (int i = first; i < last; ++i) frames.push_back(dataset.frame(i));
  return frames;
}

template <typename F>
auto in_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(stage) + ": " + e.what());
  }
}

ErrorCode error_code_from_string(const std::string& text) {
  for (ErrorCode c : {ErrorCode::kIo, ErrorCode::kFormat, ErrorCode::kInvalidArgument,
                      ErrorCode::kEmptyScene, ErrorCode::kNotFound,
                      ErrorCode::kInsufficientData, ErrorCode::kIllConditioned,
                      ErrorCode::kOffPlane, ErrorCode::kNoShadowEvidence}) {
    if (to_string(c) == text) return c;
  }
  throw Error(ErrorCode::kFormat, "unknown error code '" + text + "'");
}

json to_json(const ShadowModel& m) {
  return {{"mode", std::string(to_string(m.mode))},
          {"k_x", m.k_x},
          {"k_y", m.k_y},
          {"g", m.g},
          {"cutoff", m.cutoff},
          {"occlusion_slack", m.occlusion_slack},
          {"observation_count", m.observation_count},
          {"mean_iou", m.mean_iou},
          {"iou_std", m.iou_std},
          {"coarse_k_x", m.coarse_k_x},
          {"coarse_k_y", m.coarse_k_y}};
}

ShadowModel shadow_from_json(const json& j) {
  ShadowModel m;
  m.mode = shadow_mode_from_string(j.at("mode").get<std::string>());
  m.k_x = j.at("k_x").get<double>();
  m.k_y = j.at("k_y").get<double>();
  m.g = j.at("g").get<double>();
  m.cutoff = j.at("cutoff").get<double>();
  m.occlusion_slack = j.value("occlusion_slack", m.occlusion_slack);
  m.observation_count = j.value("observation_count", 0);
  m.mean_iou = j.value("mean_iou", 0.0);
  m.iou_std = j.value("iou_std", 0.0);
  m.coarse_k_x = j.value("coarse_k_x", 0.0);
  m.coarse_k_y = j.value("coarse_k_y", 0.0);
  return m;
}

json products_json(const SceneProducts& p) {
  json j;
  j["format"] = "probe_products";
  j["version"] = 1;
  j["manifest"] = json::parse(manifest_to_json(p.manifest));
  j["files"] = {{"background", kBackgroundFile},
                {"occlusion", kOcclusionFile},
                {"lighting", kLightingFile}};
  if (p.plane) {
    j["plane"] = {{"a", p.plane->a},
                  {"b", p.plane->b},
                  {"c", p.plane->c},
                  {"sample_count", p.plane->sample_count},
                  {"inlier_count", p.plane->inlier_count},
                  {"rms_residual", p.plane->rms_residual},
                  {"condition", p.plane->condition}};
  } else {
    j["plane"] = nullptr;
  }
  j["shadow"] = to_json(p.shadow);
  j["stats"] = {{"training_frames", p.stats.training_frames},
                {"observations", p.stats.observations},
                {"person_samples", p.stats.person_samples},
                {"shadow_casters", p.stats.shadow_casters},
                {"shadow_observations", p.stats.shadow_observations}};
  j["errors"] = json::array();
  for (const StageError& e : p.errors) {
    j["errors"].push_back(
        {{"stage", e.stage}, {"code", std::string(to_string(e.code))}, {"message", e.message}});
  }
  return j;
}

}  // namespace

SceneProducts build_products(const Dataset& dataset, const BuildOptions& options) {
  SceneProducts out;
  out.manifest = dataset.manifest();
  const SceneManifest& m = out.manifest;
  const int train = m.training_frames();
  out.stats.training_frames = train;

  out.background = in_stage("background", [&] { return background_image(dataset); });

  const int window = options.probe_window > 0 ? options.probe_window : one_second_window(m);
  OcclusionMap occlusion(m.width, m.height);
  LightingAccumulator light(m.width, m.height);
  std::vector<HeightSample> samples;
  in_stage("observe", [&] {
    for (const auto& [first, last] : blocks(train, window)) {
      const std::vector<Image> frames = load_block(dataset, first, last);
      const Image plate = median_image(frames);
      for (int i = first; i < last; ++i) {
        const std::vector<RawDetection> dets = dataset.detections(i, kProbeConfidence);
        const std::vector<InstanceObservation> obs =
            observe_frame(i, frames[i - first], dets, plate, options.observe);
        for (const InstanceObservation& o : obs) {
          occlusion.absorb(o);
          light.add(o);
        }
        const std::vector<HeightSample> s = height_samples(obs);
        samples.insert(samples.end(), s.begin(), s.end());
        out.stats.observations += static_cast<int>(obs.size());
      }
    }
    return 0;
  });
  out.occlusion = std::move(occlusion);
  out.lighting = light.finalize();
  out.stats.person_samples = static_cast<int>(samples.size());

  try {
    out.plane = fit_plane(samples);
  } catch (const Error& e) {
    out.errors.push_back({"groundplane", e.code(), e.what()});
  }

  std::vector<ShadowObservation> evidence;
  in_stage("shadow", [&] {
    for (const auto& [first, last] : blocks(train, options.shadow_window)) {
      if (out.stats.shadow_observations >= options.max_shadow_observations) break;
      const std::vector<Image> frames = load_block(dataset, first, last);
      const Image plate = median_image(frames);
      for (int i = first; i < last; ++i) {
        const std::vector<RawDetection> all = dataset.detections(i, 0.0);
        BitMask excluded(m.width, m.height);
        std::vector<RawDetection> casters;
        for (const RawDetection& d : all) {
          excluded = excluded.united(d.mask);
          if (d.confidence >= kShadowConfidence) casters.push_back(d);
        }
        for (const InstanceObservation& o :
             observe_frame(i, frames[i - first], casters, plate, options.observe)) {
          ++out.stats.shadow_casters;
          ShadowObservation ev =
              extract_shadow_evidence(frames[i - first], plate, o, excluded, options.evidence);
          if (ev.shadow.empty()) continue;
          ++out.stats.shadow_observations;
          evidence.push_back(std::move(ev));
        }
      }
    }
    return 0;
  });
  try {
    out.shadow = fit_shadow_model(evidence);
  } catch (const Error& e) {
    const double g = median_ratio(evidence);
    out.shadow = contact_shadow_model(g > 0.0 ? g : kContactShadowGain);
    out.errors.push_back({"shadow", e.code(), e.what()});
  }
  return out;
}

std::string products_to_json(const SceneProducts& products) {
  return products_json(products).dump(2) + "\n";
}

void save_products(const SceneProducts& products, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
  write_png(dir / kBackgroundFile, products.background);
  save_occlusion_map(products.occlusion, dir / kOcclusionFile);
  save_lighting_map(products.lighting, dir / kLightingFile);
  const std::string text = products_to_json(products);
  write_file_bytes(dir / kProductsFile,
                   std::vector<std::uint8_t>(text.begin(), text.end()));
}

SceneProducts load_products(const std::filesystem::path& dir) {
  const std::filesystem::path file = dir / kProductsFile;
  if (!std::filesystem::exists(file)) {
    throw Error(ErrorCode::kNotFound, "no products at " + dir.string());
  }
  const std::vector<std::uint8_t> bytes = read_file_bytes(file);
  SceneProducts p;
  try {
    const json j = json::parse(bytes.begin(), bytes.end());
    if (j.at("format").get<std::string>() != "probe_products") {
      throw Error(ErrorCode::kFormat, "not a products file");
    }
    p.manifest = parse_manifest(j.at("manifest").dump());
    const json& files = j.at("files");
    p.background = read_png(dir / files.at("background").get<std::string>());
    p.occlusion = load_occlusion_map(dir / files.at("occlusion").get<std::string>());
    p.lighting = load_lighting_map(dir / files.at("lighting").get<std::string>());
    if (!j.at("plane").is_null()) {
      const json& pl = j.at("plane");
      PlaneModel plane;
      plane.a = pl.at("a").get<double>();
      plane.b = pl.at("b").get<double>();
      plane.c = pl.at("c").get<double>();
      plane.sample_count = pl.value("sample_count", 0);
      plane.inlier_count = pl.value("inlier_count", 0);
      plane.rms_residual = pl.value("rms_residual", 0.0);
      plane.condition = pl.value("condition", 0.0);
      p.plane = plane;
    }
    p.shadow = shadow_from_json(j.at("shadow"));
    const json& st = j.at("stats");
    p.stats.training_frames = st.value("training_frames", 0);
    p.stats.observations = st.value("observations", 0);
    p.stats.person_samples = st.value("person_samples", 0);
    p.stats.shadow_casters = st.value("shadow_casters", 0);
    p.stats.shadow_observations = st.value("shadow_observations", 0);
    for (const json& e : j.at("errors")) {
      p.errors.push_back({e.at("stage").get<std::string>(),
                          error_code_from_string(e.at("code").get<std::string>()),
                          e.at("message").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("products: ") + e.what());
  }
  const int W = p.manifest.width;
  const int H = p.manifest.height;
  if (p.background.width() != W || p.background.height() != H ||
      p.occlusion.width() != W || p.occlusion.height() != H ||
      p.lighting.width() != W || p.lighting.height() != H) {
    throw Error(ErrorCode::kFormat, "products: raster sizes disagree with manifest");
  }
  return p;
}

}  // namespace probe
