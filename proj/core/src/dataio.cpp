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

#include "probe/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "probe/error.hpp"
#include "probe/png_io.hpp"

namespace probe {
namespace {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
T required(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    throw Error(ErrorCode::kFormat, std::string("manifest: missing field '") +
                                        key + "'");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kFormat,
                std::string("manifest: malformed field '") + key + "'");
  }
}

}  // namespace

std::vector<std::string> default_class_whitelist() {
  return {"person", "bicycle", "car",      "motorcycle", "bus",     "truck",
          "backpack", "umbrella", "handbag", "tie",     "suitcase"};
}

int SceneManifest::training_frames() const {
  const int n = static_cast<int>(std::floor(frame_count * split_fraction + 1e-9));
  return std::clamp(n, 1, frame_count);
}

bool SceneManifest::allows_class(const std::string& name) const {
  return std::find(class_whitelist.begin(), class_whitelist.end(), name) !=
         class_whitelist.end();
}

std::string format_frame_pattern(const std::string& pattern, int frame_index) {
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern.compare(i, 6, "{frame") == 0) {
      const std::size_t close = pattern.find('}', i);
      if (close == std::string::npos) {
        throw Error(ErrorCode::kFormat, "unterminated placeholder in " + pattern);
      }
      const std::string spec = pattern.substr(i + 6, close - i - 6);
      std::string digits = std::to_string(frame_index);
      if (!spec.empty()) {
        // Only ":0Nd" is accepted.
        if (spec.size() < 4 || spec[0] != ':' || spec[1] != '0' ||
            spec.back() != 'd') {
          throw Error(ErrorCode::kFormat, "unsupported placeholder in " + pattern);
        }
        int width = 0;
        try {
          width = std::stoi(spec.substr(2, spec.size() - 3));
        } catch (const std::exception&) {
          throw Error(ErrorCode::kFormat, "unsupported placeholder in " + pattern);
        }
        if (static_cast<int>(digits.size()) < width) {
          digits.insert(0, width - digits.size(), '0');
        }
      }
      out += digits;
      i = close + 1;
    } else {
      out += pattern[i++];
    }
  }
  return out;
}

std::filesystem::path frame_path(const SceneManifest& manifest, int frame_index) {
  return manifest.root / format_frame_pattern(manifest.frame_path_pattern, frame_index);
}

std::filesystem::path mask_path(const SceneManifest& manifest, int frame_index) {
  return manifest.root / format_frame_pattern(manifest.mask_path_pattern, frame_index);
}

SceneManifest parse_manifest(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("manifest: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kFormat, "manifest: not an object");

  SceneManifest m;
  m.width = required<int>(doc, "width");
  m.height = required<int>(doc, "height");
  m.frame_count = required<int>(doc, "frame_count");
  if (doc.contains("fps")) m.fps = required<double>(doc, "fps");
  if (doc.contains("frame_path_pattern")) {
    m.frame_path_pattern = required<std::string>(doc, "frame_path_pattern");
  }
  if (doc.contains("mask_path_pattern")) {
    m.mask_path_pattern = required<std::string>(doc, "mask_path_pattern");
  }
  if (doc.contains("class_whitelist")) {
    m.class_whitelist = required<std::vector<std::string>>(doc, "class_whitelist");
  }
  if (doc.contains("split_fraction")) {
    m.split_fraction = required<double>(doc, "split_fraction");
  }

  if (m.frame_count == 0) throw Error(ErrorCode::kEmptyScene, "empty scene");
  if (m.width < 1 || m.height < 1 || m.frame_count < 1) {
    throw Error(ErrorCode::kFormat, "manifest: dimensions and frame_count must be >= 1");
  }
  if (m.width > 32767 || m.height > 32767) {
    throw Error(ErrorCode::kFormat, "manifest: dimensions exceed 32767");
  }
  if (!(m.fps > 0.0)) throw Error(ErrorCode::kFormat, "manifest: fps must be > 0");
  if (!(m.split_fraction > 0.0 && m.split_fraction <= 1.0)) {
    throw Error(ErrorCode::kFormat, "manifest: split_fraction must be in (0, 1]");
  }
  return m;
}

std::string manifest_to_json(const SceneManifest& m) {
  json doc = {
      {"width", m.width},
      {"height", m.height},
      {"fps", m.fps},
      {"frame_count", m.frame_count},
      {"frame_path_pattern", m.frame_path_pattern},
      {"mask_path_pattern", m.mask_path_pattern},
      {"class_whitelist", m.class_whitelist},
      {"split_fraction", m.split_fraction},
  };
  return doc.dump(2) + "\n";
}

void save_manifest(const SceneManifest& manifest,
                   const std::filesystem::path& path) {
  const std::string text = manifest_to_json(manifest);
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()),
                          text.size()});
}

SceneManifest load_manifest(const std::filesystem::path& path) {
  std::filesystem::path file = path;
  if (std::filesystem::is_directory(file)) file /= "scene.json";
  if (!std::filesystem::exists(file)) {
    throw Error(ErrorCode::kNotFound, "manifest not found: " + file.string());
  }
  SceneManifest m = parse_manifest(read_text(file));
  m.root = file.parent_path();
  if (!std::filesystem::exists(frame_path(m, 0))) {
    throw Error(ErrorCode::kNotFound,
                "frame pattern resolves to no file: " + frame_path(m, 0).string());
  }
  if (!std::filesystem::exists(mask_path(m, 0))) {
    throw Error(ErrorCode::kNotFound,
                "mask pattern resolves to no file: " + mask_path(m, 0).string());
  }
  return m;
}

std::vector<RawDetection> parse_detections(const std::string& jsonl,
                                           int frame_index, int width,
                                           int height) {
  std::vector<RawDetection> out;
  std::istringstream in(jsonl);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "detections line " + std::to_string(line_no);
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, where + ": " + e.what());
    }
    RawDetection d;
    d.frame_index = frame_index;
    try {
      d.class_name = doc.at("class").get<std::string>();
      d.confidence = doc.at("confidence").get<double>();
      const auto size = doc.at("size").get<std::vector<int>>();
      if (size.size() != 2 || size[0] != height || size[1] != width) {
        throw Error(ErrorCode::kFormat, where + ": mask size does not match manifest");
      }
      const auto counts = doc.at("counts").get<std::vector<std::uint32_t>>();
      d.mask = decode_mask(counts, width, height);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, where + ": " + e.what());
    }
    if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
      throw Error(ErrorCode::kFormat, where + ": confidence outside [0, 1]");
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::string detections_to_jsonl(const std::vector<RawDetection>& detections) {
  std::string out;
  for (const RawDetection& d : detections) {
    json doc = {
        {"class", d.class_name},
        {"confidence", d.confidence},
        {"size", {d.mask.height(), d.mask.width()}},
        {"counts", encode_rle(d.mask)},
    };
    out += doc.dump();
    out += '\n';
  }
  return out;
}

std::vector<RawDetection> load_detections(const SceneManifest& manifest,
                                          int frame_index,
                                          double min_confidence) {
  if (frame_index < 0 || frame_index >= manifest.frame_count) {
    throw Error(ErrorCode::kInvalidArgument,
                "frame index out of range: " + std::to_string(frame_index));
  }
  const auto path = mask_path(manifest, frame_index);
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kNotFound, "missing mask file: " + path.string());
  }
  std::vector<RawDetection> all =
      parse_detections(read_text(path), frame_index, manifest.width, manifest.height);
  std::vector<RawDetection> kept;
  for (RawDetection& d : all) {
    if (d.confidence >= min_confidence && manifest.allows_class(d.class_name)) {
      kept.push_back(std::move(d));
    }
  }
  return kept;
}

Image load_frame(const SceneManifest& manifest, int frame_index) {
  if (frame_index < 0 || frame_index >= manifest.frame_count) {
    throw Error(ErrorCode::kInvalidArgument,
                "frame index out of range: " + std::to_string(frame_index));
  }
  const auto path = frame_path(manifest, frame_index);
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kNotFound, "missing frame: " + path.string());
  }
  Image image = read_png(path);
  if (image.width() != manifest.width || image.height() != manifest.height) {
    throw Error(ErrorCode::kFormat, "frame " + std::to_string(frame_index) +
                                        " does not match manifest dimensions");
  }
  return image;
}

DiskDataset DiskDataset::open(const std::filesystem::path& scene_dir) {
  return DiskDataset(load_manifest(scene_dir));
}

Image DiskDataset::frame(int index) const { return load_frame(manifest_, index); }

std::vector<RawDetection> DiskDataset::detections(int index,
                                                  double min_confidence) const {
  return load_detections(manifest_, index, min_confidence);
}

MemoryDataset::MemoryDataset(SceneManifest manifest, std::vector<Image> frames,
                             std::vector<std::vector<RawDetection>> detections)
    : manifest_(std::move(manifest)),
      frames_(std::move(frames)),
      detections_(std::move(detections)) {
  if (static_cast<int>(frames_.size()) != manifest_.frame_count ||
      detections_.size() != frames_.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "memory dataset: frame/detection count mismatch");
  }
}

Image MemoryDataset::frame(int index) const {
  if (index < 0 || index >= manifest_.frame_count) {
    throw Error(ErrorCode::kInvalidArgument, "frame index out of range");
  }
  return frames_[index];
}

std::vector<RawDetection> MemoryDataset::detections(int index,
                                                    double min_confidence) const {
  if (index < 0 || index >= manifest_.frame_count) {
    throw Error(ErrorCode::kInvalidArgument, "frame index out of range");
  }
  std::vector<RawDetection> kept;
  for (const RawDetection& d : detections_[index]) {
    if (d.confidence >= min_confidence && manifest_.allows_class(d.class_name)) {
      kept.push_back(d);
    }
  }
  return kept;
}

}  // namespace probe
