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

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "probe/bitmask.hpp"
#include "probe/image.hpp"

namespace probe {

/// Detector confidence used for occlusion and lighting probes.
inline constexpr double kProbeConfidence = 0.75;
/// Detector confidence used for ground-plane (person-only) samples.
inline constexpr double kPersonConfidence = 0.9;
/// Detector confidence used for shadow probes.
inline constexpr double kShadowConfidence = 0.8;

std::vector<std::string> default_class_whitelist();

struct SceneManifest {
  int width = 800;
  int height = 800;
  double fps = 15.0;
  int frame_count = 0;
  std::string frame_path_pattern = "frames/{frame:06d}.png";
  std::string mask_path_pattern = "masks/{frame:06d}.jsonl";
  std::vector<std::string> class_whitelist = default_class_whitelist();
  double split_fraction = 0.95;

  /// Directory the manifest was loaded from; patterns resolve against it.
  /// Not serialized.
  std::filesystem::path root;

  /// Frames [0, training_frames()) form the training prefix.
  int training_frames() const;
  bool allows_class(const std::string& name) const;
};

struct RawDetection {
  int frame_index = 0;
  std::string class_name;
  double confidence = 0.0;
  BitMask mask;
};

/// Expands `{frame}` and `{frame:0Nd}` placeholders.
std::string format_frame_pattern(const std::string& pattern, int frame_index);

std::filesystem::path frame_path(const SceneManifest& manifest, int frame_index);
std::filesystem::path mask_path(const SceneManifest& manifest, int frame_index);

/// Parses and validates `scene.json` (a directory containing it may be passed
/// instead). Throws Error on missing file, malformed field, empty scene, or
/// patterns that do not resolve for frame 0.
SceneManifest load_manifest(const std::filesystem::path& path);
SceneManifest parse_manifest(const std::string& json_text);
std::string manifest_to_json(const SceneManifest& manifest);
void save_manifest(const SceneManifest& manifest,
                   const std::filesystem::path& path);

/// Parses one JSON-lines detection file. Each line:
///   {"class": "person", "confidence": 0.93, "size": [h, w], "counts": [...]}
std::vector<RawDetection> parse_detections(const std::string& jsonl,
                                           int frame_index, int width,
                                           int height);
std::string detections_to_jsonl(const std::vector<RawDetection>& detections);

/// Detections of one frame with confidence >= min_confidence whose class is
/// whitelisted, in file order. A missing mask file is an error (kNotFound);
/// an empty file yields an empty list.
std::vector<RawDetection> load_detections(const SceneManifest& manifest,
                                          int frame_index,
                                          double min_confidence);

Image load_frame(const SceneManifest& manifest, int frame_index);

/// Source of frames and detections for the probing pipeline.
class Dataset {
 public:
  virtual ~Dataset() = default;
  virtual const SceneManifest& manifest() const = 0;
  virtual Image frame(int index) const = 0;
  /// All whitelisted detections of a frame with confidence >= min_confidence.
  virtual std::vector<RawDetection> detections(int index,
                                               double min_confidence) const = 0;
};

class DiskDataset final : public Dataset {
 public:
  explicit DiskDataset(SceneManifest manifest) : manifest_(std::move(manifest)) {}
  static DiskDataset open(const std::filesystem::path& scene_dir);

  const SceneManifest& manifest() const override { return manifest_; }
  Image frame(int index) const override;
  std::vector<RawDetection> detections(int index,
                                       double min_confidence) const override;

 private:
  SceneManifest manifest_;
};

class MemoryDataset final : public Dataset {
 public:
  MemoryDataset(SceneManifest manifest, std::vector<Image> frames,
                std::vector<std::vector<RawDetection>> detections);

  const SceneManifest& manifest() const override { return manifest_; }
  Image frame(int index) const override;
  std::vector<RawDetection> detections(int index,
                                       double min_confidence) const override;

 private:
  SceneManifest manifest_;
  std::vector<Image> frames_;
  std::vector<std::vector<RawDetection>> detections_;
};

}  // namespace probe
