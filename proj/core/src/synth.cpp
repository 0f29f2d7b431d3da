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

#include "probe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "probe/error.hpp"
#include "probe/png_io.hpp"

namespace probe::synth {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Rgb scale(Rgb c, double f) {
  return {to_u8(c.r * f), to_u8(c.g * f), to_u8(c.b * f)};
}

struct Projected {
  double foot_x = 0.0;
  double foot_y = 0.0;
  double height = 0.0;
};

Projected project(const SynthConfig& config, const SpriteTrack& track,
                  const Vec3& p) {
  Projected out;
  out.foot_x = principal_x(config) + config.focal * p.x / p.z;
  out.foot_y = principal_y(config) + config.focal * p.y / p.z;
  out.height = config.person_height * track.height_multiplier * config.focal / p.z;
  return out;
}

// Silhouette in bottom-left coordinates; pixel (col, y) is sampled at its
// integer centre.
BitMask rasterize(const SynthConfig& config, const SpriteTrack& track,
                  const Projected& pr) {
  const int width = config.width;
  const int height = config.height;
  const double h = pr.height;
  const double half_w = 0.5 * config.aspect * h;
  const double body_top =
      track.shape == Shape::kKeyhole ? pr.foot_y + 0.8 * h : pr.foot_y + h;
  const double head_cy = pr.foot_y + 0.9 * h;
  const double head_r = 0.1 * h;

  std::vector<Span> spans;
  const int y_lo = static_cast<int>(std::ceil(pr.foot_y));
  const int y_hi = static_cast<int>(std::ceil(pr.foot_y + h)) - 1;
  const int body_c0 = static_cast<int>(std::ceil(pr.foot_x - half_w));
  const int body_c1 = static_cast<int>(std::ceil(pr.foot_x + half_w));
  for (int y = y_lo; y <= y_hi; ++y) {
    if (y < 0 || y >= height) continue;
    const int row = row_of(y, height);
    if (y < body_top) {
      spans.push_back({row, body_c0, body_c1});
    } else if (track.shape == Shape::kKeyhole) {
      const double dy = y - head_cy;
      const double rem = head_r * head_r - dy * dy;
      if (rem < 0.0) continue;
      const double dx = std::sqrt(rem);
      // Columns with |col - foot_x| <= dx.
      const int c0 = static_cast<int>(std::ceil(pr.foot_x - dx));
      const int c1 = static_cast<int>(std::floor(pr.foot_x + dx)) + 1;
      if (c1 > c0) spans.push_back({row, c0, c1});
    }
  }
  return BitMask::from_spans(width, height, std::move(spans));
}

// Forward shear of every silhouette pixel; see ShadowShear.
void cast_shadow(const BitMask& silhouette, int bottom_y, const ShadowShear& k,
                 int width, int height, std::vector<std::uint8_t>& out) {
  silhouette.for_each_pixel([&](int col, int row) {
    const int y = y_of(row, height);
    const double d = y - bottom_y;
    double lo = k.k_y * (d - 0.5);
    double hi = k.k_y * (d + 0.5);
    if (lo > hi) std::swap(lo, hi);
    const int r0 = static_cast<int>(std::ceil(lo));
    const int r1 = static_cast<int>(std::ceil(hi));
    const double shift = k.k_x * d;
    const int c0 = static_cast<int>(std::ceil(col - 0.5 + shift));
    const int c1 = static_cast<int>(std::ceil(col + 0.5 + shift));
    for (int r = r0; r < r1; ++r) {
      const int sy = bottom_y + r;
      if (sy < 0 || sy >= height) continue;
      const int srow = row_of(sy, height);
      for (int c = std::max(c0, 0); c < std::min(c1, width); ++c) {
        out[static_cast<std::size_t>(srow) * width + c] = 1;
      }
    }
  });
}

}  // namespace

double BrightnessField::at(int x, int y) const {
  double f = 1.0;
  for (const BrightnessRegion& r : regions) {
    if (x >= r.x0 && x < r.x1 && y >= r.y0 && y < r.y1) f = r.factor;
  }
  return f;
}

double principal_x(const SynthConfig& config) { return 0.5 * (config.width - 1); }
double principal_y(const SynthConfig& config) { return 0.5 * (config.height - 1); }

HeightPlane image_plane(const SynthConfig& config) {
  // Multiply aX + bY + cZ = 1 by H f / Z with x - cx = fX/Z, y - cy = fY/Z.
  const double H = config.person_height;
  HeightPlane p;
  p.a = config.plane.a * H;
  p.b = config.plane.b * H;
  p.c = config.plane.c * H * config.focal - p.a * principal_x(config) -
        p.b * principal_y(config);
  return p;
}

std::optional<Vec3> ground_point_at(const SynthConfig& config, double x,
                                    double y) {
  const double dx = (x - principal_x(config)) / config.focal;
  const double dy = (y - principal_y(config)) / config.focal;
  const double denom = config.plane.a * dx + config.plane.b * dy + config.plane.c;
  if (!(denom > 1e-9)) return std::nullopt;
  const double z = 1.0 / denom;
  return Vec3{dx * z, dy * z, z};
}

void validate(const SynthConfig& config) {
  if (config.width < 1 || config.height < 1 || !(config.focal > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "synth: bad camera");
  }
  if (!(config.shadow_gain > 0.0 && config.shadow_gain < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "synth: shadow_gain must be in (0, 1)");
  }
  for (const BrightnessRegion& r : config.brightness.regions) {
    if (!(r.factor > 0.0 && r.factor <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "synth: brightness factors must be in (0, 1]");
    }
  }
  const WorldPlane& g = config.plane;
  for (std::size_t i = 0; i < config.sprites.size(); ++i) {
    for (const Vec3& p : config.sprites[i].positions) {
      const double residual = g.a * p.x + g.b * p.y + g.c * p.z - 1.0;
      if (std::abs(residual) > 1e-6 || !(p.z > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "synth: sprite " + std::to_string(i) + " off ground plane");
      }
    }
  }
}

Image render_background(const SynthConfig& config) {
  const HeightPlane plane = image_plane(config);
  Image img(config.width, config.height);
  const int amp = config.texture_amplitude;
  for (int row = 0; row < config.height; ++row) {
    const int y = y_of(row, config.height);
    std::uint8_t* p = img.row_ptr(row);
    for (int col = 0; col < config.width; ++col) {
      const bool ground = plane.height_at(col, y) > 0.0;
      const Rgb base = ground ? config.ground : config.backdrop;
      int noise = 0;
      if (amp > 0) {
        const std::uint64_t hsh =
            splitmix(config.seed ^ (static_cast<std::uint64_t>(row) << 32) ^
                     static_cast<std::uint64_t>(col));
        noise = static_cast<int>(hsh % (2 * amp + 1)) - amp;
      }
      const double f = config.brightness.at(col, y);
      p[col * 3 + 0] = to_u8((base.r + noise) * f);
      p[col * 3 + 1] = to_u8((base.g + noise) * f);
      p[col * 3 + 2] = to_u8((base.b + noise) * f);
    }
  }
  return img;
}

GroundTruthFrame render_frame(const SynthConfig& config, int t) {
  validate(config);
  const int W = config.width;
  const int H = config.height;
  GroundTruthFrame frame;
  frame.index = t;
  frame.image = render_background(config);

  struct Item {
    int bottom_y;
    bool occluder;
    int index;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < config.occluders.size(); ++i) {
    items.push_back({config.occluders[i].base_y, true, static_cast<int>(i)});
  }

  std::vector<Projected> projections;
  for (std::size_t i = 0; i < config.sprites.size(); ++i) {
    const SpriteTrack& track = config.sprites[i];
    if (!track.active(t)) continue;
    const Vec3& p = track.positions[t - track.first_frame];
    const Projected pr = project(config, track, p);
    BitMask mask = rasterize(config, track, pr);
    if (mask.empty()) continue;
    SpriteTruth truth;
    truth.track = static_cast<int>(i);
    truth.class_name = track.class_name;
    truth.confidence = track.confidence;
    truth.height_multiplier = track.height_multiplier;
    truth.foot_x = pr.foot_x;
    truth.foot_y = pr.foot_y;
    truth.pixel_height = pr.height;
    truth.bottom_y = y_of(mask.bounds().row_max, H);
    const int foot_col = std::clamp(static_cast<int>(std::lround(pr.foot_x)), 0, W - 1);
    truth.lighting_factor = config.brightness.at(foot_col, truth.bottom_y);
    truth.mask = std::move(mask);
    items.push_back({truth.bottom_y, false, static_cast<int>(frame.sprites.size())});
    projections.push_back(pr);
    frame.sprites.push_back(std::move(truth));
  }

  // Cast shadows land on the ground before anything upright is drawn. A pixel
  // is darkened once no matter how many shadows cover it, and never where the
  // scene is already shadowed.
  std::vector<std::uint8_t> shadow_any(static_cast<std::size_t>(W) * H, 0);
  std::vector<std::vector<std::uint8_t>> shadow_each;
  if (config.cast_shadows) {
    for (const SpriteTruth& s : frame.sprites) {
      std::vector<std::uint8_t> own(static_cast<std::size_t>(W) * H, 0);
      cast_shadow(s.mask, s.bottom_y, config.light_direction, W, H, own);
      for (std::size_t k = 0; k < own.size(); ++k) shadow_any[k] |= own[k];
      shadow_each.push_back(std::move(own));
    }
    for (int row = 0; row < H; ++row) {
      const int y = y_of(row, H);
      for (int col = 0; col < W; ++col) {
        std::uint8_t& flag = shadow_any[static_cast<std::size_t>(row) * W + col];
        if (!flag) continue;
        if (config.brightness.at(col, y) < 1.0) {
          flag = 0;
          continue;
        }
        frame.image.set(col, row, scale(frame.image.at(col, row), config.shadow_gain));
      }
    }
  }

  // Painter's order: larger bottom y is farther away and drawn first.
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.bottom_y != b.bottom_y) return a.bottom_y > b.bottom_y;
    return a.occluder && !b.occluder;
  });
  std::vector<int> owner(static_cast<std::size_t>(W) * H, -1);
  const int kOccluderTag = 1 << 20;
  for (const Item& item : items) {
    if (item.occluder) {
      const Occluder& o = config.occluders[item.index];
      for (int y = std::max(o.y0, 0); y < std::min(o.y1, H); ++y) {
        const int row = row_of(y, H);
        for (int col = std::max(o.x0, 0); col < std::min(o.x1, W); ++col) {
          frame.image.set(col, row, o.color);
          owner[static_cast<std::size_t>(row) * W + col] = kOccluderTag + item.index;
        }
      }
      continue;
    }
    SpriteTruth& s = frame.sprites[item.index];
    const SpriteTrack& track = config.sprites[s.track];
    const double split_y = s.foot_y + 0.45 * projections[item.index].height;
    const Rgb upper = scale(track.upper, s.lighting_factor);
    const Rgb lower = scale(track.lower, s.lighting_factor);
    const PixelBox box = s.mask.bounds();
    s.patch = Image(box.width(), box.height());
    s.patch_left = box.col_min;
    s.patch_top = box.row_min;
    s.mask.for_each_pixel([&](int col, int row) {
      const Rgb c = y_of(row, H) >= split_y ? upper : lower;
      frame.image.set(col, row, c);
      s.patch.set(col - box.col_min, row - box.row_min, c);
      owner[static_cast<std::size_t>(row) * W + col] = item.index;
    });
  }

  for (std::size_t i = 0; i < frame.sprites.size(); ++i) {
    SpriteTruth& s = frame.sprites[i];
    const int id = static_cast<int>(i);
    s.visible = s.mask.filter([&](int col, int row) {
      return owner[static_cast<std::size_t>(row) * W + col] == id;
    });
    if (!shadow_each.empty()) {
      std::vector<std::uint8_t>& own = shadow_each[i];
      for (std::size_t k = 0; k < own.size(); ++k) {
        own[k] = own[k] && shadow_any[k] && owner[k] < 0;
      }
      s.shadow = BitMask::from_dense(W, H, own);
    } else {
      s.shadow = BitMask(W, H);
    }
  }
  for (std::size_t k = 0; k < shadow_any.size(); ++k) {
    shadow_any[k] = shadow_any[k] && owner[k] < 0;
  }
  frame.shadow_mask = BitMask::from_dense(W, H, shadow_any);
  return frame;
}

std::vector<RawDetection> detections_from_truth(const GroundTruthFrame& frame) {
  std::vector<RawDetection> out;
  for (const SpriteTruth& s : frame.sprites) {
    if (s.visible.empty()) continue;
    RawDetection d;
    d.frame_index = frame.index;
    d.class_name = s.class_name;
    d.confidence = s.confidence;
    d.mask = s.visible;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<SpriteTrack> make_probe_tracks(const SynthConfig& config,
                                           const ProbeSchedule& schedule) {
  std::mt19937_64 rng(schedule.seed);
  std::uniform_real_distribution<double> ux(schedule.x_min, schedule.x_max);
  std::uniform_real_distribution<double> uy(schedule.y_min, schedule.y_max);
  std::uniform_int_distribution<int> channel(0, 255);
  std::normal_distribution<double> noise(1.0, schedule.height_sigma);
  const int lifetime = std::max(schedule.lifetime, 1);

  auto pick_color = [&]() {
    for (;;) {
      Rgb c{static_cast<std::uint8_t>(channel(rng)),
            static_cast<std::uint8_t>(channel(rng)),
            static_cast<std::uint8_t>(channel(rng))};
      const int d = std::max({std::abs(c.r - config.ground.r),
                              std::abs(c.g - config.ground.g),
                              std::abs(c.b - config.ground.b)});
      if (d >= schedule.min_contrast) return c;
    }
  };

  std::vector<SpriteTrack> tracks;
  for (int start = schedule.first_frame;
       start < schedule.first_frame + schedule.frames; start += lifetime) {
    const int len = std::min(lifetime, schedule.first_frame + schedule.frames - start);
    for (int k = 0; k < schedule.per_frame; ++k) {
      SpriteTrack track;
      track.first_frame = start;
      track.upper = pick_color();
      track.lower = pick_color();
      track.height_multiplier =
          schedule.height_sigma > 0.0 ? std::max(noise(rng), 0.5) : 1.0;
      track.class_name = schedule.classes[tracks.size() % schedule.classes.size()];
      track.shape = track.class_name == "person" ? Shape::kKeyhole : Shape::kRectangle;
      for (int f = 0; f < len; ++f) {
        for (;;) {
          auto p = ground_point_at(config, ux(rng), uy(rng));
          if (p) {
            track.positions.push_back(*p);
            break;
          }
        }
      }
      tracks.push_back(std::move(track));
    }
  }
  return tracks;
}

std::string truth_to_json(const SynthConfig& config, int n_frames) {
  using nlohmann::json;
  const HeightPlane plane = image_plane(config);
  json doc;
  doc["plane"] = {{"a_prime", plane.a}, {"b_prime", plane.b}, {"c_prime", plane.c}};
  doc["world_plane"] = {{"a", config.plane.a}, {"b", config.plane.b}, {"c", config.plane.c}};
  doc["focal"] = config.focal;
  doc["person_height"] = config.person_height;
  doc["shadow"] = {{"k_x", config.light_direction.k_x},
                   {"k_y", config.light_direction.k_y},
                   {"g_true", config.shadow_gain},
                   {"enabled", config.cast_shadows}};
  json field = json::array();
  for (const BrightnessRegion& r : config.brightness.regions) {
    field.push_back({{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1},
                     {"factor", r.factor}});
  }
  doc["brightness_field"] = field;
  json occ = json::array();
  for (const Occluder& o : config.occluders) {
    occ.push_back({{"x0", o.x0}, {"y0", o.y0}, {"x1", o.x1}, {"y1", o.y1},
                   {"base_y", o.base_y}});
  }
  doc["occluders"] = occ;
  json frames = json::array();
  for (int t = 0; t < n_frames; ++t) {
    json list = json::array();
    for (std::size_t i = 0; i < config.sprites.size(); ++i) {
      const SpriteTrack& track = config.sprites[i];
      if (!track.active(t)) continue;
      const Vec3& p = track.positions[t - track.first_frame];
      const Projected pr = project(config, track, p);
      list.push_back({{"track", i},
                      {"class", track.class_name},
                      {"foot_x", pr.foot_x},
                      {"foot_y", pr.foot_y},
                      {"pixel_height", pr.height},
                      {"height_multiplier", track.height_multiplier}});
    }
    frames.push_back(list);
  }
  doc["frames"] = frames;
  return doc.dump(2) + "\n";
}

namespace {

SynthConfig small_scene(std::uint64_t seed) {
  SynthConfig c;
  c.width = 640;
  c.height = 480;
  c.focal = 640.0;
  c.plane = {0.01, -0.2, 0.05};
  c.seed = seed;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"street", "occlusion", "lighting", "shadow", "cloudy"};
}

SynthConfig preset(const std::string& name, int frames, std::uint64_t seed) {
  ProbeSchedule schedule;
  schedule.frames = frames;
  schedule.seed = seed * 7919 + 11;
  schedule.min_contrast = 80;
  SynthConfig c;
  if (name == "street") {
    c.plane = {0.02, -0.2, 0.05};
    c.seed = seed;
    c.occluders.push_back({150, 200, 350, 250, 200, {96, 64, 40}});
    c.brightness.regions.push_back({560, 0, 800, 260, 0.55});
    schedule.per_frame = 4;
    schedule.x_min = 40;
    schedule.x_max = 760;
    schedule.y_min = 10;
    schedule.y_max = 380;
  } else if (name == "occlusion") {
    c = small_scene(seed);
    c.cast_shadows = false;
    c.occluders.push_back({80, 60, 260, 110, 60, {96, 64, 40}});
    c.occluders.push_back({380, 100, 430, 230, 100, {70, 90, 70}});
    c.occluders.push_back({470, 30, 600, 70, 30, {120, 110, 60}});
    schedule.per_frame = 10;
    schedule.x_min = 40;
    schedule.x_max = 600;
    schedule.y_min = 10;
    schedule.y_max = 170;
  } else if (name == "lighting") {
    c = small_scene(seed);
    c.cast_shadows = false;
    c.brightness.regions.push_back({320, 0, 640, 480, 0.4});
    schedule.per_frame = 6;
    schedule.min_contrast = 110;
    schedule.x_min = 30;
    schedule.x_max = 610;
    schedule.y_min = 10;
    schedule.y_max = 200;
  } else if (name == "shadow") {
    c = small_scene(seed);
    schedule.per_frame = 2;
    schedule.x_min = 60;
    schedule.x_max = 480;
    schedule.y_min = 20;
    schedule.y_max = 180;
  } else if (name == "cloudy") {
    c = small_scene(seed);
    c.cast_shadows = false;
    schedule.per_frame = 3;
    schedule.x_min = 40;
    schedule.x_max = 600;
    schedule.y_min = 10;
    schedule.y_max = 200;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown preset '" + name + "'");
  }
  c.sprites = make_probe_tracks(c, schedule);
  return c;
}

SceneManifest export_scene(const SynthConfig& config, int n_frames,
                           const std::filesystem::path& out_dir) {
  validate(config);
  if (n_frames < 1) throw Error(ErrorCode::kEmptyScene, "empty scene");
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "frames", ec);
  std::filesystem::create_directories(out_dir / "masks", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string());

  SceneManifest m;
  m.width = config.width;
  m.height = config.height;
  m.frame_count = n_frames;
  m.root = out_dir;
  for (int t = 0; t < n_frames; ++t) {
    const GroundTruthFrame frame = render_frame(config, t);
    write_png(frame_path(m, t), frame.image);
    const std::string jsonl = detections_to_jsonl(detections_from_truth(frame));
    write_file_bytes(mask_path(m, t),
                     {reinterpret_cast<const std::uint8_t*>(jsonl.data()), jsonl.size()});
  }
  save_manifest(m, out_dir / "scene.json");
  const std::string truth = truth_to_json(config, n_frames);
  write_file_bytes(out_dir / "truth.json",
                   {reinterpret_cast<const std::uint8_t*>(truth.data()), truth.size()});
  return m;
}

SynthDataset::SynthDataset(SynthConfig config, int n_frames)
    : config_(std::move(config)) {
  validate(config_);
  if (n_frames < 1) throw Error(ErrorCode::kEmptyScene, "empty scene");
  manifest_.width = config_.width;
  manifest_.height = config_.height;
  manifest_.frame_count = n_frames;
}

GroundTruthFrame SynthDataset::truth(int index) const {
  if (index < 0 || index >= manifest_.frame_count) {
    throw Error(ErrorCode::kInvalidArgument, "frame index out of range");
  }
  std::lock_guard<std::mutex> lock(mutex_);
  if (!cached_ || cached_->index != index) cached_ = render_frame(config_, index);
  return *cached_;
}

Image SynthDataset::frame(int index) const { return truth(index).image; }

std::vector<RawDetection> SynthDataset::detections(int index,
                                                   double min_confidence) const {
  std::vector<RawDetection> kept;
  for (RawDetection& d : detections_from_truth(truth(index))) {
    if (d.confidence >= min_confidence && manifest_.allows_class(d.class_name)) {
      kept.push_back(std::move(d));
    }
  }
  return kept;
}

}  // namespace probe::synth
