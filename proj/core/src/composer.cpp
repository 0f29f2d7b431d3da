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

#include "probe/composer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "probe/png_io.hpp"

namespace probe {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_position(const SceneProducts& products, double x, double y) {
  const int W = products.background.width();
  const int H = products.background.height();
  if (!(x >= 0.0 && x < W && y >= 0.0 && y < H)) {
    throw Error(ErrorCode::kInvalidArgument, "position outside the image");
  }
}

double target_height(const SceneProducts& products, const Placement& p) {
  if (!products.plane) return p.reference_height;
  return p.reference_height *
         relative_rescale(*products.plane, {p.anchor_x, p.anchor_y, p.reference_height},
                          p.x, p.y);
}

// Scaled (but not relit) object at the placement's position.
PlacedObject position_object(const SceneProducts& products, const Placement& p,
                             bool scale) {
  const int W = products.background.width();
  const int H = products.background.height();
  const Sprite& src = *p.sprite;
  const Sprite* use = &src;
  Sprite scaled;
  if (scale) {
    const double s = target_height(products, p) / src.height();
    const int w2 = std::max(1, static_cast<int>(std::lround(src.width() * s)));
    const int h2 = std::max(1, static_cast<int>(std::lround(src.height() * s)));
    if (w2 != src.width() || h2 != src.height()) {
      scaled = resample_sprite(src, w2, h2);
      use = &scaled;
    }
  }
  const int y = static_cast<int>(std::floor(p.y + 0.5));
  const int top = row_of(y, H) - use->height() + 1;
  const int left = static_cast<int>(std::floor(p.x + 0.5 - use->width() / 2.0));

  PlacedObject obj;
  obj.patch = use->pixels;
  obj.patch_left = left;
  obj.patch_top = top;
  std::vector<Span> spans;
  spans.reserve(use->mask.spans().size());
  for (const Span& s : use->mask.spans()) {
    spans.push_back({s.row + top, s.x0 + left, s.x1 + left});
  }
  obj.mask = BitMask::from_spans(W, H, std::move(spans));
  obj.bottom_y = obj.mask.empty() ? y : y_of(obj.mask.spans().back().row, H);
  return obj;
}

void relight_object(const SceneProducts& products, const Placement& p,
                    PlacedObject& obj) {
  if (!p.lighting_anchor || obj.mask.empty()) return;
  const Color3 target = lighting_factor(products.lighting, obj.mask);
  obj.patch = relight(obj.patch, LightingAnchor::create(*p.lighting_anchor), target);
}

}  // namespace

Sprite Sprite::from_rgba(const RgbaImage& rgba) {
  if (rgba.width <= 0 || rgba.height <= 0 ||
      rgba.pixels.size() != static_cast<std::size_t>(rgba.width) * rgba.height * 4) {
    throw Error(ErrorCode::kInvalidArgument, "sprite: bad raster");
  }
  std::vector<std::uint8_t> alpha(static_cast<std::size_t>(rgba.width) * rgba.height);
  for (std::size_t i = 0; i < alpha.size(); ++i) alpha[i] = rgba.pixels[i * 4 + 3] >= 128;
  const BitMask full = BitMask::from_dense(rgba.width, rgba.height, alpha);
  if (full.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sprite has no opaque pixels");
  }
  const PixelBox box = full.bounds();
  Sprite out;
  out.pixels = Image(box.width(), box.height());
  for (int row = 0; row < box.height(); ++row) {
    for (int col = 0; col < box.width(); ++col) {
      const std::uint8_t* p = rgba.pixels.data() +
          (static_cast<std::size_t>(row + box.row_min) * rgba.width + col + box.col_min) * 4;
      out.pixels.set(col, row, {p[0], p[1], p[2]});
    }
  }
  std::vector<Span> spans;
  for (const Span& s : full.spans()) {
    spans.push_back({s.row - box.row_min, s.x0 - box.col_min, s.x1 - box.col_min});
  }
  out.mask = BitMask::from_spans(box.width(), box.height(), std::move(spans));
  return out;
}

Sprite Sprite::from_png(std::span<const std::uint8_t> png) {
  return from_rgba(decode_png_rgba(png));
}

Sprite resample_sprite(const Sprite& sprite, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "resample: bad size");
  }
  const int W = sprite.width();
  const int H = sprite.height();
  const std::vector<std::uint8_t> cover = sprite.mask.to_dense();
  Sprite out;
  out.pixels = Image(width, height);
  std::vector<std::uint8_t> keep(static_cast<std::size_t>(width) * height, 0);
  const double sx = static_cast<double>(W) / width;
  const double sy = static_cast<double>(H) / height;
  for (int v = 0; v < height; ++v) {
    const double fy = std::clamp((v + 0.5) * sy - 0.5, 0.0, H - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, H - 1);
    const double ty = fy - y0;
    for (int u = 0; u < width; ++u) {
      const double fx = std::clamp((u + 0.5) * sx - 0.5, 0.0, W - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, W - 1);
      const double tx = fx - x0;
      const int xs[4] = {x0, x1, x0, x1};
      const int ys[4] = {y0, y0, y1, y1};
      const double ws[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
      double coverage = 0.0;
      double acc[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < 4; ++k) {
        if (ws[k] == 0.0 || !cover[static_cast<std::size_t>(ys[k]) * W + xs[k]]) continue;
        const Rgb c = sprite.pixels.at(xs[k], ys[k]);
        coverage += ws[k];
        acc[0] += ws[k] * c.r;
        acc[1] += ws[k] * c.g;
        acc[2] += ws[k] * c.b;
      }
      if (coverage <= 0.0) continue;
      out.pixels.set(u, v, {to_u8(acc[0] / coverage), to_u8(acc[1] / coverage),
                            to_u8(acc[2] / coverage)});
      keep[static_cast<std::size_t>(v) * width + u] = coverage >= 0.5;
    }
  }
  out.mask = BitMask::from_dense(width, height, keep);
  return out;
}

Placement place(const SceneProducts& products, std::shared_ptr<const Sprite> sprite,
                double x, double y, double height_override, double brightness, int id) {
  if (!sprite) throw Error(ErrorCode::kInvalidArgument, "placement without sprite");
  if (!(height_override > 0.0) || !(brightness > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "height and brightness factors must be positive");
  }
  check_position(products, x, y);
  Placement p;
  p.id = id;
  p.sprite = std::move(sprite);
  p.x = p.anchor_x = x;
  p.y = p.anchor_y = y;
  p.height_override = height_override;
  p.brightness = brightness;
  p.reference_height = products.plane
                           ? predict_height(*products.plane, x, y) * height_override
                           : p.sprite->height() * height_override;
  if (products.lighting.sampled_pixels() > 0) {
    const PlacedObject obj = position_object(products, p, true);
    const Color3 l = lighting_factor(products.lighting, obj.mask);
    if (l[0] > 0.0 && l[1] > 0.0 && l[2] > 0.0) {
      p.lighting_anchor = Color3{l[0] / brightness, l[1] / brightness, l[2] / brightness};
    }
  }
  return p;
}

Placement move(const SceneProducts& products, const Placement& placement, double x,
               double y) {
  check_position(products, x, y);
  if (products.plane) predict_height(*products.plane, x, y);
  Placement p = placement;
  p.x = x;
  p.y = y;
  return p;
}

Placement adjust(const SceneProducts& products, const Placement& placement,
                 double height_override, double brightness) {
  return place(products, placement.sprite, placement.x, placement.y, height_override,
               brightness, placement.id);
}

PlacedObject realize(const SceneProducts& products, const Placement& placement,
                     const StageToggles& toggles) {
  PlacedObject obj = position_object(products, placement, toggles.scale);
  if (toggles.lighting) relight_object(products, placement, obj);
  return obj;
}

CompositeResult render_composite(const SceneProducts& products,
                                 std::span<const Placement> placements,
                                 const StageToggles& toggles) {
  const auto start = Clock::now();
  CompositeResult result;
  const int W = products.background.width();
  const int H = products.background.height();

  auto t = Clock::now();
  std::vector<PlacedObject> objects;
  objects.reserve(placements.size());
  for (const Placement& p : placements) {
    objects.push_back(position_object(products, p, toggles.scale));
  }
  result.timings.scale_ms = ms_since(t);

  t = Clock::now();
  if (toggles.lighting) {
    for (std::size_t i = 0; i < objects.size(); ++i) {
      relight_object(products, placements[i], objects[i]);
    }
  }
  result.timings.lighting_ms = ms_since(t);

  t = Clock::now();
  std::vector<std::size_t> order(objects.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return objects[a].bottom_y > objects[b].bottom_y;
  });
  result.comp = products.background;
  std::vector<std::uint8_t> drawn(static_cast<std::size_t>(W) * H, 0);
  for (std::size_t i : order) {
    const PlacedObject& obj = objects[i];
    const BitMask shown =
        toggles.occlusion ? visible_pixels(obj, products.occlusion) : obj.mask;
    shown.for_each_pixel([&](int col, int row) {
      result.comp.set(col, row, obj.color_at(col, row));
      drawn[static_cast<std::size_t>(row) * W + col] = 1;
    });
  }
  result.timings.occlusion_ms = ms_since(t);

  t = Clock::now();
  if (toggles.shadow && !objects.empty()) {
    GainBias gb = GainBias::identity(W, H);
    const OcclusionMap no_occlusion;
    for (const PlacedObject& obj : objects) {
      add_shadow(gb, products.shadow, obj.mask, obj.bottom_y, products.lighting,
                 toggles.occlusion ? products.occlusion : no_occlusion);
    }
    for (std::size_t k = 0; k < drawn.size(); ++k) {
      if (drawn[k]) gb.gain[k] = 1.0f;
    }
    result.final_image = apply_gain_bias(result.comp, gb);
  } else {
    result.final_image = result.comp;
  }
  result.timings.shadow_ms = ms_since(t);
  result.timings.total_ms = ms_since(start);
  return result;
}

}  // namespace probe
