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

#include "probe/shadow.hpp"

#include <algorithm>
#include <cmath>

#include "probe/error.hpp"

namespace probe {
namespace {

bool chroma_matches(Rgb f, Rgb p, double tolerance) {
  const int sf = f.r + f.g + f.b;
  const int sp = p.r + p.g + p.b;
  if (sf == 0 || sp == 0) return false;
  const int fc[3] = {f.r, f.g, f.b};
  const int pc[3] = {p.r, p.g, p.b};
  for (int c = 0; c < 3; ++c) {
    if (pc[c] == 0) {
      if (fc[c] != 0) return false;
      continue;
    }
    const double ratio = (static_cast<double>(fc[c]) * sp) / (static_cast<double>(pc[c]) * sf);
    if (std::abs(ratio - 1.0) > tolerance) return false;
  }
  return true;
}

BitMask disc(int width, int height, double cx, double cy, double radius) {
  std::vector<Span> spans;
  const double crow = height - 1 - cy;
  const int r0 = static_cast<int>(std::ceil(crow - radius));
  const int r1 = static_cast<int>(std::floor(crow + radius));
  for (int row = std::max(r0, 0); row <= std::min(r1, height - 1); ++row) {
    const double dy = row - crow;
    const double dx = std::sqrt(std::max(0.0, radius * radius - dy * dy));
    const int c0 = static_cast<int>(std::ceil(cx - dx));
    const int c1 = static_cast<int>(std::floor(cx + dx)) + 1;
    if (c1 > c0) spans.push_back({row, c0, c1});
  }
  return BitMask::from_spans(width, height, std::move(spans));
}

// Appends the sheared image of one caster span.
void shear_span(const Span& s, int d, int bottom_y, int height, double k_x,
                double k_y, std::vector<Span>& out) {
  double lo = k_y * (d - 0.5);
  double hi = k_y * (d + 0.5);
  if (lo > hi) std::swap(lo, hi);
  const int r0 = static_cast<int>(std::ceil(lo));
  const int r1 = static_cast<int>(std::ceil(hi));
  const double shift = k_x * d;
  const int c0 = static_cast<int>(std::ceil(s.x0 - 0.5 + shift));
  const int c1 = static_cast<int>(std::ceil(s.x1 - 0.5 + shift));
  for (int r = r0; r < r1; ++r) {
    out.push_back({height - 1 - (bottom_y + r), c0, c1});
  }
}

}  // namespace

ShadowObservation extract_shadow_evidence(const Image& frame, const Image& plate,
                                          const InstanceObservation& caster,
                                          const BitMask& excluded,
                                          const ShadowEvidenceOptions& options) {
  if (!frame.same_size(plate)) {
    throw Error(ErrorCode::kInvalidArgument, "shadow evidence: plate size mismatch");
  }
  const int W = frame.width();
  const int H = frame.height();
  ShadowObservation out;
  out.frame_index = caster.frame_index;
  out.caster = caster.mask;
  out.bottom_y = caster.bottom_y;
  out.bottom_x = caster.bottom_x;
  out.caster_height = caster.pixel_height;
  const double radius = options.radius_factor * caster.pixel_height;
  out.search = disc(W, H, caster.bottom_x, caster.bottom_y, radius)
                   .subtracted(excluded)
                   .subtracted(caster.mask);
  out.shadow = out.search.filter([&](int col, int row) {
    const Rgb f = frame.at(col, row);
    const Rgb p = plate.at(col, row);
    const int lp = luminance(p);
    const int lf = luminance(f);
    if (lp == 0 || lf == 0) return false;
    const double ratio = static_cast<double>(lf) / lp;
    if (!(ratio < options.darkening_cutoff)) return false;
    if (!chroma_matches(f, p, options.chroma_tolerance)) return false;
    out.ratios.push_back(ratio);
    return true;
  });
  return out;
}

std::string_view to_string(ShadowMode mode) {
  return mode == ShadowMode::kShear ? "shear" : "contact";
}

ShadowMode shadow_mode_from_string(std::string_view text) {
  if (text == "shear") return ShadowMode::kShear;
  if (text == "contact") return ShadowMode::kContact;
  throw Error(ErrorCode::kFormat, "unknown shadow mode '" + std::string(text) + "'");
}

ShadowModel contact_shadow_model(double g) {
  ShadowModel m;
  m.mode = ShadowMode::kContact;
  m.g = g;
  return m;
}

BitMask shear_footprint(const BitMask& mask, int bottom_y, double k_x, double k_y) {
  const int H = mask.height();
  std::vector<Span> spans;
  for (const Span& s : mask.spans()) {
    shear_span(s, y_of(s.row, H) - bottom_y, bottom_y, H, k_x, k_y, spans);
  }
  return BitMask::from_spans(mask.width(), H, std::move(spans));
}

BitMask contact_footprint(const BitMask& mask, int radius) {
  if (mask.empty()) return BitMask(mask.width(), mask.height());
  const int bottom_row = mask.spans().back().row;
  std::vector<Span> spans;
  for (const Span& s : mask.spans()) {
    if (s.row != bottom_row) continue;
    for (int row = bottom_row - radius; row <= bottom_row + radius; ++row) {
      spans.push_back({row, s.x0 - radius, s.x1 + radius});
    }
  }
  return BitMask::from_spans(mask.width(), mask.height(), std::move(spans))
      .subtracted(mask);
}

BitMask shadow_footprint(const ShadowModel& model, const BitMask& mask, int bottom_y) {
  if (model.mode == ShadowMode::kContact) return contact_footprint(mask);
  return shear_footprint(mask, bottom_y, model.k_x, model.k_y).subtracted(mask);
}

struct ShadowFitProblem::Item {
  int bottom_y = 0;
  int row0 = 0;
  int rows = 0;
  int col0 = 0;
  int cols = 0;
  std::vector<int> allowed_prefix;  // rows x (cols + 1)
  std::vector<int> shadow_prefix;
  std::vector<Span> caster;
  std::int64_t shadow_area = 0;
};

ShadowFitProblem::ShadowFitProblem(std::span<const ShadowObservation> observations) {
  for (const ShadowObservation& obs : observations) {
    if (obs.shadow.empty()) continue;
    height_ = obs.caster.height();
    const PixelBox box = obs.search.bounds();
    Item item;
    item.bottom_y = obs.bottom_y;
    item.row0 = box.row_min;
    item.rows = box.height();
    item.col0 = box.col_min;
    item.cols = box.width();
    const std::size_t stride = static_cast<std::size_t>(item.cols) + 1;
    item.allowed_prefix.assign(stride * item.rows, 0);
    item.shadow_prefix.assign(stride * item.rows, 0);
    auto mark = [&](const BitMask& m, std::vector<int>& prefix) {
      for (const Span& s : m.spans()) {
        int* p = prefix.data() + (s.row - item.row0) * stride;
        for (int x = s.x0; x < s.x1; ++x) p[x - item.col0 + 1] = 1;
      }
      for (int r = 0; r < item.rows; ++r) {
        int* p = prefix.data() + r * stride;
        for (std::size_t c = 1; c < stride; ++c) p[c] += p[c - 1];
      }
    };
    mark(obs.search, item.allowed_prefix);
    mark(obs.shadow, item.shadow_prefix);
    item.caster = obs.caster.spans();
    item.shadow_area = obs.shadow.area();
    items_.push_back(std::move(item));
  }
}

ShadowFitProblem::~ShadowFitProblem() = default;
ShadowFitProblem::ShadowFitProblem(ShadowFitProblem&&) noexcept = default;
ShadowFitProblem& ShadowFitProblem::operator=(ShadowFitProblem&&) noexcept = default;

int ShadowFitProblem::size() const { return static_cast<int>(items_.size()); }

double ShadowFitProblem::iou_of(const Item& item, double k_x, double k_y,
                                std::vector<Span>& scratch) const {
  scratch.clear();
  for (const Span& s : item.caster) {
    shear_span(s, y_of(s.row, height_) - item.bottom_y, item.bottom_y, height_, k_x,
               k_y, scratch);
  }
  std::sort(scratch.begin(), scratch.end(), [](const Span& a, const Span& b) {
    return a.row != b.row ? a.row < b.row : a.x0 < b.x0;
  });
  const std::size_t stride = static_cast<std::size_t>(item.cols) + 1;
  std::int64_t predicted = 0;
  std::int64_t overlap = 0;
  auto count = [&](int row, int x0, int x1) {
    const int r = row - item.row0;
    if (r < 0 || r >= item.rows) return;
    const int a = std::clamp(x0 - item.col0, 0, item.cols);
    const int b = std::clamp(x1 - item.col0, 0, item.cols);
    if (b <= a) return;
    const int* pa = item.allowed_prefix.data() + r * stride;
    const int* ps = item.shadow_prefix.data() + r * stride;
    predicted += pa[b] - pa[a];
    overlap += ps[b] - ps[a];
  };
  std::size_t i = 0;
  while (i < scratch.size()) {
    const int row = scratch[i].row;
    int x0 = scratch[i].x0;
    int x1 = scratch[i].x1;
    for (++i; i < scratch.size() && scratch[i].row == row; ++i) {
      if (scratch[i].x0 > x1) {
        count(row, x0, x1);
        x0 = scratch[i].x0;
      }
      x1 = std::max(x1, scratch[i].x1);
    }
    count(row, x0, x1);
  }
  const std::int64_t uni = predicted + item.shadow_area - overlap;
  return uni > 0 ? static_cast<double>(overlap) / static_cast<double>(uni) : 0.0;
}

std::vector<double> ShadowFitProblem::ious(double k_x, double k_y) const {
  std::vector<double> out;
  out.reserve(items_.size());
  std::vector<Span> scratch;
  for (const Item& item : items_) out.push_back(iou_of(item, k_x, k_y, scratch));
  return out;
}

double ShadowFitProblem::mean_iou(double k_x, double k_y) const {
  if (items_.empty()) return 0.0;
  std::vector<Span> scratch;
  double sum = 0.0;
  for (const Item& item : items_) sum += iou_of(item, k_x, k_y, scratch);
  return sum / static_cast<double>(items_.size());
}

double median_ratio(std::span<const ShadowObservation> observations) {
  std::vector<double> all;
  for (const ShadowObservation& obs : observations) {
    all.insert(all.end(), obs.ratios.begin(), obs.ratios.end());
  }
  if (all.empty()) return 0.0;
  const std::size_t mid = (all.size() - 1) / 2;
  std::nth_element(all.begin(), all.begin() + mid, all.end());
  return all[mid];
}

ShadowModel fit_shadow_model(std::span<const ShadowObservation> observations,
                             const ShadowFitOptions& options) {
  const ShadowFitProblem problem(observations);
  if (problem.size() == 0) {
    throw Error(ErrorCode::kNoShadowEvidence, "no shadow evidence");
  }
  if (problem.size() < options.min_observations) {
    throw Error(ErrorCode::kInsufficientData,
                "shadow fit: " + std::to_string(problem.size()) +
                    " observations with shadows, need " +
                    std::to_string(options.min_observations));
  }

  // Grid points are integer hundredths; iteration is lexicographic and only a
  // strictly better score replaces the incumbent.
  constexpr int kRange = 300;
  constexpr int kCoarse = 10;
  auto k = [](int hundredths) { return hundredths / 100.0; };
  int best_x = -kRange;
  int best_y = -kRange;
  double best = -1.0;
  for (int ix = -kRange; ix <= kRange; ix += kCoarse) {
    for (int iy = -kRange; iy <= kRange; iy += kCoarse) {
      const double score = problem.mean_iou(k(ix), k(iy));
      if (score > best) {
        best = score;
        best_x = ix;
        best_y = iy;
      }
    }
  }
  const int coarse_x = best_x;
  const int coarse_y = best_y;
  best = -1.0;
  for (int ix = std::max(coarse_x - kCoarse, -kRange);
       ix <= std::min(coarse_x + kCoarse, kRange); ++ix) {
    for (int iy = std::max(coarse_y - kCoarse, -kRange);
         iy <= std::min(coarse_y + kCoarse, kRange); ++iy) {
      const double score = problem.mean_iou(k(ix), k(iy));
      if (score > best) {
        best = score;
        best_x = ix;
        best_y = iy;
      }
    }
  }

  ShadowModel model;
  model.mode = ShadowMode::kShear;
  model.k_x = k(best_x);
  model.k_y = k(best_y);
  model.coarse_k_x = k(coarse_x);
  model.coarse_k_y = k(coarse_y);
  model.observation_count = problem.size();
  const std::vector<double> per = problem.ious(model.k_x, model.k_y);
  double sum = 0.0;
  for (double v : per) sum += v;
  model.mean_iou = sum / static_cast<double>(per.size());
  double var = 0.0;
  for (double v : per) var += (v - model.mean_iou) * (v - model.mean_iou);
  model.iou_std = std::sqrt(var / static_cast<double>(per.size()));
  model.g = std::clamp(median_ratio(observations), 1e-6, 1.0);
  return model;
}

GainBias GainBias::identity(int width, int height) {
  GainBias gb;
  gb.width = width;
  gb.height = height;
  gb.gain.assign(static_cast<std::size_t>(width) * height, 1.0f);
  gb.bias.assign(static_cast<std::size_t>(width) * height * 3, 0.0f);
  return gb;
}

void add_shadow(GainBias& gb, const ShadowModel& model, const BitMask& mask,
                int bottom_y, const LightingMap& lighting,
                const OcclusionMap& occlusion) {
  const BitMask footprint = shadow_footprint(model, mask, bottom_y);
  if (footprint.empty()) return;
  const int W = gb.width;
  const int H = gb.height;
  const bool use_light = lighting.width() == W && lighting.height() == H &&
                         lighting.sampled_pixels() > 0;
  const bool use_occ = occlusion.width() == W && occlusion.height() == H;
  const double dark_below = model.cutoff * lighting.median_luminance();
  const double slack = model.occlusion_slack * mask.bounds().height();
  const float core = static_cast<float>(model.g);
  const float edge = static_cast<float>(0.5 * (1.0 + model.g));

  const PixelBox box = footprint.bounds();
  const int bw = box.width() + 2;
  const int bh = box.height() + 2;
  std::vector<std::uint8_t> inside(static_cast<std::size_t>(bw) * bh, 0);
  footprint.for_each_pixel([&](int col, int row) {
    inside[static_cast<std::size_t>(row - box.row_min + 1) * bw + (col - box.col_min + 1)] = 1;
  });
  auto in = [&](int col, int row) {
    if (col < 0 || row < 0 || col >= W || row >= H) return true;
    return inside[static_cast<std::size_t>(row - box.row_min + 1) * bw +
                  (col - box.col_min + 1)] != 0;
  };

  footprint.for_each_pixel([&](int col, int row) {
    if (use_light && lighting.sampled(col, row) &&
        luminance(lighting.value(col, row)) < dark_below) {
      return;
    }
    if (use_occ) {
      const int z = occlusion.at(col, row);
      if (z != OcclusionMap::kNever && y_of(row, H) - z > slack) return;
    }
    const bool is_edge = !in(col - 1, row) || !in(col + 1, row) ||
                         !in(col, row - 1) || !in(col, row + 1);
    float& g = gb.gain[static_cast<std::size_t>(row) * W + col];
    g = std::min(g, is_edge ? edge : core);
  });
}

GainBias synthesize_gain_bias(const ShadowModel& model, const BitMask& mask,
                              int bottom_y, const LightingMap& lighting,
                              const OcclusionMap& occlusion) {
  GainBias gb = GainBias::identity(mask.width(), mask.height());
  add_shadow(gb, model, mask, bottom_y, lighting, occlusion);
  return gb;
}

Image apply_gain_bias(const Image& composite, const GainBias& gb) {
  if (composite.width() != gb.width || composite.height() != gb.height) {
    throw Error(ErrorCode::kInvalidArgument, "gain/bias size mismatch");
  }
  Image out = composite;
  std::uint8_t* p = out.data();
  const std::size_t n = out.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = gb.gain[i];
    for (int c = 0; c < 3; ++c) {
      p[i * 3 + c] = to_u8(g * p[i * 3 + c] + gb.bias[i * 3 + c]);
    }
  }
  return out;
}

}  // namespace probe
