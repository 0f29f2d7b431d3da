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

#include "probe/groundplane.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "probe/error.hpp"

namespace probe {
namespace {

struct Solve {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double condition = 0.0;
};

Solve solve(std::span<const HeightSample> samples, const std::vector<int>& use,
            double min_condition) {
  const int n = static_cast<int>(use.size());
  double mx = 0.0, my = 0.0, mh = 0.0;
  for (int i : use) {
    mx += samples[i].x;
    my += samples[i].y;
    mh += samples[i].h;
  }
  mx /= n;
  my /= n;
  mh /= n;
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (int k = 0; k < n; ++k) {
    const HeightSample& s = samples[use[k]];
    design(k, 0) = s.x - mx;
    design(k, 1) = s.y - my;
    rhs(k) = s.h - mh;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  Solve out;
  out.condition = sv(0) > 0.0 ? sv(1) / sv(0) : 0.0;
  if (!(out.condition >= min_condition)) {
    throw Error(ErrorCode::kIllConditioned, "plane fit: degenerate sample geometry");
  }
  const Eigen::Vector2d ab = svd.solve(rhs);
  out.a = ab(0);
  out.b = ab(1);
  out.c = mh - out.a * mx - out.b * my;
  return out;
}

double rms(std::span<const HeightSample> samples, const std::vector<int>& use,
           const Solve& s) {
  double acc = 0.0;
  for (int i : use) {
    const double r = s.a * samples[i].x + s.b * samples[i].y + s.c - samples[i].h;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(use.size()));
}

}  // namespace

PlaneModel fit_plane(std::span<const HeightSample> samples,
                     const PlaneFitOptions& options) {
  if (samples.size() < 3) {
    throw Error(ErrorCode::kInsufficientData, "plane fit: need at least 3 samples");
  }
  std::vector<int> all(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) all[i] = static_cast<int>(i);
  Solve fit = solve(samples, all, options.min_condition);
  std::vector<int> kept = all;
  double sigma = rms(samples, all, fit);

  double scale = 0.0;
  for (const HeightSample& s : samples) scale = std::max(scale, std::abs(s.h));
  if (options.trim && sigma > 1e-9 * std::max(scale, 1.0)) {
    std::vector<int> inliers;
    for (int i : all) {
      const double r = fit.a * samples[i].x + fit.b * samples[i].y + fit.c - samples[i].h;
      if (std::abs(r) <= options.trim_sigmas * sigma) inliers.push_back(i);
    }
    if (inliers.size() >= 3 && inliers.size() < all.size()) {
      try {
        fit = solve(samples, inliers, options.min_condition);
        kept = std::move(inliers);
      } catch (const Error&) {
        // Trimming left a degenerate set; keep the untrimmed fit.
      }
    }
  }

  PlaneModel model;
  model.a = fit.a;
  model.b = fit.b;
  model.c = fit.c;
  model.sample_count = static_cast<int>(samples.size());
  model.inlier_count = static_cast<int>(kept.size());
  model.rms_residual = rms(samples, kept, fit);
  model.condition = fit.condition;
  return model;
}

double predict_height(const PlaneModel& model, double x, double y) {
  const double h = model.height_at(x, y);
  if (!(h > 0.0)) {
    throw Error(ErrorCode::kOffPlane, "placement is off the ground plane");
  }
  return h;
}

double relative_rescale(const PlaneModel& model, const HeightReference& reference,
                        double x, double y) {
  if (!(reference.h > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "reference height must be positive");
  }
  const double h_ref = predict_height(model, reference.x, reference.y);
  const double h_target = predict_height(model, x, y);
  // r * h' / h_hat with r = h_hat / h(ref).
  return h_target / h_ref;
}

std::vector<HeightSample> height_samples(
    std::span<const InstanceObservation> observations, double min_confidence) {
  std::vector<HeightSample> out;
  for (const InstanceObservation& obs : observations) {
    if (obs.class_name != "person" || obs.confidence < min_confidence) continue;
    if (obs.pixel_height <= 0) continue;
    out.push_back({obs.bottom_x, static_cast<double>(obs.bottom_y),
                   static_cast<double>(obs.pixel_height)});
  }
  return out;
}

}  // namespace probe
