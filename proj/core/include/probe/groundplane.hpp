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

#include <span>
#include <vector>

#include "probe/dataio.hpp"
#include "probe/occlusion.hpp"

namespace probe {

/// A grounded person: bottom-middle point (bottom-left origin) and pixel
/// height.
struct HeightSample {
  double x = 0.0;
  double y = 0.0;
  double h = 0.0;
};

/// h = a x + b y + c in image space.
struct PlaneModel {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  int sample_count = 0;   // samples offered to the fit
  int inlier_count = 0;   // samples kept after trimming
  double rms_residual = 0.0;
  double condition = 0.0;  // smallest / largest singular value, centered x-y

  double height_at(double x, double y) const { return a * x + b * y + c; }
};

struct PlaneFitOptions {
  bool trim = true;
  double trim_sigmas = 2.0;
  double min_condition = 1e-6;
};

/// Least squares fit with one trim-and-refit pass. Throws kInsufficientData
/// for fewer than 3 samples and kIllConditioned for degenerate geometry.
PlaneModel fit_plane(std::span<const HeightSample> samples,
                     const PlaneFitOptions& options = {});

/// Throws kOffPlane when the predicted height is not positive.
double predict_height(const PlaneModel& model, double x, double y);

struct HeightReference {
  double x = 0.0;
  double y = 0.0;
  double h = 0.0;  // observed height at (x, y)
};

/// Multiplicative scale that carries the reference to (x, y): r h' / h_hat
/// with r = h_hat / h(ref) and h' = h(x, y).
double relative_rescale(const PlaneModel& model, const HeightReference& reference,
                        double x, double y);

/// Person observations at or above `min_confidence`.
std::vector<HeightSample> height_samples(
    std::span<const InstanceObservation> observations,
    double min_confidence = kPersonConfidence);

}  // namespace probe
