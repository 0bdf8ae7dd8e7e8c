#pragma once

#include "subco/loss.hpp"

#include <cmath>
#include <cstdint>

namespace subco {

struct GradCheckReport {
    int instances = 0;  // instances compared against finite differences
    int passed = 0;
    int degenerate = 0;  // skipped-loss samples; their gradient must be exactly zero
    int near_kink = 0;   // resampled because a min() tie or the alive threshold was too close
    double max_relative_error = 0.0;
    bool ok() const { return instances > 0 && passed == instances && std::isfinite(max_relative_error); }
};

/// Compares subco_loss_gradient with central differences on random tiny
/// models (2x2 patches, H = 4, D = 3) and samples of `loss.sequence_length`
/// frames holding one or two detections each. Relative error per parameter is
/// |numeric - analytic| / max(|numeric| + |analytic|, 1e-6).
GradCheckReport run_gradient_check(const LossConfig& loss, int instances, double tolerance, std::uint64_t seed);

}  // namespace subco
