#pragma once

// Hand-constructed scenes with known metric values and tracker behaviour.

#include "subco/data.hpp"
#include "subco/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace subco::fixture {

inline Detection box_with_id(int frame, int id, double x, double y, double w = 20, double h = 20) {
    return Detection{frame, {x, y, w, h}, 1.0, 1, id};
}

struct Scene {
    std::vector<FrameDetections> gt;
    std::vector<FrameDetections> hyp;
};

/// Three frames, ten ground-truth boxes: one miss, one spurious box and one
/// identity switch, so MOTA = 1 - 3/10.
inline Scene mota_scene() {
    Scene s;
    s.gt = {{1, {box_with_id(1, 1, 0, 0), box_with_id(1, 2, 50, 0), box_with_id(1, 3, 100, 0), box_with_id(1, 4, 150, 0)}},
            {2, {box_with_id(2, 1, 2, 0), box_with_id(2, 2, 52, 0), box_with_id(2, 3, 102, 0)}},
            {3, {box_with_id(3, 1, 4, 0), box_with_id(3, 2, 54, 0), box_with_id(3, 3, 104, 0)}}};
    s.hyp = {{1, {box_with_id(1, 1, 0, 0), box_with_id(1, 2, 50, 0), box_with_id(1, 3, 100, 0), box_with_id(1, 4, 150, 0)}},
             {2, {box_with_id(2, 1, 2, 0), box_with_id(2, 2, 52, 0), box_with_id(2, 5, 300, 300)}},
             {3, {box_with_id(3, 1, 4, 0), box_with_id(3, 2, 54, 0), box_with_id(3, 7, 104, 0)}}};
    return s;
}

/// One object over `length` frames, tracked perfectly but labelled with hypothesis
/// id 1 for the first half and id 2 for the second half.
inline Scene split_scene(int length = 10) {
    Scene s;
    for (int t = 1; t <= length; ++t) {
        s.gt.push_back({t, {box_with_id(t, 1, 3.0 * t, 10)}});
        s.hyp.push_back({t, {box_with_id(t, t <= length / 2 ? 1 : 2, 3.0 * t, 10)}});
    }
    return s;
}

/// Two same-sized objects approach horizontally with a small vertical offset,
/// meet at frame `meet` and reverse direction. The rear object is hidden at the
/// meeting frame, so its detection is missing there. A constant-velocity motion
/// model carries each track past the turning point onto the other object.
struct CrossingScene {
    SequenceSample sample;
    std::vector<FrameDetections> ground_truth;
};

inline CrossingScene crossing_scene(std::uint64_t seed = 0) {
    constexpr int kMeet = 6;  // 0-based frame index where the objects coincide horizontally
    constexpr int kFrames = 2 * kMeet + 1;
    constexpr double kSpeed = 8.0, kSize = 32.0, kCenter = 80.0;
    constexpr double kFrontY = 40.0, kRearY = 48.0;
    const std::array<double, 3> front_rgb{200, 40, 40}, rear_rgb{40, 60, 200};
    Rng rng(seed);
    CrossingScene out;
    for (int t = 0; t < kFrames; ++t) {
        const int frame = t + 1;
        const double offset = kSpeed * std::abs(kMeet - t);
        const BBox front{kCenter - offset - kSize / 2, kFrontY, kSize, kSize};
        const BBox rear{kCenter + offset - kSize / 2, kRearY, kSize, kSize};
        RgbImage img(160, 120, 100);
        fill_rect(img, rear, rear_rgb);
        fill_rect(img, front, front_rgb);
        for (auto& p : img.pixels)
            p = static_cast<std::uint8_t>(std::clamp(p + rng.normal(0.0, 4.0), 0.0, 255.0));
        FrameDetections det{frame, {}};
        det.detections.push_back(Detection{frame, front, 0.9, 1, 1});
        if (t != kMeet) det.detections.push_back(Detection{frame, rear, 0.9, 1, 2});
        out.sample.frames.push_back(det);
        out.sample.images.push_back(std::move(img));
        out.ground_truth.push_back({frame, {Detection{frame, front, 1.0, 1, 1}, Detection{frame, rear, 1.0, 1, 2}}});
    }
    return out;
}

}  // namespace subco::fixture
