#include "subco/data.hpp"
#include "subco/errors.hpp"

#include <algorithm>
#include <map>

namespace subco {

double intersection_area(const BBox& a, const BBox& b) {
    const double w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const double h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

double iou(const BBox& a, const BBox& b) {
    const double inter = intersection_area(a, b);
    if (inter <= 0.0) return 0.0;
    return inter / (a.area() + b.area() - inter);
}

void validate_sample(const SequenceSample& sample) {
    for (std::size_t t = 0; t < sample.frames.size(); ++t) {
        const auto& f = sample.frames[t];
        if (t > 0 && f.frame <= sample.frames[t - 1].frame)
            throw ConfigError("sequence frame indices must be strictly increasing");
        for (const auto& d : f.detections)
            if (d.frame != f.frame) throw ConfigError("detection frame index differs from its frame");
    }
    if (sample.has_images() && sample.images.size() != sample.frames.size())
        throw ConfigError("sequence has " + std::to_string(sample.images.size()) + " images for " +
                          std::to_string(sample.frames.size()) + " frames");
}

std::vector<FrameDetections> filter_by_confidence(std::span<const FrameDetections> frames, double threshold) {
    std::vector<FrameDetections> out;
    out.reserve(frames.size());
    for (const auto& f : frames) {
        FrameDetections kept{f.frame, {}};
        std::copy_if(f.detections.begin(), f.detections.end(), std::back_inserter(kept.detections),
                     [threshold](const Detection& d) { return d.confidence >= threshold; });
        out.push_back(std::move(kept));
    }
    return out;
}

std::vector<FrameDetections> rows_to_frames(std::span<const ResultRow> rows) {
    std::map<int, FrameDetections> by_frame;
    for (const auto& r : rows) {
        auto& f = by_frame[r.frame];
        f.frame = r.frame;
        f.detections.push_back(Detection{r.frame, r.box, r.confidence, 1, r.track_id});
    }
    std::vector<FrameDetections> out;
    out.reserve(by_frame.size());
    for (auto& [_, f] : by_frame) out.push_back(std::move(f));
    return out;
}

std::vector<ResultRow> frames_to_rows(std::span<const FrameDetections> frames) {
    std::vector<ResultRow> rows;
    for (const auto& f : frames)
        for (const auto& d : f.detections)
            rows.push_back(ResultRow{d.frame, d.gt_track_id.value_or(-1), d.box, d.confidence});
    return rows;
}

std::vector<FrameDetections> densify_frames(std::span<const FrameDetections> frames, int first, int last) {
    std::vector<FrameDetections> out;
    if (last < first) return out;
    out.reserve(static_cast<std::size_t>(last - first + 1));
    for (int t = first; t <= last; ++t) out.push_back(FrameDetections{t, {}});
    for (const auto& f : frames) {
        if (f.frame < first || f.frame > last) continue;
        auto& slot = out[static_cast<std::size_t>(f.frame - first)].detections;
        slot.insert(slot.end(), f.detections.begin(), f.detections.end());
    }
    return out;
}

}  // namespace subco
