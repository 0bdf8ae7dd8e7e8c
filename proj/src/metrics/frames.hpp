#pragma once

// Shared frame alignment for the metric implementations.

#include "subco/data.hpp"

#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace subco::detail {

struct IdBox {
    int id;
    BBox box;
};

struct AlignedFrame {
    int frame;
    std::vector<IdBox> gt;
    std::vector<IdBox> hyp;
};

inline std::vector<IdBox> with_ids(const std::vector<Detection>& dets, const char* side) {
    std::vector<IdBox> out;
    out.reserve(dets.size());
    for (const auto& d : dets) {
        if (!d.gt_track_id) throw std::invalid_argument(std::string(side) + " box in frame " + std::to_string(d.frame) + " has no id");
        out.push_back({*d.gt_track_id, d.box});
    }
    return out;
}

inline std::vector<AlignedFrame> align(std::span<const FrameDetections> gt, std::span<const FrameDetections> hyp) {
    std::map<int, AlignedFrame> frames;
    for (const auto& f : gt) {
        auto& slot = frames.try_emplace(f.frame, AlignedFrame{f.frame, {}, {}}).first->second;
        auto ids = with_ids(f.detections, "ground-truth");
        slot.gt.insert(slot.gt.end(), ids.begin(), ids.end());
    }
    for (const auto& f : hyp) {
        auto& slot = frames.try_emplace(f.frame, AlignedFrame{f.frame, {}, {}}).first->second;
        auto ids = with_ids(f.detections, "hypothesis");
        slot.hyp.insert(slot.hyp.end(), ids.begin(), ids.end());
    }
    std::vector<AlignedFrame> out;
    out.reserve(frames.size());
    for (auto& [_, f] : frames) out.push_back(std::move(f));
    return out;
}

// Dense index for arbitrary integer ids, in first-seen order.
class IdIndex {
public:
    int index(int id) {
        auto [it, inserted] = map_.try_emplace(id, static_cast<int>(map_.size()));
        return it->second;
    }
    int size() const { return static_cast<int>(map_.size()); }

private:
    std::map<int, int> map_;
};

}  // namespace subco::detail
