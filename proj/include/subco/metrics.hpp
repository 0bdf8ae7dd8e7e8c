#pragma once

#include "subco/data.hpp"

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace subco {

// Inputs are per-frame box lists whose Detection::gt_track_id holds the
// identity (ground-truth id or hypothesis track id). Frames may be sparse;
// missing frames count as empty. A box without an id is rejected.

struct FrameMatchLog {
    int frame = 0;
    std::vector<std::pair<int, int>> matches;  // (gt id, hypothesis id)
    int fp = 0;
    int fn = 0;
    int idsw = 0;
};

struct ClearReport {
    double mota = 0.0;
    double motp = 0.0;  // mean IoU over matches
    long fp = 0;
    long fn = 0;
    long idsw = 0;
    long matches = 0;
    long gt_total = 0;
    int mt = 0;
    int pt = 0;
    int ml = 0;
    int gt_trajectories = 0;
    double iou_sum = 0.0;
    std::vector<FrameMatchLog> frames;
};

/// CLEAR-MOT: correspondences from the previous frame are kept while their
/// IoU stays >= iou_thresh, the rest is matched by Hungarian on IoU; an
/// identity switch is counted when a ground-truth track's hypothesis id
/// differs from the one it was last matched to. MT >= 80% coverage, ML < 20%.
ClearReport evaluate_clear(std::span<const FrameDetections> gt, std::span<const FrameDetections> hyp,
                           double iou_thresh = 0.5);

struct IdentityReport {
    double idf1 = 0.0;
    double idp = 0.0;
    double idr = 0.0;
    long idtp = 0;
    long idfp = 0;
    long idfn = 0;
};

/// Global one-to-one matching of ground-truth ids to hypothesis ids maximizing
/// the number of frames where the pair overlaps with IoU >= iou_thresh.
IdentityReport evaluate_idf1(std::span<const FrameDetections> gt, std::span<const FrameDetections> hyp,
                             double iou_thresh = 0.5);

inline constexpr int kHotaAlphaCount = 19;

struct HotaReport {
    double hota = 0.0;
    double deta = 0.0;
    double assa = 0.0;
    double loca = 0.0;
    std::array<double, kHotaAlphaCount> alpha{};
    std::array<double, kHotaAlphaCount> hota_curve{};
    std::array<double, kHotaAlphaCount> deta_curve{};
    std::array<double, kHotaAlphaCount> assa_curve{};
    std::array<double, kHotaAlphaCount> loca_curve{};
    // Raw sums kept so several sequences can be merged before taking ratios.
    std::array<long, kHotaAlphaCount> tp{};
    std::array<long, kHotaAlphaCount> fn{};
    std::array<long, kHotaAlphaCount> fp{};
    std::array<double, kHotaAlphaCount> assa_sum{};  // AssA(alpha) * TP(alpha)
    std::array<double, kHotaAlphaCount> loca_sum{};  // summed IoU of TPs
};

std::array<double, kHotaAlphaCount> hota_alphas();

/// Single-class HOTA over alpha = 0.05, 0.10, ..., 0.95.
HotaReport evaluate_hota(std::span<const FrameDetections> gt, std::span<const FrameDetections> hyp);

struct MetricReport {
    ClearReport clear;
    IdentityReport identity;
    HotaReport hota;
};

MetricReport evaluate_all(std::span<const FrameDetections> gt, std::span<const FrameDetections> hyp,
                          double iou_thresh = 0.5);

// Merging sums counts first and recomputes ratios afterwards.
ClearReport combine(const ClearReport& a, const ClearReport& b);
IdentityReport combine(const IdentityReport& a, const IdentityReport& b);
HotaReport combine(const HotaReport& a, const HotaReport& b);
MetricReport combine(const MetricReport& a, const MetricReport& b);

std::string format_report_table(const MetricReport& report);
std::string report_to_json(const MetricReport& report);

}  // namespace subco
