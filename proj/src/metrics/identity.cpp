#include "frames.hpp"
#include "subco/hungarian.hpp"
#include "subco/metrics.hpp"

namespace subco {

namespace {

void finalize(IdentityReport& r) {
    const double tp = static_cast<double>(r.idtp);
    r.idf1 = (2 * tp + r.idfp + r.idfn) > 0 ? 2 * tp / (2 * tp + r.idfp + r.idfn) : 0.0;
    r.idp = (tp + r.idfp) > 0 ? tp / (tp + r.idfp) : 0.0;
    r.idr = (tp + r.idfn) > 0 ? tp / (tp + r.idfn) : 0.0;
}

}  // namespace

IdentityReport evaluate_idf1(std::span<const FrameDetections> gt, std::span<const FrameDetections> hyp,
                             double iou_thresh) {
    const auto frames = detail::align(gt, hyp);
    detail::IdIndex gt_ids, hyp_ids;
    long gt_boxes = 0, hyp_boxes = 0;
    for (const auto& f : frames) {
        for (const auto& g : f.gt) gt_ids.index(g.id);
        for (const auto& h : f.hyp) hyp_ids.index(h.id);
        gt_boxes += static_cast<long>(f.gt.size());
        hyp_boxes += static_cast<long>(f.hyp.size());
    }

    Eigen::MatrixXd overlap_count = Eigen::MatrixXd::Zero(gt_ids.size(), hyp_ids.size());
    for (const auto& f : frames)
        for (const auto& g : f.gt)
            for (const auto& h : f.hyp)
                if (iou(g.box, h.box) >= iou_thresh) overlap_count(gt_ids.index(g.id), hyp_ids.index(h.id)) += 1.0;

    IdentityReport r;
    for (const auto& [i, j] : hungarian(-overlap_count)) r.idtp += static_cast<long>(overlap_count(i, j));
    r.idfn = gt_boxes - r.idtp;
    r.idfp = hyp_boxes - r.idtp;
    finalize(r);
    return r;
}

IdentityReport combine(const IdentityReport& a, const IdentityReport& b) {
    IdentityReport r;
    r.idtp = a.idtp + b.idtp;
    r.idfp = a.idfp + b.idfp;
    r.idfn = a.idfn + b.idfn;
    finalize(r);
    return r;
}

}  // namespace subco
