#include "frames.hpp"
#include "subco/hungarian.hpp"
#include "subco/metrics.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace subco {

namespace {

void finalize(ClearReport& r) {
    r.mota = r.gt_total > 0 ? 1.0 - static_cast<double>(r.fp + r.fn + r.idsw) / static_cast<double>(r.gt_total)
                            : std::numeric_limits<double>::quiet_NaN();
    r.motp = r.matches > 0 ? r.iou_sum / static_cast<double>(r.matches) : 0.0;
}

}  // namespace

ClearReport evaluate_clear(std::span<const FrameDetections> gt, std::span<const FrameDetections> hyp,
                           double iou_thresh) {
    const auto frames = detail::align(gt, hyp);
    ClearReport r;
    std::map<int, int> last_match;  // gt id -> hypothesis id it was last matched to
    std::map<int, std::pair<int, int>> coverage;  // gt id -> (frames present, frames matched)

    for (const auto& f : frames) {
        FrameMatchLog log;
        log.frame = f.frame;
        const auto n_gt = static_cast<Eigen::Index>(f.gt.size());
        const auto n_hyp = static_cast<Eigen::Index>(f.hyp.size());
        Eigen::MatrixXd overlap(n_gt, n_hyp);
        for (Eigen::Index i = 0; i < n_gt; ++i)
            for (Eigen::Index j = 0; j < n_hyp; ++j) overlap(i, j) = iou(f.gt[i].box, f.hyp[j].box);

        std::vector<int> gt_to_hyp(f.gt.size(), -1);
        std::vector<char> hyp_used(f.hyp.size(), 0);

        // Continuity: keep last frame's correspondence if it is still valid.
        for (Eigen::Index i = 0; i < n_gt; ++i) {
            const auto it = last_match.find(f.gt[i].id);
            if (it == last_match.end()) continue;
            for (Eigen::Index j = 0; j < n_hyp; ++j) {
                if (hyp_used[j] || f.hyp[j].id != it->second || overlap(i, j) < iou_thresh) continue;
                gt_to_hyp[i] = static_cast<int>(j);
                hyp_used[j] = 1;
                break;
            }
        }

        std::vector<int> free_gt, free_hyp;
        for (Eigen::Index i = 0; i < n_gt; ++i)
            if (gt_to_hyp[i] < 0) free_gt.push_back(static_cast<int>(i));
        for (Eigen::Index j = 0; j < n_hyp; ++j)
            if (!hyp_used[j]) free_hyp.push_back(static_cast<int>(j));
        Eigen::MatrixXd cost(free_gt.size(), free_hyp.size());
        for (std::size_t a = 0; a < free_gt.size(); ++a)
            for (std::size_t b = 0; b < free_hyp.size(); ++b) {
                const double o = overlap(free_gt[a], free_hyp[b]);
                cost(a, b) = o >= iou_thresh ? 1.0 - o : kForbidden;
            }
        for (const auto& [a, b] : hungarian(cost)) {
            const int i = free_gt[static_cast<std::size_t>(a)];
            const int j = free_hyp[static_cast<std::size_t>(b)];
            gt_to_hyp[i] = j;
            hyp_used[j] = 1;
            const auto it = last_match.find(f.gt[i].id);
            if (it != last_match.end() && it->second != f.hyp[j].id) ++log.idsw;
        }

        for (Eigen::Index i = 0; i < n_gt; ++i) {
            auto& cov = coverage[f.gt[i].id];
            ++cov.first;
            const int j = gt_to_hyp[i];
            if (j < 0) {
                ++log.fn;
                continue;
            }
            ++cov.second;
            last_match[f.gt[i].id] = f.hyp[j].id;
            log.matches.emplace_back(f.gt[i].id, f.hyp[j].id);
            r.iou_sum += overlap(i, j);
        }
        for (Eigen::Index j = 0; j < n_hyp; ++j)
            if (!hyp_used[j]) ++log.fp;

        r.fp += log.fp;
        r.fn += log.fn;
        r.idsw += log.idsw;
        r.matches += static_cast<long>(log.matches.size());
        r.gt_total += n_gt;
        r.frames.push_back(std::move(log));
    }

    for (const auto& [_, cov] : coverage) {
        const double ratio = static_cast<double>(cov.second) / cov.first;
        if (ratio >= 0.8)
            ++r.mt;
        else if (ratio < 0.2)
            ++r.ml;
        else
            ++r.pt;
    }
    r.gt_trajectories = static_cast<int>(coverage.size());
    finalize(r);
    return r;
}

ClearReport combine(const ClearReport& a, const ClearReport& b) {
    ClearReport r;
    r.fp = a.fp + b.fp;
    r.fn = a.fn + b.fn;
    r.idsw = a.idsw + b.idsw;
    r.matches = a.matches + b.matches;
    r.gt_total = a.gt_total + b.gt_total;
    r.mt = a.mt + b.mt;
    r.pt = a.pt + b.pt;
    r.ml = a.ml + b.ml;
    r.gt_trajectories = a.gt_trajectories + b.gt_trajectories;
    r.iou_sum = a.iou_sum + b.iou_sum;
    finalize(r);
    return r;
}

}  // namespace subco
