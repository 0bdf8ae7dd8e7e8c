#include "frames.hpp"
#include "subco/hungarian.hpp"
#include "subco/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace subco {

namespace {

constexpr double kEps = 1e-10;

void finalize(HotaReport& r) {
    r.alpha = hota_alphas();
    double hota = 0, deta = 0, assa = 0, loca = 0;
    for (int a = 0; a < kHotaAlphaCount; ++a) {
        const double tp = static_cast<double>(r.tp[a]);
        r.deta_curve[a] = tp / std::max(1.0, tp + r.fn[a] + r.fp[a]);
        r.assa_curve[a] = r.assa_sum[a] / std::max(1.0, tp);
        r.loca_curve[a] = std::max(kEps, r.loca_sum[a]) / std::max(kEps, tp);
        r.hota_curve[a] = std::sqrt(r.deta_curve[a] * r.assa_curve[a]);
        hota += r.hota_curve[a];
        deta += r.deta_curve[a];
        assa += r.assa_curve[a];
        loca += r.loca_curve[a];
    }
    r.hota = hota / kHotaAlphaCount;
    r.deta = deta / kHotaAlphaCount;
    r.assa = assa / kHotaAlphaCount;
    r.loca = loca / kHotaAlphaCount;
}

}  // namespace

std::array<double, kHotaAlphaCount> hota_alphas() {
    std::array<double, kHotaAlphaCount> a{};
    for (int i = 0; i < kHotaAlphaCount; ++i) a[i] = 0.05 * (i + 1);
    return a;
}

HotaReport evaluate_hota(std::span<const FrameDetections> gt, std::span<const FrameDetections> hyp) {
    const auto frames = detail::align(gt, hyp);
    const auto alphas = hota_alphas();
    detail::IdIndex gt_index, hyp_index;
    for (const auto& f : frames) {
        for (const auto& g : f.gt) gt_index.index(g.id);
        for (const auto& h : f.hyp) hyp_index.index(h.id);
    }
    const int n_gt_ids = gt_index.size();
    const int n_hyp_ids = hyp_index.size();

    // Per frame IoU matrices with dense id indices.
    struct FrameData {
        std::vector<int> gt;
        std::vector<int> hyp;
        Eigen::MatrixXd sim;
    };
    std::vector<FrameData> data;
    data.reserve(frames.size());
    for (const auto& f : frames) {
        FrameData d;
        for (const auto& g : f.gt) d.gt.push_back(gt_index.index(g.id));
        for (const auto& h : f.hyp) d.hyp.push_back(hyp_index.index(h.id));
        d.sim.resize(static_cast<Eigen::Index>(f.gt.size()), static_cast<Eigen::Index>(f.hyp.size()));
        for (std::size_t i = 0; i < f.gt.size(); ++i)
            for (std::size_t j = 0; j < f.hyp.size(); ++j) d.sim(i, j) = iou(f.gt[i].box, f.hyp[j].box);
        data.push_back(std::move(d));
    }

    // Global alignment score between every gt id and hypothesis id.
    Eigen::MatrixXd potential = Eigen::MatrixXd::Zero(n_gt_ids, n_hyp_ids);
    Eigen::VectorXd gt_count = Eigen::VectorXd::Zero(n_gt_ids);
    Eigen::VectorXd hyp_count = Eigen::VectorXd::Zero(n_hyp_ids);
    for (const auto& d : data) {
        const Eigen::VectorXd row_sum = d.sim.rowwise().sum();
        const Eigen::RowVectorXd col_sum = d.sim.colwise().sum();
        for (Eigen::Index i = 0; i < d.sim.rows(); ++i)
            for (Eigen::Index j = 0; j < d.sim.cols(); ++j) {
                const double denom = row_sum[i] + col_sum[j] - d.sim(i, j);
                if (denom > kEps) potential(d.gt[i], d.hyp[j]) += d.sim(i, j) / denom;
            }
        for (int g : d.gt) gt_count[g] += 1;
        for (int h : d.hyp) hyp_count[h] += 1;
    }
    Eigen::MatrixXd global(n_gt_ids, n_hyp_ids);
    for (int i = 0; i < n_gt_ids; ++i)
        for (int j = 0; j < n_hyp_ids; ++j) {
            const double denom = gt_count[i] + hyp_count[j] - potential(i, j);
            global(i, j) = denom > 0 ? potential(i, j) / denom : 0.0;
        }

    HotaReport r;
    std::vector<Eigen::MatrixXd> match_counts(kHotaAlphaCount, Eigen::MatrixXd::Zero(n_gt_ids, n_hyp_ids));
    for (const auto& d : data) {
        const long n_g = static_cast<long>(d.gt.size());
        const long n_h = static_cast<long>(d.hyp.size());
        if (n_g == 0 || n_h == 0) {
            for (int a = 0; a < kHotaAlphaCount; ++a) {
                r.fn[a] += n_g;
                r.fp[a] += n_h;
            }
            continue;
        }
        Eigen::MatrixXd cost(d.sim.rows(), d.sim.cols());
        for (Eigen::Index i = 0; i < d.sim.rows(); ++i)
            for (Eigen::Index j = 0; j < d.sim.cols(); ++j) cost(i, j) = -global(d.gt[i], d.hyp[j]) * d.sim(i, j);
        const auto pairs = hungarian(cost);
        for (int a = 0; a < kHotaAlphaCount; ++a) {
            long matched = 0;
            for (const auto& [i, j] : pairs) {
                if (d.sim(i, j) < alphas[a] - kEps) continue;
                ++matched;
                r.loca_sum[a] += d.sim(i, j);
                match_counts[a](d.gt[i], d.hyp[j]) += 1;
            }
            r.tp[a] += matched;
            r.fn[a] += n_g - matched;
            r.fp[a] += n_h - matched;
        }
    }

    for (int a = 0; a < kHotaAlphaCount; ++a) {
        const auto& mc = match_counts[a];
        double assa = 0.0;
        for (int i = 0; i < n_gt_ids; ++i)
            for (int j = 0; j < n_hyp_ids; ++j) {
                if (mc(i, j) <= 0) continue;
                const double denom = std::max(1.0, gt_count[i] + hyp_count[j] - mc(i, j));
                assa += mc(i, j) * (mc(i, j) / denom);
            }
        r.assa_sum[a] = assa;  // equals AssA(alpha) * TP(alpha)
    }
    finalize(r);
    return r;
}

HotaReport combine(const HotaReport& a, const HotaReport& b) {
    HotaReport r;
    for (int i = 0; i < kHotaAlphaCount; ++i) {
        r.tp[i] = a.tp[i] + b.tp[i];
        r.fn[i] = a.fn[i] + b.fn[i];
        r.fp[i] = a.fp[i] + b.fp[i];
        r.assa_sum[i] = a.assa_sum[i] + b.assa_sum[i];
        r.loca_sum[i] = a.loca_sum[i] + b.loca_sum[i];
    }
    finalize(r);
    return r;
}

}  // namespace subco
