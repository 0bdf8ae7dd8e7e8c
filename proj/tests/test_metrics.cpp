#include "subco/metrics.hpp"
#include "subco/random.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace subco;

namespace {

std::vector<FrameDetections> random_gt(Rng& rng, int frames, int objects) {
    std::vector<FrameDetections> out;
    std::vector<double> x(static_cast<std::size_t>(objects)), y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] = 60.0 * static_cast<double>(k);
        y[k] = rng.uniform(0, 100);
    }
    for (int t = 1; t <= frames; ++t) {
        FrameDetections f{t, {}};
        for (int k = 0; k < objects; ++k) {
            x[static_cast<std::size_t>(k)] += rng.uniform(-2, 2);
            if (rng.bernoulli(0.9)) f.detections.push_back(fixture::box_with_id(t, k + 1, x[static_cast<std::size_t>(k)], y[static_cast<std::size_t>(k)], 30, 30));
        }
        out.push_back(f);
    }
    return out;
}

// Perturbed copy of gt: jittered boxes, occasional misses, spurious boxes.
std::vector<FrameDetections> noisy_hyp(const std::vector<FrameDetections>& gt, Rng& rng) {
    std::vector<FrameDetections> out;
    for (const auto& f : gt) {
        FrameDetections h{f.frame, {}};
        for (const auto& d : f.detections) {
            if (rng.bernoulli(0.1)) continue;
            auto e = d;
            e.box.x += rng.normal(0, 3);
            e.box.y += rng.normal(0, 3);
            e.gt_track_id = *d.gt_track_id + 100 * (f.frame > 10 && *d.gt_track_id == 1 ? 1 : 0);
            h.detections.push_back(e);
        }
        if (rng.bernoulli(0.3)) h.detections.push_back(fixture::box_with_id(f.frame, 999, rng.uniform(0, 300), 200, 30, 30));
        out.push_back(h);
    }
    return out;
}

std::vector<FrameDetections> relabel(const std::vector<FrameDetections>& frames, const std::map<int, int>& ids) {
    auto out = frames;
    for (auto& f : out)
        for (auto& d : f.detections) d.gt_track_id = ids.at(*d.gt_track_id);
    return out;
}

}  // namespace

TEST(Clear, PerfectResults) {
    const auto s = fixture::split_scene();
    const auto r = evaluate_clear(s.gt, s.gt);
    EXPECT_EQ(r.mota, 1.0);
    EXPECT_EQ(r.idsw, 0);
    EXPECT_EQ(r.mt, 1);
    EXPECT_EQ(r.motp, 1.0);
}

TEST(Clear, HandCountedScene) {
    const auto s = fixture::mota_scene();
    const auto r = evaluate_clear(s.gt, s.hyp);
    EXPECT_EQ(r.gt_total, 10);
    EXPECT_EQ(r.fn, 1);
    EXPECT_EQ(r.fp, 1);
    EXPECT_EQ(r.idsw, 1);
    EXPECT_EQ(r.matches, 9);
    EXPECT_DOUBLE_EQ(r.mota, 0.7);
    ASSERT_EQ(r.frames.size(), 3u);
    EXPECT_EQ(r.frames[1].fn, 1);
    EXPECT_EQ(r.frames[1].fp, 1);
    EXPECT_EQ(r.frames[2].idsw, 1);
    EXPECT_EQ(r.gt_trajectories, 4);
    EXPECT_EQ(r.mt, 3);  // object 3 is covered in 2 of 3 frames, object 4 in 1 of 1
    EXPECT_LE(r.mt + r.ml, r.gt_trajectories);
}

TEST(Clear, EmptyResults) {
    const auto s = fixture::mota_scene();
    const auto r = evaluate_clear(s.gt, {});
    EXPECT_EQ(r.fn, r.gt_total);
    EXPECT_EQ(r.mota, 0.0);
    EXPECT_EQ(r.ml, 4);
}

TEST(Clear, NoGroundTruthGivesUndefinedMota) {
    const auto s = fixture::mota_scene();
    const auto r = evaluate_clear({}, s.hyp);
    EXPECT_EQ(r.fp, 10);
    EXPECT_TRUE(std::isnan(r.mota));
}

TEST(Clear, ContinuityKeepsPreviousCorrespondence) {
    // Hypothesis 2 drifts onto gt 1 in frame 2 while hypothesis 1 still
    // overlaps enough: the earlier pairing is kept, no switch.
    std::vector<FrameDetections> gt{{1, {fixture::box_with_id(1, 1, 0, 0)}}, {2, {fixture::box_with_id(2, 1, 0, 0)}}};
    std::vector<FrameDetections> hyp{{1, {fixture::box_with_id(1, 1, 0, 0)}},
                                     {2, {fixture::box_with_id(2, 1, 5, 0), fixture::box_with_id(2, 2, 0, 0)}}};
    const auto r = evaluate_clear(gt, hyp);
    EXPECT_EQ(r.idsw, 0);
    EXPECT_EQ(r.fp, 1);
}

TEST(Clear, ExtraFalsePositiveNeverRaisesMota) {
    Rng rng(3);
    const auto gt = random_gt(rng, 20, 4);
    auto hyp = noisy_hyp(gt, rng);
    const double before = evaluate_clear(gt, hyp).mota;
    hyp[5].detections.push_back(fixture::box_with_id(6, 555, 500, 500));
    EXPECT_LE(evaluate_clear(gt, hyp).mota, before);
}

TEST(Identity, PerfectAndEmpty) {
    const auto s = fixture::split_scene();
    EXPECT_EQ(evaluate_idf1(s.gt, s.gt).idf1, 1.0);
    EXPECT_EQ(evaluate_idf1(s.gt, {}).idf1, 0.0);
}

TEST(Identity, EvenSplitGivesOneHalf) {
    const auto s = fixture::split_scene();
    const auto r = evaluate_idf1(s.gt, s.hyp);
    EXPECT_EQ(r.idtp, 5);
    EXPECT_EQ(r.idfp, 5);
    EXPECT_EQ(r.idfn, 5);
    EXPECT_DOUBLE_EQ(r.idf1, 0.5);
}

TEST(Hota, PerfectResults) {
    const auto s = fixture::split_scene();
    const auto r = evaluate_hota(s.gt, s.gt);
    EXPECT_DOUBLE_EQ(r.hota, 1.0);
    EXPECT_DOUBLE_EQ(r.deta, 1.0);
    EXPECT_DOUBLE_EQ(r.assa, 1.0);
    for (int a = 0; a < kHotaAlphaCount; ++a) EXPECT_DOUBLE_EQ(r.hota_curve[static_cast<std::size_t>(a)], 1.0);
}

TEST(Hota, SingleSwapHalfway) {
    const auto s = fixture::split_scene();
    const auto r = evaluate_hota(s.gt, s.hyp);
    EXPECT_DOUBLE_EQ(r.deta, 1.0);
    EXPECT_DOUBLE_EQ(r.assa, 0.5);
    EXPECT_DOUBLE_EQ(r.hota, std::sqrt(0.5));
    EXPECT_DOUBLE_EQ(r.loca, 1.0);
}

TEST(Hota, EmptyResults) {
    const auto s = fixture::split_scene();
    EXPECT_EQ(evaluate_hota(s.gt, {}).hota, 0.0);
}

TEST(Hota, AlphaGrid) {
    const auto a = hota_alphas();
    EXPECT_DOUBLE_EQ(a.front(), 0.05);
    EXPECT_NEAR(a.back(), 0.95, 1e-12);
}

TEST(Hota, CurveIsGeometricMeanPerAlpha) {
    Rng rng(8);
    const auto gt = random_gt(rng, 20, 4);
    const auto r = evaluate_hota(gt, noisy_hyp(gt, rng));
    for (std::size_t a = 0; a < kHotaAlphaCount; ++a)
        EXPECT_NEAR(r.hota_curve[a], std::sqrt(r.deta_curve[a] * r.assa_curve[a]), 1e-12);
    EXPECT_GT(r.hota, 0.0);
    EXPECT_LT(r.hota, 1.0);
}

TEST(Metrics, InvariantUnderHypothesisRelabeling) {
    Rng rng(9);
    const auto gt = random_gt(rng, 25, 5);
    const auto hyp = noisy_hyp(gt, rng);
    std::map<int, int> ids;
    int next = 40;
    for (const auto& f : hyp)
        for (const auto& d : f.detections)
            if (!ids.count(*d.gt_track_id)) ids[*d.gt_track_id] = next--;
    const auto a = evaluate_all(gt, hyp);
    const auto b = evaluate_all(gt, relabel(hyp, ids));
    EXPECT_EQ(a.clear.mota, b.clear.mota);
    EXPECT_EQ(a.clear.idsw, b.clear.idsw);
    EXPECT_EQ(a.identity.idf1, b.identity.idf1);
    EXPECT_NEAR(a.hota.hota, b.hota.hota, 1e-12);
}

TEST(Metrics, ExtraSwapNeverRaisesIdentityScores) {
    Rng rng(10);
    const auto gt = random_gt(rng, 30, 3);
    auto hyp = gt;
    const auto base = evaluate_all(gt, hyp);
    for (auto& f : hyp)
        for (auto& d : f.detections)
            if (f.frame > 15 && *d.gt_track_id == 2) d.gt_track_id = 77;
    const auto swapped = evaluate_all(gt, hyp);
    EXPECT_LE(swapped.identity.idf1, base.identity.idf1);
    EXPECT_LE(swapped.hota.assa, base.hota.assa);
    EXPECT_EQ(swapped.clear.idsw, 1);
}

TEST(Metrics, CombineSumsCounts) {
    const auto s1 = fixture::mota_scene();
    const auto s2 = fixture::split_scene();
    const auto a = evaluate_all(s1.gt, s1.hyp);
    const auto b = evaluate_all(s2.gt, s2.hyp);
    const auto c = combine(a, b);
    EXPECT_EQ(c.clear.gt_total, 20);
    EXPECT_EQ(c.clear.fp + c.clear.fn + c.clear.idsw, 3 + b.clear.fp + b.clear.fn + b.clear.idsw);
    EXPECT_DOUBLE_EQ(c.clear.mota, 1.0 - static_cast<double>(c.clear.fp + c.clear.fn + c.clear.idsw) / 20.0);
    EXPECT_EQ(c.identity.idtp, a.identity.idtp + b.identity.idtp);
    EXPECT_EQ(c.hota.tp[0], a.hota.tp[0] + b.hota.tp[0]);
}

TEST(Metrics, BoxWithoutIdIsRejected) {
    std::vector<FrameDetections> gt{{1, {Detection{1, {0, 0, 5, 5}, 1.0}}}};
    EXPECT_THROW(evaluate_clear(gt, gt), std::invalid_argument);
}

TEST(Metrics, ReportFormatsMentionEveryMetric) {
    const auto s = fixture::mota_scene();
    const auto r = evaluate_all(s.gt, s.hyp);
    const auto text = format_report_table(r);
    for (const char* key : {"MOTA", "IDF1", "HOTA", "AssA", "IDSw"}) EXPECT_NE(text.find(key), std::string::npos) << key;
    const auto json = report_to_json(r);
    EXPECT_NE(json.find("\"idsw\""), std::string::npos);
}
