#include "subco/metrics.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>

namespace subco {

MetricReport evaluate_all(std::span<const FrameDetections> gt, std::span<const FrameDetections> hyp,
                          double iou_thresh) {
    return {evaluate_clear(gt, hyp, iou_thresh), evaluate_idf1(gt, hyp, iou_thresh), evaluate_hota(gt, hyp)};
}

MetricReport combine(const MetricReport& a, const MetricReport& b) {
    return {combine(a.clear, b.clear), combine(a.identity, b.identity), combine(a.hota, b.hota)};
}

std::string format_report_table(const MetricReport& r) {
    const auto& c = r.clear;
    const auto& i = r.identity;
    const auto& h = r.hota;
    std::string out;
    out += fmt::format("{:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>7} {:>7} {:>7} {:>5} {:>5} {:>7}\n", "HOTA", "DetA",
                       "AssA", "LocA", "MOTA", "IDF1", "FP", "FN", "IDSw", "MT", "ML", "GT");
    out += fmt::format("{:>8.4f} {:>8.4f} {:>8.4f} {:>8.4f} {:>8.4f} {:>8.4f} {:>7} {:>7} {:>7} {:>5} {:>5} {:>7}\n",
                       h.hota, h.deta, h.assa, h.loca, c.mota, i.idf1, c.fp, c.fn, c.idsw, c.mt, c.ml, c.gt_total);
    return out;
}

std::string report_to_json(const MetricReport& r) {
    using nlohmann::json;
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    const auto& c = r.clear;
    const auto& i = r.identity;
    const auto& h = r.hota;
    json j;
    j["clear"] = {{"mota", num(c.mota)}, {"motp", num(c.motp)}, {"fp", c.fp}, {"fn", c.fn}, {"idsw", c.idsw},
                  {"matches", c.matches}, {"gt_total", c.gt_total}, {"mt", c.mt}, {"pt", c.pt}, {"ml", c.ml},
                  {"gt_trajectories", c.gt_trajectories}};
    j["identity"] = {{"idf1", i.idf1}, {"idp", i.idp}, {"idr", i.idr}, {"idtp", i.idtp}, {"idfp", i.idfp},
                     {"idfn", i.idfn}};
    json curve = json::array();
    for (int a = 0; a < kHotaAlphaCount; ++a)
        curve.push_back({{"alpha", h.alpha[a]}, {"hota", h.hota_curve[a]}, {"deta", h.deta_curve[a]},
                         {"assa", h.assa_curve[a]}, {"loca", h.loca_curve[a]}, {"tp", h.tp[a]}, {"fn", h.fn[a]},
                         {"fp", h.fp[a]}});
    j["hota"] = {{"hota", h.hota}, {"deta", h.deta}, {"assa", h.assa}, {"loca", h.loca}, {"curve", curve}};
    return j.dump(2);
}

}  // namespace subco
