#include "subco/errors.hpp"
#include "subco/hungarian.hpp"
#include "subco/tracker.hpp"

#include <algorithm>
#include <cmath>

namespace subco {

std::string to_string(CostKind kind) {
    switch (kind) {
        case CostKind::iou: return "iou";
        case CostKind::reid: return "reid";
        case CostKind::combined: return "combined";
    }
    return "combined";
}

CostKind cost_kind_from_string(const std::string& name) {
    if (name == "iou") return CostKind::iou;
    if (name == "reid") return CostKind::reid;
    if (name == "combined") return CostKind::combined;
    throw ConfigError("unknown association cost '" + name + "' (expected iou, reid or combined)");
}

bool TrackerConfig::uses_reid() const {
    return stage_costs.first != CostKind::iou || stage_costs.second != CostKind::iou;
}

void TrackerConfig::validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(high_thresh) || !unit(low_thresh) || !unit(new_track_thresh) || !unit(match_iou_min) || !unit(ema_alpha))
        throw ConfigError("tracker thresholds and ema_alpha must lie in [0, 1]");
    if (!(low_thresh < high_thresh)) throw ConfigError("tracker low_thresh must be below high_thresh");
    if (!(omega_reid >= 0.0)) throw ConfigError("tracker omega_reid must be >= 0");
    if (!(reid_min_similarity >= -1.0 && reid_min_similarity <= 1.0))
        throw ConfigError("tracker reid_min_similarity must lie in [-1, 1]");
    if (max_age < 0) throw ConfigError("tracker max_age must be >= 0");
    if (min_hits < 1) throw ConfigError("tracker min_hits must be >= 1");
}

double cosine_similarity(const Vector& a, const Vector& b) {
    if (a.size() != b.size() || a.size() == 0) return 0.0;
    const double na = a.norm(), nb = b.norm();
    if (na <= 0.0 || nb <= 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

double combined_cost(const Track& track, const BBox& det_box, const Vector& det_embedding, double omega) {
    return iou(track.predicted_box(), det_box) + omega * cosine_similarity(track.reid_feature, det_embedding);
}

namespace {

Vector normalized(const Vector& v) {
    const double n = v.norm();
    return n > 0.0 ? Vector(v / n) : v;
}

// Matches tracks[track_idx] against detections det_idx with one stage cost;
// returns (track position, detection position) pairs into the index lists.
std::vector<MatchPair> associate(const std::vector<Track>& tracks, const std::vector<int>& track_idx,
                                 const FrameDetections& frame, const EmbeddingMatrix& emb,
                                 const std::vector<int>& det_idx, CostKind kind, const TrackerConfig& cfg) {
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(track_idx.size()), static_cast<Eigen::Index>(det_idx.size()));
    for (std::size_t a = 0; a < track_idx.size(); ++a) {
        const Track& t = tracks[static_cast<std::size_t>(track_idx[a])];
        const BBox predicted = t.predicted_box();
        for (std::size_t b = 0; b < det_idx.size(); ++b) {
            const int j = det_idx[b];
            const BBox& box = frame.detections[static_cast<std::size_t>(j)].box;
            double sim = 0.0;
            bool allowed = true;
            if (kind == CostKind::iou || kind == CostKind::combined) {
                const double overlap = iou(predicted, box);
                allowed = overlap >= cfg.match_iou_min;
                sim = overlap;
                if (kind == CostKind::combined) sim += cfg.omega_reid * cosine_similarity(t.reid_feature, emb.rows.row(j).transpose());
            } else {
                sim = cosine_similarity(t.reid_feature, emb.rows.row(j).transpose());
                allowed = sim >= cfg.reid_min_similarity;
            }
            cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = allowed ? -sim : kForbidden;
        }
    }
    return hungarian(cost);
}

}  // namespace

StepResult byte_step(TrackerState state, const FrameDetections& frame, const EmbeddingMatrix& emb,
                     const TrackerConfig& cfg, const KalmanNoise& noise) {
    cfg.validate();
    const bool reid = cfg.uses_reid();
    if (emb.count() != static_cast<Eigen::Index>(frame.size()))
        throw DimensionError("byte_step: " + std::to_string(emb.count()) + " embeddings for " +
                             std::to_string(frame.size()) + " detections");
    if (reid && frame.size() > 0 && emb.rows.cols() == 0)
        throw DimensionError("byte_step: ReID association requested but embeddings are empty");

    ++state.frames_seen;
    const int frame_no = frame.frame;
    auto& tracks = state.tracks;

    std::vector<int> high, low;
    for (int j = 0; j < static_cast<int>(frame.size()); ++j) {
        const double c = frame.detections[static_cast<std::size_t>(j)].confidence;
        if (c >= cfg.high_thresh)
            high.push_back(j);
        else if (c >= cfg.low_thresh)
            low.push_back(j);
    }

    for (auto& t : tracks) {
        if (t.status == TrackStatus::lost) t.state.mean[7] = 0.0;
        t.state = kalman_predict(t.state, noise);
    }

    std::vector<int> pool(tracks.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) pool[i] = static_cast<int>(i);
    std::vector<char> track_matched(tracks.size(), 0);
    std::vector<char> det_matched(frame.size(), 0);

    auto apply = [&](const std::vector<MatchPair>& pairs, const std::vector<int>& tr, const std::vector<int>& dets) {
        for (const auto& [a, b] : pairs) {
            Track& t = tracks[static_cast<std::size_t>(tr[static_cast<std::size_t>(a)])];
            const int j = dets[static_cast<std::size_t>(b)];
            const Detection& d = frame.detections[static_cast<std::size_t>(j)];
            t.state = kalman_update(t.state, d.box, noise);
            if (emb.rows.cols() > 0) {
                const Vector x = emb.rows.row(j).transpose();
                t.reid_feature = t.reid_feature.size() == x.size()
                                     ? normalized((1.0 - cfg.ema_alpha) * t.reid_feature + cfg.ema_alpha * x)
                                     : normalized(x);
            }
            t.age = 0;
            ++t.hits;
            t.confidence = d.confidence;
            if (t.status == TrackStatus::lost || (t.status == TrackStatus::tentative && t.hits >= cfg.min_hits))
                t.status = TrackStatus::confirmed;
            t.box_history.emplace_back(frame_no, t.state.box());
            track_matched[static_cast<std::size_t>(tr[static_cast<std::size_t>(a)])] = 1;
            det_matched[static_cast<std::size_t>(j)] = 1;
        }
    };

    apply(associate(tracks, pool, frame, emb, high, cfg.stage_costs.first, cfg), pool, high);

    std::vector<int> remaining;
    for (int i : pool)
        if (!track_matched[static_cast<std::size_t>(i)]) remaining.push_back(i);
    apply(associate(tracks, remaining, frame, emb, low, cfg.stage_costs.second, cfg), remaining, low);

    for (std::size_t i = 0; i < tracks.size(); ++i) {
        if (track_matched[i]) continue;
        Track& t = tracks[i];
        ++t.age;
        if (t.status == TrackStatus::tentative || t.age > cfg.max_age)
            t.status = TrackStatus::removed;
        else
            t.status = TrackStatus::lost;
    }
    std::erase_if(tracks, [](const Track& t) { return t.status == TrackStatus::removed; });

    for (int j : high) {
        if (det_matched[static_cast<std::size_t>(j)]) continue;
        const Detection& d = frame.detections[static_cast<std::size_t>(j)];
        if (d.confidence < cfg.new_track_thresh) continue;
        Track t;
        t.id = state.next_id++;
        t.state = kalman_initiate(d.box, noise);
        if (emb.rows.cols() > 0) t.reid_feature = normalized(emb.rows.row(j).transpose());
        t.hits = 1;
        t.confidence = d.confidence;
        t.status = (state.frames_seen == 1 || cfg.min_hits <= 1) ? TrackStatus::confirmed : TrackStatus::tentative;
        t.box_history.emplace_back(frame_no, d.box);
        tracks.push_back(std::move(t));
    }

    StepResult out;
    for (const auto& t : tracks) {
        if (t.status != TrackStatus::confirmed || t.age != 0) continue;
        out.rows.push_back(ResultRow{frame_no, t.id, t.box_history.back().second, t.confidence});
    }
    out.state = std::move(state);
    return out;
}

ByteTracker::ByteTracker(TrackerConfig cfg, KalmanNoise noise) : cfg_(std::move(cfg)), noise_(noise) { cfg_.validate(); }

std::vector<ResultRow> ByteTracker::step(const FrameDetections& frame, const EmbeddingMatrix& embeddings) {
    StepResult r = byte_step(std::move(state_), frame, embeddings, cfg_, noise_);
    state_ = std::move(r.state);
    return std::move(r.rows);
}

std::vector<ResultRow> track_sequence(const SequenceSample& sample, const EmbedderParams& params,
                                      const TrackerConfig& cfg) {
    validate_sample(sample);
    const bool reid = cfg.uses_reid();
    if (reid && !sample.has_images()) throw ConfigError("ReID tracking needs frame images");
    ByteTracker tracker(cfg);
    std::vector<ResultRow> rows;
    for (std::size_t t = 0; t < sample.length(); ++t) {
        const auto& frame = sample.frames[t];
        EmbeddingMatrix emb{Matrix(static_cast<Eigen::Index>(frame.size()), 0), frame.frame};
        if (reid) emb = embed(params, extract_crops(sample.images[t], frame, params.shape.patch), frame.frame);
        auto step_rows = tracker.step(frame, emb);
        rows.insert(rows.end(), step_rows.begin(), step_rows.end());
    }
    return rows;
}

std::vector<ResultRow> track_sequence(const SequenceSample& sample, const TrackerConfig& cfg) {
    if (cfg.uses_reid()) throw ConfigError("track_sequence without an embedder supports IoU association only");
    validate_sample(sample);
    ByteTracker tracker(cfg);
    std::vector<ResultRow> rows;
    for (const auto& frame : sample.frames) {
        auto step_rows = tracker.step(frame, EmbeddingMatrix{Matrix(static_cast<Eigen::Index>(frame.size()), 0), frame.frame});
        rows.insert(rows.end(), step_rows.begin(), step_rows.end());
    }
    return rows;
}

}  // namespace subco
