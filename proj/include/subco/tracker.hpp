#pragma once

#include "subco/data.hpp"
#include "subco/embedder.hpp"
#include "subco/kalman.hpp"

#include <string>
#include <utility>
#include <vector>

namespace subco {

enum class TrackStatus { tentative, confirmed, lost, removed };

/// Association score used by one BYTE stage.
enum class CostKind { iou, reid, combined };

std::string to_string(CostKind kind);
CostKind cost_kind_from_string(const std::string& name);

struct StageCosts {
    CostKind first = CostKind::combined;   // tracks vs high-confidence detections
    CostKind second = CostKind::combined;  // remaining tracks vs low-confidence detections

    friend bool operator==(const StageCosts&, const StageCosts&) = default;
};

struct TrackerConfig {
    double high_thresh = 0.6;
    double low_thresh = 0.1;
    double new_track_thresh = 0.7;
    double omega_reid = 0.5;
    double match_iou_min = 0.1;      // gate for stages whose cost includes IoU
    double reid_min_similarity = 0.6;  // gate for pure ReID stages
    int max_age = 30;
    double ema_alpha = 0.5;          // weight of the new embedding in the feature update
    int min_hits = 2;                // matches before a track is confirmed (frame 1 confirms immediately)
    StageCosts stage_costs;

    bool uses_reid() const;
    void validate() const;
};

struct Track {
    int id = 0;
    KalmanState state;
    Vector reid_feature;
    int age = 0;   // frames since the last match
    int hits = 0;  // total matches including the birth detection
    double confidence = 0.0;  // of the last matched detection
    TrackStatus status = TrackStatus::tentative;
    std::vector<std::pair<int, BBox>> box_history;

    BBox predicted_box() const { return state.box(); }
};

/// IoU(predicted box, detection) + omega * cos(track feature, detection embedding).
/// A zero-norm feature contributes a cosine of 0.
double combined_cost(const Track& track, const BBox& det_box, const Vector& det_embedding, double omega);
double cosine_similarity(const Vector& a, const Vector& b);

/// Tracks carried between frames plus the id counter.
struct TrackerState {
    std::vector<Track> tracks;  // never contains removed tracks
    int next_id = 1;
    int frames_seen = 0;
};

struct StepResult {
    TrackerState state;
    std::vector<ResultRow> rows;
};

/// One frame of BYTE association. `embeddings` must have one row per
/// detection; it may have zero columns when neither stage uses ReID.
StepResult byte_step(TrackerState state, const FrameDetections& frame, const EmbeddingMatrix& embeddings,
                     const TrackerConfig& cfg, const KalmanNoise& noise = {});

/// Stateful wrapper around byte_step. Not thread-safe; one instance per sequence.
class ByteTracker {
public:
    explicit ByteTracker(TrackerConfig cfg, KalmanNoise noise = {});

    std::vector<ResultRow> step(const FrameDetections& frame, const EmbeddingMatrix& embeddings);
    const std::vector<Track>& tracks() const { return state_.tracks; }
    const TrackerConfig& config() const { return cfg_; }

private:
    TrackerConfig cfg_;
    KalmanNoise noise_;
    TrackerState state_;
};

/// Runs the tracker over every frame; embeds crops with `params`.
std::vector<ResultRow> track_sequence(const SequenceSample& sample, const EmbedderParams& params,
                                      const TrackerConfig& cfg);
/// IoU-only variant; throws ConfigError when a stage asks for ReID.
std::vector<ResultRow> track_sequence(const SequenceSample& sample, const TrackerConfig& cfg);

}  // namespace subco
