#pragma once

#include "subco/metrics.hpp"
#include "subco/run_config.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace subco {

/// `count` sequences drawn from `base`; sequence k uses seed mix(seed, k).
std::vector<SyntheticSequence> generate_dataset(const SyntheticConfig& base, int count, std::uint64_t seed);

/// `base` with long occlusions: more frames, four occluders, 5% detector
/// dropout and a velocity random walk so motion is hard to extrapolate.
SyntheticConfig occlusion_heavy(SyntheticConfig base);

/// Training samples of `sequence_length` consecutive frames, non-overlapping.
std::vector<SequenceSample> training_samples(std::span<const SyntheticSequence> sequences, int sequence_length);

/// Trains a freshly initialized embedder on `sequences` as configured by `cfg`.
TrainResult train_embedder(std::span<const SyntheticSequence> sequences, const RunConfig& cfg,
                           const EpochCallback& on_epoch = {});

struct SequenceEvaluation {
    std::vector<ResultRow> rows;
    MetricReport report;
};

struct TrackingEvaluation {
    std::vector<SequenceEvaluation> sequences;
    MetricReport total;  // merged by count summation
};

/// Tracks every sequence and scores it against its ground truth. `params` may
/// be empty only when the tracker configuration does not use ReID.
TrackingEvaluation evaluate_tracking(std::span<const SyntheticSequence> sequences,
                                     const std::optional<EmbedderParams>& params, const TrackerConfig& tracker,
                                     double iou_threshold);

/// Explicit value lists per ablation axis.
struct AblationGrid {
    std::vector<int> sequence_length;
    std::vector<bool> intra;              // intra-frame term on/off
    std::vector<StageCosts> stage_costs;  // evaluated for every trained cell
};

/// JSON document {"sequence_length": [...], "intra": [...], "stage_costs": [["iou","iou"], ...]}.
/// Missing axes default to the base configuration's value.
AblationGrid ablation_grid_from_json(const std::string& text, const RunConfig& base);
AblationGrid load_ablation_grid(const std::filesystem::path& path, const RunConfig& base);

struct AblationCell {
    int sequence_length = 0;
    bool intra = true;
    StageCosts stage_costs;
    bool valid = true;  // sequence_length 1 without the intra term trains nothing
    double first_inter = 0.0;
    double final_inter = 0.0;
    MetricReport report;
    std::string name() const;
};

using CellCallback = std::function<void(const AblationCell&)>;

/// Trains one embedder per (sequence_length, intra) pair on `train` and
/// evaluates it on `eval` with every stage-cost entry. When `out_dir` is set,
/// each trained cell writes its checkpoint, loss log and config below it.
std::vector<AblationCell> run_ablation(const RunConfig& base, const AblationGrid& grid,
                                       std::span<const SyntheticSequence> train, std::span<const SyntheticSequence> eval,
                                       const std::optional<std::filesystem::path>& out_dir = std::nullopt,
                                       const CellCallback& on_cell = {});

std::string format_ablation_table(std::span<const AblationCell> cells);
std::string ablation_to_json(std::span<const AblationCell> cells);

/// Reads every sequence directory below `root` (see list_sequence_dirs).
std::vector<SyntheticSequence> load_dataset(const std::filesystem::path& root, bool with_images = true);

}  // namespace subco
