#pragma once

#include "subco/assignment.hpp"
#include "subco/data.hpp"
#include "subco/embedder.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace subco {

struct LossConfig {
    /// Frames per training sample. 1 disables the inter-frame term (intra-only training).
    int sequence_length = 8;
    AssignmentConfig assignment;
    double intra_weight = 1.0;        // lambda
    double deletion_threshold = 0.5;  // track i is alive iff accumulated deletion < this
    double epsilon_log = 1e-8;

    bool inter_enabled() const { return sequence_length >= 2; }
    void validate() const;
};

struct LossBreakdown {
    double inter = 0.0;
    double intra = 0.0;
    double total = 0.0;
    int alive_count = 0;
    bool skipped = false;  // no frame-1 track survived; the sample must not update parameters
};

struct Propagation {
    Matrix propagated;  // K_1 x K_T
    Vector deletion;    // K_1, accumulated deletion mass of frame-1 detections
};

/// Chains T-1 consecutive pairwise assignments. Throws DimensionError when
/// the chain breaks or is empty.
Propagation propagate_assignments(std::span<const AssignmentResult> chain);

struct InterFrameLoss {
    double value = 0.0;
    std::vector<bool> alive;
    int alive_count = 0;
    bool skipped = false;
};

InterFrameLoss inter_frame_loss(const Matrix& propagated, const Vector& deletion, const Matrix& direct,
                                const LossConfig& cfg);

/// Sum over frames of ||A_tt - I||_1 / K_t^2 for the self-assignment of each
/// frame's embeddings. Empty frames contribute 0.
double intra_frame_loss(std::span<const EmbeddingMatrix> frames, const LossConfig& cfg);

/// Loss as a function of per-frame embeddings, optionally with the gradient
/// with respect to every frame's embedding matrix.
struct EmbeddingLoss {
    LossBreakdown breakdown;
    std::vector<Matrix> grad;  // one K_t x D matrix per frame, empty unless requested
};

EmbeddingLoss subco_loss_on_embeddings(std::span<const EmbeddingMatrix> frames, const LossConfig& cfg,
                                       bool with_gradient);

/// Crops of every detection of every frame, extracted once per sample.
struct PreparedSample {
    std::vector<std::vector<CropFeature>> crops;
    std::vector<int> frame_index;

    std::size_t length() const { return crops.size(); }
};

/// Throws std::invalid_argument when the sample carries no images.
PreparedSample prepare_sample(const SequenceSample& sample, PatchSize patch);

LossBreakdown subco_loss(const PreparedSample& sample, const EmbedderParams& params, const LossConfig& cfg);
LossBreakdown subco_loss(const SequenceSample& sample, const EmbedderParams& params, const LossConfig& cfg);

struct LossAndGradient {
    LossBreakdown breakdown;
    MlpWeights gradient;  // zero when skipped
};

LossAndGradient subco_loss_gradient(const PreparedSample& sample, const EmbedderParams& params, const LossConfig& cfg);
LossAndGradient subco_loss_gradient(const SequenceSample& sample, const EmbedderParams& params, const LossConfig& cfg);

/// Splits a sequence into consecutive non-overlapping windows of `length` frames.
std::vector<SequenceSample> make_windows(const SequenceSample& sequence, int length, int stride = 0);

struct OptimizerConfig {
    int epochs = 20;
    double learning_rate = 2e-4;
    int decay_epoch = 12;      // 1-based epoch from which the decayed rate applies; 0 disables
    double decay_factor = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-2;
    int accumulate = 1;        // samples per optimizer step
    bool shuffle = true;
    std::uint64_t seed = 0;

    void validate() const;
    double rate_for_epoch(int epoch) const;
};

/// Decoupled weight decay Adam.
class AdamW {
public:
    AdamW(const OptimizerConfig& cfg, const EmbedderShape& shape);
    void step(MlpWeights& params, const MlpWeights& grad, double learning_rate);
    long steps() const { return steps_; }

private:
    OptimizerConfig cfg_;
    MlpWeights first_;
    MlpWeights second_;
    long steps_ = 0;
};

struct EpochRecord {
    int epoch = 0;
    double mean_inter = 0.0;  // NaN when every sample was skipped
    double mean_intra = 0.0;
    double mean_total = 0.0;
    int skipped = 0;
    int updates = 0;
    double learning_rate = 0.0;
    std::string warning;
};

struct TrainResult {
    EmbedderParams params;
    std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(std::span<const SequenceSample> dataset, EmbedderParams params, const LossConfig& loss_cfg,
                  const OptimizerConfig& opt_cfg, const EpochCallback& on_epoch = {});

/// One JSON object per line: epoch, mean_inter, mean_intra, mean_total, skipped, updates, lr.
std::string format_epoch_record(const EpochRecord& record);

}  // namespace subco
