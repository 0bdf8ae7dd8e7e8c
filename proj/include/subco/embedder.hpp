#pragma once

#include "subco/data.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace subco {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct PatchSize {
    int width = 16;
    int height = 16;

    int feature_length() const { return width * height * 3; }
    friend bool operator==(const PatchSize&, const PatchSize&) = default;
};

/// Resized crop of one detection: row-major RGB, values in [0, 1].
struct CropFeature {
    Vector values;
};

/// Clips `box` to the image, resamples it bilinearly to `patch` and scales to
/// [0, 1]. Samples are clamped to the pixels the clipped box touches, so a box
/// inside a single pixel yields that pixel's color everywhere.
/// Throws std::invalid_argument when the box does not intersect the image.
CropFeature extract_crop(const RgbImage& image, const BBox& box, PatchSize patch);
std::vector<CropFeature> extract_crops(const RgbImage& image, const FrameDetections& frame, PatchSize patch);

struct EmbedderShape {
    PatchSize patch;
    int hidden = 64;
    int dim = 32;
    bool l2_normalize = true;

    int input_size() const { return patch.feature_length(); }
    void validate() const;
    friend bool operator==(const EmbedderShape&, const EmbedderShape&) = default;
};

/// Weights of the P -> H -> D embedding MLP; also used to hold gradients.
struct MlpWeights {
    Matrix w1;  // H x P
    Vector b1;  // H
    Matrix w2;  // D x H
    Vector b2;  // D

    static MlpWeights zeros(const EmbedderShape& shape);

    std::vector<std::span<double>> blocks();
    std::vector<std::span<const double>> blocks() const;
    std::size_t parameter_count() const;

    MlpWeights& operator+=(const MlpWeights& other);
    MlpWeights& operator*=(double s);
    bool all_finite() const;
    double max_abs() const;
};

struct EmbedderParams {
    EmbedderShape shape;
    MlpWeights weights;

    /// Uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)] for weights and biases.
    static EmbedderParams random(const EmbedderShape& shape, std::uint64_t seed);
    /// Throws DimensionError when weight shapes disagree with `shape`.
    void validate() const;
};

/// K x D matrix of embeddings for one frame; row k belongs to detection k.
struct EmbeddingMatrix {
    Matrix rows;
    int frame = 0;

    Eigen::Index count() const { return rows.rows(); }
};

EmbeddingMatrix embed(const EmbedderParams& params, std::span<const CropFeature> crops, int frame = 0);

/// Gradient of sum(upstream .* embed(params, crops).rows) with respect to the
/// weights. `upstream` is K x D.
MlpWeights embed_backward(const EmbedderParams& params, std::span<const CropFeature> crops, const Matrix& upstream);

// Checkpoint: one JSON document with the shape and row-major weight arrays.
void save_checkpoint(const EmbedderParams& params, const std::filesystem::path& path);
EmbedderParams load_checkpoint(const std::filesystem::path& path);

}  // namespace subco
