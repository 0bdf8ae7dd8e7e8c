#include "subco/embedder.hpp"
#include "subco/errors.hpp"
#include "subco/random.hpp"

#include <cmath>
#include <string>

namespace subco {

namespace {

constexpr double kMinNorm = 1e-12;

std::string shape_str(Eigen::Index r, Eigen::Index c) { return std::to_string(r) + "x" + std::to_string(c); }

Matrix stack_crops(const EmbedderParams& params, std::span<const CropFeature> crops) {
    const int p = params.shape.input_size();
    Matrix x(p, static_cast<Eigen::Index>(crops.size()));
    for (std::size_t k = 0; k < crops.size(); ++k) {
        if (crops[k].values.size() != p)
            throw DimensionError("crop has " + std::to_string(crops[k].values.size()) + " values, model expects " +
                                 std::to_string(p));
        x.col(static_cast<Eigen::Index>(k)) = crops[k].values;
    }
    return x;
}

struct Forward {
    Matrix hidden;  // H x K, after tanh
    Matrix raw;     // D x K, before normalization
    Vector norms;   // K
    Matrix out;     // D x K
};

Forward forward(const EmbedderParams& params, const Matrix& x) {
    const auto& w = params.weights;
    Forward f;
    f.hidden = ((w.w1 * x).colwise() + w.b1).array().tanh().matrix();
    f.raw = (w.w2 * f.hidden).colwise() + w.b2;
    f.out = f.raw;
    f.norms = f.raw.colwise().norm().transpose();
    if (params.shape.l2_normalize) {
        for (Eigen::Index k = 0; k < f.raw.cols(); ++k) {
            if (f.norms[k] > kMinNorm)
                f.out.col(k) /= f.norms[k];
            else
                f.out.col(k).setZero();
        }
    }
    return f;
}

}  // namespace

void EmbedderShape::validate() const {
    if (patch.width <= 0 || patch.height <= 0 || hidden <= 0 || dim <= 0)
        throw ConfigError("embedder patch size, hidden width and embedding dim must be positive");
}

MlpWeights MlpWeights::zeros(const EmbedderShape& shape) {
    return {Matrix::Zero(shape.hidden, shape.input_size()), Vector::Zero(shape.hidden), Matrix::Zero(shape.dim, shape.hidden),
            Vector::Zero(shape.dim)};
}

std::vector<std::span<double>> MlpWeights::blocks() {
    return {{w1.data(), static_cast<std::size_t>(w1.size())},
            {b1.data(), static_cast<std::size_t>(b1.size())},
            {w2.data(), static_cast<std::size_t>(w2.size())},
            {b2.data(), static_cast<std::size_t>(b2.size())}};
}

std::vector<std::span<const double>> MlpWeights::blocks() const {
    return {{w1.data(), static_cast<std::size_t>(w1.size())},
            {b1.data(), static_cast<std::size_t>(b1.size())},
            {w2.data(), static_cast<std::size_t>(w2.size())},
            {b2.data(), static_cast<std::size_t>(b2.size())}};
}

std::size_t MlpWeights::parameter_count() const {
    return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
}

MlpWeights& MlpWeights::operator+=(const MlpWeights& other) {
    w1 += other.w1;
    b1 += other.b1;
    w2 += other.w2;
    b2 += other.b2;
    return *this;
}

MlpWeights& MlpWeights::operator*=(double s) {
    w1 *= s;
    b1 *= s;
    w2 *= s;
    b2 *= s;
    return *this;
}

bool MlpWeights::all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite();
}

double MlpWeights::max_abs() const {
    double m = 0.0;
    for (const auto& block : blocks())
        for (double v : block) m = std::max(m, std::abs(v));
    return m;
}

EmbedderParams EmbedderParams::random(const EmbedderShape& shape, std::uint64_t seed) {
    shape.validate();
    EmbedderParams p{shape, MlpWeights::zeros(shape)};
    Rng rng(seed);
    const double a1 = 1.0 / std::sqrt(static_cast<double>(shape.input_size()));
    const double a2 = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
    auto blocks = p.weights.blocks();
    for (double& v : blocks[0]) v = rng.uniform(-a1, a1);
    for (double& v : blocks[1]) v = rng.uniform(-a1, a1);
    for (double& v : blocks[2]) v = rng.uniform(-a2, a2);
    for (double& v : blocks[3]) v = rng.uniform(-a2, a2);
    return p;
}

void EmbedderParams::validate() const {
    shape.validate();
    const auto& w = weights;
    const Eigen::Index h = shape.hidden, p = shape.input_size(), d = shape.dim;
    if (w.w1.rows() != h || w.w1.cols() != p || w.b1.size() != h || w.w2.rows() != d || w.w2.cols() != h ||
        w.b2.size() != d)
        throw DimensionError("embedder weights (" + shape_str(w.w1.rows(), w.w1.cols()) + ", " +
                             shape_str(w.w2.rows(), w.w2.cols()) + ") do not match shape P=" + std::to_string(p) +
                             " H=" + std::to_string(h) + " D=" + std::to_string(d));
}

EmbeddingMatrix embed(const EmbedderParams& params, std::span<const CropFeature> crops, int frame) {
    if (crops.empty()) return {Matrix(0, params.shape.dim), frame};
    const Matrix x = stack_crops(params, crops);
    return {forward(params, x).out.transpose(), frame};
}

MlpWeights embed_backward(const EmbedderParams& params, std::span<const CropFeature> crops, const Matrix& upstream) {
    const auto k = static_cast<Eigen::Index>(crops.size());
    if (upstream.rows() != k || upstream.cols() != params.shape.dim)
        throw DimensionError("upstream gradient is " + shape_str(upstream.rows(), upstream.cols()) + ", expected " +
                             shape_str(k, params.shape.dim));
    MlpWeights grad = MlpWeights::zeros(params.shape);
    if (k == 0) return grad;

    const Matrix x = stack_crops(params, crops);
    const Forward f = forward(params, x);
    Matrix g_raw = upstream.transpose();  // D x K
    if (params.shape.l2_normalize) {
        for (Eigen::Index c = 0; c < k; ++c) {
            if (f.norms[c] <= kMinNorm) {
                g_raw.col(c).setZero();
                continue;
            }
            const auto y = f.out.col(c);
            g_raw.col(c) = (g_raw.col(c) - y * y.dot(g_raw.col(c))) / f.norms[c];
        }
    }
    const auto& w = params.weights;
    grad.w2.noalias() = g_raw * f.hidden.transpose();
    grad.b2 = g_raw.rowwise().sum();
    const Matrix g_pre = ((w.w2.transpose() * g_raw).array() * (1.0 - f.hidden.array().square())).matrix();
    grad.w1.noalias() = g_pre * x.transpose();
    grad.b1 = g_pre.rowwise().sum();
    return grad;
}

}  // namespace subco
