#include "subco/errors.hpp"
#include "subco/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace subco {

namespace {

Matrix self_scores(const Matrix& x) { return x * x.transpose(); }

// ||A - I||_1 / K^2 and, optionally, its gradient with respect to A.
double intra_term(const Matrix& a, Matrix* grad) {
    const auto k = a.rows();
    const double norm = 1.0 / static_cast<double>(k * k);
    double v = 0.0;
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = 0; i < k; ++i) v += (i == j) ? 1.0 - a(i, j) : a(i, j);
    if (grad) {
        *grad = Matrix::Constant(k, k, norm);
        grad->diagonal().setConstant(-norm);
    }
    return v * norm;
}

}  // namespace

double intra_frame_loss(std::span<const EmbeddingMatrix> frames, const LossConfig& cfg) {
    double total = 0.0;
    for (const auto& f : frames) {
        if (f.count() == 0) continue;
        total += intra_term(soft_assign(self_scores(f.rows), cfg.assignment).assignment, nullptr);
    }
    return total;
}

EmbeddingLoss subco_loss_on_embeddings(std::span<const EmbeddingMatrix> frames, const LossConfig& cfg,
                                       bool with_gradient) {
    cfg.validate();
    const std::size_t t_len = frames.size();
    if (t_len == 0) throw std::invalid_argument("subco loss needs at least one frame");
    if (cfg.inter_enabled() && t_len < 2) throw std::invalid_argument("inter-frame loss needs at least two frames");

    EmbeddingLoss out;
    if (with_gradient) {
        out.grad.reserve(t_len);
        for (const auto& f : frames) out.grad.push_back(Matrix::Zero(f.rows.rows(), f.rows.cols()));
    }
    const auto& acfg = cfg.assignment;

    std::vector<AssignmentResult> chain;
    AssignmentResult direct;
    Propagation prop;
    InterFrameLoss inter;
    if (cfg.inter_enabled()) {
        chain.reserve(t_len - 1);
        for (std::size_t t = 0; t + 1 < t_len; ++t)
            chain.push_back(soft_assign(score_matrix(frames[t].rows, frames[t + 1].rows), acfg));
        direct = soft_assign(score_matrix(frames.front().rows, frames.back().rows), acfg);
        prop = propagate_assignments(chain);
        inter = inter_frame_loss(prop.propagated, prop.deletion, direct.assignment, cfg);
        out.breakdown.inter = inter.value;
        out.breakdown.alive_count = inter.alive_count;
        if (inter.skipped) {
            out.breakdown.skipped = true;
            out.breakdown.intra = intra_frame_loss(frames, cfg);
            out.breakdown.total = 0.0;
            return out;
        }
    }

    // Intra-frame term.
    double intra = 0.0;
    for (std::size_t t = 0; t < t_len; ++t) {
        const Matrix& x = frames[t].rows;
        if (x.rows() == 0) continue;
        const AssignmentResult self = soft_assign(self_scores(x), acfg);
        Matrix g_a;
        intra += intra_term(self.assignment, with_gradient ? &g_a : nullptr);
        if (with_gradient && cfg.intra_weight != 0.0) {
            const Matrix g_s = soft_assign_backward(self, acfg, {cfg.intra_weight * g_a, {}, {}});
            out.grad[t].noalias() += (g_s + g_s.transpose()) * x;
        }
    }
    out.breakdown.intra = intra;
    out.breakdown.total = out.breakdown.inter + cfg.intra_weight * intra;

    if (!with_gradient || !cfg.inter_enabled()) return out;

    // Inter-frame term: d/dA_direct and d/dA_tilde of the mean negative log overlap.
    const Eigen::Index k1 = prop.propagated.rows();
    const Eigen::Index kt = prop.propagated.cols();
    Matrix g_tilde = Matrix::Zero(k1, kt);
    Matrix g_direct = Matrix::Zero(k1, kt);
    for (Eigen::Index i = 0; i < k1; ++i) {
        if (!inter.alive[static_cast<std::size_t>(i)]) continue;
        const double q = cfg.epsilon_log + prop.propagated.row(i).dot(direct.assignment.row(i));
        const double w = -1.0 / (inter.alive_count * q);
        g_tilde.row(i) = w * direct.assignment.row(i);
        g_direct.row(i) = w * prop.propagated.row(i);
    }

    auto accumulate_pair = [&](std::size_t a, std::size_t b, const Matrix& g_s) {
        out.grad[a].noalias() += g_s * frames[b].rows;
        out.grad[b].noalias() += g_s.transpose() * frames[a].rows;
    };
    accumulate_pair(0, t_len - 1, soft_assign_backward(direct, acfg, {g_direct, {}, {}}));

    // Gradient of A_1 ... A_{T-1} with respect to factor t is prefix^T * G * suffix^T.
    const std::size_t steps = chain.size();
    std::vector<Matrix> suffix(steps + 1);
    suffix[steps] = Matrix::Identity(kt, kt);
    for (std::size_t t = steps; t-- > 0;) suffix[t] = chain[t].assignment * suffix[t + 1];
    Matrix prefix = Matrix::Identity(k1, k1);
    for (std::size_t t = 0; t < steps; ++t) {
        const Matrix g_a = prefix.transpose() * g_tilde * suffix[t + 1].transpose();
        accumulate_pair(t, t + 1, soft_assign_backward(chain[t], acfg, {g_a, {}, {}}));
        prefix = prefix * chain[t].assignment;
    }
    return out;
}

PreparedSample prepare_sample(const SequenceSample& sample, PatchSize patch) {
    validate_sample(sample);
    if (!sample.has_images()) throw std::invalid_argument("sample has no images to crop from");
    PreparedSample p;
    p.crops.reserve(sample.length());
    for (std::size_t t = 0; t < sample.length(); ++t) {
        p.crops.push_back(extract_crops(sample.images[t], sample.frames[t], patch));
        p.frame_index.push_back(sample.frames[t].frame);
    }
    return p;
}

namespace {

std::vector<EmbeddingMatrix> embed_all(const PreparedSample& sample, const EmbedderParams& params) {
    std::vector<EmbeddingMatrix> x;
    x.reserve(sample.length());
    for (std::size_t t = 0; t < sample.length(); ++t) x.push_back(embed(params, sample.crops[t], sample.frame_index[t]));
    return x;
}

}  // namespace

LossBreakdown subco_loss(const PreparedSample& sample, const EmbedderParams& params, const LossConfig& cfg) {
    const auto x = embed_all(sample, params);
    return subco_loss_on_embeddings(x, cfg, false).breakdown;
}

LossBreakdown subco_loss(const SequenceSample& sample, const EmbedderParams& params, const LossConfig& cfg) {
    return subco_loss(prepare_sample(sample, params.shape.patch), params, cfg);
}

LossAndGradient subco_loss_gradient(const PreparedSample& sample, const EmbedderParams& params, const LossConfig& cfg) {
    const auto x = embed_all(sample, params);
    EmbeddingLoss loss = subco_loss_on_embeddings(x, cfg, true);
    LossAndGradient out{loss.breakdown, MlpWeights::zeros(params.shape)};
    if (loss.breakdown.skipped) return out;
    for (std::size_t t = 0; t < sample.length(); ++t) {
        if (sample.crops[t].empty()) continue;
        out.gradient += embed_backward(params, sample.crops[t], loss.grad[t]);
    }
    return out;
}

LossAndGradient subco_loss_gradient(const SequenceSample& sample, const EmbedderParams& params, const LossConfig& cfg) {
    return subco_loss_gradient(prepare_sample(sample, params.shape.patch), params, cfg);
}

std::vector<SequenceSample> make_windows(const SequenceSample& sequence, int length, int stride) {
    if (length < 1) throw std::invalid_argument("window length must be >= 1");
    if (stride <= 0) stride = length;
    std::vector<SequenceSample> out;
    const auto n = static_cast<int>(sequence.length());
    for (int start = 0; start + length <= n; start += stride) {
        SequenceSample w;
        w.frames.assign(sequence.frames.begin() + start, sequence.frames.begin() + start + length);
        if (sequence.has_images())
            w.images.assign(sequence.images.begin() + start, sequence.images.begin() + start + length);
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace subco
