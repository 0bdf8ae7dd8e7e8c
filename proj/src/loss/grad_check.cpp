#include "subco/grad_check.hpp"
#include "subco/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace subco {

namespace {

constexpr double kStep = 1e-5;
constexpr double kKinkMargin = 1e-7;

SequenceSample random_sample(int frames, Rng& rng) {
    constexpr int size = 24;
    SequenceSample s;
    for (int t = 0; t < frames; ++t) {
        RgbImage img(size, size);
        for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
        FrameDetections f{t + 1, {}};
        const int k = 1 + static_cast<int>(rng.below(2));
        for (int j = 0; j < k; ++j) {
            const double w = rng.uniform(3, 12), h = rng.uniform(3, 12);
            f.detections.push_back(Detection{t + 1, {rng.uniform(0, size - w), rng.uniform(0, size - h), w, h}, 0.9, 1, std::nullopt});
        }
        s.frames.push_back(std::move(f));
        s.images.push_back(std::move(img));
    }
    return s;
}

// Distance to the nearest non-smooth point of the loss: R == C inside a
// min(), or accumulated deletion at the alive threshold.
double kink_distance(const PreparedSample& sample, const EmbedderParams& params, const LossConfig& cfg) {
    std::vector<Matrix> x;
    for (std::size_t t = 0; t < sample.length(); ++t) x.push_back(embed(params, sample.crops[t]).rows);
    double gap = std::numeric_limits<double>::infinity();
    auto scan = [&](const AssignmentResult& r, const Matrix* self) {
        if (r.rows() == 1 && r.cols() == 1) return;  // R and C are the same function here
        for (Eigen::Index i = 0; i < r.rows(); ++i)
            for (Eigen::Index j = 0; j < r.cols(); ++j) {
                // Symmetric self-scores give C = R^T; ties with equal diagonals are smooth.
                if (self && std::abs((*self)(i, i) - (*self)(j, j)) < 1e-12) continue;
                gap = std::min(gap, std::abs(r.forward(i, j) - r.backward(i, j)));
            }
    };
    for (const auto& f : x) {
        if (f.rows() == 0) continue;
        const Matrix s = score_matrix(f, f);
        scan(soft_assign(s, cfg.assignment), &s);
    }
    if (cfg.inter_enabled()) {
        std::vector<AssignmentResult> chain;
        for (std::size_t t = 0; t + 1 < x.size(); ++t) {
            chain.push_back(soft_assign(score_matrix(x[t], x[t + 1]), cfg.assignment));
            scan(chain.back(), nullptr);
        }
        scan(soft_assign(score_matrix(x.front(), x.back()), cfg.assignment), nullptr);
        const Vector d = propagate_assignments(chain).deletion;
        for (Eigen::Index i = 0; i < d.size(); ++i) gap = std::min(gap, std::abs(d[i] - cfg.deletion_threshold));
    }
    return gap;
}

double worst_relative_error(EmbedderParams params, const MlpWeights& analytic, const PreparedSample& sample,
                            const LossConfig& cfg) {
    double worst = 0.0;
    auto blocks = params.weights.blocks();
    const auto reference = analytic.blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (std::size_t k = 0; k < blocks[b].size(); ++k) {
            const double orig = blocks[b][k];
            blocks[b][k] = orig + kStep;
            const double up = subco_loss(sample, params, cfg).total;
            blocks[b][k] = orig - kStep;
            const double down = subco_loss(sample, params, cfg).total;
            blocks[b][k] = orig;
            const double numeric = (up - down) / (2.0 * kStep);
            const double a = reference[b][k];
            worst = std::max(worst, std::abs(numeric - a) / std::max(std::abs(numeric) + std::abs(a), 1e-6));
        }
    return worst;
}

}  // namespace

GradCheckReport run_gradient_check(const LossConfig& loss, int instances, double tolerance, std::uint64_t seed) {
    loss.validate();
    EmbedderShape shape;
    shape.patch = {2, 2};
    shape.hidden = 4;
    shape.dim = 3;

    GradCheckReport report;
    for (std::uint64_t k = 0; report.instances < instances && k < 100ull * static_cast<std::uint64_t>(instances) + 100; ++k) {
        Rng rng(Rng::mix(seed, k));
        const auto prepared = prepare_sample(random_sample(loss.sequence_length, rng), shape.patch);
        const auto params = EmbedderParams::random(shape, Rng::mix(seed ^ 0x9e3779b97f4a7c15ull, k));
        const auto lg = subco_loss_gradient(prepared, params, loss);
        if (lg.breakdown.skipped) {
            ++report.degenerate;
            if (lg.gradient.max_abs() != 0.0) report.max_relative_error = std::numeric_limits<double>::infinity();
            continue;
        }
        if (kink_distance(prepared, params, loss) < kKinkMargin) {
            ++report.near_kink;
            continue;
        }
        const double err = worst_relative_error(params, lg.gradient, prepared, loss);
        report.max_relative_error = std::max(report.max_relative_error, err);
        ++report.instances;
        if (err < tolerance) ++report.passed;
    }
    return report;
}

}  // namespace subco
