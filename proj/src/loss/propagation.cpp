#include "subco/errors.hpp"
#include "subco/loss.hpp"

#include <cmath>
#include <string>

namespace subco {

void LossConfig::validate() const {
    assignment.validate();
    if (sequence_length < 1) throw ConfigError("loss sequence_length must be >= 1");
    if (!(intra_weight >= 0.0)) throw ConfigError("loss intra_weight must be >= 0");
    if (!(deletion_threshold > 0.0 && deletion_threshold < 1.0))
        throw ConfigError("loss deletion_threshold must be in (0, 1)");
    if (!(epsilon_log >= 0.0)) throw ConfigError("loss epsilon_log must be >= 0");
    if (!inter_enabled() && intra_weight <= 0.0)
        throw ConfigError("sequence_length 1 trains the intra-frame term only and needs intra_weight > 0");
}

Propagation propagate_assignments(std::span<const AssignmentResult> chain) {
    if (chain.empty()) throw DimensionError("propagate_assignments: empty assignment chain");
    const Eigen::Index k1 = chain.front().rows();
    Matrix prefix = Matrix::Identity(k1, k1);  // A_12 ... A_{t-1,t}
    Vector deletion = Vector::Zero(k1);
    for (std::size_t t = 0; t < chain.size(); ++t) {
        const auto& a = chain[t];
        if (a.rows() != prefix.cols())
            throw DimensionError("propagate_assignments: step " + std::to_string(t + 1) + " has " +
                                 std::to_string(a.rows()) + " rows, previous step has " + std::to_string(prefix.cols()) +
                                 " columns");
        if (a.deletion.size() != a.rows()) throw DimensionError("propagate_assignments: deletion vector length mismatch");
        deletion.noalias() += prefix * a.deletion;
        prefix = prefix * a.assignment;
    }
    return {std::move(prefix), std::move(deletion)};
}

InterFrameLoss inter_frame_loss(const Matrix& propagated, const Vector& deletion, const Matrix& direct,
                                const LossConfig& cfg) {
    if (propagated.rows() != direct.rows() || propagated.cols() != direct.cols() ||
        deletion.size() != propagated.rows())
        throw DimensionError("inter_frame_loss: propagated, direct and deletion shapes differ");
    InterFrameLoss out;
    out.alive.assign(static_cast<std::size_t>(propagated.rows()), false);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < propagated.rows(); ++i) {
        if (!(deletion[i] < cfg.deletion_threshold)) continue;
        out.alive[static_cast<std::size_t>(i)] = true;
        ++out.alive_count;
        sum -= std::log(cfg.epsilon_log + propagated.row(i).dot(direct.row(i)));
    }
    out.skipped = out.alive_count == 0;
    out.value = out.skipped ? 0.0 : sum / out.alive_count;
    return out;
}

}  // namespace subco
