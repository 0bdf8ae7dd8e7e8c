#include "subco/assignment.hpp"
#include "subco/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace subco {

void AssignmentConfig::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("assignment tau must be positive and finite");
    if (!std::isfinite(delta_match)) throw ConfigError("assignment delta_match must be finite");
}

Matrix score_matrix(const Matrix& y, const Matrix& x) {
    if (y.cols() != x.cols() && y.rows() > 0 && x.rows() > 0)
        throw DimensionError("score_matrix: embedding widths differ (" + std::to_string(y.cols()) + " vs " +
                             std::to_string(x.cols()) + ")");
    if (y.rows() == 0 || x.rows() == 0) return Matrix(y.rows(), x.rows());
    return y * x.transpose();
}

namespace {

// Softmax over `logits` plus one extra logit; writes probabilities back into
// `logits` and returns the extra slot's probability.
template <class Seg>
double augmented_softmax(Seg&& logits, double extra) {
    const double m = std::max(logits.size() ? logits.maxCoeff() : extra, extra);
    double z = std::exp(extra - m);
    for (Eigen::Index k = 0; k < logits.size(); ++k) {
        logits[k] = std::exp(logits[k] - m);
        z += logits[k];
    }
    logits /= z;
    return std::exp(extra - m) / z;
}

}  // namespace

AssignmentResult soft_assign(const Matrix& scores, const AssignmentConfig& cfg) {
    cfg.validate();
    if (!scores.allFinite()) throw std::invalid_argument("soft_assign: score matrix has non-finite entries");
    const Eigen::Index m = scores.rows(), k = scores.cols();
    const double extra = cfg.tau * cfg.delta_match;

    AssignmentResult r;
    r.forward = cfg.tau * scores;
    r.backward = r.forward;
    r.deletion.resize(m);
    r.initiation.resize(k);
    for (Eigen::Index i = 0; i < m; ++i) {
        Vector row = r.forward.row(i).transpose();
        r.deletion[i] = augmented_softmax(row, extra);
        r.forward.row(i) = row.transpose();
    }
    for (Eigen::Index j = 0; j < k; ++j) r.initiation[j] = augmented_softmax(r.backward.col(j), extra);
    r.assignment = r.forward.cwiseMin(r.backward);
    return r;
}

Matrix soft_assign_backward(const AssignmentResult& f, const AssignmentConfig& cfg, const AssignmentGrad& g) {
    const Eigen::Index m = f.rows(), k = f.cols();
    auto check = [](bool ok, const char* what) {
        if (!ok) throw DimensionError(std::string("soft_assign_backward: ") + what);
    };
    const bool has_a = g.assignment.size() > 0;
    const bool has_d = g.deletion.size() > 0;
    const bool has_i = g.initiation.size() > 0;
    check(!has_a || (g.assignment.rows() == m && g.assignment.cols() == k), "assignment gradient shape mismatch");
    check(!has_d || g.deletion.size() == m, "deletion gradient length mismatch");
    check(!has_i || g.initiation.size() == k, "initiation gradient length mismatch");

    Matrix g_row = Matrix::Zero(m, k);
    Matrix g_col = Matrix::Zero(m, k);
    if (has_a) {
        for (Eigen::Index j = 0; j < k; ++j)
            for (Eigen::Index i = 0; i < m; ++i) {
                if (f.forward(i, j) <= f.backward(i, j))
                    g_row(i, j) = g.assignment(i, j);
                else
                    g_col(i, j) = g.assignment(i, j);
            }
    }

    // d logit = p * (g - <p, g>) over each augmented simplex; logits are tau*S.
    Matrix g_scores(m, k);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double gd = has_d ? g.deletion[i] : 0.0;
        const double mean = f.forward.row(i).dot(g_row.row(i)) + f.deletion[i] * gd;
        g_scores.row(i) = f.forward.row(i).array() * (g_row.row(i).array() - mean);
    }
    for (Eigen::Index j = 0; j < k; ++j) {
        const double gi = has_i ? g.initiation[j] : 0.0;
        const double mean = f.backward.col(j).dot(g_col.col(j)) + f.initiation[j] * gi;
        g_scores.col(j).array() += f.backward.col(j).array() * (g_col.col(j).array() - mean);
    }
    return cfg.tau * g_scores;
}

Matrix soft_assign_backward(const Matrix& scores, const AssignmentConfig& cfg, const AssignmentGrad& upstream) {
    return soft_assign_backward(soft_assign(scores, cfg), cfg, upstream);
}

}  // namespace subco
