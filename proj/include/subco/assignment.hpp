#pragma once

#include "subco/embedder.hpp"

namespace subco {

struct AssignmentConfig {
    double delta_match = 0.5;  // score a pair must beat to outweigh the no-match slot
    double tau = 10.0;         // softmax temperature (multiplies every logit)

    void validate() const;
};

/// Soft assignment between M rows (tracks / earlier frame) and K columns
/// (detections / later frame).
///
///   [R | d] rows    = softmax over  [tau*S_i1 .. tau*S_iK, tau*delta]
///   [C ; i] columns = softmax over  [tau*S_1j .. tau*S_Mj, tau*delta]
///   A               = min(R, C) elementwise
struct AssignmentResult {
    Matrix assignment;  // A, M x K
    Matrix forward;     // R, M x K
    Matrix backward;    // C, M x K
    Vector deletion;    // d, M
    Vector initiation;  // i, K

    Eigen::Index rows() const { return assignment.rows(); }
    Eigen::Index cols() const { return assignment.cols(); }
};

/// S = Y X^T. Throws DimensionError when embedding widths differ.
Matrix score_matrix(const Matrix& y, const Matrix& x);

/// Throws std::invalid_argument on non-finite scores.
AssignmentResult soft_assign(const Matrix& scores, const AssignmentConfig& cfg);

/// Upstream gradients on the outputs of soft_assign. Empty vectors/matrices
/// stand for zero gradients.
struct AssignmentGrad {
    Matrix assignment;
    Vector deletion;
    Vector initiation;
};

/// Reverse-mode gradient on S. The min routes each entry's gradient to the
/// attaining side; ties go to R.
Matrix soft_assign_backward(const Matrix& scores, const AssignmentConfig& cfg, const AssignmentGrad& upstream);

/// Same as above, reusing a forward result computed for `scores` with `cfg`.
Matrix soft_assign_backward(const AssignmentResult& forward, const AssignmentConfig& cfg, const AssignmentGrad& upstream);

}  // namespace subco
