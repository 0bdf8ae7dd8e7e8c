#pragma once

#include <Eigen/Dense>

#include <limits>
#include <utility>
#include <vector>

namespace subco {

/// Cost sentinel for pairs that must never be matched.
inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

using MatchPair = std::pair<int, int>;  // (row, column)

/// Minimum-cost one-to-one matching. Among all matchings it first maximizes
/// the number of allowed (finite-cost) pairs, then minimizes their total
/// cost; forbidden pairs never appear in the result. Pairs come back sorted
/// by row. Deterministic for a given matrix.
std::vector<MatchPair> hungarian(const Eigen::MatrixXd& cost);

double matching_cost(const Eigen::MatrixXd& cost, const std::vector<MatchPair>& pairs);

}  // namespace subco
