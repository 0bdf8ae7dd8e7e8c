#include "subco/hungarian.hpp"

#include <algorithm>
#include <cmath>

namespace subco {

namespace {

// Shortest augmenting path assignment for rows <= cols (1-based potentials).
std::vector<int> solve_rows_le_cols(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    const int m = static_cast<int>(a.cols());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j]) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace

std::vector<MatchPair> hungarian(const Eigen::MatrixXd& cost) {
    std::vector<MatchPair> pairs;
    if (cost.rows() == 0 || cost.cols() == 0) return pairs;

    const bool transposed = cost.rows() > cost.cols();
    Eigen::MatrixXd a = transposed ? Eigen::MatrixXd(cost.transpose()) : cost;
    double max_abs = 0.0;
    bool any_allowed = false;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (std::isfinite(a(i, j))) {
                max_abs = std::max(max_abs, std::abs(a(i, j)));
                any_allowed = true;
            }
    if (!any_allowed) return pairs;
    // Any matching with one more forbidden pair costs more than any with fewer.
    const double big = 2.0 * static_cast<double>(a.rows()) * (max_abs + 1.0) + 1.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (!std::isfinite(a(i, j))) a(i, j) = big;

    const auto assignment = solve_rows_le_cols(a);
    for (int r = 0; r < static_cast<int>(assignment.size()); ++r) {
        const int c = assignment[static_cast<std::size_t>(r)];
        if (c < 0) continue;
        const int row = transposed ? c : r;
        const int col = transposed ? r : c;
        if (std::isfinite(cost(row, col))) pairs.emplace_back(row, col);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

double matching_cost(const Eigen::MatrixXd& cost, const std::vector<MatchPair>& pairs) {
    double total = 0.0;
    for (const auto& [i, j] : pairs) total += cost(i, j);
    return total;
}

}  // namespace subco
