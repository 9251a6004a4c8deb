#pragma once

#include <Eigen/Dense>

#include "codex/projector.hpp"

namespace oracle {

// Dense system matrix assembled column by column from the projector's stored entries.
inline Eigen::MatrixXd dense_system_matrix(const codex::Projector& A) {
    const int N = A.geometry().num_pixels();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(A.num_bins(), N);
    for (int j = 0; j < N; ++j) {
        const auto bins = A.column_bins(j);
        const auto vals = A.column_weights(j);
        for (std::size_t k = 0; k < bins.size(); ++k) M(bins[k], j) += vals[k];
    }
    return M;
}

// Laplacian-like matrix of the 8-neighbour quadratic prior: x^T Q x = sum_pairs w (x_j - x_k)^2.
inline Eigen::MatrixXd pair_laplacian(int n) {
    const double diag_w = 1.0 / std::sqrt(2.0);
    const int offs[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
    const double wts[4] = {1.0, 1.0, diag_w, diag_w};
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n * n, n * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            for (int o = 0; o < 4; ++o) {
                const int r2 = r + offs[o][0], c2 = c + offs[o][1];
                if (r2 < 0 || r2 >= n || c2 < 0 || c2 >= n) continue;
                const int a = r * n + c, b = r2 * n + c2;
                Q(a, a) += wts[o];
                Q(b, b) += wts[o];
                Q(a, b) -= wts[o];
                Q(b, a) -= wts[o];
            }
    return Q;
}

inline Eigen::VectorXd to_vec(const codex::Array2D& a) {
    return Eigen::Map<const Eigen::VectorXd>(a.vec().data(), static_cast<Eigen::Index>(a.size()));
}

}  // namespace oracle
