#pragma once
// Dense helpers for the small matrices of this library (state dimension <= 8):
// cyclic Jacobi eigenvalues for symmetric matrices and Gauss-Jordan inversion.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "mkv/common.hpp"

namespace mkv {

// Eigenvalues of a symmetric d x d matrix (row-major) by cyclic Jacobi rotations,
// iterated until the off-diagonal norm falls below 1e-12 relative to the matrix scale.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, int d) {
    if (d == 1) return {a[0]};
    double scale = 0.0;
    for (int i = 0; i < d * d; ++i) scale = std::max(scale, std::abs(a[i]));
    const double tol = 1e-12 * std::max(scale, 1.0);
    for (int sweep = 0; sweep < 128; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += a[p * d + q] * a[p * d + q];
        if (std::sqrt(off) < tol) break;
        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) {
                const double apq = a[p * d + q];
                if (std::abs(apq) < tol * 1e-4) continue;
                const double app = a[p * d + p];
                const double aqq = a[q * d + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < d; ++k) {
                    const double akp = a[k * d + p];
                    const double akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for (int k = 0; k < d; ++k) {
                    const double apk = a[p * d + k];
                    const double aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) eig[static_cast<std::size_t>(i)] = a[i * d + i];
    std::sort(eig.begin(), eig.end());
    return eig;
}

// Inverse of a d x d matrix by Gauss-Jordan with partial pivoting.
// Returns false when a pivot degenerates.
inline bool invert_matrix(std::span<const double> m, int d, std::span<double> out) {
    std::vector<double> a(m.begin(), m.end());
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(i * d + j)] = (i == j) ? 1.0 : 0.0;
    for (int col = 0; col < d; ++col) {
        int pivot = col;
        for (int r = col + 1; r < d; ++r)
            if (std::abs(a[static_cast<std::size_t>(r * d + col)]) >
                std::abs(a[static_cast<std::size_t>(pivot * d + col)]))
                pivot = r;
        if (a[static_cast<std::size_t>(pivot * d + col)] == 0.0) return false;
        if (pivot != col) {
            for (int j = 0; j < d; ++j) {
                std::swap(a[static_cast<std::size_t>(col * d + j)], a[static_cast<std::size_t>(pivot * d + j)]);
                std::swap(out[static_cast<std::size_t>(col * d + j)], out[static_cast<std::size_t>(pivot * d + j)]);
            }
        }
        const double inv_p = 1.0 / a[static_cast<std::size_t>(col * d + col)];
        for (int j = 0; j < d; ++j) {
            a[static_cast<std::size_t>(col * d + j)] *= inv_p;
            out[static_cast<std::size_t>(col * d + j)] *= inv_p;
        }
        for (int r = 0; r < d; ++r) {
            if (r == col) continue;
            const double f = a[static_cast<std::size_t>(r * d + col)];
            if (f == 0.0) continue;
            for (int j = 0; j < d; ++j) {
                a[static_cast<std::size_t>(r * d + j)] -= f * a[static_cast<std::size_t>(col * d + j)];
                out[static_cast<std::size_t>(r * d + j)] -= f * out[static_cast<std::size_t>(col * d + j)];
            }
        }
    }
    return true;
}

// Spectral condition number of a d x d matrix via the eigenvalues of M M^T.
inline double condition_number(std::span<const double> m, int d) {
    std::vector<double> gram(static_cast<std::size_t>(d * d), 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int k = 0; k < d; ++k)
                s += m[static_cast<std::size_t>(i * d + k)] * m[static_cast<std::size_t>(j * d + k)];
            gram[static_cast<std::size_t>(i * d + j)] = s;
        }
    const auto eig = jacobi_eigenvalues(gram, d);
    const double lo = eig.front();
    const double hi = eig.back();
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(hi / lo);
}

}  // namespace mkv
