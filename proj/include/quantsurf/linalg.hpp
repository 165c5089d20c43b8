#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "quantsurf/errors.hpp"

namespace quantsurf {

using Complex = std::complex<double>;

/// Dense row-major matrix, small sizes only.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : r_(rows), c_(cols), a_(static_cast<size_t>(rows) * cols, T(0)) {}

    int rows() const { return r_; }
    int cols() const { return c_; }

    T& operator()(int i, int j) { return a_[static_cast<size_t>(i) * c_ + j]; }
    const T& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * c_ + j]; }

private:
    int r_ = 0, c_ = 0;
    std::vector<T> a_;
};

using CMatrix = Matrix<Complex>;

struct RankInfo {
    int rank = 0;
    std::vector<double> singular_values;  // descending
    double threshold = 0;                 // rank cut used
    double gap_ratio = 0;                 // smallest kept sv / largest dropped sv
    bool deficiency_warning = false;      // svs cluster near the threshold
};

/// Singular values by one-sided Jacobi on the columns; fine for the few
/// hundred rows/cols this project ever sees.
inline std::vector<double> singular_values(CMatrix a) {
    int m = a.rows(), n = a.cols();
    if (n == 0) return {};
    if (m == 0) return std::vector<double>(static_cast<size_t>(n), 0.0);
    const int max_sweeps = 60;
    const double tol = 1e-30;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double app = 0, aqq = 0;
                Complex apq(0, 0);
                for (int i = 0; i < m; ++i) {
                    app += std::norm(a(i, p));
                    aqq += std::norm(a(i, q));
                    apq += std::conj(a(i, p)) * a(i, q);
                }
                double off = std::abs(apq);
                if (off * off <= tol * app * aqq || off == 0.0) continue;
                rotated = true;
                // complex Jacobi rotation zeroing the p,q Gram entry
                Complex phase = apq / off;
                double zeta = (aqq - app) / (2.0 * off);
                double t = (zeta >= 0 ? 1.0 : -1.0) /
                           (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double cs = 1.0 / std::sqrt(1.0 + t * t);
                double sn = cs * t;
                for (int i = 0; i < m; ++i) {
                    Complex vp = a(i, p), vq = a(i, q);
                    a(i, p) = cs * vp - sn * std::conj(phase) * vq;
                    a(i, q) = sn * phase * vp + cs * vq;
                }
            }
        }
        if (!rotated) break;
    }
    std::vector<double> sv(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int i = 0; i < m; ++i) s += std::norm(a(i, j));
        sv[static_cast<size_t>(j)] = std::sqrt(s);
    }
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

/// Numerical rank with relative singular-value threshold.
inline RankInfo numeric_rank(const CMatrix& a, double rel_threshold = 1e-8) {
    RankInfo info;
    info.singular_values = singular_values(a);
    if (info.singular_values.empty()) return info;
    double smax = info.singular_values.front();
    info.threshold = rel_threshold * std::max(smax, 1e-300);
    int r = 0;
    for (double s : info.singular_values)
        if (s > info.threshold) ++r;
    info.rank = r;
    double kept = r > 0 ? info.singular_values[static_cast<size_t>(r - 1)] : 0.0;
    double dropped = r < static_cast<int>(info.singular_values.size())
                         ? info.singular_values[static_cast<size_t>(r)]
                         : 0.0;
    info.gap_ratio = dropped > 0 ? kept / dropped : (kept > 0 ? 1e308 : 0.0);
    // values hugging the cut from either side make the rank call fragile
    info.deficiency_warning =
        (r > 0 && kept < 100 * info.threshold) || (dropped > 0.01 * info.threshold);
    return info;
}

template <typename F>
bool exact_is_zero_generic(const F& v) {
    if constexpr (requires(const F& x) { x.is_zero(); })
        return v.is_zero();
    else
        return v == F(0);
}

/// Exact rank over a field (Rational, GaussianRational, ...) by Gaussian
/// elimination with first-nonzero pivoting.
template <typename F>
int exact_rank(Matrix<F> a) {
    int m = a.rows(), n = a.cols();
    int rank = 0;
    for (int col = 0; col < n && rank < m; ++col) {
        int piv = -1;
        for (int i = rank; i < m; ++i) {
            if (!exact_is_zero_generic(a(i, col))) {
                piv = i;
                break;
            }
        }
        if (piv < 0) continue;
        if (piv != rank)
            for (int j = col; j < n; ++j) std::swap(a(piv, j), a(rank, j));
        for (int i = rank + 1; i < m; ++i) {
            if (exact_is_zero_generic(a(i, col))) continue;
            F f = a(i, col) / a(rank, col);
            for (int j = col; j < n; ++j) a(i, j) -= f * a(rank, j);
        }
        ++rank;
    }
    return rank;
}

} // namespace quantsurf
