#include "quantsurf/flatmodel.hpp"

#include <cmath>

#include "quantsurf/errors.hpp"

namespace quantsurf::flatmodel {

int quadrant_of(double x, double y) {
    if (x == 0.0 || y == 0.0) throw OnAxis("quadrant undefined");
    if (x > 0) return y > 0 ? 1 : 4;
    return y > 0 ? 2 : 3;
}

HBPoint hb_coords(double x, double y) {
    if (x * y == 0.0) throw OnAxis("hb coordinates need x*y != 0");
    return {x * y, 0.5 * std::log(std::abs(x / y))};
}

std::array<double, 2> hb_inverse(const HBPoint& p, int quadrant) {
    double r = std::sqrt(std::abs(p.h));
    double eb = std::exp(p.beta), ebi = std::exp(-p.beta);
    switch (quadrant) {
        case 1: return {r * eb, r * ebi};
        case 2: return {-r * eb, r * ebi};
        case 3: return {-r * eb, -r * ebi};
        case 4: return {r * eb, -r * ebi};
        default: throw OutOfRange("quadrant must be 1..4");
    }
}

Complex flat_section_eval(const LocalFlatSection& s, double x, double y) {
    if (x == 0.0 || y == 0.0) return Complex(0, 0);
    int q = quadrant_of(x, y);
    double h = x * y;
    double phase = -0.5 * h * std::log(std::abs(x / y));
    return s.a[static_cast<size_t>(q - 1)](h) * std::polar(1.0, phase);
}

double flat_pde_residual(const Section& sigma, double x, double y, double step) {
    // centered differences stay inside the quadrant
    if (std::abs(x) <= step || std::abs(y) <= step)
        throw OutOfRange("step too large for this point");
    Complex Y = x * (sigma(x + step, y) - sigma(x - step, y)) / (2 * step) -
                y * (sigma(x, y + step) - sigma(x, y - step)) / (2 * step);
    return std::abs(Y + Complex(0, 1) * (x * y) * sigma(x, y));
}

double flat_pde_residual(const LocalFlatSection& s, double x, double y, double step) {
    return flat_pde_residual(
        Section([&s](double u, double v) { return flat_section_eval(s, u, v); }), x, y, step);
}

FlatnessReport taylor_flatness_test(const std::function<double(double)>& f, int k_max,
                                    double h0, int m_max) {
    std::vector<double> fs(static_cast<size_t>(m_max) + 1);
    double h = h0;
    for (int m = 0; m <= m_max; ++m) {
        fs[static_cast<size_t>(m)] = std::abs(f(h));
        h *= 0.5;
    }
    FlatnessReport report;
    for (int k = 0; k <= k_max; ++k) {
        std::vector<double> ratio(fs.size());
        double hk = std::pow(h0, k);
        for (int m = 0; m <= m_max; ++m) {
            ratio[static_cast<size_t>(m)] = fs[static_cast<size_t>(m)] == 0.0 ? 0.0
                                            : fs[static_cast<size_t>(m)] / hk;
            hk /= std::pow(2.0, k);
        }
        // first index from which the ratios never increase again
        int settled = m_max;
        for (int m = m_max - 1; m >= 0; --m) {
            if (ratio[static_cast<size_t>(m + 1)] <= ratio[static_cast<size_t>(m)] * (1 + 1e-12))
                settled = m;
            else
                break;
        }
        FlatnessOrderResult res;
        res.k = k;
        res.settled_at = settled;
        res.final_ratio = ratio.back();
        double anchor = ratio[static_cast<size_t>(settled)];
        res.pass = settled <= m_max - 5 &&
                   (res.final_ratio == 0.0 || anchor == 0.0 || res.final_ratio < 0.9 * anchor);
        report.orders.push_back(res);
    }
    return report;
}

Matrix<Rational> taylor_recursion_system(int deg) {
    auto in_range = [deg](int i, int j) { return i >= 0 && j >= 0 && i + j <= deg; };
    // unknown ids: a_ij first, then b_ij, in (i, j) lexicographic order
    auto id_of = [deg](int i, int j, bool b) {
        int id = 0;
        for (int p = 0; p < i; ++p) id += deg + 1 - p;
        id += j;
        int per_family = (deg + 1) * (deg + 2) / 2;
        return b ? id + per_family : id;
    };
    int per_family = (deg + 1) * (deg + 2) / 2;
    int ncols = 2 * per_family;

    struct Row {
        int ia = -1, ib = -1;
        Rational ca, cb;
    };
    std::vector<Row> rows;
    for (int i = 0; i <= deg + 2; ++i) {
        for (int j = 0; i + j <= deg + 2; ++j) {
            // (i-j) a_ij - b_{i-1,j-1} = 0
            Row ra;
            if (in_range(i, j) && i != j) {
                ra.ia = id_of(i, j, false);
                ra.ca = Rational(i - j);
            }
            if (in_range(i - 1, j - 1)) {
                ra.ib = id_of(i - 1, j - 1, true);
                ra.cb = Rational(-1);
            }
            if (ra.ia >= 0 || ra.ib >= 0) rows.push_back(ra);
            // (i-j) b_ij - a_{i-1,j-1} = 0
            Row rb;
            if (in_range(i, j) && i != j) {
                rb.ia = id_of(i, j, true);
                rb.ca = Rational(i - j);
            }
            if (in_range(i - 1, j - 1)) {
                rb.ib = id_of(i - 1, j - 1, false);
                rb.cb = Rational(-1);
            }
            if (rb.ia >= 0 || rb.ib >= 0) rows.push_back(rb);
        }
    }
    Matrix<Rational> m(static_cast<int>(rows.size()), ncols);
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
        const Row& row = rows[static_cast<size_t>(r)];
        if (row.ia >= 0) m(r, row.ia) = row.ca;
        if (row.ib >= 0) m(r, row.ib) = row.cb;
    }
    return m;
}

int taylor_recursion_nullity(int deg) {
    Matrix<Rational> m = taylor_recursion_system(deg);
    return m.cols() - exact_rank(std::move(m));
}

} // namespace quantsurf::flatmodel
