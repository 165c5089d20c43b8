#include "quantsurf/normalform.hpp"

#include <cmath>

#include "quantsurf/errors.hpp"
#include "quantsurf/linalg.hpp"

namespace quantsurf::geometry {

namespace {

Series2 poisson(const Series2& a, const Series2& b) {
    return a.dx() * b.dy() - a.dy() * b.dx();
}

/// g composed with the time-1 flow of the Hamiltonian chi (Lie series).
Series2 lie_flow(const Series2& g, const Series2& chi, int chi_degree) {
    Series2 acc = g;
    Series2 term = g;
    double fact = 1;
    int K = g.degree();
    int max_m = chi_degree > 2 ? K / (chi_degree - 2) + 1 : K + 1;
    for (int m = 1; m <= max_m; ++m) {
        term = poisson(term, chi);
        fact *= m;
        acc += (1.0 / fact) * term;
    }
    return acc;
}

bool is_constant_expr(const Expr& e, const Rect& dom, double& value) {
    double v0 = e(0.5 * (dom.x0 + dom.x1), 0.5 * (dom.y0 + dom.y1));
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; j <= 4; ++j) {
            double x = dom.x0 + dom.width() * i / 4.0;
            double y = dom.y0 + dom.height() * j / 4.0;
            if (std::abs(e(x, y) - v0) > 1e-12 * (1 + std::abs(v0))) return false;
        }
    value = v0;
    return true;
}

void degree_slice(const Series2& s, int k, std::vector<double>& out) {
    out.assign(static_cast<size_t>(k) + 1, 0.0);
    for (int j = 0; j <= k; ++j) out[static_cast<size_t>(j)] = s.at(k - j, j);
}

void add_degree_slice(Series2& s, int k, const std::vector<double>& v, double scale = 1.0) {
    for (int j = 0; j <= k; ++j) s.at(k - j, j) += scale * v[static_cast<size_t>(j)];
}

/// Least-squares solve of A chi = rhs on one degree slice, dropping the
/// near-null (resonant) directions so they stay in the normal form.
std::vector<double> solve_slice(const CMatrix& A, const std::vector<double>& rhs) {
    int n = A.rows();
    std::vector<std::vector<Complex>> M(static_cast<size_t>(n),
                                        std::vector<Complex>(static_cast<size_t>(n) + 1));
    double pivot_floor = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Complex acc(0, 0);
            for (int r = 0; r < n; ++r) acc += std::conj(A(r, i)) * A(r, j);
            M[static_cast<size_t>(i)][static_cast<size_t>(j)] = acc;
        }
        Complex acc(0, 0);
        for (int r = 0; r < n; ++r) acc += std::conj(A(r, i)) * rhs[static_cast<size_t>(r)];
        M[static_cast<size_t>(i)][static_cast<size_t>(n)] = acc;
        pivot_floor =
            std::max(pivot_floor, std::abs(M[static_cast<size_t>(i)][static_cast<size_t>(i)]));
    }
    pivot_floor *= 1e-10;
    std::vector<double> x(static_cast<size_t>(n), 0.0);
    std::vector<bool> used(static_cast<size_t>(n), false);
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        double best = pivot_floor;
        for (int r = 0; r < n; ++r) {
            if (used[static_cast<size_t>(r)]) continue;
            if (std::abs(M[static_cast<size_t>(r)][static_cast<size_t>(col)]) > best) {
                best = std::abs(M[static_cast<size_t>(r)][static_cast<size_t>(col)]);
                piv = r;
            }
        }
        if (piv < 0) continue;
        used[static_cast<size_t>(piv)] = true;
        for (int r = 0; r < n; ++r) {
            if (r == piv) continue;
            Complex f = M[static_cast<size_t>(r)][static_cast<size_t>(col)] /
                        M[static_cast<size_t>(piv)][static_cast<size_t>(col)];
            if (f == Complex(0, 0)) continue;
            for (int cc = 0; cc <= n; ++cc)
                M[static_cast<size_t>(r)][static_cast<size_t>(cc)] -=
                    f * M[static_cast<size_t>(piv)][static_cast<size_t>(cc)];
        }
    }
    for (int r = 0; r < n; ++r) {
        if (!used[static_cast<size_t>(r)]) continue;
        int lead = -1;
        for (int c = 0; c < n; ++c) {
            if (std::abs(M[static_cast<size_t>(r)][static_cast<size_t>(c)]) > pivot_floor) {
                lead = c;
                break;
            }
        }
        if (lead < 0) continue;
        x[static_cast<size_t>(lead)] = (M[static_cast<size_t>(r)][static_cast<size_t>(n)] /
                                        M[static_cast<size_t>(r)][static_cast<size_t>(lead)])
                                           .real();
    }
    return x;
}

} // namespace

std::array<double, 2> EliassonChart::to_canonical(double x, double y) const {
    return {map_x.eval(x - center_x, y - center_y), map_y.eval(x - center_x, y - center_y)};
}

std::array<double, 2> EliassonChart::from_canonical(double xt, double yt) const {
    double u = 0, v = 0;  // offsets
    Series2 jxx = map_x.dx(), jxy = map_x.dy(), jyx = map_y.dx(), jyy = map_y.dy();
    for (int it = 0; it < 60; ++it) {
        double fx = map_x.eval(u, v) - xt;
        double fy = map_y.eval(u, v) - yt;
        if (std::abs(fx) + std::abs(fy) < 1e-14 * (1 + std::abs(xt) + std::abs(yt))) break;
        double a = jxx.eval(u, v), b = jxy.eval(u, v);
        double c = jyx.eval(u, v), d = jyy.eval(u, v);
        double det = a * d - b * c;
        if (std::abs(det) < 1e-300) throw NonConvergence("chart inversion hit a fold");
        u -= (d * fx - b * fy) / det;
        v -= (-c * fx + a * fy) / det;
    }
    return {center_x + u, center_y + v};
}

double EliassonChart::symplectic_residual(double x, double y) const {
    double u = x - center_x, v = y - center_y;
    double a = map_x.dx().eval(u, v), b = map_x.dy().eval(u, v);
    double c = map_y.dx().eval(u, v), d = map_y.dy().eval(u, v);
    return std::abs(a * d - b * c - omega_density);
}

EliassonChart eliasson_chart(const SurfaceSystem& sys, const SingularPoint& p, int degree) {
    const Chart& chart = sys.charts[static_cast<size_t>(p.chart_index)];
    double w = 0;
    if (!is_constant_expr(chart.omega, chart.domain, w))
        throw Unsupported("canonical coordinates need a constant area density on the chart");
    int K = degree;

    Series2 X = Series2::variable_x(K, 0.0);
    Series2 Y = Series2::variable_y(K, 0.0);
    Series2 F = [&] {
        Series2 xs = X;
        xs += Series2(K, p.x);
        Series2 ys = Y;
        ys += Series2(K, p.y);
        return chart.F.eval<Series2>(xs, ys);
    }();
    F.at(0, 0) = 0;
    F.at(1, 0) = 0;  // critical point: residual linear part is numerical noise
    F.at(0, 1) = 0;

    // linear canonical step from the Hessian
    double hxx = 2 * F.at(2, 0), hxy = F.at(1, 1), hyy = 2 * F.at(0, 2);
    double tr = hxx + hyy, det = hxx * hyy - hxy * hxy;
    double disc = std::sqrt(std::max(0.0, tr * tr - 4 * det));
    double l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);
    auto eigvec = [&](double l) {
        double ex, ey;
        if (std::abs(hxy) > 1e-13 * (std::abs(hxx) + std::abs(hyy))) {
            ex = hxy;
            ey = l - hxx;
        } else if (std::abs(hxx - l) < std::abs(hyy - l)) {
            ex = 1;
            ey = 0;
        } else {
            ex = 0;
            ey = 1;
        }
        double n = std::hypot(ex, ey);
        ex /= n;
        ey /= n;
        if (ex < 0 || (ex == 0 && ey < 0)) {
            ex = -ex;
            ey = -ey;
        }
        return std::array<double, 2>{ex, ey};
    };

    bool hyperbolic = det < 0;
    auto e1 = eigvec(l1), e2 = eigvec(l2);
    double L[2][2];
    if (hyperbolic) {
        double s1 = std::sqrt(l1), s2 = std::sqrt(-l2);
        L[0][0] = s1 * e1[0] - s2 * e2[0];
        L[0][1] = s1 * e1[1] - s2 * e2[1];
        L[1][0] = s1 * e1[0] + s2 * e2[0];
        L[1][1] = s1 * e1[1] + s2 * e2[1];
    } else {
        double s1 = std::sqrt(std::abs(l1)), s2 = std::sqrt(std::abs(l2));
        L[0][0] = s1 * e1[0];
        L[0][1] = s1 * e1[1];
        L[1][0] = s2 * e2[0];
        L[1][1] = s2 * e2[1];
    }
    double detL = L[0][0] * L[1][1] - L[0][1] * L[1][0];
    if (detL * w < 0) {
        std::swap(L[0][0], L[1][0]);
        std::swap(L[0][1], L[1][1]);
        detL = -detL;
    }
    double scale = std::sqrt(std::abs(w / detL));
    for (auto& row : L)
        for (double& v : row) v *= scale;
    detL = L[0][0] * L[1][1] - L[0][1] * L[1][0];

    Series2 map_x = L[0][0] * X + L[0][1] * Y;
    Series2 map_y = L[1][0] * X + L[1][1] * Y;
    double inv[2][2] = {{L[1][1] / detL, -L[0][1] / detL}, {-L[1][0] / detL, L[0][0] / detL}};
    Series2 Fc = F.substitute(inv[0][0] * X + inv[0][1] * Y, inv[1][0] * X + inv[1][1] * Y);

    // degree-by-degree removal of the non-resonant terms
    for (int k = 3; k <= K; ++k) {
        Series2 Q(K, 0.0);
        if (hyperbolic)
            Q.at(1, 1) = Fc.at(1, 1);
        else {
            Q.at(2, 0) = Fc.at(2, 0);
            Q.at(0, 2) = Fc.at(0, 2);
        }
        std::vector<double> rhs;
        degree_slice(Fc, k, rhs);
        bool all_zero = true;
        for (double c : rhs)
            if (std::abs(c) > 1e-300) all_zero = false;
        if (all_zero) continue;

        int n = k + 1;
        CMatrix A(n, n);
        for (int j = 0; j <= k; ++j) {
            Series2 mono(K, 0.0);
            mono.at(k - j, j) = 1.0;
            Series2 img = poisson(Q, mono);
            std::vector<double> col;
            degree_slice(img, k, col);
            for (int i = 0; i < n; ++i) A(i, j) = col[static_cast<size_t>(i)];
        }
        std::vector<double> chi_k = solve_slice(A, rhs);
        bool chi_zero = true;
        for (double c : chi_k)
            if (c != 0.0) chi_zero = false;
        if (chi_zero) continue;

        Series2 chi(K, 0.0);
        add_degree_slice(chi, k, chi_k, -1.0);  // {Q, chi} cancels the removable slice
        Fc = lie_flow(Fc, chi, k);
        Series2 U = lie_flow(X, -1.0 * chi, k);
        Series2 V = lie_flow(Y, -1.0 * chi, k);
        Series2 new_x = U.substitute(map_x, map_y);
        Series2 new_y = V.substitute(map_x, map_y);
        map_x = new_x;
        map_y = new_y;
    }

    EliassonChart ec;
    ec.singular_point_id = p.id;
    ec.kind = hyperbolic ? SingKind::Hyperbolic : SingKind::Elliptic;
    ec.center_x = p.x;
    ec.center_y = p.y;
    ec.degree = K;
    ec.map_x = map_x;
    ec.map_y = map_y;
    ec.omega_density = w;

    // validity radius: shrink until the symplectic defect passes
    double margin_x = std::min(p.x - chart.domain.x0, chart.domain.x1 - p.x);
    double margin_y = std::min(p.y - chart.domain.y0, chart.domain.y1 - p.y);
    if (chart.period_x > 0) margin_x = 0.25 * chart.period_x;
    if (chart.period_y > 0) margin_y = 0.25 * chart.period_y;
    double sigma = std::sqrt(std::abs(detL));
    double r = 0.3 * std::min(margin_x, margin_y) * sigma;
    double fscale = 1 + std::abs(chart.F(p.x, p.y));
    for (int attempt = 0; attempt < 10; ++attempt) {
        double worst_sym = 0, worst_level = 0;
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                double xt = -r + 2 * r * i / 9.0;
                double yt = -r + 2 * r * j / 9.0;
                auto [x, y] = ec.from_canonical(xt, yt);
                worst_sym = std::max(worst_sym, ec.symplectic_residual(x, y));
                // the moment map must be constant on the Q level through (xt, yt)
                double q = hyperbolic ? xt * yt : xt * xt + yt * yt;
                double rr = std::sqrt(std::abs(q));
                auto [xr, yr] = hyperbolic
                                    ? ec.from_canonical(q < 0 ? -rr : rr, rr)
                                    : ec.from_canonical(rr, 0.0);
                worst_level = std::max(worst_level, std::abs(chart.F(x, y) - chart.F(xr, yr)));
            }
        }
        if (worst_sym < 1e-9 * std::abs(w) && worst_level < 1e-9 * fscale) break;
        r *= 0.5;
    }
    ec.cross_radius = r;
    return ec;
}

} // namespace quantsurf::geometry
