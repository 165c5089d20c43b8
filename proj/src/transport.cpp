#include "quantsurf/transport.hpp"

#include <algorithm>
#include <cmath>

#include "quantsurf/errors.hpp"

namespace quantsurf::transport {

using geometry::Chart;
using geometry::SurfaceSystem;
using trace::Path;
using trace::Pt;

namespace {

struct Hermite {
    Pt p0, p1, m0, m1;

    Pt at(double s) const {
        double s2 = s * s, s3 = s2 * s;
        double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        return {h00 * p0.x + h10 * m0.x + h01 * p1.x + h11 * m1.x,
                h00 * p0.y + h10 * m0.y + h01 * p1.y + h11 * m1.y};
    }
    Pt deriv(double s) const {
        double s2 = s * s;
        double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
        double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
        return {d00 * p0.x + d10 * m0.x + d01 * p1.x + d11 * m1.x,
                d00 * p0.y + d10 * m0.y + d01 * p1.y + d11 * m1.y};
    }
};

template <typename FormFn>
double simpson_segment(const FormFn& f, const Hermite& seg, double a, double b, double fa,
                       double fm, double fb, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(seg, lm), frm = f(seg, rm);
    double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    double left = (m - a) / 6 * (fa + 4 * flm + fm);
    double right = (b - m) / 6 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15 * tol)
        return left + right + (left + right - whole) / 15;
    return simpson_segment(f, seg, a, m, fa, flm, fm, tol / 2, depth - 1) +
           simpson_segment(f, seg, m, b, fm, frm, fb, tol / 2, depth - 1);
}

template <typename FormFn>
double integrate_path(const FormFn& form, const Path& path) {
    double acc = 0;
    for (size_t i = 0; i + 1 < path.pts.size(); ++i) {
        Hermite seg;
        seg.p0 = path.pts[i];
        seg.p1 = path.pts[i + 1];
        double chord = std::hypot(seg.p1.x - seg.p0.x, seg.p1.y - seg.p0.y);
        if (chord == 0) continue;
        seg.m0 = {path.tangents[i].x * chord, path.tangents[i].y * chord};
        seg.m1 = {path.tangents[i + 1].x * chord, path.tangents[i + 1].y * chord};
        double fa = form(seg, 0.0), fm = form(seg, 0.5), fb = form(seg, 1.0);
        acc += simpson_segment(form, seg, 0.0, 1.0, fa, fm, fb, 1e-14, 10);
    }
    return acc;
}

} // namespace

double theta_integral(const Chart& chart, const Path& path) {
    auto form = [&chart](const Hermite& seg, double s) {
        Pt p = seg.at(s);
        Pt d = seg.deriv(s);
        return chart.theta_x(p.x, p.y) * d.x + chart.theta_y(p.x, p.y) * d.y;
    };
    return integrate_path(form, path);
}

double enclosed_area(const Chart& chart, const Path& path) {
    // primitive x * w dy works for a constant density w
    double w = chart.omega(0.5 * (chart.domain.x0 + chart.domain.x1),
                           0.5 * (chart.domain.y0 + chart.domain.y1));
    auto form = [w](const Hermite& seg, double s) {
        Pt p = seg.at(s);
        Pt d = seg.deriv(s);
        return w * p.x * d.y;
    };
    return integrate_path(form, path);
}

namespace {

void check_on_leaf(const SurfaceSystem& sys, const Path& path, double leaf_tol) {
    const Chart& chart = sys.tracing_chart();
    double c = path.level;
    for (size_t i = 0; i < path.pts.size(); i += 3) {
        double f = chart.F(path.pts[i].x, path.pts[i].y);
        if (std::abs(f - c) > leaf_tol * (1 + std::abs(c)))
            throw PathLeavesLeaf("level deviation " + std::to_string(std::abs(f - c)));
    }
}

} // namespace

TransportFactor parallel_transport(const SurfaceSystem& sys, const Path& path, double leaf_tol) {
    check_on_leaf(sys, path, leaf_tol);
    TransportFactor t;
    t.phase = theta_integral(sys.tracing_chart(), path);
    t.value = std::polar(1.0, t.phase);
    return t;
}

TransportFactor parallel_transport(const SurfaceSystem& sys,
                                   const std::function<std::array<double, 4>(double)>& curve,
                                   double t0, double t1, double leaf_tol) {
    const Chart& chart = sys.tracing_chart();
    // plain adaptive Simpson on the parametrized curve
    std::function<double(double)> g = [&](double t) {
        auto c = curve(t);
        return chart.theta_x(c[0], c[1]) * c[2] + chart.theta_y(c[0], c[1]) * c[3];
    };
    double f_ref = chart.F(curve(t0)[0], curve(t0)[1]);
    for (int i = 0; i <= 16; ++i) {
        auto c = curve(t0 + (t1 - t0) * i / 16.0);
        if (std::abs(chart.F(c[0], c[1]) - f_ref) > leaf_tol * (1 + std::abs(f_ref)))
            throw PathLeavesLeaf("curve leaves the level set");
    }
    std::function<double(double, double, double, double, double, int)> rec =
        [&](double a, double b, double fa, double fm, double fb, int depth) -> double {
        double m = 0.5 * (a + b);
        double flm = g(0.5 * (a + m)), frm = g(0.5 * (m + b));
        double whole = (b - a) / 6 * (fa + 4 * fm + fb);
        double left = (m - a) / 6 * (fa + 4 * flm + fm);
        double right = (b - m) / 6 * (fm + 4 * frm + fb);
        if (depth <= 0 || std::abs(left + right - whole) < 1e-13)
            return left + right + (left + right - whole) / 15;
        return rec(a, m, fa, flm, fm, depth - 1) + rec(m, b, fm, frm, fb, depth - 1);
    };
    TransportFactor t;
    t.phase = rec(t0, t1, g(t0), g(0.5 * (t0 + t1)), g(t1), 24);
    t.value = std::polar(1.0, t.phase);
    return t;
}

TransportFactor loop_holonomy(const SurfaceSystem& sys, const Path& leaf, double leaf_tol) {
    TransportFactor t = parallel_transport(sys, leaf, leaf_tol);
    t.phase += sys.homology_offset * (leaf.winding_x + leaf.winding_y);
    t.value = std::polar(1.0, t.phase);
    return t;
}

cech::Poly poly_fit(const std::vector<std::pair<double, double>>& samples, int degree,
                    double* residual) {
    int n = static_cast<int>(samples.size());
    int d = std::min(degree, n - 1);
    // scale to [-1, 1] for conditioning, then expand back to monomials
    double lo = samples.front().first, hi = samples.back().first;
    for (const auto& s : samples) {
        lo = std::min(lo, s.first);
        hi = std::max(hi, s.first);
    }
    double mid = 0.5 * (lo + hi), half = std::max(0.5 * (hi - lo), 1e-300);
    int m = d + 1;
    std::vector<std::vector<double>> ata(static_cast<size_t>(m),
                                         std::vector<double>(static_cast<size_t>(m) + 1, 0.0));
    for (const auto& [t, a] : samples) {
        double u = (t - mid) / half;
        std::vector<double> pw(static_cast<size_t>(m));
        double p = 1;
        for (int k = 0; k < m; ++k) {
            pw[static_cast<size_t>(k)] = p;
            p *= u;
        }
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j)
                ata[static_cast<size_t>(i)][static_cast<size_t>(j)] +=
                    pw[static_cast<size_t>(i)] * pw[static_cast<size_t>(j)];
            ata[static_cast<size_t>(i)][static_cast<size_t>(m)] += pw[static_cast<size_t>(i)] * a;
        }
    }
    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int r = col + 1; r < m; ++r)
            if (std::abs(ata[static_cast<size_t>(r)][static_cast<size_t>(col)]) >
                std::abs(ata[static_cast<size_t>(piv)][static_cast<size_t>(col)]))
                piv = r;
        std::swap(ata[static_cast<size_t>(col)], ata[static_cast<size_t>(piv)]);
        double pv = ata[static_cast<size_t>(col)][static_cast<size_t>(col)];
        if (std::abs(pv) < 1e-280) continue;
        for (int r = 0; r < m; ++r) {
            if (r == col) continue;
            double f = ata[static_cast<size_t>(r)][static_cast<size_t>(col)] / pv;
            for (int c = col; c <= m; ++c)
                ata[static_cast<size_t>(r)][static_cast<size_t>(c)] -=
                    f * ata[static_cast<size_t>(col)][static_cast<size_t>(c)];
        }
    }
    std::vector<double> cu(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
        double pv = ata[static_cast<size_t>(i)][static_cast<size_t>(i)];
        if (std::abs(pv) > 1e-280)
            cu[static_cast<size_t>(i)] = ata[static_cast<size_t>(i)][static_cast<size_t>(m)] / pv;
    }
    // expand sum c_k ((t - mid)/half)^k into monomials in t
    cech::Poly out(static_cast<size_t>(m), 0.0);
    std::vector<double> basis = {1.0};  // ((t - mid)/half)^k coefficients
    for (int k = 0; k < m; ++k) {
        for (size_t j = 0; j < basis.size(); ++j) out[j] += cu[static_cast<size_t>(k)] * basis[j];
        // multiply basis by (t - mid)/half
        std::vector<double> next(basis.size() + 1, 0.0);
        for (size_t j = 0; j < basis.size(); ++j) {
            next[j] += basis[j] * (-mid / half);
            next[j + 1] += basis[j] / half;
        }
        basis = std::move(next);
    }
    if (residual) {
        double worst = 0;
        for (const auto& [t, a] : samples)
            worst = std::max(worst, std::abs(cech::poly_eval(out, t) - a));
        *residual = worst;
    }
    return out;
}

ActionProfile action_profile(const SurfaceSystem& sys, const EdgeGeometry& edge, int n_samples,
                             int fit_degree) {
    if (n_samples < 8) throw QuantError("action profile needs at least 8 samples");
    ActionProfile prof;
    prof.edge_id = edge.edge_id;
    prof.t_lo = 0;
    prof.t_hi = edge.t_len;

    // the sampler outlives this call: it shares the tracer and refers to
    // the system owned by the caller's analysis
    auto tracer = std::make_shared<const trace::Tracer>(sys);
    const SurfaceSystem* sys_ptr = &sys;
    auto sample_at = [tracer, sys_ptr, edge](double t) {
        double level = edge.anchor_value + edge.direction * t;
        trace::Pt seed = edge.seed(t);
        Path leaf = tracer->trace_leaf(seed, level);
        return loop_holonomy(*sys_ptr, leaf).phase;
    };
    prof.sampler = sample_at;

    double margin = 0.03 * edge.t_len;
    for (int i = 0; i < n_samples; ++i) {
        // Chebyshev nodes keep the fit stable near the ends
        double u = std::cos(3.14159265358979323846 * (n_samples - 1 - i + 0.5) / n_samples);
        double t = 0.5 * (prof.t_lo + margin + prof.t_hi - margin) +
                   0.5 * (prof.t_hi - prof.t_lo - 2 * margin) * u;
        prof.samples.emplace_back(t, sample_at(t));
    }
    prof.fit = poly_fit(prof.samples, fit_degree, &prof.fit_residual);
    return prof;
}

std::vector<BSLeaf> find_bs_leaves(const ActionProfile& profile, double bs_tol, int max_bisect) {
    const double two_pi = 2 * 3.14159265358979323846;
    std::vector<BSLeaf> out;
    if (profile.samples.size() < 2) return out;

    // endpoint (singular) lattice hits first
    auto flag_end = [&](double t, double a_end) {
        double n = std::round(a_end / two_pi);
        if (std::abs(a_end - n * two_pi) < bs_tol) {
            BSLeaf b;
            b.edge_id = profile.edge_id;
            b.t = t;
            b.level = static_cast<long long>(n);
            b.singular = true;
            out.push_back(b);
        }
    };
    if (profile.has_end_lo) flag_end(profile.t_lo, profile.end_lo);

    // interior roots: bracket between samples, then bisect the sampler
    std::vector<std::pair<double, double>> pts = profile.samples;
    std::sort(pts.begin(), pts.end());
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        double a0 = pts[i].second, a1 = pts[i + 1].second;
        long long n0 = static_cast<long long>(std::floor(std::min(a0, a1) / two_pi));
        long long n1 = static_cast<long long>(std::ceil(std::max(a0, a1) / two_pi));
        for (long long n = n0; n <= n1; ++n) {
            double target = n * two_pi;
            double lo = pts[i].first, hi = pts[i + 1].first;
            double flo = a0 - target, fhi = a1 - target;
            if (std::abs(flo) < bs_tol) {  // lattice hit at the sample itself
                BSLeaf b;
                b.edge_id = profile.edge_id;
                b.t = lo;
                b.level = n;
                out.push_back(b);
                continue;
            }
            if (std::abs(fhi) < bs_tol || flo * fhi > 0) continue;
            double t = 0.5 * (lo + hi), ft = 0;
            for (int it = 0; it < max_bisect; ++it) {
                t = 0.5 * (lo + hi);
                ft = profile.sampler(t) - target;
                if (std::abs(ft) < bs_tol) break;
                if (ft * flo < 0) {
                    hi = t;
                } else {
                    lo = t;
                    flo = ft;
                }
            }
            BSLeaf b;
            b.edge_id = profile.edge_id;
            b.t = t;
            b.level = n;
            b.singular = false;
            out.push_back(b);
        }
    }
    if (!pts.empty()) {
        double a_last = pts.back().second;
        long long n = static_cast<long long>(std::llround(a_last / two_pi));
        if (std::abs(a_last - static_cast<double>(n) * two_pi) < bs_tol) {
            BSLeaf b;
            b.edge_id = profile.edge_id;
            b.t = pts.back().first;
            b.level = n;
            out.push_back(b);
        }
    }
    if (profile.has_end_hi) flag_end(profile.t_hi, profile.end_hi);
    std::sort(out.begin(), out.end(), [](const BSLeaf& a, const BSLeaf& b) { return a.t < b.t; });
    double span = profile.t_hi - profile.t_lo;
    std::vector<BSLeaf> dedup;
    for (const BSLeaf& b : out) {
        if (!dedup.empty() && std::abs(b.t - dedup.back().t) < 1e-9 * span &&
            b.level == dedup.back().level)
            continue;
        dedup.push_back(b);
    }
    return dedup;
}

} // namespace quantsurf::transport
