#include "quantsurf/trace.hpp"

#include <cmath>

#include "quantsurf/errors.hpp"

namespace quantsurf::trace {

using geometry::Chart;
using geometry::SurfaceSystem;

Tracer::Tracer(const SurfaceSystem& sys)
    : sys_(&sys), chart_(&sys.tracing_chart()), step_(0), f_scale_(0), h_scale_(0) {
    step_ = sys.tol.trace_step_frac * chart_->diameter();
    // coarse scale estimates for the adaptive step near saddles
    double gsum = 0, hsum = 0;
    int n = 16, cnt = 0;
    for (int i = 1; i < n; ++i) {
        for (int j = 1; j < n; ++j) {
            double x = chart_->domain.x0 + chart_->domain.width() * i / n;
            double y = chart_->domain.y0 + chart_->domain.height() * j / n;
            Jet2 f = chart_->F.eval<Jet2>(Jet2::var_x(x), Jet2::var_y(y));
            gsum += std::hypot(f.dx, f.dy);
            hsum += std::abs(f.dxx) + 2 * std::abs(f.dxy) + std::abs(f.dyy);
            ++cnt;
        }
    }
    f_scale_ = gsum / cnt;
    h_scale_ = std::max(hsum / cnt, 1e-12);
}

double Tracer::value(Pt p) const { return chart_->F(p.x, p.y); }

Pt Tracer::gradient(Pt p) const {
    Jet2 f = chart_->F.eval<Jet2>(Jet2::var_x(p.x), Jet2::var_y(p.y));
    return {f.dx, f.dy};
}

Pt Tracer::flow_dir(Pt p) const {
    Jet2 f = chart_->F.eval<Jet2>(Jet2::var_x(p.x), Jet2::var_y(p.y));
    double w = chart_->omega(p.x, p.y);
    double vx = -f.dy / w, vy = f.dx / w;
    double n = std::hypot(vx, vy);
    if (n == 0) throw TracingFailure("flow direction undefined at a critical point");
    return {vx / n, vy / n};
}

Pt Tracer::project(Pt p, double c) const {
    for (int it = 0; it < 12; ++it) {
        Jet2 f = chart_->F.eval<Jet2>(Jet2::var_x(p.x), Jet2::var_y(p.y));
        double r = f.v - c;
        if (std::abs(r) < sys_->tol.corrector_tol * (1 + std::abs(c))) return p;
        double g2 = f.dx * f.dx + f.dy * f.dy;
        if (g2 < 1e-300) throw TracingFailure("corrector stalled at a critical point");
        p.x -= f.dx * r / g2;
        p.y -= f.dy * r / g2;
    }
    Jet2 f = chart_->F.eval<Jet2>(Jet2::var_x(p.x), Jet2::var_y(p.y));
    if (std::abs(f.v - c) > 100 * sys_->tol.corrector_tol * (1 + std::abs(c)))
        throw TracingFailure("corrector failed to reach the level set");
    return p;
}

Pt Tracer::period_delta(Pt a, Pt b) const {
    Pt d{a.x - b.x, a.y - b.y};
    auto reduce = [](double v, double period) {
        if (period <= 0) return v;
        v = std::fmod(v, period);
        if (v > 0.5 * period) v -= period;
        if (v < -0.5 * period) v += period;
        return v;
    };
    d.x = reduce(d.x, chart_->period_x);
    d.y = reduce(d.y, chart_->period_y);
    return d;
}

Pt Tracer::step_once(Pt p, double level, bool reversed, double& out_step) const {
    Jet2 f = chart_->F.eval<Jet2>(Jet2::var_x(p.x), Jet2::var_y(p.y));
    double g = std::hypot(f.dx, f.dy);
    double hess = std::abs(f.dxx) + 2 * std::abs(f.dxy) + std::abs(f.dyy);
    // curvature of the level set grows like hess/|grad|: shorten the step
    double h = step_;
    if (hess > 0) h = std::min(h, 0.2 * g / std::max(hess, h_scale_ * 1e-3));
    h = std::max(h, step_ * 1e-3);
    out_step = h;
    Pt dir = flow_dir(p);
    if (reversed) {
        dir.x = -dir.x;
        dir.y = -dir.y;
    }
    Pt q{p.x + h * dir.x, p.y + h * dir.y};
    return project(q, level);
}

namespace {

void check_domain(const Chart& chart, Pt p) {
    double mx = 0.02 * chart.domain.width();
    double my = 0.02 * chart.domain.height();
    bool ok_x = chart.period_x > 0 ||
                (p.x >= chart.domain.x0 - mx && p.x <= chart.domain.x1 + mx);
    bool ok_y = chart.period_y > 0 ||
                (p.y >= chart.domain.y0 - my && p.y <= chart.domain.y1 + my);
    if (!ok_x || !ok_y) throw TracingFailure("leaf left the tracing chart domain");
}

} // namespace

Path Tracer::trace_leaf(Pt seed, double level, bool reversed) const {
    Path path;
    path.level = level;
    Pt p = project(seed, level);
    Pt t0 = flow_dir(p);
    if (reversed) {
        t0.x = -t0.x;
        t0.y = -t0.y;
    }
    path.pts.push_back(p);
    path.tangents.push_back(t0);
    const size_t max_steps = 2000000;
    double traveled = 0;
    for (size_t n = 0; n < max_steps; ++n) {
        double h = 0;
        Pt q = step_once(p, level, reversed, h);
        check_domain(*chart_, q);
        Pt tq = flow_dir(q);
        if (reversed) {
            tq.x = -tq.x;
            tq.y = -tq.y;
        }
        traveled += std::hypot(q.x - p.x, q.y - p.y);
        path.pts.push_back(q);
        path.tangents.push_back(tq);
        Pt d = period_delta(q, path.pts.front());
        double dist = std::hypot(d.x, d.y);
        if (traveled > 6 * step_ && dist < 0.9 * h &&
            tq.x * t0.x + tq.y * t0.y > 0.5) {
            // snap the closure point to the periodic image of the seed
            Pt image{q.x - d.x, q.y - d.y};
            path.pts.back() = image;
            path.tangents.back() = t0;
            path.closed = true;
            if (chart_->period_x > 0)
                path.winding_x =
                    static_cast<int>(std::lround((image.x - path.pts.front().x) / chart_->period_x));
            if (chart_->period_y > 0)
                path.winding_y =
                    static_cast<int>(std::lround((image.y - path.pts.front().y) / chart_->period_y));
            path.length = traveled;
            return path;
        }
        p = q;
    }
    throw TracingFailure("leaf did not close");
}

Path Tracer::trace_to_capture(Pt seed, double level, const std::vector<Pt>& targets,
                              double capture_radius, int& hit, double max_length) const {
    Path path;
    path.level = level;
    Pt p = seed;
    path.pts.push_back(p);
    path.tangents.push_back(flow_dir(p));
    double traveled = 0;
    hit = -1;
    const size_t max_steps = 2000000;
    for (size_t n = 0; n < max_steps && traveled < max_length; ++n) {
        double h = 0;
        Pt q = step_once(p, level, false, h);
        check_domain(*chart_, q);
        traveled += std::hypot(q.x - p.x, q.y - p.y);
        path.pts.push_back(q);
        path.tangents.push_back(flow_dir(q));
        if (traveled > 3 * capture_radius) {
            for (size_t i = 0; i < targets.size(); ++i) {
                Pt d = period_delta(q, targets[i]);
                if (std::hypot(d.x, d.y) < capture_radius) {
                    hit = static_cast<int>(i);
                    path.length = traveled;
                    return path;
                }
            }
        }
        p = q;
    }
    path.length = traveled;
    if (hit < 0) throw TracingFailure("separatrix march did not reach a singular point");
    return path;
}

Pt Tracer::walk_to_value(Pt start, double c) const {
    Pt p = start;
    double h = step_;
    for (int it = 0; it < 2000000; ++it) {
        double v = value(p);
        if (std::abs(v - c) < sys_->tol.corrector_tol * (1 + std::abs(c))) return p;
        Pt g = gradient(p);
        double g2 = g.x * g.x + g.y * g.y;
        if (g2 < 1e-300) throw TracingFailure("gradient walk stalled");
        double dv = c - v;
        // gradient step toward the target value, clamped for stability
        double lim = h / std::sqrt(g2);
        double s = dv / g2;
        if (std::abs(s) > lim) s = (s > 0 ? lim : -lim);
        p.x += s * g.x;
        p.y += s * g.y;
        check_domain(*chart_, p);
    }
    throw TracingFailure("gradient walk did not converge");
}

} // namespace quantsurf::trace
