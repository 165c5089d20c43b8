#include "quantsurf/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "quantsurf/errors.hpp"

namespace quantsurf::geometry {

double Chart::diameter() const { return std::hypot(domain.width(), domain.height()); }

const Chart& SurfaceSystem::tracing_chart() const {
    return charts[static_cast<size_t>(tracing_chart_index())];
}

int SurfaceSystem::tracing_chart_index() const {
    for (size_t i = 0; i < charts.size(); ++i)
        if (charts[i].tracing) return static_cast<int>(i);
    throw QuantError("system '" + name + "' has no tracing chart");
}

namespace {

// nodes/weights for 24-point Gauss-Legendre on [-1, 1], positive half
const double kGL24x[12] = {0.064056892862605626, 0.191118867473616309, 0.315042679696163374,
                           0.433793507626045138, 0.545421471388839536, 0.648093651936975569,
                           0.740124191578554364, 0.820001985973902922, 0.886415527004401034,
                           0.938274552002732758, 0.974728555971309498, 0.995187219997021360};
const double kGL24w[12] = {0.127938195346752157, 0.125837456346828296, 0.121670472927803391,
                           0.115505668053725601, 0.107444270115965635, 0.097618652104113888,
                           0.086190161531953276, 0.073346481411080306, 0.059298584915436781,
                           0.044277438817419806, 0.028531388628933663, 0.012341229799987200};

} // namespace

double SurfaceSystem::total_area() const {
    double area = 0;
    for (const Chart& c : charts) {
        if (c.area_domain.empty()) continue;
        double cx = 0.5 * (c.area_domain.x0 + c.area_domain.x1);
        double hx = 0.5 * c.area_domain.width();
        double cy = 0.5 * (c.area_domain.y0 + c.area_domain.y1);
        double hy = 0.5 * c.area_domain.height();
        double acc = 0;
        for (int i = 0; i < 24; ++i) {
            double xi = (i < 12) ? -kGL24x[11 - i] : kGL24x[i - 12];
            double wi = (i < 12) ? kGL24w[11 - i] : kGL24w[i - 12];
            for (int j = 0; j < 24; ++j) {
                double yj = (j < 12) ? -kGL24x[11 - j] : kGL24x[j - 12];
                double wj = (j < 12) ? kGL24w[11 - j] : kGL24w[j - 12];
                acc += wi * wj * c.omega(cx + hx * xi, cy + hy * yj);
            }
        }
        area += acc * hx * hy;
    }
    return area;
}

SingKind classify_singularity(double hxx, double hxy, double hyy, double degen_tol) {
    double tr = hxx + hyy;
    double det = hxx * hyy - hxy * hxy;
    double disc = std::sqrt(std::max(0.0, tr * tr - 4 * det));
    double l1 = 0.5 * (tr + disc), l2 = 0.5 * (tr - disc);
    if (std::min(std::abs(l1), std::abs(l2)) < degen_tol)
        throw DegenerateSingularity("Hessian eigenvalue below tolerance");
    return det < 0 ? SingKind::Hyperbolic : SingKind::Elliptic;
}

NewtonResult newton_polish(const Chart& chart, double x0, double y0, double grad_tol,
                           int max_iter) {
    double x = x0, y = y0;
    double scale = chart.diameter();
    for (int it = 0; it < max_iter; ++it) {
        Jet2 f = chart.F.eval<Jet2>(Jet2::var_x(x), Jet2::var_y(y));
        double gn = std::hypot(f.dx, f.dy);
        if (!std::isfinite(gn)) throw NonConvergence("gradient not finite during polish");
        if (gn < grad_tol) return {x, y, gn};
        double det = f.dxx * f.dyy - f.dxy * f.dxy;
        if (std::abs(det) < 1e-300) throw NonConvergence("singular Hessian during polish");
        double dx = -(f.dyy * f.dx - f.dxy * f.dy) / det;
        double dy = -(-f.dxy * f.dx + f.dxx * f.dy) / det;
        double len = std::hypot(dx, dy);
        if (len > 0.1 * scale) {  // clamp wild steps
            dx *= 0.1 * scale / len;
            dy *= 0.1 * scale / len;
        }
        x += dx;
        y += dy;
    }
    throw NonConvergence("Newton polish did not reach gradient tolerance");
}

namespace {

double wrap_delta(double d, double period) {
    if (period <= 0) return d;
    d = std::fmod(d, period);
    if (d > 0.5 * period) d -= period;
    if (d < -0.5 * period) d += period;
    return d;
}

} // namespace

std::vector<SingularPoint> detect_singularities(const SurfaceSystem& sys) {
    std::vector<SingularPoint> found;
    int res = std::max(8, sys.tol.grid_resolution);
    for (size_t ci = 0; ci < sys.charts.size(); ++ci) {
        const Chart& chart = sys.charts[ci];
        int nx = res, ny = res;
        double hx = chart.domain.width() / nx;
        double hy = chart.domain.height() / ny;
        // open grid for periodic directions, closed interior otherwise
        std::vector<double> g(static_cast<size_t>(nx + 1) * (ny + 1));
        auto gat = [&](int i, int j) -> double& {
            return g[static_cast<size_t>(i) * (ny + 1) + j];
        };
        for (int i = 0; i <= nx; ++i)
            for (int j = 0; j <= ny; ++j) {
                double x = chart.domain.x0 + i * hx;
                double y = chart.domain.y0 + j * hy;
                Jet2 f = chart.F.eval<Jet2>(Jet2::var_x(x), Jet2::var_y(y));
                gat(i, j) = f.dx * f.dx + f.dy * f.dy;
            }
        std::vector<SingularPoint> chart_pts;
        for (int i = 0; i <= nx; ++i) {
            for (int j = 0; j <= ny; ++j) {
                // local minimum of |grad F|^2 over the 4-neighborhood
                bool is_min = true;
                for (int d = 0; d < 4 && is_min; ++d) {
                    int ii = i + (d == 0) - (d == 1);
                    int jj = j + (d == 2) - (d == 3);
                    if (chart.period_x > 0) ii = (ii + nx) % nx;
                    if (chart.period_y > 0) jj = (jj + ny) % ny;
                    if (ii < 0 || ii > nx || jj < 0 || jj > ny) continue;
                    if (gat(ii, jj) < gat(i, j)) is_min = false;
                }
                if (!is_min) continue;
                double x = chart.domain.x0 + i * hx;
                double y = chart.domain.y0 + j * hy;
                Jet2 f = chart.F.eval<Jet2>(Jet2::var_x(x), Jet2::var_y(y));
                double hnorm = std::abs(f.dxx) + 2 * std::abs(f.dxy) + std::abs(f.dyy);
                double reach = 2.0 * std::max(hx, hy) * hnorm;
                if (std::sqrt(gat(i, j)) > reach) continue;  // no root this close
                NewtonResult nr = newton_polish(chart, x, y, sys.tol.grad_tol);
                double margin_x = chart.period_x > 0 ? -1e300 : 0.25 * hx;
                double margin_y = chart.period_y > 0 ? -1e300 : 0.25 * hy;
                if (!(nr.x >= chart.domain.x0 + margin_x && nr.x <= chart.domain.x1 - margin_x &&
                      nr.y >= chart.domain.y0 + margin_y && nr.y <= chart.domain.y1 - margin_y))
                    continue;
                // normalize into the fundamental domain
                if (chart.period_x > 0)
                    nr.x = chart.domain.x0 +
                           std::fmod(std::fmod(nr.x - chart.domain.x0, chart.period_x) +
                                         chart.period_x,
                                     chart.period_x);
                if (chart.period_y > 0)
                    nr.y = chart.domain.y0 +
                           std::fmod(std::fmod(nr.y - chart.domain.y0, chart.period_y) +
                                         chart.period_y,
                                     chart.period_y);
                bool dup = false;
                for (const SingularPoint& p : chart_pts) {
                    double dx = wrap_delta(p.x - nr.x, chart.period_x);
                    double dy = wrap_delta(p.y - nr.y, chart.period_y);
                    if (std::hypot(dx, dy) < sys.tol.merge_tol) {
                        dup = true;
                        break;
                    }
                }
                if (dup) continue;
                Jet2 ff = chart.F.eval<Jet2>(Jet2::var_x(nr.x), Jet2::var_y(nr.y));
                SingularPoint p;
                p.chart_index = static_cast<int>(ci);
                p.chart_id = chart.id;
                p.x = nr.x;
                p.y = nr.y;
                p.hxx = ff.dxx;
                p.hxy = ff.dxy;
                p.hyy = ff.dyy;
                p.kind = classify_singularity(ff.dxx, ff.dxy, ff.dyy, sys.tol.degen_tol);
                p.critical_value = ff.v;
                chart_pts.push_back(p);
            }
        }
        for (SingularPoint& p : chart_pts) found.push_back(p);
    }
    // deterministic order: by critical value, then chart, then coordinates
    std::sort(found.begin(), found.end(), [](const SingularPoint& a, const SingularPoint& b) {
        if (a.critical_value != b.critical_value) return a.critical_value < b.critical_value;
        if (a.chart_index != b.chart_index) return a.chart_index < b.chart_index;
        if (a.x != b.x) return a.x < b.x;
        return a.y < b.y;
    });
    for (size_t i = 0; i < found.size(); ++i) found[i].id = static_cast<int>(i);
    return found;
}

PrequantResult prequant_check(const SurfaceSystem& sys) {
    PrequantResult r;
    r.area = sys.total_area();
    const double two_pi = 2 * 3.14159265358979323846;
    double ratio = r.area / two_pi;
    r.integer_multiple = std::llround(ratio);
    r.ok = std::abs(ratio - static_cast<double>(r.integer_multiple)) < sys.tol.prequant_tol;
    return r;
}

double form_residual(const Chart& chart, int n) {
    double worst = 0;
    for (int i = 1; i < n; ++i) {
        for (int j = 1; j < n; ++j) {
            double x = chart.domain.x0 + chart.domain.width() * i / n;
            double y = chart.domain.y0 + chart.domain.height() * j / n;
            Jet2 tx = chart.theta_x.eval<Jet2>(Jet2::var_x(x), Jet2::var_y(y));
            Jet2 ty = chart.theta_y.eval<Jet2>(Jet2::var_x(x), Jet2::var_y(y));
            double w = chart.omega(x, y);
            worst = std::max(worst, std::abs(ty.dx - tx.dy - w));
        }
    }
    return worst;
}

// --- built-in systems -------------------------------------------------------

namespace {

Expr px(const std::string& s, const std::map<std::string, double>& p) { return Expr::parse(s, p); }

} // namespace

SurfaceSystem sphere_height(double k) {
    if (k < 1) throw QuantError("sphere height needs k >= 1");
    SurfaceSystem sys;
    sys.name = "sphere-height";
    sys.params = {{"k", k}};
    sys.euler_characteristic = 2;
    const double pi = 3.14159265358979323846;
    double half = 0.5 * k;
    double body_gap = 1e-4 * k;  // body chart stops just short of the poles
    double cap_r = std::sqrt(k) / 4;

    Chart body;
    body.id = "body";
    body.domain = {-half + body_gap, half - body_gap, 0, 2 * pi};
    body.period_y = 2 * pi;
    body.F = px("x", sys.params);
    body.omega = px("1", sys.params);
    body.theta_x = px("0", sys.params);
    body.theta_y = px("x + k/2", sys.params);
    body.area_domain = {-half, half, 0, 2 * pi};
    body.tracing = true;
    sys.charts.push_back(body);

    Chart north;
    north.id = "cap-north";
    north.domain = {-cap_r, cap_r, -cap_r, cap_r};
    north.F = px("k/2 - (x^2 + y^2)/2", sys.params);
    north.omega = px("1", sys.params);
    north.theta_x = px("-y/2", sys.params);
    north.theta_y = px("x/2", sys.params);
    north.has_proxy = true;
    north.proxy_x = half - 2 * body_gap;
    north.proxy_y = 0.7;
    sys.charts.push_back(north);

    Chart south = north;
    south.id = "cap-south";
    south.F = px("-k/2 + (x^2 + y^2)/2", sys.params);
    south.proxy_x = -half + 2 * body_gap;
    sys.charts.push_back(south);
    return sys;
}

SurfaceSystem standing_torus() {
    SurfaceSystem sys;
    sys.name = "standing-torus";
    sys.params = {{"a", 2.0}};
    sys.euler_characteristic = 0;
    const double pi = 3.14159265358979323846;

    Chart body;
    body.id = "body";
    body.domain = {-pi, pi, -pi, pi};
    body.period_x = 2 * pi;
    body.period_y = 2 * pi;
    body.F = px("sin(x) * (a + cos(y))", sys.params);
    body.omega = px("1/pi", sys.params);
    body.theta_x = px("0", sys.params);
    body.theta_y = px("(x + pi)/pi", sys.params);
    body.area_domain = {-pi, pi, -pi, pi};
    body.tracing = true;
    sys.charts.push_back(body);
    return sys;
}

SurfaceSystem euler_sphere() {
    SurfaceSystem sys;
    sys.name = "euler-sphere";
    sys.params = {{"rho", 2.0}, {"I1", 1.0}, {"I2", 2.0}, {"I3", 3.0}};
    sys.euler_characteristic = 2;
    const double pi = 3.14159265358979323846;
    double rho = 2.0;
    double body_gap = 1e-3;
    double cap_r = 0.5;

    Chart body;
    body.id = "body";
    body.domain = {-rho + body_gap, rho - body_gap, 0, 2 * pi};
    body.period_y = 2 * pi;
    body.F = px("((rho^2 - x^2)*cos(y)^2/I1 + (rho^2 - x^2)*sin(y)^2/I2 + x^2/I3)/2",
                sys.params);
    body.omega = px("1", sys.params);
    body.theta_x = px("0", sys.params);
    body.theta_y = px("x + rho", sys.params);
    body.area_domain = {-rho, rho, 0, 2 * pi};
    body.tracing = true;
    sys.charts.push_back(body);

    // same expression serves both poles: F is even in the height
    Chart cap;
    cap.id = "cap-north";
    cap.domain = {-cap_r, cap_r, -cap_r, cap_r};
    cap.F = px("(2*rho - (x^2+y^2)/2)*x^2/(4*I1) + (2*rho - (x^2+y^2)/2)*y^2/(4*I2) "
               "+ (rho - (x^2+y^2)/2)^2/(2*I3)",
               sys.params);
    cap.omega = px("1", sys.params);
    cap.theta_x = px("-y/2", sys.params);
    cap.theta_y = px("x/2", sys.params);
    cap.has_proxy = true;
    cap.proxy_x = rho - 2 * body_gap;
    cap.proxy_y = 0.7;
    sys.charts.push_back(cap);
    Chart cap_s = cap;
    cap_s.id = "cap-south";
    cap_s.proxy_x = -rho + 2 * body_gap;
    sys.charts.push_back(cap_s);
    return sys;
}

SurfaceSystem normal_form_saddle() {
    SurfaceSystem sys;
    sys.name = "normal-form";
    Chart c;
    c.id = "plane";
    c.domain = {-1.2, 1.2, -1.2, 1.2};
    c.F = px("x*y", {});
    c.omega = px("1", {});
    c.theta_x = px("-y/2", {});
    c.theta_y = px("x/2", {});
    c.area_domain = c.domain;
    c.tracing = true;
    sys.charts.push_back(c);
    return sys;
}

SurfaceSystem builtin_system(const std::string& name,
                             const std::map<std::string, double>& params) {
    auto get = [&](const std::string& key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    if (name == "sphere-height") return sphere_height(get("k", 4));
    if (name == "standing-torus") return standing_torus();
    if (name == "euler-sphere") return euler_sphere();
    if (name == "normal-form") return normal_form_saddle();
    throw QuantError("unknown builtin system '" + name + "'");
}

} // namespace quantsurf::geometry
