#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quantsurf/expr.hpp"

namespace quantsurf::geometry {

struct Rect {
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool empty() const { return !(x1 > x0) || !(y1 > y0); }
    bool contains(double x, double y, double margin = 0) const {
        return x >= x0 + margin && x <= x1 - margin && y >= y0 + margin && y <= y1 - margin;
    }
};

/// Coordinate chart with the moment function, the area-form coefficient
/// and a potential one-form for the prequantum connection.  Periodic
/// directions identify coord ~ coord + period; expressions are evaluated
/// on the universal cover, so a potential may jump across the seam (the
/// jump is a legitimate transition of the bundle).
struct Chart {
    std::string id;
    Rect domain;
    double period_x = 0;  // 0 = not periodic
    double period_y = 0;
    Expr F;
    Expr omega;    // omega = omega_coeff dx ^ dy
    Expr theta_x;  // Theta = theta_x dx + theta_y dy, with d Theta = omega
    Expr theta_y;
    Rect area_domain;      // quadrature cell; cells tile the surface
    bool tracing = false;  // leaves are traced in this chart
    // tracing-chart point adjacent to this chart's region, for charts
    // (polar caps) whose extremum is invisible to the tracing chart
    bool has_proxy = false;
    double proxy_x = 0, proxy_y = 0;

    double diameter() const;
};

struct Tolerances {
    double grad_tol = 1e-10;
    double degen_tol = 1e-8;
    double form_tol = 1e-6;
    double prequant_tol = 1e-9;
    double hol_tol = 1e-7;
    double bs_tol = 1e-9;
    int grid_resolution = 256;
    double merge_tol = 1e-6;
    double trace_step_frac = 1e-3;
    double corrector_tol = 1e-10;
};

struct SurfaceSystem {
    std::string name;
    std::vector<Chart> charts;
    std::map<std::string, double> params;
    std::optional<int> euler_characteristic;
    double homology_offset = 0;  // action added per winding of a traced loop
    Tolerances tol;

    const Chart& tracing_chart() const;
    int tracing_chart_index() const;
    double total_area() const;  // chart-wise quadrature over the area cells
};

enum class SingKind { Elliptic, Hyperbolic };

struct SingularPoint {
    int id = -1;
    int chart_index = 0;
    std::string chart_id;
    double x = 0, y = 0;
    double hxx = 0, hxy = 0, hyy = 0;  // Hessian of F at the point
    SingKind kind = SingKind::Elliptic;
    double critical_value = 0;
};

/// Sign test on the Hessian eigenvalues; throws DegenerateSingularity
/// when an eigenvalue is smaller than degen_tol in magnitude.
SingKind classify_singularity(double hxx, double hxy, double hyy, double degen_tol = 1e-8);

/// Grid scan plus Newton polish over every chart; deterministic for a
/// fixed resolution.  Duplicates within merge_tol are merged per chart.
std::vector<SingularPoint> detect_singularities(const SurfaceSystem& sys);

/// Newton refinement of a critical-point candidate; used by the detector
/// and exposed for its error path.
struct NewtonResult {
    double x = 0, y = 0;
    double grad_norm = 0;
};
NewtonResult newton_polish(const Chart& chart, double x0, double y0, double grad_tol,
                           int max_iter = 60);

struct PrequantResult {
    double area = 0;
    long long integer_multiple = 0;
    bool ok = false;
};

/// Curvature-class integrality: area / 2 pi must be an integer for a
/// prequantum bundle to exist.  Reports rather than throws.
PrequantResult prequant_check(const SurfaceSystem& sys);

/// Max |d Theta - omega| over an n x n interior sample grid of a chart.
double form_residual(const Chart& chart, int n = 50);

// --- built-in systems -------------------------------------------------------

/// Rotation-invariant height on a sphere of area 2 pi k.
SurfaceSystem sphere_height(double k = 4);
/// Height on a torus standing on end; saddles at F = -1 and +1, area 4 pi.
SurfaceSystem standing_torus();
/// Reduced rigid-body flow on a sphere of area 8 pi; two saddles on the
/// middle-axis level, four elliptic points.
SurfaceSystem euler_sphere();
/// Local saddle model F = x y with the standard symplectic form.
SurfaceSystem normal_form_saddle();

SurfaceSystem builtin_system(const std::string& name,
                             const std::map<std::string, double>& params = {});

} // namespace quantsurf::geometry
