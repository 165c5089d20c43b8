#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "quantsurf/cech.hpp"
#include "quantsurf/geometry.hpp"
#include "quantsurf/trace.hpp"

namespace quantsurf::transport {

using Complex = std::complex<double>;

struct TransportFactor {
    Complex value{1, 0};  // unit modulus
    double phase = 0;     // integral of Theta along the path
};

/// Integral of the potential one-form along a traced path, using cubic
/// Hermite segments through the stored tangents with adaptive Simpson
/// on each segment.
double theta_integral(const geometry::Chart& chart, const trace::Path& path);

/// Signed area enclosed against the chart's area form, by the same
/// segment quadrature applied to a primitive of omega.  Constant-density
/// charts only; used as the Stokes side of holonomy checks.
double enclosed_area(const geometry::Chart& chart, const trace::Path& path);

/// exp(i int Theta) along a path that must stay on one leaf.
TransportFactor parallel_transport(const geometry::SurfaceSystem& sys, const trace::Path& path,
                                   double leaf_tol = 1e-6);

/// Same for an explicitly parametrized curve with derivative
/// (x, y, dx/dt, dy/dt) = curve(t).
TransportFactor parallel_transport(const geometry::SurfaceSystem& sys,
                                   const std::function<std::array<double, 4>(double)>& curve,
                                   double t0, double t1, double leaf_tol = 1e-6);

/// Holonomy of a closed traced leaf: the Theta integral plus the declared
/// homology offset per period winding.
TransportFactor loop_holonomy(const geometry::SurfaceSystem& sys, const trace::Path& leaf,
                              double leaf_tol = 1e-6);

/// Action profile of one Reeb edge: A(t) with hol = exp(i A(t)), sampled
/// by tracing, with a least-squares polynomial fit in t.
struct ActionProfile {
    int edge_id = -1;
    double t_lo = 0, t_hi = 0;  // open interval of the transversal parameter
    std::vector<std::pair<double, double>> samples;
    cech::Poly fit;
    double fit_residual = 0;
    std::function<double(double)> sampler;  // exact A(t) (traced or synthetic)
    double end_lo = 0, end_hi = 0;          // limits of A at the interval ends
    bool has_end_lo = false, has_end_hi = false;
};

/// Geometry needed to sample one edge; produced by the Reeb analysis.
struct EdgeGeometry {
    int edge_id = -1;
    double anchor_value = 0;
    int direction = +1;  // F = anchor_value + direction * t
    double t_len = 0;
    std::function<trace::Pt(double)> seed;  // point on the leaf at parameter t
};

ActionProfile action_profile(const geometry::SurfaceSystem& sys, const EdgeGeometry& edge,
                             int n_samples = 12, int fit_degree = 6);

struct BSLeaf {
    int edge_id = -1;
    double t = 0;
    long long level = 0;  // A(t) = 2 pi level
    bool singular = false;
};

/// All parameters with A(t) on the 2 pi lattice: interior roots by
/// bracketing and bisection of the exact sampler, endpoint roots flagged
/// as singular.
std::vector<BSLeaf> find_bs_leaves(const ActionProfile& profile, double bs_tol = 1e-9,
                                   int max_bisect = 60);

/// Least-squares polynomial fit (ascending coefficients in t).
cech::Poly poly_fit(const std::vector<std::pair<double, double>>& samples, int degree,
                    double* residual = nullptr);

} // namespace quantsurf::transport
