#pragma once

#include <array>

#include "quantsurf/geometry.hpp"
#include "quantsurf/series.hpp"

namespace quantsurf::geometry {

/// Local canonical coordinates at a nondegenerate critical point: a
/// polynomial map (x, y) -> (xt, yt) with Jacobian determinant equal to
/// the chart's (constant) area density, taking the moment function to a
/// function of Q = xt*yt (hyperbolic) or xt^2 + yt^2 (elliptic) up to a
/// remainder vanishing to the truncation order.
struct EliassonChart {
    int singular_point_id = -1;
    SingKind kind = SingKind::Hyperbolic;
    double center_x = 0, center_y = 0;  // chart coordinates of the point
    int degree = 10;
    Series2 map_x, map_y;     // canonical coords as series in the offsets
    double cross_radius = 0;  // validity radius in canonical coordinates
    double omega_density = 1;

    std::array<double, 2> to_canonical(double x, double y) const;
    /// Newton inversion of the polynomial map; valid on the cross domain.
    std::array<double, 2> from_canonical(double xt, double yt) const;
    /// |det D(map) - omega_density| at chart coordinates (x, y).
    double symplectic_residual(double x, double y) const;
};

/// Builds the chart by Taylor expansion and degree-by-degree canonical
/// normalization.  Requires a constant area density on the chart holding
/// the point; throws Unsupported otherwise.
EliassonChart eliasson_chart(const SurfaceSystem& sys, const SingularPoint& p, int degree = 10);

} // namespace quantsurf::geometry
