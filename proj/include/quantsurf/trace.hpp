#pragma once

#include <vector>

#include "quantsurf/geometry.hpp"

namespace quantsurf::trace {

struct Pt {
    double x = 0, y = 0;
};

/// Traced level-set curve in the (unwrapped) coordinates of the tracing
/// chart, with unit tangents at the nodes for curved-segment quadrature.
struct Path {
    std::vector<Pt> pts;
    std::vector<Pt> tangents;
    double level = 0;
    bool closed = false;
    int winding_x = 0, winding_y = 0;  // periods crossed on closing
    double length = 0;
};

/// Predictor-corrector marching orthogonal to grad F in the tracing
/// chart; orientation follows the Hamiltonian vector field of F.
class Tracer {
public:
    explicit Tracer(const geometry::SurfaceSystem& sys);

    const geometry::Chart& chart() const { return *chart_; }
    double base_step() const { return step_; }

    /// Gradient and value of F at a point.
    double value(Pt p) const;
    Pt gradient(Pt p) const;
    /// Unit direction of the Hamiltonian field at p.
    Pt flow_dir(Pt p) const;
    /// Newton projection onto the level set F = c along the gradient.
    Pt project(Pt p, double c) const;

    /// Closed leaf through the seed at the seed's own level (after
    /// projection to `level`).  reversed = trace against the flow.
    Path trace_leaf(Pt seed, double level, bool reversed = false) const;

    /// March at a fixed level until entering the capture radius of one of
    /// the targets (period-reduced distance).  Returns the target index in
    /// `hit`; the path ends at the capture point.
    Path trace_to_capture(Pt seed, double level, const std::vector<Pt>& targets,
                          double capture_radius, int& hit, double max_length) const;

    /// Walk the gradient flow (up or down) until F reaches the value c.
    Pt walk_to_value(Pt start, double c) const;

    /// Nearest-image difference a - b respecting chart periods.
    Pt period_delta(Pt a, Pt b) const;

private:
    Pt step_once(Pt p, double level, bool reversed, double& out_step) const;

    const geometry::SurfaceSystem* sys_;
    const geometry::Chart* chart_;
    double step_;
    double f_scale_;  // typical |grad F| over the chart, for step control
    double h_scale_;  // typical Hessian magnitude
};

} // namespace quantsurf::trace
