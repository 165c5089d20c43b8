#pragma once

#include <vector>

#include "quantsurf/cech.hpp"
#include "quantsurf/geometry.hpp"
#include "quantsurf/trace.hpp"

namespace quantsurf::reeb {

enum class VertexKind { EllipticExtremum, HyperbolicLeaf };

struct ReebVertex {
    VertexKind kind = VertexKind::EllipticExtremum;
    double value = 0;
    std::vector<int> singular_points;  // ids from the detection pass
};

struct ReebEdge {
    int id = -1;
    int lower_vertex = -1, upper_vertex = -1;
    double f_lo = 0, f_hi = 0;
    int anchor_vertex = -1;  // transversal parameter is measured from here
    int direction = +1;      // F = anchor value + direction * t
    trace::Pt seed_base;     // point on a mid-edge representative leaf
};

/// Combinatorics and traced geometry of one singular (saddle) leaf.
struct HyperbolicLeafData {
    int vertex = -1;
    cech::LeafGraph graph;                 // faces carry reeb_edge references
    std::vector<int> saddle_points;        // singular point id per local vertex
    std::vector<trace::Path> arcs;         // separatrix arcs, saddle to saddle
    std::vector<double> arc_actions;       // integral of Theta along each arc
    std::vector<int> face_windings;        // leaf winding per face (offset bookkeeping)
};

struct ReebGraph {
    std::vector<ReebVertex> vertices;
    std::vector<ReebEdge> edges;
    std::vector<HyperbolicLeafData> hyperbolic_leaves;

    int elliptic_count() const;
    int hyperbolic_point_count() const;
    const HyperbolicLeafData& leaf_data(int vertex) const;
};

/// Level-set analysis of an analytic system: vertices at critical values,
/// separatrix tracing through every saddle, one edge per regular leaf
/// family with attachments resolved by gradient walks.
ReebGraph build_reeb_graph(const geometry::SurfaceSystem& sys,
                           const std::vector<geometry::SingularPoint>& points);

/// Local arc/loop model of one singular leaf.
const cech::LeafGraph& leaf_graph(const ReebGraph& graph, int vertex);

/// Representative closed leaf at transversal parameter t inside an edge
/// (t measured from the anchor vertex; throws OutOfRange outside).
trace::Path transversal_param(const geometry::SurfaceSystem& sys, const ReebGraph& graph,
                              int edge, double t);

/// Euler characteristic bookkeeping from the singularity counts.
struct PHResult {
    int chi = 0;
    bool ok = false;
    bool declared = false;
};
PHResult poincare_hopf_check(const ReebGraph& graph, const geometry::SurfaceSystem& sys);

} // namespace quantsurf::reeb
