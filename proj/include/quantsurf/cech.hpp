#pragma once

#include <complex>
#include <string>
#include <vector>

#include "quantsurf/linalg.hpp"
#include "quantsurf/rational.hpp"
#include "quantsurf/series.hpp"

namespace quantsurf::cech {

using Complex = std::complex<double>;

/// Polynomial in the transversal parameter t, ascending coefficients.
using Poly = std::vector<double>;

double poly_eval(const Poly& p, double t);

// ---------------------------------------------------------------------------
// Combinatorics of one singular leaf
// ---------------------------------------------------------------------------

/// Directed arc of a singular leaf between two saddle vertices.  Slots
/// number the four arc-ends around each vertex (0..3 in cyclic order).
struct LeafArc {
    int tail_vertex = 0, tail_slot = 0;
    int head_vertex = 0, head_slot = 0;
};

struct FaceStep {
    int arc = 0;
    bool forward = true;
};

/// One loop family: the cycle of arcs a nearby regular leaf shadows,
/// together with the transversal side it lives on.
struct LoopFamily {
    std::vector<FaceStep> cycle;
    int side = +1;        // +1 or -1
    int reeb_edge = -1;   // back-reference when built from a system
};

struct LeafGraph {
    int num_vertices = 0;
    std::vector<LeafArc> arcs;
    std::vector<LoopFamily> faces;

    int num_arcs() const { return static_cast<int>(arcs.size()); }

    /// Structural checks: 4 slots per vertex each used once, #arcs equals
    /// 2 * #vertices, every (arc, side) covered by exactly one face, and
    /// face cycles are vertex-contiguous.  Throws QuantError on failure.
    void validate() const;
};

/// Chain of k saddles in a row: k = 1 is the figure-eight, k = 2 the
/// triple-eight.  Inner families carry side +1, the outer family -1.
LeafGraph saddle_chain(int k);
LeafGraph figure_eight();
LeafGraph triple_eight();
/// Two vertices joined by four parallel arcs (two circles crossing twice).
LeafGraph double_lung();

LeafGraph leaf_graph_by_name(const std::string& name);

// ---------------------------------------------------------------------------
// Jet-truncated model of the leafwise-flat-section complex
// ---------------------------------------------------------------------------

struct BuildOptions {
    std::vector<int> chain_lengths;  // rectangles per arc; default all 1
    double bs_merge_tol = 1e-9;
    double holonomy_tol = 1e-9;
    bool check_holonomy = true;
};

struct CechComplex {
    LeafGraph graph;
    int N = 0;                                   // jet truncation order
    std::vector<Poly> holonomy_polys;            // action A_f(t) per face
    std::vector<std::vector<double>> bs_params;  // per face, nonzero t values
    std::vector<int> chain_lengths;              // per arc

    // transport data the coboundary matrix is assembled from
    std::vector<std::vector<CSeries>> rect_jets;             // [arc][segment]
    std::vector<std::vector<std::vector<Complex>>> bs_tau;   // [face][bs][set]

    int c0_jet_dim = 0, c0_value_dim = 0;
    int c1_jet_dim = 0, c1_value_dim = 0;

    int c0_dim() const { return c0_jet_dim + c0_value_dim; }
    int c1_dim() const { return c1_jet_dim + c1_value_dim; }
    int total_bs() const;
    /// Sets (cross quadrants and rectangles) a face's leaf passes through.
    int sets_on_face(int f) const;
};

CechComplex build_model(const LeafGraph& graph, int N, const std::vector<Poly>& holonomy_polys,
                        const std::vector<std::vector<double>>& bs_params,
                        const BuildOptions& options = {});

/// Full coboundary d0 : C^0 -> C^1.  Jet columns come first, then
/// Bohr-Sommerfeld value columns; same order for rows.
CMatrix coboundary_matrix(const CechComplex& model);

struct CohomologyDims {
    int h0_raw = 0;     // kernel of d0 in the truncated model
    int h0_smooth = 0;  // after quotienting the point-value kernel
    int h1 = 0;
    int h2 = 0;         // structurally zero: no triple overlaps
    int rank = 0;
    int value_kernel_dim = 0;
    RankInfo rank_info;
    bool rank_deficiency_warning = false;
};

CohomologyDims cohomology_dims(const CechComplex& model, double rank_threshold = 1e-8);

/// Closed-form prediction h1 = #arcs * (N+1) + m.
int general_leaf_h1(const LeafGraph& graph, int N, int m);

/// Replace every chain by a single rectangle carrying the composed
/// transport; an isomorphism on cohomology.
CechComplex chain_collapse(const CechComplex& model);

/// Subdivide every arc's cover into `factor` rectangles.
CechComplex refine_cover(const CechComplex& model, int factor);

/// Multiply one rectangle's trivialization by a constant phase
/// (adjusting every transport that enters or leaves it).
CechComplex gauge_transform(const CechComplex& model, int arc, int segment, double phase);

/// Reverse the traversal orientation of one loop family; transports invert.
CechComplex reverse_family(const CechComplex& model, int face);

/// Rebuild under t -> c t, c > 0 (actions composed, BS params rescaled).
CechComplex reparametrize(const CechComplex& model, double c);

// ---------------------------------------------------------------------------
// Exact-arithmetic twin (gold oracle for small N)
// ---------------------------------------------------------------------------

struct ExactDims {
    int h0_raw = 0;
    int h1 = 0;
    int rank = 0;
};

/// Same block structure as the double-precision model with generic exact
/// unit transports whose cycle products equal one at each BS parameter.
/// Ranks depend only on that structure, so this certifies the SVD path.
ExactDims exact_cohomology_dims(const LeafGraph& graph, int N,
                                const std::vector<int>& bs_counts,
                                const std::vector<int>& chain_lengths = {});

} // namespace quantsurf::cech
