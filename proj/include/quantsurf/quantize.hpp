#pragma once

#include <memory>
#include <string>
#include <vector>

#include "quantsurf/geometry.hpp"
#include "quantsurf/reeb.hpp"
#include "quantsurf/transport.hpp"

namespace quantsurf::quantize {

using transport::ActionProfile;
using transport::BSLeaf;

struct AnalyzeOptions {
    int profile_samples = 12;
    int fit_degree = 6;
    int max_threads = 0;  // 0: QUANT_THREADS env or hardware count
};

/// Everything the quantization needs to know about one system: detected
/// singularities, the Reeb graph with traced separatrices, per-edge
/// action profiles and the Bohr-Sommerfeld leaves.
struct SystemAnalysis {
    std::shared_ptr<const geometry::SurfaceSystem> system;
    std::vector<geometry::SingularPoint> points;
    reeb::ReebGraph graph;
    std::vector<ActionProfile> profiles;  // indexed by edge id
    std::vector<BSLeaf> bs;               // sorted by (edge, t); singular flagged
    geometry::PrequantResult prequant;
    int s_e = 0, s_h = 0;
    bool synthetic = false;  // surgery products have no chart geometry

    int regular_bs_count() const;
};

SystemAnalysis analyze(const geometry::SurfaceSystem& sys, const AnalyzeOptions& opt = {});

struct QuantizationReport {
    std::string system;
    int s_e = 0, s_h = 0;
    int chi = 0;
    bool chi_ok = false;
    int cn_factor_count = 0;  // 2 per hyperbolic point
    std::vector<BSLeaf> bs_regular;
    std::vector<std::pair<int, int>> truncated_dims;  // (N, cn*(N+1) + #bs)
    bool h_other_degrees_zero = true;
    double total_area = 0;
};

/// Closed-form assembly: one C-per-degree pair for every hyperbolic
/// point, one line per regular Bohr-Sommerfeld leaf, nothing else.
QuantizationReport quantize(const SystemAnalysis& analysis, int n_max = 6);

/// Independent route: assemble jet-truncated complexes on every singular
/// leaf from the fitted actions and count ranks; regular Bohr-Sommerfeld
/// leaves outside the leaf windows contribute one line each.
int truncated_dim_rank_oracle(const SystemAnalysis& analysis, int N,
                              double window_frac = 0.45);

struct PieceReport {
    std::string id;
    int cn_factor_count = 0;
    std::vector<BSLeaf> bs;
};

struct OverlapWindow {
    int edge_id = -1;
    double t_lo = 0, t_hi = 0;
};

/// Direct-sum assembly over pieces glued along regular leaf windows that
/// carry no Bohr-Sommerfeld leaf; throws OverlapContainsBS otherwise.
QuantizationReport mayer_vietoris_assemble(const SystemAnalysis& analysis,
                                           std::vector<PieceReport> pieces,
                                           const std::vector<OverlapWindow>& overlaps);

/// Canonical decomposition for tests and the CLI: one piece per singular
/// leaf neighborhood plus one regular piece carrying the remaining leaves.
std::vector<PieceReport> decompose(const SystemAnalysis& analysis, double window_frac = 0.45);
std::vector<OverlapWindow> default_overlaps(const SystemAnalysis& analysis,
                                            double window_frac = 0.45);

struct SurgeryOp {
    int edge_id = -1;
    double t = 0;          // position inside the edge, anchored parameter
    double lobe_area = 0;  // 0: pick an irrational default
};

/// Cut a regular cylinder at the given level and refoliate it with one
/// new elliptic-hyperbolic pair; Reeb graph and action profiles are
/// rewritten, the symplectic area is untouched.
SystemAnalysis surgery_insert_pair(const SystemAnalysis& analysis, const SurgeryOp& op);

reeb::PHResult poincare_hopf_check(const SystemAnalysis& analysis);

} // namespace quantsurf::quantize
