#include "quantsurf/quantize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "quantsurf/errors.hpp"

namespace quantsurf::quantize {

using geometry::SingKind;
using geometry::SurfaceSystem;
using reeb::ReebEdge;
using reeb::VertexKind;

namespace {

const double kTwoPi = 2 * 3.14159265358979323846;

int thread_budget(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QUANT_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// p(a + b u) as a polynomial in u.
cech::Poly poly_affine(const cech::Poly& p, double a, double b) {
    cech::Poly out(p.size(), 0.0);
    std::vector<double> basis = {1.0};  // (a + b u)^k
    for (size_t k = 0; k < p.size(); ++k) {
        for (size_t j = 0; j < basis.size(); ++j) out[j] += p[k] * basis[j];
        std::vector<double> next(basis.size() + 1, 0.0);
        for (size_t j = 0; j < basis.size(); ++j) {
            next[j] += basis[j] * a;
            next[j + 1] += basis[j] * b;
        }
        basis = std::move(next);
    }
    return out;
}

} // namespace

int SystemAnalysis::regular_bs_count() const {
    int n = 0;
    for (const auto& b : bs)
        if (!b.singular) ++n;
    return n;
}

SystemAnalysis analyze(const SurfaceSystem& sys, const AnalyzeOptions& opt) {
    SystemAnalysis a;
    a.system = std::make_shared<SurfaceSystem>(sys);
    a.points = geometry::detect_singularities(*a.system);
    a.prequant = geometry::prequant_check(*a.system);
    for (const auto& p : a.points)
        (p.kind == SingKind::Elliptic ? a.s_e : a.s_h)++;
    a.graph = reeb::build_reeb_graph(*a.system, a.points);

    auto tracer = std::make_shared<const trace::Tracer>(*a.system);
    auto sys_ref = a.system;

    a.profiles.resize(a.graph.edges.size());
    std::vector<int> order(a.graph.edges.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    auto build_profile = [&](int ei) {
        const ReebEdge& e = a.graph.edges[static_cast<size_t>(ei)];
        transport::EdgeGeometry eg;
        eg.edge_id = e.id;
        eg.anchor_value = a.graph.vertices[static_cast<size_t>(e.anchor_vertex)].value;
        eg.direction = e.direction;
        eg.t_len = e.f_hi - e.f_lo;
        trace::Pt base = e.seed_base;
        double anchor_value = eg.anchor_value;
        int direction = eg.direction;
        eg.seed = [tracer, base, anchor_value, direction](double t) {
            return tracer->walk_to_value(base, anchor_value + direction * t);
        };
        a.profiles[static_cast<size_t>(ei)] =
            transport::action_profile(*sys_ref, eg, opt.profile_samples, opt.fit_degree);
    };
    int nthreads = std::min<int>(thread_budget(opt.max_threads),
                                 static_cast<int>(a.graph.edges.size()));
    if (nthreads <= 1) {
        for (int ei : order) build_profile(ei);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> cursor{0};
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back([&] {
                for (;;) {
                    size_t i = cursor.fetch_add(1);
                    if (i >= order.size()) break;
                    build_profile(order[i]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // endpoint limits of the action along each edge
    for (auto& prof : a.profiles) {
        const ReebEdge& e = a.graph.edges[static_cast<size_t>(prof.edge_id)];
        int far_vertex = (e.anchor_vertex == e.lower_vertex) ? e.upper_vertex : e.lower_vertex;
        auto limit_at = [&](int vertex, double* out) {
            const reeb::ReebVertex& v = a.graph.vertices[static_cast<size_t>(vertex)];
            if (v.kind == VertexKind::HyperbolicLeaf) {
                const reeb::HyperbolicLeafData& data = a.graph.leaf_data(vertex);
                for (size_t f = 0; f < data.graph.faces.size(); ++f) {
                    if (data.graph.faces[f].reeb_edge != prof.edge_id) continue;
                    double acc = 0;
                    for (const cech::FaceStep& st : data.graph.faces[f].cycle)
                        acc += (st.forward ? 1.0 : -1.0) *
                               data.arc_actions[static_cast<size_t>(st.arc)];
                    acc += a.system->homology_offset * data.face_windings[f];
                    // separatrix arcs and sampled leaves may sit on
                    // different unwrapped images across a periodic seam;
                    // their integrals differ by the exact 2 pi multiple
                    // that the fit's own branch determines
                    double t_end = (vertex == e.anchor_vertex) ? 0.0 : prof.t_hi;
                    double guess = cech::poly_eval(prof.fit, t_end);
                    acc += kTwoPi * std::round((guess - acc) / kTwoPi);
                    *out = acc;
                    return true;
                }
                return false;
            }
            // elliptic ends: the loop integral collapses to 0 or sweeps
            // everything; snap the fit's extrapolation to the exact value
            double t_end = (vertex == e.anchor_vertex) ? 0.0 : prof.t_hi;
            double guess = cech::poly_eval(prof.fit, t_end);
            double best = 0;
            for (double cand : {0.0, a.prequant.area, -a.prequant.area})
                if (std::abs(guess - cand) < std::abs(guess - best)) best = cand;
            *out = best;
            return true;
        };
        prof.has_end_lo = limit_at(e.anchor_vertex, &prof.end_lo);
        prof.has_end_hi = limit_at(far_vertex, &prof.end_hi);
    }

    for (const auto& prof : a.profiles) {
        auto leaves = transport::find_bs_leaves(prof, sys.tol.bs_tol);
        a.bs.insert(a.bs.end(), leaves.begin(), leaves.end());
    }
    std::sort(a.bs.begin(), a.bs.end(), [](const BSLeaf& x, const BSLeaf& y) {
        if (x.edge_id != y.edge_id) return x.edge_id < y.edge_id;
        return x.t < y.t;
    });
    return a;
}

QuantizationReport quantize(const SystemAnalysis& analysis, int n_max) {
    QuantizationReport r;
    r.system = analysis.system ? analysis.system->name : "synthetic";
    r.s_e = analysis.s_e;
    r.s_h = analysis.s_h;
    reeb::PHResult ph = poincare_hopf_check(analysis);
    r.chi = ph.chi;
    r.chi_ok = ph.ok;
    r.cn_factor_count = 2 * analysis.s_h;
    for (const auto& b : analysis.bs)
        if (!b.singular) r.bs_regular.push_back(b);
    for (int N = 0; N <= n_max; ++N)
        r.truncated_dims.emplace_back(
            N, r.cn_factor_count * (N + 1) + static_cast<int>(r.bs_regular.size()));
    r.total_area = analysis.prequant.area;
    return r;
}

namespace {

struct LeafModelData {
    cech::LeafGraph graph;
    std::vector<cech::Poly> polys;
    std::vector<std::vector<double>> bs;
};

/// Jet-complex input for one singular leaf: per-face actions re-anchored
/// at the leaf value, and the BS parameters falling inside the window.
LeafModelData leaf_model_inputs(const SystemAnalysis& analysis,
                                const reeb::HyperbolicLeafData& data, double window_frac,
                                std::vector<bool>& bs_claimed) {
    LeafModelData out;
    out.graph = data.graph;
    out.polys.resize(data.graph.faces.size());
    out.bs.resize(data.graph.faces.size());
    for (size_t f = 0; f < data.graph.faces.size(); ++f) {
        int ei = data.graph.faces[f].reeb_edge;
        const ActionProfile& prof = analysis.profiles[static_cast<size_t>(ei)];
        const ReebEdge& e = analysis.graph.edges[static_cast<size_t>(ei)];
        bool anchored_here = e.anchor_vertex == data.vertex;
        // local parameter s >= 0 measured from the singular value
        out.polys[f] = anchored_here ? prof.fit : poly_affine(prof.fit, prof.t_hi, -1.0);
        double window = window_frac * prof.t_hi;
        for (size_t bi = 0; bi < analysis.bs.size(); ++bi) {
            const BSLeaf& b = analysis.bs[bi];
            if (b.edge_id != ei || b.singular || bs_claimed[bi]) continue;
            double s = anchored_here ? b.t : prof.t_hi - b.t;
            if (s >= window) continue;
            // consistency with the fitted action: re-root the polynomial
            double target = static_cast<double>(b.level) * kTwoPi;
            double lo = std::max(1e-9 * prof.t_hi, s - 0.05 * prof.t_hi);
            double hi = std::min((1 - 1e-9) * prof.t_hi, s + 0.05 * prof.t_hi);
            double flo = cech::poly_eval(out.polys[f], lo) - target;
            double fhi = cech::poly_eval(out.polys[f], hi) - target;
            double root = s;
            if (flo * fhi < 0) {
                for (int it = 0; it < 80; ++it) {
                    root = 0.5 * (lo + hi);
                    double fr = cech::poly_eval(out.polys[f], root) - target;
                    if (fr * flo < 0)
                        hi = root;
                    else {
                        lo = root;
                        flo = fr;
                    }
                }
            }
            out.bs[f].push_back(root);
            bs_claimed[bi] = true;
        }
    }
    return out;
}

} // namespace

int truncated_dim_rank_oracle(const SystemAnalysis& analysis, int N, double window_frac) {
    std::vector<bool> claimed(analysis.bs.size(), false);
    int dim = 0;
    for (const auto& data : analysis.graph.hyperbolic_leaves) {
        LeafModelData in = leaf_model_inputs(analysis, data, window_frac, claimed);
        cech::CechComplex model = cech::build_model(in.graph, N, in.polys, in.bs);
        cech::CohomologyDims dims = cech::cohomology_dims(model);
        if (dims.h0_smooth != 0 || dims.h2 != 0)
            throw QuantError("unexpected cohomology outside degree one");
        dim += dims.h1;
    }
    for (size_t bi = 0; bi < analysis.bs.size(); ++bi)
        if (!claimed[bi] && !analysis.bs[bi].singular) ++dim;
    return dim;
}

QuantizationReport mayer_vietoris_assemble(const SystemAnalysis& analysis,
                                           std::vector<PieceReport> pieces,
                                           const std::vector<OverlapWindow>& overlaps) {
    for (const OverlapWindow& w : overlaps) {
        const ReebEdge& e = analysis.graph.edges.at(static_cast<size_t>(w.edge_id));
        double len = e.f_hi - e.f_lo;
        if (!(0 < w.t_lo && w.t_lo < w.t_hi && w.t_hi < len))
            throw QuantError("overlap window must be a regular interior interval");
        for (const BSLeaf& b : analysis.bs) {
            if (b.edge_id != w.edge_id || b.singular) continue;
            if (b.t >= w.t_lo && b.t <= w.t_hi)
                throw OverlapContainsBS("edge " + std::to_string(w.edge_id) + " at t=" +
                                        std::to_string(b.t));
        }
    }
    std::sort(pieces.begin(), pieces.end(),
              [](const PieceReport& a, const PieceReport& b) { return a.id < b.id; });
    QuantizationReport r;
    r.system = (analysis.system ? analysis.system->name : "synthetic") + std::string("(pieces)");
    r.s_e = analysis.s_e;
    r.s_h = analysis.s_h;
    reeb::PHResult ph = poincare_hopf_check(analysis);
    r.chi = ph.chi;
    r.chi_ok = ph.ok;
    for (const PieceReport& p : pieces) {
        r.cn_factor_count += p.cn_factor_count;
        for (const BSLeaf& b : p.bs)
            if (!b.singular) r.bs_regular.push_back(b);
    }
    std::sort(r.bs_regular.begin(), r.bs_regular.end(), [](const BSLeaf& x, const BSLeaf& y) {
        if (x.edge_id != y.edge_id) return x.edge_id < y.edge_id;
        return x.t < y.t;
    });
    for (int N = 0; N <= 6; ++N)
        r.truncated_dims.emplace_back(
            N, r.cn_factor_count * (N + 1) + static_cast<int>(r.bs_regular.size()));
    r.total_area = analysis.prequant.area;
    return r;
}

std::vector<PieceReport> decompose(const SystemAnalysis& analysis, double window_frac) {
    std::vector<PieceReport> pieces;
    std::vector<bool> claimed(analysis.bs.size(), false);
    for (const auto& data : analysis.graph.hyperbolic_leaves) {
        PieceReport p;
        p.id = "leaf-" + std::to_string(data.vertex);
        p.cn_factor_count = 2 * static_cast<int>(data.saddle_points.size());
        for (size_t f = 0; f < data.graph.faces.size(); ++f) {
            int ei = data.graph.faces[f].reeb_edge;
            const ActionProfile& prof = analysis.profiles[static_cast<size_t>(ei)];
            const ReebEdge& e = analysis.graph.edges[static_cast<size_t>(ei)];
            bool anchored_here = e.anchor_vertex == data.vertex;
            double window = window_frac * prof.t_hi;
            for (size_t bi = 0; bi < analysis.bs.size(); ++bi) {
                const BSLeaf& b = analysis.bs[bi];
                if (b.edge_id != ei || b.singular || claimed[bi]) continue;
                double s = anchored_here ? b.t : prof.t_hi - b.t;
                if (s >= window) continue;
                p.bs.push_back(b);
                claimed[bi] = true;
            }
        }
        pieces.push_back(std::move(p));
    }
    PieceReport rest;
    rest.id = "regular";
    for (size_t bi = 0; bi < analysis.bs.size(); ++bi)
        if (!claimed[bi] && !analysis.bs[bi].singular) rest.bs.push_back(analysis.bs[bi]);
    pieces.push_back(std::move(rest));
    return pieces;
}

std::vector<OverlapWindow> default_overlaps(const SystemAnalysis& analysis, double window_frac) {
    // glue each singular-leaf neighborhood to the regular remainder along
    // a thin regular band just outside the window, avoiding BS leaves
    std::vector<OverlapWindow> out;
    for (const auto& data : analysis.graph.hyperbolic_leaves) {
        for (const auto& face : data.graph.faces) {
            int ei = face.reeb_edge;
            const ActionProfile& prof = analysis.profiles[static_cast<size_t>(ei)];
            const ReebEdge& e = analysis.graph.edges[static_cast<size_t>(ei)];
            bool anchored_here = e.anchor_vertex == data.vertex;
            double len = prof.t_hi;
            double s0 = window_frac * len, s1 = std::min((window_frac + 0.08) * len, 0.98 * len);
            double lo = anchored_here ? s0 : len - s1;
            double hi = anchored_here ? s1 : len - s0;
            // nudge away from any BS leaf inside the band
            for (const BSLeaf& b : analysis.bs) {
                if (b.edge_id != ei || b.singular) continue;
                if (b.t > lo && b.t < hi) {
                    if (b.t - lo > hi - b.t)
                        hi = 0.5 * (lo + b.t);
                    else
                        lo = 0.5 * (b.t + hi);
                }
            }
            out.push_back({ei, lo, hi});
        }
    }
    return out;
}

SystemAnalysis surgery_insert_pair(const SystemAnalysis& analysis, const SurgeryOp& op) {
    SystemAnalysis out = analysis;
    out.synthetic = true;
    const ReebEdge edge = out.graph.edges.at(static_cast<size_t>(op.edge_id));
    double len = edge.f_hi - edge.f_lo;
    if (!(op.t > 0 && op.t < len))
        throw OutOfRange("surgery position must be strictly inside the edge");
    const ActionProfile host = out.profiles[static_cast<size_t>(op.edge_id)];
    double a_split = host.sampler ? host.sampler(op.t) : cech::poly_eval(host.fit, op.t);
    double a_lo = host.has_end_lo ? host.end_lo : cech::poly_eval(host.fit, 0.0);
    double budget = std::abs(a_split - a_lo);
    double lobe = op.lobe_area;
    if (lobe <= 0) lobe = std::min(0.5 * budget, kTwoPi * 0.3535533905932738);  // 2 pi / (2 sqrt 2)
    if (lobe >= budget)
        throw InsufficientArea("lobe area " + std::to_string(lobe) + " exceeds the budget " +
                               std::to_string(budget));

    double v0 = out.graph.vertices[static_cast<size_t>(edge.anchor_vertex)].value +
                edge.direction * op.t;
    double delta = 1e-3 * len;  // height of the refoliated window

    // synthetic singular points
    int pid = static_cast<int>(out.points.size());
    geometry::SingularPoint pe;
    pe.id = pid;
    pe.chart_index = -1;
    pe.chart_id = "surgery";
    pe.kind = SingKind::Elliptic;
    pe.hxx = pe.hyy = 1;
    pe.critical_value = v0 - edge.direction * delta;
    out.points.push_back(pe);
    geometry::SingularPoint ph;
    ph.id = pid + 1;
    ph.chart_index = -1;
    ph.chart_id = "surgery";
    ph.kind = SingKind::Hyperbolic;
    ph.hxy = 1;
    ph.critical_value = v0;
    out.points.push_back(ph);
    out.s_e += 1;
    out.s_h += 1;

    // new vertices
    int vE = static_cast<int>(out.graph.vertices.size());
    {
        reeb::ReebVertex v;
        v.kind = VertexKind::EllipticExtremum;
        v.value = pe.critical_value;
        v.singular_points = {pe.id};
        out.graph.vertices.push_back(v);
    }
    int vH = static_cast<int>(out.graph.vertices.size());
    {
        reeb::ReebVertex v;
        v.kind = VertexKind::HyperbolicLeaf;
        v.value = v0;
        v.singular_points = {ph.id};
        out.graph.vertices.push_back(v);
    }

    // split the host edge at v0 and add the lobe edge
    bool anchor_is_lower = edge.anchor_vertex == edge.lower_vertex;
    double v_anchor = out.graph.vertices[static_cast<size_t>(edge.anchor_vertex)].value;
    int below_vertex = anchor_is_lower ? edge.lower_vertex : edge.upper_vertex;
    int above_vertex = anchor_is_lower ? edge.upper_vertex : edge.lower_vertex;
    // "below" is the anchor side of the split in the t parameter

    ReebEdge& e_below = out.graph.edges[static_cast<size_t>(op.edge_id)];
    e_below.lower_vertex = anchor_is_lower ? below_vertex : vH;
    e_below.upper_vertex = anchor_is_lower ? vH : below_vertex;
    e_below.f_lo = std::min(v_anchor, v0);
    e_below.f_hi = std::max(v_anchor, v0);
    // anchor and seed stay with the old anchor end

    ReebEdge e_above;
    e_above.id = static_cast<int>(out.graph.edges.size());
    e_above.lower_vertex = anchor_is_lower ? vH : above_vertex;
    e_above.upper_vertex = anchor_is_lower ? above_vertex : vH;
    e_above.f_lo = std::min(v0, out.graph.vertices[static_cast<size_t>(above_vertex)].value);
    e_above.f_hi = std::max(v0, out.graph.vertices[static_cast<size_t>(above_vertex)].value);
    e_above.anchor_vertex = vH;
    e_above.direction = edge.direction;
    out.graph.edges.push_back(e_above);

    ReebEdge e_lobe;
    e_lobe.id = static_cast<int>(out.graph.edges.size());
    e_lobe.lower_vertex = edge.direction > 0 ? vE : vH;
    e_lobe.upper_vertex = edge.direction > 0 ? vH : vE;
    e_lobe.f_lo = std::min(v0, pe.critical_value);
    e_lobe.f_hi = std::max(v0, pe.critical_value);
    e_lobe.anchor_vertex = vH;
    e_lobe.direction = -edge.direction;
    out.graph.edges.push_back(e_lobe);

    // profiles: host keeps its action below the split minus the lobe dip
    // inside the refoliated window; above the split nothing changes
    double t_split = op.t;
    auto host_sampler = host.sampler;
    auto host_fit = host.fit;
    auto dip = [lobe, t_split, delta](double t) {
        if (t <= t_split - delta) return 0.0;
        if (t >= t_split) return lobe;
        return lobe * (t - (t_split - delta)) / delta;
    };
    ActionProfile below;
    below.edge_id = op.edge_id;
    below.t_lo = 0;
    below.t_hi = t_split;
    below.sampler = [host_sampler, host_fit, dip](double t) {
        double base = host_sampler ? host_sampler(t) : cech::poly_eval(host_fit, t);
        return base - dip(t);
    };
    for (int i = 0; i < 12; ++i) {
        double t = t_split * (i + 0.5) / 12;
        below.samples.emplace_back(t, below.sampler(t));
    }
    below.fit = transport::poly_fit(below.samples, 6, &below.fit_residual);
    below.has_end_lo = host.has_end_lo;
    below.end_lo = host.end_lo;
    below.has_end_hi = true;
    below.end_hi = a_split - lobe;
    out.profiles[static_cast<size_t>(op.edge_id)] = below;

    ActionProfile above;
    above.edge_id = e_above.id;
    above.t_lo = 0;
    above.t_hi = len - t_split;
    above.sampler = [host_sampler, host_fit, t_split](double s) {
        double t = t_split + s;
        return host_sampler ? host_sampler(t) : cech::poly_eval(host_fit, t);
    };
    for (int i = 0; i < 12; ++i) {
        double s = (len - t_split) * (i + 0.5) / 12;
        above.samples.emplace_back(s, above.sampler(s));
    }
    above.fit = transport::poly_fit(above.samples, 6, &above.fit_residual);
    above.has_end_lo = true;
    above.end_lo = a_split;
    above.has_end_hi = host.has_end_hi;
    above.end_hi = host.end_hi;
    out.profiles.push_back(above);

    ActionProfile lobe_prof;
    lobe_prof.edge_id = e_lobe.id;
    lobe_prof.t_lo = 0;
    lobe_prof.t_hi = delta;
    lobe_prof.sampler = [lobe, delta](double s) { return lobe * (1.0 - s / delta); };
    for (int i = 0; i < 12; ++i) {
        double s = delta * (i + 0.5) / 12;
        lobe_prof.samples.emplace_back(s, lobe_prof.sampler(s));
    }
    lobe_prof.fit = transport::poly_fit(lobe_prof.samples, 2, &lobe_prof.fit_residual);
    lobe_prof.has_end_lo = true;
    lobe_prof.end_lo = lobe;
    lobe_prof.has_end_hi = true;
    lobe_prof.end_hi = 0;
    out.profiles.push_back(lobe_prof);

    // the new singular leaf: a figure-eight whose lobes hang below
    reeb::HyperbolicLeafData data;
    data.vertex = vH;
    data.graph = cech::figure_eight();
    data.graph.faces[0].side = -1;  // lobe family: the new disk
    data.graph.faces[1].side = -1;  // lobe family: the host cylinder
    data.graph.faces[2].side = +1;  // outer family continues upward
    data.graph.faces[0].reeb_edge = e_lobe.id;
    data.graph.faces[1].reeb_edge = op.edge_id;
    data.graph.faces[2].reeb_edge = e_above.id;
    data.saddle_points = {ph.id};
    data.arc_actions = {lobe, a_split - lobe};
    data.arcs.resize(2);
    data.face_windings = {0, 0, 0};
    out.graph.hyperbolic_leaves.push_back(std::move(data));

    // refresh the Bohr-Sommerfeld list from the rewritten profiles
    out.bs.clear();
    double bs_tol = analysis.system ? analysis.system->tol.bs_tol : 1e-9;
    for (const auto& prof : out.profiles) {
        auto leaves = transport::find_bs_leaves(prof, bs_tol);
        out.bs.insert(out.bs.end(), leaves.begin(), leaves.end());
    }
    std::sort(out.bs.begin(), out.bs.end(), [](const BSLeaf& x, const BSLeaf& y) {
        if (x.edge_id != y.edge_id) return x.edge_id < y.edge_id;
        return x.t < y.t;
    });
    return out;
}

reeb::PHResult poincare_hopf_check(const SystemAnalysis& analysis) {
    reeb::PHResult r;
    r.chi = analysis.s_e - analysis.s_h;
    r.declared = analysis.system && analysis.system->euler_characteristic.has_value();
    r.ok = r.declared && r.chi == *analysis.system->euler_characteristic;
    return r;
}

} // namespace quantsurf::quantize
