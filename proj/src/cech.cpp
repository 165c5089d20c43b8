#include "quantsurf/cech.hpp"

#include <algorithm>
#include <cmath>

#include "quantsurf/errors.hpp"

namespace quantsurf::cech {

double poly_eval(const Poly& p, double t) {
    double acc = 0;
    for (size_t k = p.size(); k-- > 0;) acc = acc * t + p[k];
    return acc;
}

// ---------------------------------------------------------------------------
// Leaf graphs
// ---------------------------------------------------------------------------

void LeafGraph::validate() const {
    if (num_vertices < 1) throw QuantError("leaf graph needs at least one vertex");
    if (num_arcs() != 2 * num_vertices)
        throw QuantError("leaf graph must have 2 arcs per hyperbolic vertex");
    std::vector<int> slot_use(static_cast<size_t>(num_vertices) * 4, 0);
    auto use = [&](int v, int s) {
        if (v < 0 || v >= num_vertices || s < 0 || s > 3)
            throw QuantError("arc endpoint out of range");
        ++slot_use[static_cast<size_t>(v) * 4 + static_cast<size_t>(s)];
    };
    for (const auto& a : arcs) {
        use(a.tail_vertex, a.tail_slot);
        use(a.head_vertex, a.head_slot);
    }
    for (int cnt : slot_use)
        if (cnt != 1) throw QuantError("every vertex needs exactly 4 distinct arc-ends");

    // each (arc, side) pair belongs to exactly one loop family
    std::vector<int> covered_plus(arcs.size(), 0), covered_minus(arcs.size(), 0);
    for (const auto& f : faces) {
        if (f.side != 1 && f.side != -1) throw QuantError("face side must be +1 or -1");
        if (f.cycle.empty()) throw QuantError("empty face cycle");
        for (size_t i = 0; i < f.cycle.size(); ++i) {
            const FaceStep& st = f.cycle[i];
            if (st.arc < 0 || st.arc >= num_arcs()) throw QuantError("face step arc out of range");
            (f.side > 0 ? covered_plus : covered_minus)[static_cast<size_t>(st.arc)] += 1;
            const FaceStep& nx = f.cycle[(i + 1) % f.cycle.size()];
            const LeafArc& cur = arcs[static_cast<size_t>(st.arc)];
            const LeafArc& nxt = arcs[static_cast<size_t>(nx.arc)];
            int exit_vertex = st.forward ? cur.head_vertex : cur.tail_vertex;
            int entry_vertex = nx.forward ? nxt.tail_vertex : nxt.head_vertex;
            if (exit_vertex != entry_vertex)
                throw QuantError("face cycle is not vertex-contiguous");
        }
    }
    for (size_t a = 0; a < arcs.size(); ++a)
        if (covered_plus[a] != 1 || covered_minus[a] != 1)
            throw QuantError("each arc needs one loop family per transversal side");
}

LeafGraph saddle_chain(int k) {
    if (k < 1) throw QuantError("saddle chain needs k >= 1");
    LeafGraph g;
    g.num_vertices = k;
    // left lobe, pairs of middle arcs, right lobe
    int left = g.num_arcs();
    g.arcs.push_back({0, 0, 0, 1});
    std::vector<int> up(static_cast<size_t>(std::max(0, k - 1))), dn(up.size());
    for (int i = 0; i + 1 < k; ++i) {
        up[static_cast<size_t>(i)] = g.num_arcs();
        g.arcs.push_back({i, 2, i + 1, 0});
        dn[static_cast<size_t>(i)] = g.num_arcs();
        g.arcs.push_back({i + 1, 1, i, 3});
    }
    int right = g.num_arcs();
    g.arcs.push_back({k - 1, 2, k - 1, 3});

    LoopFamily lobe_l;
    lobe_l.cycle = {{left, true}};
    lobe_l.side = +1;
    g.faces.push_back(lobe_l);
    for (int i = 0; i + 1 < k; ++i) {
        LoopFamily mid;
        mid.cycle = {{up[static_cast<size_t>(i)], true}, {dn[static_cast<size_t>(i)], true}};
        mid.side = +1;
        g.faces.push_back(mid);
    }
    LoopFamily lobe_r;
    lobe_r.cycle = {{right, true}};
    lobe_r.side = +1;
    g.faces.push_back(lobe_r);

    LoopFamily outer;
    outer.side = -1;
    outer.cycle.push_back({left, true});
    for (int i = 0; i + 1 < k; ++i) outer.cycle.push_back({up[static_cast<size_t>(i)], true});
    outer.cycle.push_back({right, true});
    for (int i = k - 2; i >= 0; --i) outer.cycle.push_back({dn[static_cast<size_t>(i)], true});
    g.faces.push_back(outer);

    g.validate();
    return g;
}

LeafGraph figure_eight() { return saddle_chain(1); }
LeafGraph triple_eight() { return saddle_chain(2); }

LeafGraph double_lung() {
    LeafGraph g;
    g.num_vertices = 2;
    for (int s = 0; s < 4; ++s) g.arcs.push_back({0, s, 1, s});
    int sides[4] = {+1, -1, +1, -1};
    for (int i = 0; i < 4; ++i) {
        LoopFamily f;
        f.cycle = {{i, true}, {(i + 1) % 4, false}};
        f.side = sides[i];
        g.faces.push_back(f);
    }
    g.validate();
    return g;
}

LeafGraph leaf_graph_by_name(const std::string& name) {
    if (name == "figure-eight") return figure_eight();
    if (name == "triple-eight") return triple_eight();
    if (name == "double-lung") return double_lung();
    if (name.rfind("chain-", 0) == 0) {
        int k = std::stoi(name.substr(6));
        return saddle_chain(k);
    }
    throw QuantError("unknown leaf graph '" + name + "'");
}

// ---------------------------------------------------------------------------
// Shared layout helpers
// ---------------------------------------------------------------------------

namespace {

struct SetRef {
    bool quad = false;
    int arc = -1, seg = -1;   // rectangles
    bool forward = true;      // traversal direction through the rectangle
};

std::vector<SetRef> face_sets(const LeafGraph& g, const std::vector<int>& chains, int f) {
    std::vector<SetRef> sets;
    for (const FaceStep& st : g.faces[static_cast<size_t>(f)].cycle) {
        SetRef quad;
        quad.quad = true;
        sets.push_back(quad);
        int n = chains[static_cast<size_t>(st.arc)];
        for (int s = 0; s < n; ++s) {
            SetRef r;
            r.arc = st.arc;
            r.seg = st.forward ? s : n - 1 - s;
            r.forward = st.forward;
            sets.push_back(r);
        }
    }
    return sets;
}

struct Layout {
    std::vector<int> jet_col0;  // per arc
    std::vector<int> jet_row0;  // per arc
    int c0_jet = 0, c1_jet = 0, c0_val = 0, c1_val = 0;
    // value columns/rows are laid out face-major, bs-major, set-major
};

Layout make_layout(const LeafGraph& g, int N, const std::vector<int>& chains,
                   const std::vector<std::vector<double>>& bs) {
    Layout lay;
    int nj = N + 1;
    lay.jet_col0.resize(g.arcs.size());
    lay.jet_row0.resize(g.arcs.size());
    for (size_t a = 0; a < g.arcs.size(); ++a) {
        lay.jet_col0[a] = lay.c0_jet;
        lay.jet_row0[a] = lay.c1_jet;
        lay.c0_jet += chains[a] * nj;
        lay.c1_jet += (chains[a] + 1) * nj;
    }
    for (size_t f = 0; f < g.faces.size(); ++f) {
        int sets = 0;
        for (const FaceStep& st : g.faces[f].cycle)
            sets += 1 + chains[static_cast<size_t>(st.arc)];
        int nb = static_cast<int>(bs[f].size());
        lay.c0_val += nb * sets;
        lay.c1_val += nb * sets;
    }
    return lay;
}

template <typename T>
Matrix<T> assemble_d0(const LeafGraph& g, int N, const std::vector<int>& chains,
                      const std::vector<std::vector<Series1<T>>>& rect_jets,
                      const std::vector<std::vector<std::vector<T>>>& bs_tau,
                      const std::vector<std::vector<double>>& bs, const Layout& lay) {
    int nj = N + 1;
    Matrix<T> d0(lay.c1_jet + lay.c1_val, lay.c0_jet + lay.c0_val);

    // jet blocks, arc by arc
    for (size_t a = 0; a < g.arcs.size(); ++a) {
        int n = chains[a];
        for (int o = 0; o <= n; ++o) {
            int row0 = lay.jet_row0[a] + o * nj;
            if (o < n) {
                // entering rectangle o at its reference end: identity block
                int col0 = lay.jet_col0[a] + o * nj;
                double sign = (o == 0) ? -1.0 : 1.0;
                for (int i = 0; i < nj; ++i) d0(row0 + i, col0 + i) += T(sign > 0 ? 1 : -1);
            }
            if (o > 0) {
                // leaving rectangle o-1: truncated multiplication by its jet
                int col0 = lay.jet_col0[a] + (o - 1) * nj;
                const Series1<T>& tau = rect_jets[a][static_cast<size_t>(o - 1)];
                for (int i = 0; i < nj; ++i)
                    for (int k = 0; k <= i; ++k) d0(row0 + i, col0 + k) -= tau[i - k];
            }
        }
    }

    // Bohr-Sommerfeld value blocks, one cyclic system per (face, parameter)
    int vcol = lay.c0_jet;
    int vrow = lay.c1_jet;
    for (size_t f = 0; f < g.faces.size(); ++f) {
        auto sets = face_sets(g, chains, static_cast<int>(f));
        int M = static_cast<int>(sets.size());
        for (size_t b = 0; b < bs[f].size(); ++b) {
            const auto& tau = bs_tau[f][b];
            for (int k = 0; k < M; ++k) {
                int next = (k + 1) % M;
                int row = vrow + k;
                // sign convention: (delta b) = b_cross - b_rectangle on
                // cross/rectangle overlaps, b_next - b_prev along chains
                double next_sign = 1.0;
                if (!sets[static_cast<size_t>(next)].quad && sets[static_cast<size_t>(k)].quad)
                    next_sign = -1.0;
                d0(row, vcol + next) += T(next_sign > 0 ? 1 : -1);
                T prev_coeff = tau[static_cast<size_t>(k)];
                if (next_sign > 0)
                    d0(row, vcol + k) -= prev_coeff;
                else
                    d0(row, vcol + k) += prev_coeff;
            }
            vcol += M;
            vrow += M;
        }
    }
    return d0;
}

} // namespace

// ---------------------------------------------------------------------------
// Double-precision model
// ---------------------------------------------------------------------------

int CechComplex::total_bs() const {
    int m = 0;
    for (const auto& v : bs_params) m += static_cast<int>(v.size());
    return m;
}

int CechComplex::sets_on_face(int f) const {
    int sets = 0;
    for (const FaceStep& st : graph.faces[static_cast<size_t>(f)].cycle)
        sets += 1 + chain_lengths[static_cast<size_t>(st.arc)];
    return sets;
}

namespace {

/// Face carrying the +1 side of an arc, and its visit multiplicity.
std::pair<int, int> plus_face_of(const LeafGraph& g, int arc) {
    for (size_t f = 0; f < g.faces.size(); ++f) {
        if (g.faces[f].side != +1) continue;
        int visits = 0;
        for (const FaceStep& st : g.faces[f].cycle)
            if (st.arc == arc) ++visits;
        if (visits > 0) return {static_cast<int>(f), static_cast<int>(g.faces[f].cycle.size())};
    }
    throw QuantError("arc has no +side loop family");
}

CSeries unit_exp_jet(const Poly& phase, double scale, int N) {
    // exp(i * scale * phase(t)) truncated at order N
    CSeries arg(N);
    for (int k = 1; k <= N && k < static_cast<int>(phase.size()); ++k)
        arg[k] = Complex(0, scale * phase[static_cast<size_t>(k)]);
    CSeries e = CSeries::exp_nonconst(arg);
    double c0 = phase.empty() ? 0.0 : phase[0];
    return std::polar(1.0, scale * c0) * e;
}

} // namespace

CechComplex build_model(const LeafGraph& graph, int N, const std::vector<Poly>& holonomy_polys,
                        const std::vector<std::vector<double>>& bs_params,
                        const BuildOptions& options) {
    graph.validate();
    if (N < 0) throw QuantError("jet order must be >= 0");
    if (holonomy_polys.size() != graph.faces.size())
        throw QuantError("need one action polynomial per loop family");
    if (bs_params.size() != graph.faces.size())
        throw QuantError("need one BS parameter list per loop family");

    CechComplex m;
    m.graph = graph;
    m.N = N;
    m.holonomy_polys = holonomy_polys;
    m.chain_lengths = options.chain_lengths;
    if (m.chain_lengths.empty()) m.chain_lengths.assign(graph.arcs.size(), 1);
    if (m.chain_lengths.size() != graph.arcs.size())
        throw QuantError("need one chain length per arc");
    for (int n : m.chain_lengths)
        if (n < 1) throw InvalidChain("chain length must be >= 1");

    // merge near-coincident BS parameters, reject the singular value t = 0
    m.bs_params.resize(graph.faces.size());
    for (size_t f = 0; f < graph.faces.size(); ++f) {
        std::vector<double> ts = bs_params[f];
        std::sort(ts.begin(), ts.end());
        for (double t : ts) {
            if (std::abs(t) <= options.bs_merge_tol)
                throw OutOfRange("BS parameters must be nonzero leaf parameters");
            if (!m.bs_params[f].empty() &&
                std::abs(t - m.bs_params[f].back()) <= options.bs_merge_tol)
                continue;
            m.bs_params[f].push_back(t);
        }
        if (options.check_holonomy) {
            for (double t : m.bs_params[f]) {
                Complex hol = std::polar(1.0, poly_eval(holonomy_polys[f], t));
                if (std::abs(hol - Complex(1, 0)) > options.holonomy_tol)
                    throw InconsistentHolonomy("face " + std::to_string(f) + " at t=" +
                                               std::to_string(t));
            }
        }
    }

    // per-segment transport jets from the +side family's action
    m.rect_jets.resize(graph.arcs.size());
    for (int a = 0; a < graph.num_arcs(); ++a) {
        auto [fplus, visits] = plus_face_of(graph, a);
        int chain = m.chain_lengths[static_cast<size_t>(a)];
        double scale = 1.0 / (static_cast<double>(visits) * chain);
        CSeries seg = unit_exp_jet(holonomy_polys[static_cast<size_t>(fplus)], scale, N);
        m.rect_jets[static_cast<size_t>(a)].assign(static_cast<size_t>(chain), seg);
    }

    // transport values around each family at each BS parameter; the first
    // cross hop absorbs whatever the rectangles do not account for
    m.bs_tau.resize(graph.faces.size());
    for (size_t f = 0; f < graph.faces.size(); ++f) {
        auto sets = face_sets(graph, m.chain_lengths, static_cast<int>(f));
        for (double t : m.bs_params[f]) {
            std::vector<Complex> tau(sets.size(), Complex(1, 0));
            Complex prod(1, 0);
            for (size_t k = 0; k < sets.size(); ++k) {
                if (sets[k].quad) continue;
                auto [fplus, visits] = plus_face_of(graph, sets[k].arc);
                int chain = m.chain_lengths[static_cast<size_t>(sets[k].arc)];
                double phase =
                    poly_eval(holonomy_polys[static_cast<size_t>(fplus)], t) /
                    (static_cast<double>(visits) * chain);
                if (!sets[k].forward) phase = -phase;
                tau[k] = std::polar(1.0, phase);
                prod *= tau[k];
            }
            Complex target = std::polar(1.0, poly_eval(holonomy_polys[f], t));
            for (size_t k = 0; k < sets.size(); ++k) {
                if (sets[k].quad) {
                    tau[k] = target / prod;
                    break;
                }
            }
            m.bs_tau[f].push_back(std::move(tau));
        }
    }

    Layout lay = make_layout(graph, N, m.chain_lengths, m.bs_params);
    m.c0_jet_dim = lay.c0_jet;
    m.c0_value_dim = lay.c0_val;
    m.c1_jet_dim = lay.c1_jet;
    m.c1_value_dim = lay.c1_val;
    return m;
}

CMatrix coboundary_matrix(const CechComplex& model) {
    Layout lay = make_layout(model.graph, model.N, model.chain_lengths, model.bs_params);
    return assemble_d0<Complex>(model.graph, model.N, model.chain_lengths, model.rect_jets,
                                model.bs_tau, model.bs_params, lay);
}

CohomologyDims cohomology_dims(const CechComplex& model, double rank_threshold) {
    CMatrix d0 = coboundary_matrix(model);
    CohomologyDims dims;
    dims.rank_info = numeric_rank(d0, rank_threshold);
    dims.rank = dims.rank_info.rank;
    dims.rank_deficiency_warning = dims.rank_info.deficiency_warning;
    dims.h1 = model.c1_dim() - dims.rank;
    dims.h0_raw = model.c0_dim() - dims.rank;
    dims.h2 = 0;

    // value sub-block: point-value kernel the smooth sheaf cannot see
    int vr = model.c1_value_dim, vc = model.c0_value_dim;
    if (vc > 0) {
        CMatrix sub(vr, vc);
        for (int i = 0; i < vr; ++i)
            for (int j = 0; j < vc; ++j)
                sub(i, j) = d0(model.c1_jet_dim + i, model.c0_jet_dim + j);
        dims.value_kernel_dim = vc - numeric_rank(sub, rank_threshold).rank;
    }
    dims.h0_smooth = dims.h0_raw - dims.value_kernel_dim;
    return dims;
}

int general_leaf_h1(const LeafGraph& graph, int N, int m) {
    graph.validate();
    return graph.num_arcs() * (N + 1) + m;
}

CechComplex chain_collapse(const CechComplex& model) {
    CechComplex c = model;
    c.chain_lengths.assign(model.graph.arcs.size(), 1);
    for (size_t a = 0; a < model.graph.arcs.size(); ++a) {
        CSeries prod(model.N, Complex(1, 0));
        for (const CSeries& seg : model.rect_jets[a]) prod *= seg;
        c.rect_jets[a] = {prod};
    }
    // collapse rectangle runs in every BS cycle, multiplying their hops
    c.bs_tau.assign(model.graph.faces.size(), {});
    for (size_t f = 0; f < model.graph.faces.size(); ++f) {
        auto sets = face_sets(model.graph, model.chain_lengths, static_cast<int>(f));
        for (const auto& tau : model.bs_tau[f]) {
            std::vector<Complex> collapsed;
            Complex run(1, 0);
            bool in_run = false;
            for (size_t k = 0; k < sets.size(); ++k) {
                if (sets[k].quad) {
                    if (in_run) collapsed.push_back(run);
                    run = Complex(1, 0);
                    in_run = false;
                    collapsed.push_back(tau[k]);
                } else {
                    run *= tau[k];
                    in_run = true;
                }
            }
            if (in_run) collapsed.push_back(run);
            c.bs_tau[f].push_back(std::move(collapsed));
        }
    }
    Layout lay = make_layout(c.graph, c.N, c.chain_lengths, c.bs_params);
    c.c0_jet_dim = lay.c0_jet;
    c.c0_value_dim = lay.c0_val;
    c.c1_jet_dim = lay.c1_jet;
    c.c1_value_dim = lay.c1_val;
    return c;
}

CechComplex refine_cover(const CechComplex& model, int factor) {
    if (factor < 1) throw InvalidChain("refinement factor must be >= 1");
    if (factor == 1) return model;
    BuildOptions opt;
    opt.chain_lengths = model.chain_lengths;
    for (int& n : opt.chain_lengths) n *= factor;
    return build_model(model.graph, model.N, model.holonomy_polys, model.bs_params, opt);
}

CechComplex gauge_transform(const CechComplex& model, int arc, int segment, double phase) {
    CechComplex g = model;
    Complex u = std::polar(1.0, phase);
    g.rect_jets[static_cast<size_t>(arc)][static_cast<size_t>(segment)] =
        u * g.rect_jets[static_cast<size_t>(arc)][static_cast<size_t>(segment)];
    for (size_t f = 0; f < g.graph.faces.size(); ++f) {
        auto sets = face_sets(g.graph, g.chain_lengths, static_cast<int>(f));
        for (auto& tau : g.bs_tau[f]) {
            Complex correction(1, 0);
            for (size_t k = 0; k < sets.size(); ++k) {
                if (!sets[k].quad && sets[k].arc == arc && sets[k].seg == segment) {
                    Complex fac = sets[k].forward ? u : std::conj(u);
                    tau[k] *= fac;
                    correction *= fac;
                }
            }
            // keep the loop product fixed: the first cross hop compensates
            for (size_t k = 0; k < sets.size(); ++k) {
                if (sets[k].quad) {
                    tau[k] /= correction;
                    break;
                }
            }
        }
    }
    return g;
}

CechComplex reverse_family(const CechComplex& model, int face) {
    LeafGraph g = model.graph;
    auto& cyc = g.faces[static_cast<size_t>(face)].cycle;
    std::reverse(cyc.begin(), cyc.end());
    for (FaceStep& st : cyc) st.forward = !st.forward;
    std::vector<Poly> polys = model.holonomy_polys;
    for (double& c : polys[static_cast<size_t>(face)]) c = -c;
    BuildOptions opt;
    opt.chain_lengths = model.chain_lengths;
    return build_model(g, model.N, polys, model.bs_params, opt);
}

CechComplex reparametrize(const CechComplex& model, double c) {
    if (!(c > 0)) throw OutOfRange("reparametrization needs c > 0");
    std::vector<Poly> polys = model.holonomy_polys;
    for (Poly& p : polys) {
        double f = 1;
        for (double& a : p) {
            a *= f;
            f *= c;
        }
    }
    std::vector<std::vector<double>> bs = model.bs_params;
    for (auto& v : bs)
        for (double& t : v) t /= c;
    BuildOptions opt;
    opt.chain_lengths = model.chain_lengths;
    return build_model(model.graph, model.N, polys, bs, opt);
}

// ---------------------------------------------------------------------------
// Exact twin
// ---------------------------------------------------------------------------

ExactDims exact_cohomology_dims(const LeafGraph& graph, int N, const std::vector<int>& bs_counts,
                                const std::vector<int>& chain_lengths) {
    graph.validate();
    std::vector<int> chains = chain_lengths;
    if (chains.empty()) chains.assign(graph.arcs.size(), 1);
    if (bs_counts.size() != graph.faces.size())
        throw QuantError("need one BS count per loop family");

    using GR = GaussianRational;
    // generic jets with unit constant term
    std::vector<std::vector<Series1<GR>>> jets(graph.arcs.size());
    for (size_t a = 0; a < graph.arcs.size(); ++a) {
        for (int s = 0; s < chains[a]; ++s) {
            Series1<GR> jet(N);
            jet[0] = GR(1);
            for (int k = 1; k <= N; ++k) {
                long long ia = static_cast<long long>(a);
                jet[k] = GR(Rational((ia + 2 * s + 3 * k) % 7 - 3, k + 1),
                            Rational((2 * ia + s + 5 * k) % 5 - 2, k + 2));
            }
            jets[a].push_back(jet);
        }
    }

    // exact unit-modulus hops whose product around each cycle is one
    static const long long pyth[][3] = {{3, 4, 5},   {5, 12, 13}, {8, 15, 17},
                                        {7, 24, 25}, {20, 21, 29}, {9, 40, 41}};
    std::vector<std::vector<double>> fake_bs(graph.faces.size());
    std::vector<std::vector<std::vector<GR>>> bs_tau(graph.faces.size());
    for (size_t f = 0; f < graph.faces.size(); ++f) {
        auto sets = face_sets(graph, chains, static_cast<int>(f));
        for (int b = 0; b < bs_counts[f]; ++b) {
            fake_bs[f].push_back(0.25 * (b + 1));  // placeholder positions
            std::vector<GR> tau(sets.size(), GR(1));
            GR prod(1);
            size_t absorber = 0;
            bool absorber_set = false;
            int idx = static_cast<int>(f) + b;
            for (size_t k = 0; k < sets.size(); ++k) {
                if (sets[k].quad && !absorber_set) {
                    absorber = k;
                    absorber_set = true;
                    continue;
                }
                const auto& p = pyth[static_cast<size_t>(idx++) % 6];
                GR u(Rational(p[0], p[2]), Rational(p[1], p[2]));
                tau[k] = u;
                prod *= u;
            }
            tau[absorber] = GR(1) / prod;
            bs_tau[f].push_back(std::move(tau));
        }
    }

    Layout lay = make_layout(graph, N, chains, fake_bs);
    Matrix<GR> d0 = assemble_d0<GR>(graph, N, chains, jets, bs_tau, fake_bs, lay);
    int rank = exact_rank(d0);
    ExactDims dims;
    dims.rank = rank;
    dims.h1 = (lay.c1_jet + lay.c1_val) - rank;
    dims.h0_raw = (lay.c0_jet + lay.c0_val) - rank;
    return dims;
}

} // namespace quantsurf::cech
