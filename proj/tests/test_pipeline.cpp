#include <cmath>
#include <random>

#include "doctest.h"
#include "quantsurf/errors.hpp"
#include "quantsurf/mesh.hpp"
#include "quantsurf/quantize.hpp"
#include "quantsurf/transport.hpp"

using namespace quantsurf;
using namespace quantsurf::geometry;
using namespace quantsurf::quantize;

namespace {

const double kPi = 3.14159265358979323846;

const SystemAnalysis& sphere_analysis() {
    static SystemAnalysis a = analyze(sphere_height(4));
    return a;
}
const SystemAnalysis& torus_analysis() {
    static SystemAnalysis a = analyze(standing_torus());
    return a;
}
const SystemAnalysis& euler_analysis() {
    static SystemAnalysis a = analyze(euler_sphere());
    return a;
}

int count_kind(const reeb::ReebGraph& g, reeb::VertexKind k) {
    int n = 0;
    for (const auto& v : g.vertices)
        if (v.kind == k) ++n;
    return n;
}

} // namespace

TEST_CASE("reeb graph of the sphere height") {
    const auto& a = sphere_analysis();
    CHECK(a.graph.vertices.size() == 2);
    CHECK(a.graph.edges.size() == 1);
    CHECK(count_kind(a.graph, reeb::VertexKind::EllipticExtremum) == 2);
    CHECK(a.graph.hyperbolic_leaves.empty());
}

TEST_CASE("reeb graph of the standing torus") {
    const auto& a = torus_analysis();
    CHECK(a.graph.vertices.size() == 4);
    CHECK(a.graph.edges.size() == 4);
    CHECK(count_kind(a.graph, reeb::VertexKind::HyperbolicLeaf) == 2);
    // doubled middle: two edges share the two saddle vertices
    int doubled = 0;
    for (const auto& e : a.graph.edges) {
        bool lower_h = a.graph.vertices[static_cast<size_t>(e.lower_vertex)].kind ==
                       reeb::VertexKind::HyperbolicLeaf;
        bool upper_h = a.graph.vertices[static_cast<size_t>(e.upper_vertex)].kind ==
                       reeb::VertexKind::HyperbolicLeaf;
        if (lower_h && upper_h) ++doubled;
    }
    CHECK(doubled == 2);

    // each saddle leaf is a figure-eight: one vertex, two arcs, three families
    for (const auto& data : a.graph.hyperbolic_leaves) {
        CHECK(data.graph.num_vertices == 1);
        CHECK(data.graph.num_arcs() == 2);
        CHECK(data.graph.faces.size() == 3);
        int plus = 0, minus = 0;
        for (const auto& f : data.graph.faces) (f.side > 0 ? plus : minus)++;
        CHECK(plus + minus == 3);
        CHECK((plus == 2 || minus == 2));
    }
}

TEST_CASE("reeb graph of the euler sphere: one leaf holds both saddles") {
    const auto& a = euler_analysis();
    CHECK(count_kind(a.graph, reeb::VertexKind::EllipticExtremum) == 4);
    CHECK(count_kind(a.graph, reeb::VertexKind::HyperbolicLeaf) == 1);
    CHECK(a.graph.hyperbolic_point_count() == 2);
    CHECK(a.graph.edges.size() == 4);
    const auto& data = a.graph.hyperbolic_leaves.front();
    CHECK(data.graph.num_vertices == 2);
    CHECK(data.graph.num_arcs() == 4);
    CHECK(data.graph.faces.size() == 4);
    for (const auto& f : data.graph.faces) CHECK(f.cycle.size() == 2);
}

TEST_CASE("poincare-hopf bookkeeping") {
    CHECK(quantize::poincare_hopf_check(sphere_analysis()).chi == 2);
    CHECK(quantize::poincare_hopf_check(sphere_analysis()).ok);
    CHECK(quantize::poincare_hopf_check(torus_analysis()).chi == 0);
    CHECK(quantize::poincare_hopf_check(torus_analysis()).ok);
    CHECK(quantize::poincare_hopf_check(euler_analysis()).chi == 2);
    CHECK(quantize::poincare_hopf_check(euler_analysis()).ok);
}

TEST_CASE("transversal parameter and leaf convergence") {
    const auto& a = torus_analysis();
    // pick a middle edge anchored at a saddle
    int mid = -1;
    for (const auto& e : a.graph.edges) {
        bool lower_h = a.graph.vertices[static_cast<size_t>(e.lower_vertex)].kind ==
                       reeb::VertexKind::HyperbolicLeaf;
        bool upper_h = a.graph.vertices[static_cast<size_t>(e.upper_vertex)].kind ==
                       reeb::VertexKind::HyperbolicLeaf;
        if (lower_h && upper_h) mid = e.id;
    }
    REQUIRE(mid >= 0);
    const reeb::ReebEdge& e = a.graph.edges[static_cast<size_t>(mid)];
    double len = e.f_hi - e.f_lo;
    trace::Path leaf = reeb::transversal_param(*a.system, a.graph, mid, 0.5 * len);
    double anchor = a.graph.vertices[static_cast<size_t>(e.anchor_vertex)].value;
    CHECK(leaf.level == doctest::Approx(anchor + e.direction * 0.5 * len));
    CHECK(leaf.closed);
    CHECK_THROWS_AS(reeb::transversal_param(*a.system, a.graph, mid, -0.1), OutOfRange);
    CHECK_THROWS_AS(reeb::transversal_param(*a.system, a.graph, mid, len * 1.01), OutOfRange);

    // shrinking t: the leaf converges to one lobe arc of the anchor saddle
    const auto& data = a.graph.leaf_data(e.anchor_vertex);
    trace::Tracer tracer(*a.system);
    double prev = 1e300;
    for (double t : {0.02 * len, 0.01 * len, 0.005 * len}) {
        trace::Path lf = reeb::transversal_param(*a.system, a.graph, mid, t);
        // one-sided Hausdorff distance to the closest arc
        double best_arc = 1e300;
        for (const auto& arc : data.arcs) {
            double worst = 0;
            size_t stride = std::max<size_t>(1, lf.pts.size() / 150);
            for (size_t i = 0; i < lf.pts.size(); i += stride) {
                double dmin = 1e300;
                for (size_t j = 0; j < arc.pts.size(); j += 3) {
                    trace::Pt d = tracer.period_delta(lf.pts[i], arc.pts[j]);
                    dmin = std::min(dmin, std::hypot(d.x, d.y));
                }
                worst = std::max(worst, dmin);
            }
            best_arc = std::min(best_arc, worst);
        }
        CHECK(best_arc < prev + 1e-12);
        prev = best_arc;
    }
    // near the saddle the leaf stands off the separatrix at a sqrt(t) rate
    CHECK(prev < 0.12);
}

TEST_CASE("parallel transport on circles matches the enclosed area") {
    SurfaceSystem sys = normal_form_saddle();
    // Theta = (x dy - y dx)/2 around a circle of radius r encloses pi r^2
    for (double r : {0.3, 0.7, 1.0}) {
        auto circle = [r](double t) {
            return std::array<double, 4>{r * std::cos(t), r * std::sin(t), -r * std::sin(t),
                                         r * std::cos(t)};
        };
        // the circle is not a leaf of x y; transport along an explicit curve
        // checks the connection only, so disable the level guard by taking
        // the curve as its own system with F constant
        SurfaceSystem flat = sys;
        flat.charts[0].F = Expr::parse("0", {});
        auto tf = transport::parallel_transport(flat, circle, 0.0, 2 * kPi);
        CHECK(tf.phase == doctest::Approx(kPi * r * r).epsilon(1e-10));
        CHECK(std::abs(tf.value - std::polar(1.0, kPi * r * r)) < 1e-9);
        CHECK(std::abs(std::abs(tf.value) - 1.0) < 1e-12);
    }
    // a loop with integral pi transports to -1
    auto unit = [](double t) {
        return std::array<double, 4>{std::cos(t), std::sin(t), -std::sin(t), std::cos(t)};
    };
    SurfaceSystem flat = sys;
    flat.charts[0].F = Expr::parse("0", {});
    auto tf = transport::parallel_transport(flat, unit, 0.0, 2 * kPi);
    CHECK(std::abs(tf.value - std::complex<double>(-1, 0)) < 1e-9);

    // constant path transports trivially
    auto still = [](double) { return std::array<double, 4>{0.4, 0.2, 0.0, 0.0}; };
    auto one = transport::parallel_transport(sys, still, 0.0, 1.0);
    CHECK(std::abs(one.value - std::complex<double>(1, 0)) < 1e-12);
}

TEST_CASE("stokes consistency for random contractible loops") {
    std::mt19937 rng(2026);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (const char* name : {"sphere-height", "standing-torus", "euler-sphere"}) {
        SurfaceSystem sys = builtin_system(name);
        const Chart& chart = sys.tracing_chart();
        SurfaceSystem flat = sys;
        flat.charts[static_cast<size_t>(sys.tracing_chart_index())].F = Expr::parse("0", {});
        for (int trial = 0; trial < 17; ++trial) {
            double cx = chart.domain.x0 + chart.domain.width() * (0.3 + 0.4 * u(rng));
            double cy = chart.domain.y0 + chart.domain.height() * (0.3 + 0.4 * u(rng));
            double r0 = 0.05 * chart.diameter() * (0.3 + u(rng));
            double wob = 0.2 * u(rng);
            int lobes = 2 + static_cast<int>(3 * u(rng));
            auto curve = [=](double t) {
                double rr = r0 * (1 + wob * std::cos(lobes * t));
                double dr = -r0 * wob * lobes * std::sin(lobes * t);
                return std::array<double, 4>{cx + rr * std::cos(t), cy + rr * std::sin(t),
                                             dr * std::cos(t) - rr * std::sin(t),
                                             dr * std::sin(t) + rr * std::cos(t)};
            };
            auto tf = transport::parallel_transport(flat, curve, 0.0, 2 * kPi);
            // independent route: enclosed symplectic area via Green's theorem
            double w = chart.omega(cx, cy);  // constant densities on builtins
            double area = 0;
            int n = 4000;
            for (int i = 0; i < n; ++i) {
                double t = 2 * kPi * i / n;
                auto c = curve(t);
                area += c[0] * c[3] * (2 * kPi / n);
            }
            area *= w;
            CHECK(std::abs(tf.value - std::polar(1.0, area)) < 1e-7);
            ++checked;
        }
    }
    CHECK(checked >= 50);
}

TEST_CASE("transport composes and inverts") {
    const auto& a = torus_analysis();
    int mid = a.graph.hyperbolic_leaves.front().graph.faces.front().reeb_edge;
    const reeb::ReebEdge& e = a.graph.edges[static_cast<size_t>(mid)];
    trace::Path leaf =
        reeb::transversal_param(*a.system, a.graph, mid, 0.5 * (e.f_hi - e.f_lo));
    // split the closed leaf into four consecutive pieces
    size_t n = leaf.pts.size();
    transport::TransportFactor whole = transport::parallel_transport(*a.system, leaf, 1e-6);
    std::complex<double> prod(1, 0);
    for (int part = 0; part < 4; ++part) {
        trace::Path seg;
        size_t lo = part * (n - 1) / 4, hi = (part + 1) * (n - 1) / 4;
        seg.level = leaf.level;
        seg.pts.assign(leaf.pts.begin() + static_cast<long>(lo),
                       leaf.pts.begin() + static_cast<long>(hi) + 1);
        seg.tangents.assign(leaf.tangents.begin() + static_cast<long>(lo),
                            leaf.tangents.begin() + static_cast<long>(hi) + 1);
        auto tf = transport::parallel_transport(*a.system, seg, 1e-6);
        prod *= tf.value;

        // reversal inverts the factor
        trace::Path rev = seg;
        std::reverse(rev.pts.begin(), rev.pts.end());
        std::reverse(rev.tangents.begin(), rev.tangents.end());
        for (auto& t : rev.tangents) {
            t.x = -t.x;
            t.y = -t.y;
        }
        auto back = transport::parallel_transport(*a.system, rev, 1e-6);
        CHECK(std::abs(tf.value * back.value - std::complex<double>(1, 0)) < 1e-9);
    }
    CHECK(std::abs(prod - whole.value) < 1e-9);

    // a path violating the level guard is rejected
    trace::Path bad = leaf;
    bad.level += 0.1;
    CHECK_THROWS_AS(transport::parallel_transport(*a.system, bad, 1e-6), PathLeavesLeaf);
}

TEST_CASE("sphere action profile matches the swept-area formula") {
    const auto& a = sphere_analysis();
    REQUIRE(a.profiles.size() == 1);
    const auto& prof = a.profiles[0];
    for (const auto& [t, action] : prof.samples)
        CHECK(action == doctest::Approx(2 * kPi * t).epsilon(1e-6));
    CHECK(prof.end_lo == doctest::Approx(0.0));
    CHECK(prof.end_hi == doctest::Approx(8 * kPi));
    CHECK(prof.fit_residual < 1e-6);
}

TEST_CASE("sphere k=4 has three regular BS leaves at integer heights") {
    const auto& a = sphere_analysis();
    int regular = 0, singular = 0;
    for (const auto& b : a.bs) {
        if (b.singular) {
            ++singular;
            continue;
        }
        ++regular;
        CHECK(b.t == doctest::Approx(std::round(b.t)).epsilon(1e-9));
    }
    CHECK(regular == 3);
    CHECK(singular == 2);

    // count is stable under a halved tracing step
    SurfaceSystem fine = sphere_height(4);
    fine.tol.trace_step_frac *= 0.5;
    SystemAnalysis fa = analyze(fine);
    int fregular = 0;
    for (const auto& b : fa.bs)
        if (!b.singular) ++fregular;
    CHECK(fregular == 3);

    // simple roots: the action slope stays away from zero
    for (const auto& b : a.bs) {
        if (b.singular) continue;
        double h = 1e-4;
        double slope = (a.profiles[0].sampler(b.t + h) - a.profiles[0].sampler(b.t - h)) / (2 * h);
        CHECK(std::abs(slope) > 1e-6);
    }
}

TEST_CASE("lobe actions: separatrix limits are consistent") {
    const auto& a = torus_analysis();
    const auto& data = a.graph.hyperbolic_leaves.front();
    // the outer family's limit equals the sum of the lobe limits
    double lobe_sum = 0, outer = 0;
    bool saw_outer = false;
    for (size_t f = 0; f < data.graph.faces.size(); ++f) {
        double acc = 0;
        for (const auto& st : data.graph.faces[f].cycle)
            acc += (st.forward ? 1.0 : -1.0) * data.arc_actions[static_cast<size_t>(st.arc)];
        if (data.graph.faces[f].cycle.size() == 2) {
            outer = acc;
            saw_outer = true;
        } else {
            lobe_sum += acc;
        }
    }
    REQUIRE(saw_outer);
    CHECK(std::abs(outer - lobe_sum) < 1e-7);

    // lobe limit against an independent polygonal quadrature of the arc
    trace::Tracer tracer(*a.system);
    const Chart& chart = a.system->tracing_chart();
    for (size_t arc = 0; arc < data.arcs.size(); ++arc) {
        const trace::Path& p = data.arcs[arc];
        double poly = 0;  // trapezoid rule on theta along the polyline
        for (size_t i = 0; i + 1 < p.pts.size(); ++i) {
            double mx = 0.5 * (p.pts[i].x + p.pts[i + 1].x);
            double my = 0.5 * (p.pts[i].y + p.pts[i + 1].y);
            poly += chart.theta_x(mx, my) * (p.pts[i + 1].x - p.pts[i].x) +
                    chart.theta_y(mx, my) * (p.pts[i + 1].y - p.pts[i].y);
        }
        CHECK(data.arc_actions[arc] == doctest::Approx(poly).epsilon(5e-4));
    }

    // profile limits approach the separatrix limits; integrals on other
    // periodic images may differ by an exact multiple of 2 pi
    for (size_t f = 0; f < data.graph.faces.size(); ++f) {
        int ei = data.graph.faces[f].reeb_edge;
        const auto& prof = a.profiles[static_cast<size_t>(ei)];
        const reeb::ReebEdge& e = a.graph.edges[static_cast<size_t>(ei)];
        double face_limit = 0;
        for (const auto& st : data.graph.faces[f].cycle)
            face_limit +=
                (st.forward ? 1.0 : -1.0) * data.arc_actions[static_cast<size_t>(st.arc)];
        double end = e.anchor_vertex == data.vertex ? prof.end_lo : prof.end_hi;
        double branch = (end - face_limit) / (2 * kPi);
        CHECK(std::abs(branch - std::round(branch)) < 1e-7);
        // sampled action converges toward the limit on the fit's branch
        double t_small = e.anchor_vertex == data.vertex ? 0.01 * prof.t_hi : 0.99 * prof.t_hi;
        CHECK(std::abs(prof.sampler(t_small) - end) < 0.1);
    }
}

TEST_CASE("actions are monotone along every builtin edge") {
    for (const SystemAnalysis* a :
         {&sphere_analysis(), &torus_analysis(), &euler_analysis()}) {
        for (const auto& prof : a->profiles) {
            auto pts = prof.samples;
            std::sort(pts.begin(), pts.end());
            bool incr = pts.back().second > pts.front().second;
            for (size_t i = 0; i + 1 < pts.size(); ++i) {
                CAPTURE(prof.edge_id);
                if (incr)
                    CHECK(pts[i + 1].second > pts[i].second);
                else
                    CHECK(pts[i + 1].second < pts[i].second);
            }
        }
    }
}

TEST_CASE("quantization reports") {
    QuantizationReport sphere = quantize::quantize(sphere_analysis());
    CHECK(sphere.s_e == 2);
    CHECK(sphere.s_h == 0);
    CHECK(sphere.cn_factor_count == 0);
    CHECK(sphere.bs_regular.size() == 3);
    for (auto [N, dim] : sphere.truncated_dims) CHECK(dim == 3);
    CHECK(sphere.chi_ok);

    QuantizationReport euler = quantize::quantize(euler_analysis());
    CHECK(euler.s_e == 4);
    CHECK(euler.s_h == 2);
    CHECK(euler.cn_factor_count == 4);
    for (auto [N, dim] : euler.truncated_dims)
        CHECK(dim == 4 * (N + 1) + static_cast<int>(euler.bs_regular.size()));
}

TEST_CASE("formula and rank oracle agree on every builtin") {
    for (const SystemAnalysis* a :
         {&sphere_analysis(), &torus_analysis(), &euler_analysis()}) {
        QuantizationReport r = quantize::quantize(*a, 6);
        for (auto [N, dim] : r.truncated_dims) {
            CAPTURE(r.system);
            CAPTURE(N);
            CHECK(quantize::truncated_dim_rank_oracle(*a, N) == dim);
        }
    }
}

TEST_CASE("mayer-vietoris assembly") {
    // torus: two saddle neighborhoods plus the regular remainder
    const auto& a = torus_analysis();
    auto pieces = quantize::decompose(a);
    auto overlaps = quantize::default_overlaps(a);
    QuantizationReport glued = quantize::mayer_vietoris_assemble(a, pieces, overlaps);
    QuantizationReport whole = quantize::quantize(a);
    CHECK(glued.cn_factor_count == whole.cn_factor_count);
    CHECK(glued.bs_regular.size() == whole.bs_regular.size());
    CHECK(glued.truncated_dims == whole.truncated_dims);

    // assembly is order-independent
    std::reverse(pieces.begin(), pieces.end());
    QuantizationReport again = quantize::mayer_vietoris_assemble(a, pieces, overlaps);
    CHECK(again.truncated_dims == glued.truncated_dims);

    // two pieces with one leaf each add up
    quantize::PieceReport p1{"a", 0, {transport::BSLeaf{0, 0.5, 1, false}}};
    quantize::PieceReport p2{"b", 0, {transport::BSLeaf{0, 1.5, 2, false}}};
    QuantizationReport two = quantize::mayer_vietoris_assemble(sphere_analysis(), {p1, p2}, {});
    CHECK(two.bs_regular.size() == 2);

    // an overlap containing a BS leaf is rejected
    const auto& s = sphere_analysis();
    double t_bs = -1;
    for (const auto& b : s.bs)
        if (!b.singular) t_bs = b.t;
    REQUIRE(t_bs > 0);
    std::vector<quantize::OverlapWindow> bad = {{0, t_bs - 0.05, t_bs + 0.05}};
    CHECK_THROWS_AS(quantize::mayer_vietoris_assemble(s, {p1, p2}, bad), OverlapContainsBS);
}

TEST_CASE("surgery ledger on the sphere") {
    SystemAnalysis current = sphere_analysis();
    double area0 = current.prequant.area;
    for (int r = 1; r <= 3; ++r) {
        quantize::SurgeryOp op;
        // insert into the longest available edge, mid-parameter
        int best = -1;
        double best_len = 0;
        for (const auto& e : current.graph.edges) {
            double len = e.f_hi - e.f_lo;
            if (len > best_len) {
                best_len = len;
                best = e.id;
            }
        }
        op.edge_id = best;
        op.t = 0.37 * best_len;
        current = quantize::surgery_insert_pair(current, op);
        CHECK(current.s_e == 2 + r);
        CHECK(current.s_h == r);
        reeb::PHResult ph = quantize::poincare_hopf_check(current);
        CHECK(ph.chi == 2);
        CHECK(ph.ok);
        CHECK(std::abs(current.prequant.area - area0) < 1e-9);
        QuantizationReport rep = quantize::quantize(current);
        CHECK(rep.cn_factor_count == 2 * r);
    }

    // formula and oracle still agree after surgery
    for (int N = 0; N <= 2; ++N) {
        QuantizationReport rep = quantize::quantize(current, N);
        CHECK(quantize::truncated_dim_rank_oracle(current, N) ==
              rep.truncated_dims[static_cast<size_t>(N)].second);
    }

    // surgery into a downward-anchored edge (euler edges hang off the
    // saddle leaf) keeps the same bookkeeping
    {
        SystemAnalysis e = euler_analysis();
        quantize::SurgeryOp op;
        op.edge_id = 0;
        op.t = 0.4 * (e.graph.edges[0].f_hi - e.graph.edges[0].f_lo);
        SystemAnalysis cut = quantize::surgery_insert_pair(e, op);
        CHECK(cut.s_e == 5);
        CHECK(cut.s_h == 3);
        CHECK(quantize::poincare_hopf_check(cut).ok);
        QuantizationReport rep = quantize::quantize(cut, 2);
        CHECK(rep.cn_factor_count == 6);
        for (auto [N, dim] : rep.truncated_dims)
            CHECK(quantize::truncated_dim_rank_oracle(cut, N) == dim);
    }

    // endpoint insertions are rejected
    quantize::SurgeryOp bad;
    bad.edge_id = 0;
    bad.t = 0.0;
    CHECK_THROWS_AS(quantize::surgery_insert_pair(sphere_analysis(), bad), OutOfRange);

    // oversized lobes are rejected
    quantize::SurgeryOp fat;
    fat.edge_id = 0;
    fat.t = 0.1;
    fat.lobe_area = 1e6;
    CHECK_THROWS_AS(quantize::surgery_insert_pair(sphere_analysis(), fat), InsufficientArea);
}

TEST_CASE("mesh sweep agrees with the analytic graphs") {
    using mesh::MeshReebGraph;
    auto to_mesh_graph = [](const reeb::ReebGraph& g) {
        MeshReebGraph out;
        for (const auto& v : g.vertices) out.vertices.push_back({v.kind, v.value, -1});
        for (const auto& e : g.edges) out.edges.emplace_back(e.lower_vertex, e.upper_vertex);
        return out;
    };

    SurfaceSystem sphere = sphere_height(4);
    mesh::TriMesh m1 = mesh::sample_system_mesh(sphere, 24, 24);
    mesh::TriMesh m2 = mesh::sample_system_mesh(sphere, 70, 70);
    MeshReebGraph g1 = mesh::sweep_reeb(m1);
    MeshReebGraph g2 = mesh::sweep_reeb(m2);
    CHECK(g1.vertices.size() == 2);
    CHECK(g1.edges.size() == 1);
    CHECK(mesh::reeb_isomorphic(g1, g2));
    CHECK(mesh::reeb_isomorphic(g1, to_mesh_graph(sphere_analysis().graph)));

    SurfaceSystem torus = standing_torus();
    mesh::TriMesh t1 = mesh::sample_system_mesh(torus, 24, 24);
    mesh::TriMesh t2 = mesh::sample_system_mesh(torus, 70, 70);
    MeshReebGraph tg1 = mesh::sweep_reeb(t1);
    MeshReebGraph tg2 = mesh::sweep_reeb(t2);
    CHECK(tg1.vertices.size() == 4);
    CHECK(tg1.edges.size() == 4);
    CHECK(mesh::reeb_isomorphic(tg1, tg2));
    CHECK(mesh::reeb_isomorphic(tg1, to_mesh_graph(torus_analysis().graph)));

    // euler: the sweep splits the degenerate double-saddle level but is
    // still refinement-independent
    SurfaceSystem euler = euler_sphere();
    mesh::TriMesh e1 = mesh::sample_system_mesh(euler, 24, 24);
    mesh::TriMesh e2 = mesh::sample_system_mesh(euler, 70, 70);
    MeshReebGraph eg1 = mesh::sweep_reeb(e1);
    MeshReebGraph eg2 = mesh::sweep_reeb(e2);
    CHECK(eg1.vertices.size() == 6);
    CHECK(eg1.edges.size() == 5);
    CHECK(mesh::reeb_isomorphic(eg1, eg2));
}

TEST_CASE("monkey saddle is rejected as non-Morse") {
    mesh::TriMesh m;
    int spokes = 12;
    m.pos.push_back({0, 0, 0});
    m.value.push_back(0.0);
    for (int k = 0; k < spokes; ++k) {
        double t = 2 * kPi * k / spokes;
        m.pos.push_back({std::cos(t), std::sin(t), 0});
        m.value.push_back(std::cos(3 * t));  // Re((x+iy)^3) on the rim
        if (k > 0) m.tris.push_back({0, k, k + 1});
    }
    m.tris.push_back({0, spokes, 1});
    CHECK_THROWS_AS(mesh::sweep_reeb(m), NonMorseInput);
}

TEST_CASE("mesh text round trip") {
    std::istringstream in(
        "v 0 0 0 0.0\nv 1 0 0 1.0\nv 0 1 0 2.0\nt 0 1 2\n");
    mesh::TriMesh m = mesh::parse_mesh(in);
    CHECK(m.num_vertices() == 3);
    CHECK(m.tris.size() == 1);
    std::istringstream bad("v 0 0 0 0.0\nt 0 1 5\n");
    CHECK_THROWS_AS(mesh::parse_mesh(bad), ParseError);
}
