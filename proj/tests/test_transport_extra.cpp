#include <cmath>

#include "doctest.h"
#include "quantsurf/errors.hpp"
#include "quantsurf/normalform.hpp"
#include "quantsurf/quantize.hpp"
#include "quantsurf/transport.hpp"

using namespace quantsurf;

namespace {
const double kTwoPi = 2 * 3.14159265358979323846;
}

TEST_CASE("synthetic profiles: lattice crossings and endpoint flags") {
    // action sweeping (0.3, 5.9) crosses no multiple of 2 pi
    transport::ActionProfile p;
    p.edge_id = 7;
    p.t_lo = 0;
    p.t_hi = 1;
    p.fit = {0.3, 5.6};
    p.sampler = [](double t) { return 0.3 + 5.6 * t; };
    for (int i = 0; i < 12; ++i) {
        double t = (i + 0.5) / 12;
        p.samples.emplace_back(t, p.sampler(t));
    }
    CHECK(transport::find_bs_leaves(p).empty());

    // a lobe whose limiting action is exactly 2 pi flags a singular leaf
    transport::ActionProfile lobe;
    lobe.edge_id = 3;
    lobe.t_lo = 0;
    lobe.t_hi = 0.5;
    lobe.sampler = [](double t) { return kTwoPi - 3.0 * t; };
    for (int i = 0; i < 12; ++i) {
        double t = 0.5 * (i + 0.5) / 12;
        lobe.samples.emplace_back(t, lobe.sampler(t));
    }
    lobe.fit = {kTwoPi, -3.0};
    lobe.has_end_lo = true;
    lobe.end_lo = kTwoPi;  // the singular leaf itself is Bohr-Sommerfeld
    auto leaves = transport::find_bs_leaves(lobe);
    REQUIRE(leaves.size() == 1);
    CHECK(leaves[0].singular);
    CHECK(leaves[0].t == 0);
    CHECK(leaves[0].level == 1);
}

TEST_CASE("reversed tracing negates the action") {
    auto a = quantize::analyze(geometry::sphere_height(2));
    trace::Tracer tracer(*a.system);
    const reeb::ReebEdge& e = a.graph.edges[0];
    trace::Pt seed = tracer.walk_to_value(e.seed_base, 0.3);
    trace::Path fwd = tracer.trace_leaf(seed, 0.3);
    trace::Path rev = tracer.trace_leaf(seed, 0.3, true);
    double af = transport::theta_integral(a.system->tracing_chart(), fwd);
    double ar = transport::theta_integral(a.system->tracing_chart(), rev);
    CHECK(af == doctest::Approx(-ar).epsilon(1e-9));
}

TEST_CASE("regular BS leaves carry trivial holonomy") {
    auto a = quantize::analyze(geometry::sphere_height(4));
    for (const auto& b : a.bs) {
        if (b.singular) continue;
        double phase = a.profiles[static_cast<size_t>(b.edge_id)].sampler(b.t);
        CHECK(std::abs(std::polar(1.0, phase) - std::complex<double>(1, 0)) < 1e-8);
    }
}

TEST_CASE("homology offset shifts levels, not positions") {
    geometry::SurfaceSystem plain = geometry::standing_torus();
    geometry::SurfaceSystem shifted = geometry::standing_torus();
    shifted.homology_offset = kTwoPi;
    auto a0 = quantize::analyze(plain);
    auto a1 = quantize::analyze(shifted);
    REQUIRE(a0.bs.size() == a1.bs.size());
    for (size_t i = 0; i < a0.bs.size(); ++i) {
        CHECK(a0.bs[i].edge_id == a1.bs[i].edge_id);
        CHECK(a0.bs[i].t == doctest::Approx(a1.bs[i].t).epsilon(1e-6));
        // middle-edge leaves wind once (sign per lobe): level moves by one
        const auto& e = a0.graph.edges[static_cast<size_t>(a0.bs[i].edge_id)];
        bool middle = a0.graph.vertices[static_cast<size_t>(e.lower_vertex)].kind ==
                          reeb::VertexKind::HyperbolicLeaf &&
                      a0.graph.vertices[static_cast<size_t>(e.upper_vertex)].kind ==
                          reeb::VertexKind::HyperbolicLeaf;
        if (middle) CHECK(std::abs(a1.bs[i].level - a0.bs[i].level) == 1);
    }
    // the truncated dimensions do not move
    auto r0 = quantize::quantize(a0);
    auto r1 = quantize::quantize(a1);
    CHECK(r0.truncated_dims == r1.truncated_dims);
}

TEST_CASE("canonical coordinates require a constant density") {
    geometry::SurfaceSystem sys = geometry::normal_form_saddle();
    sys.charts[0].omega = Expr::parse("1 + x^2/10", {});
    sys.charts[0].theta_y = Expr::parse("x + x^3/30", {});
    auto pts = geometry::detect_singularities(sys);
    REQUIRE(pts.size() == 1);
    CHECK_THROWS_AS(geometry::eliasson_chart(sys, pts[0]), Unsupported);
}

TEST_CASE("analysis is reproducible under a thread cap") {
    quantize::AnalyzeOptions opt;
    opt.max_threads = 2;
    auto threaded = quantize::analyze(geometry::standing_torus(), opt);
    auto serial = quantize::analyze(geometry::standing_torus());
    REQUIRE(threaded.bs.size() == serial.bs.size());
    for (size_t i = 0; i < serial.bs.size(); ++i) {
        CHECK(threaded.bs[i].edge_id == serial.bs[i].edge_id);
        CHECK(threaded.bs[i].t == doctest::Approx(serial.bs[i].t).epsilon(1e-12));
    }
}
