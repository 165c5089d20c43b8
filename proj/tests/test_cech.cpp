#include <cmath>

#include "doctest.h"
#include "quantsurf/cech.hpp"
#include "quantsurf/errors.hpp"

using namespace quantsurf;
using namespace quantsurf::cech;

namespace {

const double kTwoPi = 2 * 3.14159265358979323846;

// action polynomials with hol(t_b) = 1 at every requested BS parameter:
// A(t) = 2 pi (c0 + t / t_star) hits 2 pi Z at multiples of t_star
Poly bs_compatible_action(double c0, double t_star) {
    return {kTwoPi * c0, kTwoPi / t_star};
}

struct ModelData {
    std::vector<Poly> polys;
    std::vector<std::vector<double>> bs;
};

// m BS parameters distributed over the inner families
ModelData standard_data(const LeafGraph& g, int m, double a0 = 0.37) {
    ModelData d;
    d.polys.resize(g.faces.size());
    d.bs.resize(g.faces.size());
    for (size_t f = 0; f < g.faces.size(); ++f)
        d.polys[f] = bs_compatible_action(a0 + 0.11 * static_cast<double>(f), 0.25);
    for (int b = 0; b < m; ++b) {
        size_t f = static_cast<size_t>(b) % g.faces.size();
        int level = 1 + b / static_cast<int>(g.faces.size());
        // roots of A_f(t) = 2 pi n sit at t = (n - c0_f) * t_star
        double c0 = d.polys[f][0] / kTwoPi;
        d.bs[f].push_back((level - c0) * 0.25);
    }
    return d;
}

CechComplex build_standard(const LeafGraph& g, int N, int m) {
    ModelData d = standard_data(g, m);
    return build_model(g, N, d.polys, d.bs);
}

} // namespace

TEST_CASE("leaf graph generators validate and count") {
    LeafGraph f8 = figure_eight();
    CHECK(f8.num_vertices == 1);
    CHECK(f8.num_arcs() == 2);
    CHECK(f8.faces.size() == 3);

    LeafGraph t8 = triple_eight();
    CHECK(t8.num_vertices == 2);
    CHECK(t8.num_arcs() == 4);
    CHECK(t8.faces.size() == 4);

    LeafGraph dl = double_lung();
    CHECK(dl.num_vertices == 2);
    CHECK(dl.num_arcs() == 4);
    CHECK(dl.faces.size() == 4);

    for (int k = 3; k <= 5; ++k) {
        LeafGraph c = saddle_chain(k);
        CHECK(c.num_arcs() == 2 * k);
    }
}

TEST_CASE("model dimensions match the hand count") {
    // figure-eight, N = 3, no BS: four overlap jet blocks of size 4
    CechComplex m = build_standard(figure_eight(), 3, 0);
    CHECK(m.c1_dim() == 16);
    CHECK(m.c0_dim() == 8);

    // triple-eight, N = 2: eight overlap jet blocks of size 3
    CechComplex t = build_standard(triple_eight(), 2, 0);
    CHECK(t.c1_jet_dim == 24);

    // one BS parameter on an inner lobe adds 2 slots on each side
    CechComplex b = build_standard(figure_eight(), 3, 1);
    CHECK(b.c0_value_dim == 2);
    CHECK(b.c1_value_dim == 2);
}

TEST_CASE("coboundary jet block at N=0 has the expected shape") {
    ModelData d = standard_data(figure_eight(), 0);
    CechComplex m = build_model(figure_eight(), 0, d.polys, d.bs);
    CMatrix d0 = coboundary_matrix(m);
    // first arc: rows 0 (entry overlap) and 1 (exit overlap), column 0
    CHECK(std::abs(d0(0, 0) - Complex(-1, 0)) < 1e-14);
    Complex hol = std::polar(1.0, poly_eval(d.polys[0], 0.0));
    CHECK(std::abs(d0(1, 0) - (-hol)) < 1e-12);
}

TEST_CASE("rank oracle equals the closed-form h1 for all leaf graphs") {
    for (const char* name : {"figure-eight", "triple-eight", "double-lung"}) {
        LeafGraph g = leaf_graph_by_name(name);
        for (int N = 0; N <= 5; ++N) {
            for (int m = 0; m <= 3; ++m) {
                CechComplex model = build_standard(g, N, m);
                CohomologyDims dims = cohomology_dims(model);
                CAPTURE(name);
                CAPTURE(N);
                CAPTURE(m);
                CHECK(dims.h1 == general_leaf_h1(g, N, m));
                CHECK(dims.h0_raw == m);
                CHECK(dims.h0_smooth == 0);
                CHECK(dims.h2 == 0);
            }
        }
    }
}

TEST_CASE("exact twin agrees with the floating rank path") {
    for (const char* name : {"figure-eight", "triple-eight", "double-lung"}) {
        LeafGraph g = leaf_graph_by_name(name);
        for (int N = 0; N <= 6; ++N) {
            for (int m : {0, 2}) {
                std::vector<int> counts(g.faces.size(), 0);
                for (int b = 0; b < m; ++b) counts[static_cast<size_t>(b) % counts.size()]++;
                ExactDims ex = exact_cohomology_dims(g, N, counts);
                CechComplex model = build_standard(g, N, m);
                CohomologyDims dims = cohomology_dims(model);
                CHECK(ex.h1 == dims.h1);
                CHECK(ex.h0_raw == dims.h0_raw);
            }
        }
    }
}

TEST_CASE("three-saddle chain at N=1 with one BS parameter") {
    // six arcs: h1 = 6 * 2 + 1
    LeafGraph g = saddle_chain(3);
    CechComplex model = build_standard(g, 1, 1);
    CHECK(cohomology_dims(model).h1 == 13);
    CHECK(general_leaf_h1(g, 1, 1) == 13);
}

TEST_CASE("monotonicity in the jet order") {
    LeafGraph g = triple_eight();
    int prev = -1;
    for (int N = 0; N <= 4; ++N) {
        int h1 = cohomology_dims(build_standard(g, N, 2)).h1;
        if (prev >= 0) CHECK(h1 - prev == g.num_arcs());
        prev = h1;
    }
}

TEST_CASE("singular-leaf holonomy does not change h1") {
    LeafGraph g = figure_eight();
    auto make = [&](double a0_shift) {
        ModelData d;
        d.polys.resize(g.faces.size());
        d.bs.resize(g.faces.size());
        for (size_t f = 0; f < g.faces.size(); ++f)
            d.polys[f] = {kTwoPi * (1.0 + static_cast<double>(f)) + a0_shift, kTwoPi / 0.25};
        // one BS root on each lobe family, at the next lattice level up
        for (size_t f = 0; f < 2; ++f) {
            double c0 = d.polys[f][0] / kTwoPi;
            double level = std::ceil(c0 + 0.5);
            d.bs[f].push_back((level - c0) * 0.25);
        }
        return d;
    };
    for (int N = 0; N <= 3; ++N) {
        ModelData on = make(0.0);   // A(0) on the 2 pi lattice: singular BS leaf
        ModelData off = make(0.3);  // pushed off the lattice
        int h_on = cohomology_dims(build_model(g, N, on.polys, on.bs)).h1;
        int h_off = cohomology_dims(build_model(g, N, off.polys, off.bs)).h1;
        CHECK(h_on == h_off);
        CHECK(h_on == general_leaf_h1(g, N, 2));
    }
}

TEST_CASE("inconsistent holonomy at a declared BS parameter is rejected") {
    LeafGraph g = figure_eight();
    ModelData d = standard_data(g, 1);
    d.bs[0][0] += 0.01;  // no longer a root of the action
    CHECK_THROWS_AS(build_model(g, 2, d.polys, d.bs), InconsistentHolonomy);
}

TEST_CASE("BS parameters at the singular value are rejected, duplicates merge") {
    LeafGraph g = figure_eight();
    ModelData d = standard_data(g, 0);
    d.bs[0] = {0.0};
    CHECK_THROWS_AS(build_model(g, 1, d.polys, d.bs), OutOfRange);

    ModelData d2 = standard_data(g, 1);
    double t = d2.bs[0][0];
    d2.bs[0] = {t, t + 1e-12};
    CechComplex m = build_model(g, 1, d2.polys, d2.bs);
    CHECK(m.total_bs() == 1);
}

TEST_CASE("chain collapse and refinement leave h1 fixed") {
    LeafGraph g = figure_eight();
    for (int n = 1; n <= 4; ++n) {
        ModelData d = standard_data(g, 2);
        BuildOptions opt;
        opt.chain_lengths.assign(g.arcs.size(), n);
        CechComplex chained = build_model(g, 2, d.polys, d.bs, opt);
        CohomologyDims dims = cohomology_dims(chained);
        CHECK(dims.h1 == general_leaf_h1(g, 2, 2));
        CechComplex collapsed = chain_collapse(chained);
        CHECK(cohomology_dims(collapsed).h1 == dims.h1);
        // composed transports equal the unchained model's
        CechComplex flat = build_model(g, 2, d.polys, d.bs);
        for (size_t a = 0; a < g.arcs.size(); ++a)
            for (int j = 0; j <= 2; ++j)
                CHECK(std::abs(collapsed.rect_jets[a][0][j] - flat.rect_jets[a][0][j]) < 1e-12);
    }

    CechComplex base = build_standard(triple_eight(), 3, 1);
    for (int factor : {2, 3}) {
        CechComplex refined = refine_cover(base, factor);
        CHECK(cohomology_dims(refined).h1 == cohomology_dims(base).h1);
    }
    CHECK(refine_cover(base, 1).chain_lengths == base.chain_lengths);

    BuildOptions bad;
    bad.chain_lengths.assign(figure_eight().arcs.size(), 0);
    ModelData d = standard_data(figure_eight(), 0);
    CHECK_THROWS_AS(build_model(figure_eight(), 1, d.polys, d.bs, bad), InvalidChain);
}

TEST_CASE("gauge, orientation and reparametrization invariance") {
    LeafGraph g = triple_eight();
    CechComplex base = build_standard(g, 2, 2);
    int h1 = cohomology_dims(base).h1;

    CechComplex gauged = gauge_transform(base, 1, 0, 0.9);
    CHECK(std::abs(gauged.rect_jets[1][0][0] - base.rect_jets[1][0][0]) > 1e-3);
    CHECK(cohomology_dims(gauged).h1 == h1);

    CechComplex reversed = reverse_family(base, 3);
    CHECK(cohomology_dims(reversed).h1 == h1);

    CechComplex scaled = reparametrize(base, 3.7);
    CHECK(cohomology_dims(scaled).h1 == h1);
}
