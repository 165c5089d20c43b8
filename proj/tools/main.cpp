#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "quantsurf/cech.hpp"
#include "quantsurf/errors.hpp"
#include "quantsurf/flatmodel.hpp"
#include "quantsurf/io.hpp"
#include "quantsurf/quantize.hpp"

namespace fs = std::filesystem;
using namespace quantsurf;

namespace {

constexpr double kTwoPi = 2 * 3.14159265358979323846;

struct CommonOpts {
    std::string builtin;
    std::string input;
    std::string mesh;
    std::string out_dir = ".";
    int jet_order = 3;
    bool plot = false;
    int insert = 0;
    double param_k = 4;
    std::map<std::string, double> tol;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool system_input = true) {
    if (system_input) {
        cmd->add_option("--builtin", o.builtin,
                        "built-in system: sphere-height, standing-torus, euler-sphere, "
                        "normal-form");
        cmd->add_option("--input", o.input, "system description file (JSON)");
        cmd->add_option("--k", o.param_k, "sphere height parameter (area 2 pi k)");
    }
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--jet-order", o.jet_order, "jet truncation order N")->check(CLI::NonNegativeNumber);
    cmd->add_flag("--plot", o.plot, "write an SVG action plot");
    cmd->add_option("--insert", o.insert, "number of surgery insertions before quantizing");
    cmd->add_option("--tol-grad", o.tol["grad"], "gradient tolerance for critical points");
    cmd->add_option("--tol-degen", o.tol["degen"], "Hessian degeneracy tolerance");
    cmd->add_option("--tol-form", o.tol["form"], "d Theta - omega residual tolerance");
    cmd->add_option("--tol-prequant", o.tol["prequant"], "prequantization integrality tolerance");
    cmd->add_option("--tol-hol", o.tol["hol"], "holonomy comparison tolerance");
    cmd->add_option("--tol-bs", o.tol["bs"], "Bohr-Sommerfeld root tolerance");
}

geometry::SurfaceSystem resolve_system(const CommonOpts& o) {
    if (!o.builtin.empty() && !o.input.empty())
        throw QuantError("give either --builtin or --input, not both");
    geometry::SurfaceSystem sys;
    if (!o.input.empty()) {
        sys = io::load_system(o.input);
    } else if (!o.builtin.empty()) {
        sys = geometry::builtin_system(o.builtin, {{"k", o.param_k}});
    } else {
        throw CLI::ValidationError("input", "one of --builtin or --input is required");
    }
    auto get = [&](const char* key, double dflt) {
        auto it = o.tol.find(key);
        return it == o.tol.end() || it->second == 0 ? dflt : it->second;
    };
    sys.tol.grad_tol = get("grad", sys.tol.grad_tol);
    sys.tol.degen_tol = get("degen", sys.tol.degen_tol);
    sys.tol.form_tol = get("form", sys.tol.form_tol);
    sys.tol.prequant_tol = get("prequant", sys.tol.prequant_tol);
    sys.tol.hol_tol = get("hol", sys.tol.hol_tol);
    sys.tol.bs_tol = get("bs", sys.tol.bs_tol);
    return sys;
}

quantize::SystemAnalysis run_analysis(const CommonOpts& o) {
    geometry::SurfaceSystem sys = resolve_system(o);
    quantize::SystemAnalysis a = quantize::analyze(sys);
    for (int r = 0; r < o.insert; ++r) {
        // insert into the longest regular edge, away from its ends
        int best = -1;
        double best_len = 0;
        for (const auto& e : a.graph.edges) {
            double len = e.f_hi - e.f_lo;
            if (len > best_len) {
                best_len = len;
                best = e.id;
            }
        }
        quantize::SurgeryOp op;
        op.edge_id = best;
        op.t = 0.37 * best_len;
        a = quantize::surgery_insert_pair(a, op);
    }
    return a;
}

void write_analysis_files(const quantize::SystemAnalysis& a, const CommonOpts& o) {
    fs::create_directories(o.out_dir);
    io::write_file(o.out_dir + "/singularities.json", io::singularities_json(a));
    io::write_file(o.out_dir + "/reeb.json", io::reeb_json(a));
    for (const auto& prof : a.profiles)
        io::write_file(o.out_dir + "/action-edge" + std::to_string(prof.edge_id) + ".csv",
                       io::profile_csv(prof));
    if (o.plot) io::write_file(o.out_dir + "/action-plot.svg", io::action_plot_svg(a));
}

int cmd_analyze(const CommonOpts& o) {
    if (!o.mesh.empty()) {
        // sampled-field path: sweep the triangulated input and export the
        // leaf-space adjacency
        mesh::TriMesh m = mesh::load_mesh(o.mesh);
        mesh::MeshReebGraph g = mesh::sweep_reeb(m);
        fs::create_directories(o.out_dir);
        io::write_file(o.out_dir + "/reeb-mesh.json", io::mesh_reeb_json(g));
        int extrema = g.count(reeb::VertexKind::EllipticExtremum);
        int saddles = g.count(reeb::VertexKind::HyperbolicLeaf);
        std::printf("mesh: %d vertices, %zu triangles\n", m.num_vertices(), m.tris.size());
        std::printf("reeb graph: %d extrema, %d saddles, %zu edges\n", extrema, saddles,
                    g.edges.size());
        std::printf("euler characteristic (from counts): %d\n", extrema - saddles);
        return 0;
    }
    quantize::SystemAnalysis a = run_analysis(o);
    write_analysis_files(a, o);
    std::printf("system: %s\n", a.system->name.c_str());
    std::printf("singular points: %d elliptic, %d hyperbolic\n", a.s_e, a.s_h);
    std::printf("prequantization: area %s (multiple %lld, %s)\n",
                io::fmt(a.prequant.area).c_str(), a.prequant.integer_multiple,
                a.prequant.ok ? "ok" : "not integral");
    std::printf("reeb graph: %zu vertices, %zu edges\n", a.graph.vertices.size(),
                a.graph.edges.size());
    int reg = 0, sing = 0;
    for (const auto& b : a.bs) (b.singular ? sing : reg)++;
    std::printf("bohr-sommerfeld leaves: %d regular, %d singular\n", reg, sing);
    return 0;
}

int cmd_quantize(const CommonOpts& o) {
    quantize::SystemAnalysis a = run_analysis(o);
    quantize::QuantizationReport r = quantize::quantize(a, std::max(o.jet_order, 6));
    fs::create_directories(o.out_dir);
    io::write_file(o.out_dir + "/quantize.json", io::report_json(r));
    if (o.plot) io::write_file(o.out_dir + "/action-plot.svg", io::action_plot_svg(a));
    std::printf("system: %s\n", r.system.c_str());
    std::printf("s_e=%d s_h=%d chi=%d (%s)\n", r.s_e, r.s_h, r.chi,
                r.chi_ok ? "matches" : "unchecked");
    std::printf("cn_factor_count: %d\n", r.cn_factor_count);
    std::printf("regular BS leaves: %zu\n", r.bs_regular.size());
    for (auto [N, dim] : r.truncated_dims) std::printf("dim at N=%d: %d\n", N, dim);
    return 0;
}

int cmd_cech_verify(const CommonOpts& o, const std::string& graph_name, int m_max) {
    bool all_match = true;
    std::string report_text = "label,formula_h1,rank_h1,match,h0_smooth,h2,"
                              "rank_threshold,gap_ratio,deficiency_warning\n";
    auto report_row = [&](const std::string& label, int formula,
                          const cech::CohomologyDims& dims) {
        bool match = formula == dims.h1;
        all_match = all_match && match;
        std::printf("%-28s formula=%-4d rank=%-4d %s%s\n", label.c_str(), formula, dims.h1,
                    match ? "match" : "MISMATCH",
                    dims.rank_deficiency_warning ? " (rank deficiency warning)" : "");
        report_text += label + "," + std::to_string(formula) + "," + std::to_string(dims.h1) +
                       "," + (match ? "yes" : "no") + "," + std::to_string(dims.h0_smooth) +
                       "," + std::to_string(dims.h2) + "," + io::fmt(dims.rank_info.threshold) +
                       "," + io::fmt(dims.rank_info.gap_ratio) + "," +
                       (dims.rank_deficiency_warning ? "yes" : "no") + "\n";
    };
    auto flush_report = [&]() {
        if (o.out_dir.empty() || o.out_dir == ".") return;
        fs::create_directories(o.out_dir);
        io::write_file(o.out_dir + "/cech-report.csv", report_text);
    };

    if (!o.input.empty()) {
        io::CechModelFile mf = io::load_cech_model(o.input);
        cech::CechComplex model = cech::build_model(mf.graph, mf.N, mf.actions, mf.bs);
        cech::CohomologyDims dims = cech::cohomology_dims(model);
        report_row("model N=" + std::to_string(mf.N),
                   cech::general_leaf_h1(mf.graph, mf.N, model.total_bs()), dims);
        std::printf("h0_raw=%d h0_smooth=%d h2=%d\n", dims.h0_raw, dims.h0_smooth, dims.h2);
        for (int factor : {2, 3})
            report_row("refine factor " + std::to_string(factor), dims.h1,
                       cech::cohomology_dims(cech::refine_cover(model, factor)));
        flush_report();
        return all_match ? 0 : 2;
    }

    cech::LeafGraph g = cech::leaf_graph_by_name(graph_name.empty() ? "figure-eight" : graph_name);
    for (int N = 0; N <= o.jet_order; ++N) {
        for (int m = 0; m <= m_max; ++m) {
            std::vector<cech::Poly> polys(g.faces.size());
            std::vector<std::vector<double>> bs(g.faces.size());
            for (size_t f = 0; f < g.faces.size(); ++f)
                polys[f] = {kTwoPi * (0.37 + 0.11 * static_cast<double>(f)), kTwoPi / 0.25};
            for (int b = 0; b < m; ++b) {
                size_t f = static_cast<size_t>(b) % g.faces.size();
                double c0 = polys[f][0] / kTwoPi;
                double level = std::ceil(c0 + 0.5) + b / static_cast<int>(g.faces.size());
                bs[f].push_back((level - c0) * 0.25);
            }
            cech::CechComplex model = cech::build_model(g, N, polys, bs);
            cech::CohomologyDims dims = cech::cohomology_dims(model);
            report_row("N=" + std::to_string(N) + " m=" + std::to_string(m),
                       cech::general_leaf_h1(g, N, model.total_bs()), dims);
            if (dims.h0_smooth != 0 || dims.h2 != 0) {
                std::printf("nonzero cohomology outside degree 1\n");
                all_match = false;
            }
            if (N == o.jet_order && m == std::min(1, m_max)) {
                for (int factor : {2, 3})
                    report_row("  refine factor " + std::to_string(factor), dims.h1,
                               cech::cohomology_dims(cech::refine_cover(model, factor)));
                for (int n = 2; n <= 4; ++n) {
                    cech::BuildOptions opt;
                    opt.chain_lengths.assign(g.arcs.size(), n);
                    cech::CechComplex chained = cech::build_model(g, N, polys, bs, opt);
                    report_row("  chain n=" + std::to_string(n), dims.h1,
                               cech::cohomology_dims(chained));
                    report_row("  collapse n=" + std::to_string(n), dims.h1,
                               cech::cohomology_dims(cech::chain_collapse(chained)));
                }
            }
        }
    }
    flush_report();
    return all_match ? 0 : 2;
}

int cmd_flat_check() {
    bool ok = true;
    std::printf("%-44s %s\n", "check", "result");
    auto row = [&](const std::string& label, bool pass, const std::string& detail) {
        ok = ok && pass;
        std::printf("%-44s %s  %s\n", label.c_str(), pass ? "pass" : "FAIL", detail.c_str());
    };

    {
        flatmodel::HBPoint p{0.3, -1.2};
        auto [x, y] = flatmodel::hb_inverse(p, 3);
        flatmodel::HBPoint q = flatmodel::hb_coords(x, y);
        double err = std::abs(q.h - p.h) + std::abs(q.beta - p.beta);
        row("hb coordinates round trip (quadrant 3)", err < 1e-12, "residual " + io::fmt(err));
    }
    {
        auto bump = [](double h) {
            return h == 0 ? std::complex<double>(0, 0)
                          : std::complex<double>(std::exp(-1.0 / (h * h)), 0);
        };
        flatmodel::LocalFlatSection s = flatmodel::LocalFlatSection::uniform(bump);
        double r1 = flatmodel::flat_pde_residual(s, 0.7, 0.4, 4e-4);
        double r3 = flatmodel::flat_pde_residual(s, 0.7, 0.4, 1e-4);
        double order = std::log2(r1 / r3) / 2;
        row("flatness equation residual at step 1e-4", r3 < 1e-6, "residual " + io::fmt(r3));
        row("finite-difference order", order > 1.8 && order < 2.2, "order " + io::fmt(order));
    }
    {
        flatmodel::FlatnessReport rep = flatmodel::taylor_flatness_test(
            [](double h) { return std::exp(-1.0 / (h * h)); }, 10);
        bool pass = true;
        for (int k = 0; k <= 10; ++k) pass = pass && rep.passes(k);
        row("decay certificate exp(-1/h^2), k <= 10", pass, "");
        flatmodel::FlatnessReport cubic =
            flatmodel::taylor_flatness_test([](double h) { return h * h * h; }, 6);
        row("decay certificate h^3 passes k <= 2", cubic.passes(2) && cubic.passes(1), "");
        row("decay certificate h^3 fails k >= 4", !cubic.passes(4) && !cubic.passes(5), "");
    }
    {
        int nullity = flatmodel::taylor_recursion_nullity(12);
        row("coefficient recursion nullity (degree 12)", nullity == 0,
            "nullity " + std::to_string(nullity));
    }
    return ok ? 0 : 2;
}

int cmd_surgery(const CommonOpts& o) {
    if (o.insert < 1) throw CLI::ValidationError("--insert", "surgery needs --insert >= 1");
    quantize::SystemAnalysis a = run_analysis(o);  // applies the insertions
    quantize::QuantizationReport r = quantize::quantize(a, std::max(o.jet_order, 6));
    fs::create_directories(o.out_dir);
    io::write_file(o.out_dir + "/surgery.json", io::report_json(r));
    std::printf("after %d insertion(s): s_e=%d s_h=%d chi=%d (%s) cn=%d area=%s\n", o.insert,
                r.s_e, r.s_h, r.chi, r.chi_ok ? "matches" : "unchecked", r.cn_factor_count,
                io::fmt(r.total_area).c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"geometric quantization of prequantized surface integrable systems"};
    app.require_subcommand(1);

    CommonOpts o_analyze, o_quantize, o_cech, o_surgery;
    std::string cech_graph;
    int cech_m_max = 3;

    CLI::App* c_analyze = app.add_subcommand("analyze", "detect singularities, build the Reeb "
                                                        "graph and action profiles");
    add_common(c_analyze, o_analyze);
    c_analyze->add_option("--mesh", o_analyze.mesh,
                          "triangulated field (`v x y z f` / `t i j k` rows); sweep the "
                          "sampled Reeb graph only");

    CLI::App* c_quantize =
        app.add_subcommand("quantize", "assemble the quantization report");
    add_common(c_quantize, o_quantize);

    CLI::App* c_cech = app.add_subcommand(
        "cech-verify", "compare closed-form and rank-computed cohomology dimensions");
    add_common(c_cech, o_cech, false);
    c_cech->add_option("--builtin", cech_graph,
                       "leaf graph: figure-eight, triple-eight, double-lung, chain-<k>");
    c_cech->add_option("--input", o_cech.input, "model description file (JSON)");
    c_cech->add_option("--bs-max", cech_m_max, "verify m = 0..bs-max BS parameters");

    CLI::App* c_flat = app.add_subcommand("flat-check", "local flat-section diagnostics");

    CLI::App* c_surgery = app.add_subcommand("surgery", "insert elliptic-hyperbolic pairs");
    add_common(c_surgery, o_surgery);

    try {
        app.parse(argc, argv);
        if (c_analyze->parsed()) return cmd_analyze(o_analyze);
        if (c_quantize->parsed()) return cmd_quantize(o_quantize);
        if (c_cech->parsed()) return cmd_cech_verify(o_cech, cech_graph, cech_m_max);
        if (c_flat->parsed()) return cmd_flat_check();
        if (c_surgery->parsed()) return cmd_surgery(o_surgery);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const QuantError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    }
    return 1;
}
