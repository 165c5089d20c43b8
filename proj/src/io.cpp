#include "quantsurf/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "quantsurf/errors.hpp"

namespace quantsurf::io {

using json = nlohmann::ordered_json;

std::string fmt(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

namespace {

json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed JSON in " + what);
    return j;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw QuantError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

geometry::Rect rect_of(const json& j) {
    if (!j.is_array() || j.size() != 4) throw ParseError("domain must be [x0, x1, y0, y1]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

} // namespace

geometry::SurfaceSystem parse_system(const std::string& text) {
    json j = parse_json(text, "system file");
    std::map<std::string, double> params;
    if (j.contains("params"))
        for (auto& [k, v] : j["params"].items()) params[k] = v.get<double>();

    if (j.contains("builtin")) {
        geometry::SurfaceSystem sys =
            geometry::builtin_system(j["builtin"].get<std::string>(), params);
        if (j.contains("homology_offset")) sys.homology_offset = j["homology_offset"].get<double>();
        return sys;
    }

    geometry::SurfaceSystem sys;
    sys.name = j.value("name", "custom");
    sys.params = params;
    if (j.contains("euler_characteristic"))
        sys.euler_characteristic = j["euler_characteristic"].get<int>();
    if (j.contains("homology_offset")) sys.homology_offset = j["homology_offset"].get<double>();
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        geometry::Tolerances& tol = sys.tol;
        tol.grad_tol = t.value("grad_tol", tol.grad_tol);
        tol.degen_tol = t.value("degen_tol", tol.degen_tol);
        tol.form_tol = t.value("form_tol", tol.form_tol);
        tol.prequant_tol = t.value("prequant_tol", tol.prequant_tol);
        tol.hol_tol = t.value("hol_tol", tol.hol_tol);
        tol.bs_tol = t.value("bs_tol", tol.bs_tol);
        tol.grid_resolution = t.value("grid_resolution", tol.grid_resolution);
    }
    if (!j.contains("charts") || !j["charts"].is_array() || j["charts"].empty())
        throw ParseError("system file needs a builtin name or a chart list");
    for (const json& cj : j["charts"]) {
        geometry::Chart c;
        c.id = cj.value("id", "chart-" + std::to_string(sys.charts.size()));
        c.domain = rect_of(cj.at("domain"));
        c.period_x = cj.value("period_x", 0.0);
        c.period_y = cj.value("period_y", 0.0);
        c.F = Expr::parse(cj.at("F").get<std::string>(), params);
        c.omega = Expr::parse(cj.at("omega").get<std::string>(), params);
        c.theta_x = Expr::parse(cj.at("theta_x").get<std::string>(), params);
        c.theta_y = Expr::parse(cj.at("theta_y").get<std::string>(), params);
        if (cj.contains("area_domain")) c.area_domain = rect_of(cj["area_domain"]);
        c.tracing = cj.value("tracing", false);
        if (cj.contains("proxy")) {
            c.has_proxy = true;
            c.proxy_x = cj["proxy"][0].get<double>();
            c.proxy_y = cj["proxy"][1].get<double>();
        }
        sys.charts.push_back(std::move(c));
    }
    return sys;
}

geometry::SurfaceSystem load_system(const std::string& path) { return parse_system(slurp(path)); }

CechModelFile parse_cech_model(const std::string& text) {
    json j = parse_json(text, "model file");
    CechModelFile m;
    m.N = j.value("N", 0);
    m.graph.num_vertices = j.at("vertices").get<int>();
    for (const json& aj : j.at("arcs")) {
        cech::LeafArc a;
        a.tail_vertex = aj.at("tail")[0].get<int>();
        a.tail_slot = aj.at("tail")[1].get<int>();
        a.head_vertex = aj.at("head")[0].get<int>();
        a.head_slot = aj.at("head")[1].get<int>();
        m.graph.arcs.push_back(a);
    }
    for (const json& fj : j.at("faces")) {
        cech::LoopFamily f;
        f.side = fj.at("side").get<int>();
        for (const json& st : fj.at("cycle"))
            f.cycle.push_back({st[0].get<int>(), st[1].get<bool>()});
        m.graph.faces.push_back(f);
        m.actions.push_back(fj.value("action", cech::Poly{}));
        m.bs.push_back(fj.value("bs", std::vector<double>{}));
    }
    m.graph.validate();
    return m;
}

CechModelFile load_cech_model(const std::string& path) { return parse_cech_model(slurp(path)); }

namespace {

const char* kind_name(geometry::SingKind k) {
    return k == geometry::SingKind::Hyperbolic ? "hyperbolic" : "elliptic";
}

} // namespace

std::string singularities_json(const quantize::SystemAnalysis& a) {
    json j;
    j["system"] = a.system ? a.system->name : "synthetic";
    j["points"] = json::array();
    for (const auto& p : a.points) {
        json pj;
        pj["id"] = p.id;
        pj["chart"] = p.chart_id;
        pj["x"] = p.x;
        pj["y"] = p.y;
        pj["kind"] = kind_name(p.kind);
        pj["critical_value"] = p.critical_value;
        pj["hessian"] = {p.hxx, p.hxy, p.hyy};
        j["points"].push_back(pj);
    }
    j["counts"] = {{"elliptic", a.s_e}, {"hyperbolic", a.s_h}};
    j["prequantization"] = {{"area", a.prequant.area},
                            {"integer_multiple", a.prequant.integer_multiple},
                            {"ok", a.prequant.ok}};
    return j.dump(2) + "\n";
}

std::string reeb_json(const quantize::SystemAnalysis& a) {
    json j;
    j["system"] = a.system ? a.system->name : "synthetic";
    j["vertices"] = json::array();
    for (const auto& v : a.graph.vertices) {
        json vj;
        vj["kind"] = v.kind == reeb::VertexKind::HyperbolicLeaf ? "hyperbolic-leaf" : "extremum";
        vj["value"] = v.value;
        vj["singular_points"] = v.singular_points;
        j["vertices"].push_back(vj);
    }
    j["edges"] = json::array();
    for (const auto& e : a.graph.edges) {
        json ej;
        ej["id"] = e.id;
        ej["lower"] = e.lower_vertex;
        ej["upper"] = e.upper_vertex;
        ej["f_lo"] = e.f_lo;
        ej["f_hi"] = e.f_hi;
        j["edges"].push_back(ej);
    }
    j["singular_leaves"] = json::array();
    for (const auto& d : a.graph.hyperbolic_leaves) {
        json lj;
        lj["vertex"] = d.vertex;
        lj["arcs"] = json::array();
        for (const auto& arc : d.graph.arcs)
            lj["arcs"].push_back({arc.tail_vertex, arc.tail_slot, arc.head_vertex, arc.head_slot});
        lj["faces"] = json::array();
        for (const auto& f : d.graph.faces) {
            json fj;
            fj["side"] = f.side;
            fj["edge"] = f.reeb_edge;
            fj["cycle"] = json::array();
            for (const auto& st : f.cycle) fj["cycle"].push_back({st.arc, st.forward});
            lj["faces"].push_back(fj);
        }
        j["singular_leaves"].push_back(lj);
    }
    return j.dump(2) + "\n";
}

std::string mesh_reeb_json(const mesh::MeshReebGraph& g) {
    json j;
    j["vertices"] = json::array();
    for (const auto& v : g.vertices) {
        json vj;
        vj["kind"] = v.kind == reeb::VertexKind::HyperbolicLeaf ? "hyperbolic-leaf" : "extremum";
        vj["value"] = v.value;
        vj["mesh_vertex"] = v.mesh_vertex;
        j["vertices"].push_back(vj);
    }
    j["edges"] = json::array();
    for (auto [lo, hi] : g.edges) j["edges"].push_back({lo, hi});
    return j.dump(2) + "\n";
}

std::string report_json(const quantize::QuantizationReport& r) {
    json j;
    j["system"] = r.system;
    j["s_e"] = r.s_e;
    j["s_h"] = r.s_h;
    j["chi"] = r.chi;
    j["chi_ok"] = r.chi_ok;
    j["cn_factor_count"] = r.cn_factor_count;
    j["bs_leaves"] = json::array();
    for (const auto& b : r.bs_regular)
        j["bs_leaves"].push_back({{"edge", b.edge_id}, {"t", b.t}, {"level", b.level}});
    json dims;
    for (auto [N, dim] : r.truncated_dims) dims[std::to_string(N)] = dim;
    j["truncated_dims"] = dims;
    j["h_other_degrees"] = "zero";
    if (r.cn_factor_count > 0)
        j["dimension"] = "infinite (" + std::to_string(r.cn_factor_count) +
                         " graded C^N factors) + " + std::to_string(r.bs_regular.size());
    else
        j["dimension"] = std::to_string(r.bs_regular.size());
    j["total_area"] = r.total_area;
    return j.dump(2) + "\n";
}

std::string profile_csv(const transport::ActionProfile& p) {
    std::ostringstream ss;
    ss << "t,action\n";
    for (const auto& [t, a] : p.samples) ss << fmt(t) << "," << fmt(a) << "\n";
    return ss.str();
}

std::string action_plot_svg(const quantize::SystemAnalysis& a) {
    const double W = 640, H = 240, pad = 40;
    const double two_pi = 2 * 3.14159265358979323846;
    std::ostringstream ss;
    double total_h = H * static_cast<double>(a.profiles.size()) + 2 * pad;
    ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(W + 2 * pad)
       << "\" height=\"" << fmt(total_h) << "\">\n";
    for (size_t e = 0; e < a.profiles.size(); ++e) {
        const auto& p = a.profiles[e];
        double y0 = pad + H * static_cast<double>(e);
        double a_lo = 1e300, a_hi = -1e300;
        for (const auto& [t, v] : p.samples) {
            a_lo = std::min(a_lo, v);
            a_hi = std::max(a_hi, v);
        }
        if (!(a_hi > a_lo)) a_hi = a_lo + 1;
        double margin = 0.1 * (a_hi - a_lo);
        a_lo -= margin;
        a_hi += margin;
        auto X = [&](double t) { return pad + W * (t - p.t_lo) / (p.t_hi - p.t_lo); };
        auto Y = [&](double v) { return y0 + H - H * (v - a_lo) / (a_hi - a_lo); };
        ss << "<rect x=\"" << fmt(pad) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(W)
           << "\" height=\"" << fmt(H) << "\" fill=\"none\" stroke=\"#999\"/>\n";
        // 2 pi Z gridlines
        for (long long n = static_cast<long long>(std::ceil(a_lo / two_pi));
             n <= static_cast<long long>(std::floor(a_hi / two_pi)); ++n) {
            double y = Y(static_cast<double>(n) * two_pi);
            ss << "<line x1=\"" << fmt(pad) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(pad + W)
               << "\" y2=\"" << fmt(y) << "\" stroke=\"#cbd\" stroke-dasharray=\"4 3\"/>\n";
        }
        // fitted action curve
        ss << "<polyline fill=\"none\" stroke=\"#226\" points=\"";
        for (int i = 0; i <= 200; ++i) {
            double t = p.t_lo + (p.t_hi - p.t_lo) * i / 200.0;
            ss << fmt(X(t)) << "," << fmt(Y(cech::poly_eval(p.fit, t))) << " ";
        }
        ss << "\"/>\n";
        for (const auto& b : a.bs) {
            if (b.edge_id != static_cast<int>(e) || b.singular) continue;
            ss << "<circle cx=\"" << fmt(X(b.t)) << "\" cy=\""
               << fmt(Y(static_cast<double>(b.level) * two_pi))
               << "\" r=\"4\" fill=\"#c33\"/>\n";
        }
        ss << "<text x=\"" << fmt(pad) << "\" y=\"" << fmt(y0 - 6) << "\" font-size=\"12\">edge "
           << e << "</text>\n";
    }
    ss << "</svg>\n";
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw QuantError("cannot write " + path);
    f << content;
}

} // namespace quantsurf::io
