#include "quantsurf/reeb.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "quantsurf/errors.hpp"
#include "quantsurf/transport.hpp"

namespace quantsurf::reeb {

using geometry::SingKind;
using geometry::SingularPoint;
using geometry::SurfaceSystem;
using trace::Path;
using trace::Pt;
using trace::Tracer;

int ReebGraph::elliptic_count() const {
    int n = 0;
    for (const auto& v : vertices)
        if (v.kind == VertexKind::EllipticExtremum) n += static_cast<int>(v.singular_points.size());
    return n;
}

int ReebGraph::hyperbolic_point_count() const {
    int n = 0;
    for (const auto& v : vertices)
        if (v.kind == VertexKind::HyperbolicLeaf) n += static_cast<int>(v.singular_points.size());
    return n;
}

const HyperbolicLeafData& ReebGraph::leaf_data(int vertex) const {
    for (const auto& h : hyperbolic_leaves)
        if (h.vertex == vertex) return h;
    throw OutOfRange("vertex has no hyperbolic leaf data");
}

namespace {

/// Four rays spanning the null cone of an indefinite Hessian, sorted by
/// angle; consecutive rays bound the local quadrants of the cross.
std::array<Pt, 4> saddle_rays(const SingularPoint& p) {
    double a = p.hxx, b = p.hxy, c = p.hyy;
    double disc = std::sqrt(std::max(0.0, b * b - a * c));
    std::array<Pt, 2> dirs;
    double eps = 1e-13 * (std::abs(a) + std::abs(b) + std::abs(c));
    if (std::abs(a) >= std::abs(c) && std::abs(a) > eps) {
        // roots of a m^2 + 2 b m + c = 0 give directions (m, 1)
        dirs[0] = {(-b + disc) / a, 1.0};
        dirs[1] = {(-b - disc) / a, 1.0};
    } else if (std::abs(c) > eps) {
        dirs[0] = {1.0, (-b + disc) / c};
        dirs[1] = {1.0, (-b - disc) / c};
    } else {
        dirs[0] = {1.0, 0.0};  // Q = 2 b x y: the axes
        dirs[1] = {0.0, 1.0};
    }
    std::array<Pt, 4> rays;
    for (int i = 0; i < 2; ++i) {
        double n = std::hypot(dirs[static_cast<size_t>(i)].x, dirs[static_cast<size_t>(i)].y);
        Pt d{dirs[static_cast<size_t>(i)].x / n, dirs[static_cast<size_t>(i)].y / n};
        rays[static_cast<size_t>(2 * i)] = d;
        rays[static_cast<size_t>(2 * i + 1)] = {-d.x, -d.y};
    }
    std::sort(rays.begin(), rays.end(),
              [](const Pt& u, const Pt& v) { return std::atan2(u.y, u.x) < std::atan2(v.y, v.x); });
    return rays;
}

struct SaddleInfo {
    int point_id = -1;
    Pt pos;
    double value = 0;
    std::array<Pt, 4> rays;
    std::array<bool, 4> unstable{};  // flow points away along this ray
    std::array<int, 4> quadrant_sign{};  // sign of F - v between slot k and k+1
};

struct ArcTrace {
    int tail = -1, tail_slot = -1;
    int head = -1, head_slot = -1;
    Path path;
};

int nearest_slot(const SaddleInfo& s, Pt approach_dir) {
    double n = std::hypot(approach_dir.x, approach_dir.y);
    int best = 0;
    double best_dot = -2;
    for (int k = 0; k < 4; ++k) {
        const Pt& r = s.rays[static_cast<size_t>(k)];
        double d = (r.x * approach_dir.x + r.y * approach_dir.y) / n;
        if (d > best_dot) {
            best_dot = d;
            best = k;
        }
    }
    return best;
}

struct Component {
    Path path;
    int lower_vertex = -1, upper_vertex = -1;
};

double dist_to_path(const Tracer& tracer, Pt p, const Path& path) {
    double best = 1e300;
    size_t stride = std::max<size_t>(1, path.pts.size() / 3000);
    for (size_t i = 0; i < path.pts.size(); i += stride) {
        Pt d = tracer.period_delta(p, path.pts[i]);
        best = std::min(best, std::hypot(d.x, d.y));
    }
    return best;
}

/// Point inside the quadrant after `slot`, far enough from the saddle for
/// a stable sign of F - v.
Pt quadrant_probe(const geometry::Chart& chart, const SaddleInfo& s, int slot, double r0,
                  int* side_out) {
    const Pt& r1 = s.rays[static_cast<size_t>(slot)];
    const Pt& r2 = s.rays[static_cast<size_t>((slot + 1) % 4)];
    Pt bis{r1.x + r2.x, r1.y + r2.y};
    double n = std::hypot(bis.x, bis.y);
    bis = {bis.x / n, bis.y / n};
    double rr = r0;
    for (int i = 0; i < 8; ++i) {
        Pt probe{s.pos.x + rr * bis.x, s.pos.y + rr * bis.y};
        double dv = chart.F(probe.x, probe.y) - s.value;
        if (std::abs(dv) > 1e-10 * (1 + std::abs(s.value))) {
            if (side_out) *side_out = dv > 0 ? +1 : -1;
            return probe;
        }
        rr *= 2;
    }
    throw QuantError("could not find a stable quadrant probe");
}

} // namespace

ReebGraph build_reeb_graph(const SurfaceSystem& sys, const std::vector<SingularPoint>& points) {
    ReebGraph graph;
    Tracer tracer(sys);
    const geometry::Chart& chart = sys.tracing_chart();
    int tchart = sys.tracing_chart_index();

    double vspan = 1e-12;
    for (const auto& p : points)
        for (const auto& q : points)
            vspan = std::max(vspan, p.critical_value - q.critical_value);
    const double value_tol = 1e-9 * vspan;

    std::vector<SaddleInfo> saddles;
    for (const auto& p : points) {
        if (p.kind != SingKind::Hyperbolic) continue;
        if (p.chart_index != tchart)
            throw Unsupported("hyperbolic point outside the tracing chart");
        SaddleInfo s;
        s.point_id = p.id;
        s.pos = {p.x, p.y};
        s.value = p.critical_value;
        s.rays = saddle_rays(p);
        saddles.push_back(s);
    }

    const double r_launch = 3 * tracer.base_step();
    const double capture = r_launch;

    // stability of each branch and the sign of F - v on each quadrant
    for (SaddleInfo& s : saddles) {
        for (int k = 0; k < 4; ++k) {
            const Pt& d = s.rays[static_cast<size_t>(k)];
            Pt seed{s.pos.x + r_launch * d.x, s.pos.y + r_launch * d.y};
            seed = tracer.project(seed, s.value);
            Pt flow = tracer.flow_dir(seed);
            s.unstable[static_cast<size_t>(k)] = flow.x * d.x + flow.y * d.y > 0;
            int side = 0;
            quadrant_probe(chart, s, k, 2 * r_launch, &side);
            s.quadrant_sign[static_cast<size_t>(k)] = side;
        }
        int n_unstable = 0;
        for (bool u : s.unstable) n_unstable += u ? 1 : 0;
        if (n_unstable != 2) throw QuantError("saddle branch classification failed");
    }

    // unstable separatrix branches; every arc is traced exactly once
    std::vector<ArcTrace> arcs;
    for (size_t si = 0; si < saddles.size(); ++si) {
        const SaddleInfo& s = saddles[si];
        std::vector<Pt> targets;
        std::vector<int> target_ids;
        for (size_t sj = 0; sj < saddles.size(); ++sj) {
            if (std::abs(saddles[sj].value - s.value) < value_tol) {
                targets.push_back(saddles[sj].pos);
                target_ids.push_back(static_cast<int>(sj));
            }
        }
        for (int k = 0; k < 4; ++k) {
            if (!s.unstable[static_cast<size_t>(k)]) continue;  // stable branch
            const Pt& d = s.rays[static_cast<size_t>(k)];
            Pt seed{s.pos.x + r_launch * d.x, s.pos.y + r_launch * d.y};
            seed = tracer.project(seed, s.value);
            int hit = -1;
            Path path = tracer.trace_to_capture(seed, s.value, targets, capture, hit,
                                                40 * chart.diameter());
            ArcTrace arc;
            arc.tail = static_cast<int>(si);
            arc.tail_slot = k;
            arc.head = target_ids[static_cast<size_t>(hit)];
            const SaddleInfo& h = saddles[static_cast<size_t>(arc.head)];
            Pt end = path.pts.back();
            Pt dd = tracer.period_delta(end, h.pos);
            arc.head_slot = nearest_slot(h, {dd.x, dd.y});
            // extend the polyline to the exact saddle positions
            path.pts.insert(path.pts.begin(), s.pos);
            path.tangents.insert(path.tangents.begin(), d);
            Pt head_img{end.x - dd.x, end.y - dd.y};
            const Pt& hr = h.rays[static_cast<size_t>(arc.head_slot)];
            path.pts.push_back(head_img);
            path.tangents.push_back({-hr.x, -hr.y});
            arc.path = std::move(path);
            arcs.push_back(std::move(arc));
        }
    }
    if (arcs.size() != 2 * saddles.size())
        throw QuantError("separatrix tracing produced an inconsistent arc count");

    // group saddles into singular leaves
    std::vector<int> uf(saddles.size());
    for (size_t i = 0; i < uf.size(); ++i) uf[i] = static_cast<int>(i);
    std::function<int(int)> find = [&](int i) {
        while (uf[static_cast<size_t>(i)] != i) i = uf[static_cast<size_t>(i)];
        return i;
    };
    for (const auto& a : arcs) uf[static_cast<size_t>(find(a.tail))] = find(a.head);

    for (const auto& p : points) {
        if (p.kind != SingKind::Elliptic) continue;
        ReebVertex v;
        v.kind = VertexKind::EllipticExtremum;
        v.value = p.critical_value;
        v.singular_points = {p.id};
        graph.vertices.push_back(v);
    }
    std::map<int, int> leaf_vertex;  // union-find root -> vertex index
    for (size_t si = 0; si < saddles.size(); ++si) {
        int root = find(static_cast<int>(si));
        if (leaf_vertex.find(root) == leaf_vertex.end()) {
            ReebVertex v;
            v.kind = VertexKind::HyperbolicLeaf;
            v.value = saddles[si].value;
            graph.vertices.push_back(v);
            leaf_vertex[root] = static_cast<int>(graph.vertices.size()) - 1;
        }
        graph.vertices[static_cast<size_t>(leaf_vertex[root])].singular_points.push_back(
            saddles[si].point_id);
    }

    // leaf graphs: arcs, then faces as rotation-system orbits
    struct FaceProbe {
        int leaf_index, face_index;
        Pt probe;
    };
    std::vector<FaceProbe> face_probes;
    for (const auto& [root, vidx] : leaf_vertex) {
        HyperbolicLeafData data;
        data.vertex = vidx;
        std::map<int, int> local;
        for (size_t si = 0; si < saddles.size(); ++si)
            if (find(static_cast<int>(si)) == root) {
                local[static_cast<int>(si)] = static_cast<int>(local.size());
                data.saddle_points.push_back(saddles[si].point_id);
            }
        data.graph.num_vertices = static_cast<int>(local.size());
        std::vector<int> local_to_saddle(local.size());
        for (const auto& [si, lv] : local) local_to_saddle[static_cast<size_t>(lv)] = si;
        for (const auto& a : arcs) {
            if (find(a.tail) != root) continue;
            cech::LeafArc la;
            la.tail_vertex = local[a.tail];
            la.tail_slot = a.tail_slot;
            la.head_vertex = local[a.head];
            la.head_slot = a.head_slot;
            data.graph.arcs.push_back(la);
            data.arcs.push_back(a.path);
            data.arc_actions.push_back(transport::theta_integral(chart, a.path));
        }

        // nearby leaves enter each quadrant by its stable end and leave by
        // the unstable one, always running with the flow along the arcs;
        // faces are the orbits of that transition over quadrants
        std::map<std::pair<int, int>, int> tail_at;  // (local vertex, slot) -> arc
        for (size_t la = 0; la < data.graph.arcs.size(); ++la) {
            const cech::LeafArc& a = data.graph.arcs[la];
            tail_at[{a.tail_vertex, a.tail_slot}] = static_cast<int>(la);
        }
        auto saddle_of_local = [&](int lv) -> const SaddleInfo& {
            return saddles[static_cast<size_t>(local_to_saddle[static_cast<size_t>(lv)])];
        };
        std::map<std::pair<int, int>, bool> quad_used;  // (local vertex, quadrant k)
        for (int lv0 = 0; lv0 < data.graph.num_vertices; ++lv0) {
            for (int k0 = 0; k0 < 4; ++k0) {
                if (quad_used[{lv0, k0}]) continue;
                const int sign0 = saddle_of_local(lv0).quadrant_sign[static_cast<size_t>(k0)];
                cech::LoopFamily face;
                face.side = sign0;
                int lv = lv0, k = k0;
                while (true) {
                    quad_used[{lv, k}] = true;
                    const SaddleInfo& s = saddle_of_local(lv);
                    int out_slot = s.unstable[static_cast<size_t>(k)] ? k : (k + 1) % 4;
                    if (!s.unstable[static_cast<size_t>(out_slot)])
                        throw QuantError("quadrant without an unstable end");
                    int la = tail_at.at({lv, out_slot});
                    face.cycle.push_back({la, true});
                    const cech::LeafArc& a = data.graph.arcs[static_cast<size_t>(la)];
                    int hv = a.head_vertex, hs = a.head_slot;
                    const SaddleInfo& hsad = saddle_of_local(hv);
                    // continue into the adjacent quadrant with the same sign
                    int q1 = hs, q2 = (hs + 3) % 4;
                    int next_k;
                    if (hsad.quadrant_sign[static_cast<size_t>(q1)] == sign0 &&
                        hsad.quadrant_sign[static_cast<size_t>(q2)] != sign0)
                        next_k = q1;
                    else if (hsad.quadrant_sign[static_cast<size_t>(q2)] == sign0 &&
                             hsad.quadrant_sign[static_cast<size_t>(q1)] != sign0)
                        next_k = q2;
                    else
                        throw QuantError("ambiguous quadrant continuation");
                    lv = hv;
                    k = next_k;
                    if (lv == lv0 && k == k0) break;
                }
                // probe for the reeb-edge matching, taken in the first quadrant
                int side = 0;
                Pt probe =
                    quadrant_probe(chart, saddle_of_local(lv0), k0, 2 * r_launch, &side);
                data.graph.faces.push_back(face);
                data.face_windings.push_back(0);
                face_probes.push_back({static_cast<int>(graph.hyperbolic_leaves.size()),
                                       static_cast<int>(data.graph.faces.size()) - 1, probe});
            }
        }
        graph.hyperbolic_leaves.push_back(std::move(data));
    }

    // distinct critical values and regular components per interval
    std::vector<double> values;
    for (const auto& v : graph.vertices) values.push_back(v.value);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end(),
                             [&](double a, double b) { return std::abs(a - b) < value_tol; }),
                 values.end());
    auto value_index = [&](double v) {
        for (size_t i = 0; i < values.size(); ++i)
            if (std::abs(values[i] - v) < value_tol) return static_cast<int>(i);
        throw QuantError("critical value lookup failed");
    };
    if (values.size() < 2) throw QuantError("need at least two critical values");

    std::vector<std::vector<Component>> interval_components(values.size() - 1);
    const int G = 97;
    for (size_t iv = 0; iv + 1 < values.size(); ++iv) {
        double c = 0.5 * (values[iv] + values[iv + 1]);
        auto& comps = interval_components[iv];
        double dx = chart.domain.width() / G, dy = chart.domain.height() / G;
        auto consider = [&](Pt cand) {
            for (const auto& comp : comps)
                if (dist_to_path(tracer, cand, comp.path) < 4 * tracer.base_step()) return;
            Component comp;
            comp.path = tracer.trace_leaf(tracer.project(cand, c), c);
            comps.push_back(std::move(comp));
        };
        // scan on cell centers (never on a periodic seam), with a wrap
        // pair so levels sitting on the seam are still seen; a half-open
        // sign convention makes exact zeros count once
        auto positive = [](double f) { return f >= 0.0; };
        auto cut = [](double f0, double f1) {
            double d = f0 - f1;
            if (d == 0) return 0.5;
            return std::min(1.0, std::max(0.0, f0 / d));
        };
        auto cx = [&](int i) { return chart.domain.x0 + dx * (i + 0.5); };
        auto cy = [&](int j) { return chart.domain.y0 + dy * (j + 0.5); };
        for (int i = 0; i < G; ++i) {
            for (int j = 0; j < G; ++j) {
                double f00 = chart.F(cx(i), cy(j)) - c;
                bool wrap_x = chart.period_x > 0 && i == G - 1;
                bool wrap_y = chart.period_y > 0 && j == G - 1;
                if (i < G - 1 || wrap_x) {
                    double x1 = cx(i) + dx;  // next center, unwrapped
                    double f10 = chart.F(x1, cy(j)) - c;
                    if (positive(f00) != positive(f10))
                        consider({cx(i) + dx * cut(f00, f10), cy(j)});
                }
                if (j < G - 1 || wrap_y) {
                    double y1 = cy(j) + dy;
                    double f01 = chart.F(cx(i), y1) - c;
                    if (positive(f00) != positive(f01))
                        consider({cx(i), cy(j) + dy * cut(f00, f01)});
                }
            }
        }
        if (comps.empty()) throw QuantError("no regular leaves found in an interval");
    }

    auto attach = [&](int vertex, int iv, Pt probe) {
        double c = 0.5 * (values[static_cast<size_t>(iv)] + values[static_cast<size_t>(iv) + 1]);
        Pt landing = tracer.walk_to_value(probe, c);
        auto& comps = interval_components[static_cast<size_t>(iv)];
        int best = -1;
        double best_d = 1e300;
        for (size_t k = 0; k < comps.size(); ++k) {
            double d = dist_to_path(tracer, landing, comps[k].path);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(k);
            }
        }
        if (best < 0 || best_d > 10 * tracer.base_step())
            throw QuantError("leaf attachment failed (vertex " + std::to_string(vertex) +
                             ", interval " + std::to_string(iv) + ", landing " +
                             std::to_string(landing.x) + "," + std::to_string(landing.y) +
                             ", distance " + std::to_string(best_d) + ")");
        Component& comp = comps[static_cast<size_t>(best)];
        bool from_below = std::abs(graph.vertices[static_cast<size_t>(vertex)].value -
                                   values[static_cast<size_t>(iv)]) < value_tol;
        int& end = from_below ? comp.lower_vertex : comp.upper_vertex;
        if (end != -1) throw QuantError("conflicting leaf attachment");
        end = vertex;
        return best;
    };

    // hyperbolic faces first (they also need the face -> edge map)
    std::vector<std::pair<int, int>> face_edge_slot(face_probes.size());  // (interval, comp)
    for (size_t fp = 0; fp < face_probes.size(); ++fp) {
        const FaceProbe& f = face_probes[fp];
        HyperbolicLeafData& data = graph.hyperbolic_leaves[static_cast<size_t>(f.leaf_index)];
        int vi = value_index(graph.vertices[static_cast<size_t>(data.vertex)].value);
        int side = data.graph.faces[static_cast<size_t>(f.face_index)].side;
        int iv = side > 0 ? vi : vi - 1;
        if (iv < 0 || iv + 1 >= static_cast<int>(values.size()))
            throw QuantError("face interval out of range");
        int comp = attach(data.vertex, iv, f.probe);
        face_edge_slot[fp] = {iv, comp};
    }
    for (size_t pv = 0; pv < graph.vertices.size(); ++pv) {
        const ReebVertex& v = graph.vertices[pv];
        if (v.kind != VertexKind::EllipticExtremum) continue;
        const SingularPoint* p = nullptr;
        for (const auto& q : points)
            if (q.id == v.singular_points.front()) p = &q;
        int vi = value_index(v.value);
        bool is_min = p->hxx + p->hyy > 0;
        int iv = is_min ? vi : vi - 1;
        if (iv < 0 || iv + 1 >= static_cast<int>(values.size()))
            throw QuantError("extremum interval out of range");
        Pt probe;
        if (p->chart_index == tchart) {
            probe = {p->x + 2 * tracer.base_step(), p->y + 2 * tracer.base_step()};
        } else {
            const geometry::Chart& pc = sys.charts[static_cast<size_t>(p->chart_index)];
            if (!pc.has_proxy)
                throw Unsupported("extremum chart without a tracing-chart proxy point");
            probe = {pc.proxy_x, pc.proxy_y};
        }
        attach(static_cast<int>(pv), iv, probe);
    }

    // materialize the edges
    std::map<std::pair<int, int>, int> edge_id_of;
    for (size_t iv = 0; iv + 1 < values.size(); ++iv) {
        auto& comps = interval_components[iv];
        for (size_t k = 0; k < comps.size(); ++k) {
            Component& comp = comps[k];
            if (comp.lower_vertex < 0 || comp.upper_vertex < 0)
                throw QuantError("reeb edge missing an endpoint");
            ReebEdge e;
            e.id = static_cast<int>(graph.edges.size());
            e.lower_vertex = comp.lower_vertex;
            e.upper_vertex = comp.upper_vertex;
            e.f_lo = values[iv];
            e.f_hi = values[iv + 1];
            bool lower_h = graph.vertices[static_cast<size_t>(e.lower_vertex)].kind ==
                           VertexKind::HyperbolicLeaf;
            bool upper_h = graph.vertices[static_cast<size_t>(e.upper_vertex)].kind ==
                           VertexKind::HyperbolicLeaf;
            e.anchor_vertex = (!lower_h && upper_h) ? e.upper_vertex : e.lower_vertex;
            e.direction = (e.anchor_vertex == e.lower_vertex) ? +1 : -1;
            e.seed_base = comp.path.pts.front();
            edge_id_of[{static_cast<int>(iv), static_cast<int>(k)}] = e.id;
            graph.edges.push_back(e);
        }
    }
    for (size_t fp = 0; fp < face_probes.size(); ++fp) {
        const FaceProbe& f = face_probes[fp];
        HyperbolicLeafData& data = graph.hyperbolic_leaves[static_cast<size_t>(f.leaf_index)];
        auto [iv, k] = face_edge_slot[fp];
        data.graph.faces[static_cast<size_t>(f.face_index)].reeb_edge = edge_id_of.at({iv, k});
        const Path& rep = interval_components[static_cast<size_t>(iv)][static_cast<size_t>(k)].path;
        data.face_windings[static_cast<size_t>(f.face_index)] = rep.winding_x + rep.winding_y;
    }
    for (auto& data : graph.hyperbolic_leaves) data.graph.validate();
    return graph;
}

const cech::LeafGraph& leaf_graph(const ReebGraph& graph, int vertex) {
    return graph.leaf_data(vertex).graph;
}

Path transversal_param(const SurfaceSystem& sys, const ReebGraph& graph, int edge, double t) {
    const ReebEdge& e = graph.edges.at(static_cast<size_t>(edge));
    double len = e.f_hi - e.f_lo;
    if (!(t > 0 && t < len)) throw OutOfRange("transversal parameter outside the edge");
    double anchor = graph.vertices[static_cast<size_t>(e.anchor_vertex)].value;
    double level = anchor + e.direction * t;
    Tracer tracer(sys);
    Pt seed = tracer.walk_to_value(e.seed_base, level);
    return tracer.trace_leaf(seed, level);
}

PHResult poincare_hopf_check(const ReebGraph& graph, const SurfaceSystem& sys) {
    PHResult r;
    r.chi = graph.elliptic_count() - graph.hyperbolic_point_count();
    r.declared = sys.euler_characteristic.has_value();
    r.ok = r.declared && r.chi == *sys.euler_characteristic;
    return r;
}

} // namespace quantsurf::reeb
