#include "quantsurf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "quantsurf/errors.hpp"

namespace quantsurf::mesh {

TriMesh parse_mesh(std::istream& in) {
    TriMesh m;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag) || tag[0] == '#') continue;
        if (tag == "v") {
            std::array<double, 3> p{};
            double f = 0;
            if (!(ss >> p[0] >> p[1] >> p[2] >> f))
                throw ParseError("mesh vertex row at line " + std::to_string(lineno));
            m.pos.push_back(p);
            m.value.push_back(f);
        } else if (tag == "t") {
            std::array<int, 3> t{};
            if (!(ss >> t[0] >> t[1] >> t[2]))
                throw ParseError("mesh triangle row at line " + std::to_string(lineno));
            for (int k : t)
                if (k < 0 || k >= m.num_vertices())
                    throw ParseError("triangle index out of range at line " +
                                     std::to_string(lineno));
            m.tris.push_back(t);
        } else {
            throw ParseError("unknown mesh row tag '" + tag + "'");
        }
    }
    return m;
}

TriMesh load_mesh(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw QuantError("cannot open mesh file " + path);
    return parse_mesh(f);
}

int MeshReebGraph::count(reeb::VertexKind kind) const {
    int n = 0;
    for (const auto& v : vertices)
        if (v.kind == kind) ++n;
    return n;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<size_t>(n)) {
        for (int i = 0; i < n; ++i) parent[static_cast<size_t>(i)] = i;
    }
    int find(int i) {
        while (parent[static_cast<size_t>(i)] != i) {
            parent[static_cast<size_t>(i)] = parent[static_cast<size_t>(parent[static_cast<size_t>(i)])];
            i = parent[static_cast<size_t>(i)];
        }
        return i;
    }
    void unite(int a, int b) { parent[static_cast<size_t>(find(a))] = find(b); }
};

struct Sweep {
    const TriMesh& m;
    std::vector<int> order;  // vertices by (value, index)
    std::vector<int> rank;   // inverse permutation
    std::vector<std::array<int, 3>> tri_sorted;
    std::vector<std::vector<int>> vertex_tris;

    explicit Sweep(const TriMesh& mesh) : m(mesh) {
        int n = m.num_vertices();
        order.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (m.value[static_cast<size_t>(a)] != m.value[static_cast<size_t>(b)])
                return m.value[static_cast<size_t>(a)] < m.value[static_cast<size_t>(b)];
            return a < b;
        });
        rank.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) rank[static_cast<size_t>(order[static_cast<size_t>(i)])] = i;
        vertex_tris.resize(static_cast<size_t>(n));
        for (size_t t = 0; t < m.tris.size(); ++t) {
            for (int k : m.tris[t]) vertex_tris[static_cast<size_t>(k)].push_back(static_cast<int>(t));
        }
    }

    bool below(int a, int b) const { return rank[static_cast<size_t>(a)] < rank[static_cast<size_t>(b)]; }

    /// Number of connected components among the lower (or upper) link of v.
    int link_components(int v, bool lower) const {
        std::vector<int> nbrs;
        std::map<int, int> index;
        for (int t : vertex_tris[static_cast<size_t>(v)]) {
            for (int k : m.tris[static_cast<size_t>(t)]) {
                if (k == v) continue;
                bool is_lower = below(k, v);
                if (is_lower != lower) continue;
                if (!index.count(k)) {
                    index[k] = static_cast<int>(nbrs.size());
                    nbrs.push_back(k);
                }
            }
        }
        if (nbrs.empty()) return 0;
        UnionFind uf(static_cast<int>(nbrs.size()));
        for (int t : vertex_tris[static_cast<size_t>(v)]) {
            const auto& tri = m.tris[static_cast<size_t>(t)];
            std::vector<int> side;
            for (int k : tri) {
                if (k == v) continue;
                if (below(k, v) == lower) side.push_back(k);
            }
            if (side.size() == 2) uf.unite(index[side[0]], index[side[1]]);
        }
        std::set<int> roots;
        for (size_t i = 0; i < nbrs.size(); ++i) roots.insert(uf.find(static_cast<int>(i)));
        return static_cast<int>(roots.size());
    }
};

} // namespace

MeshReebGraph sweep_reeb(const TriMesh& mesh) {
    Sweep sw(mesh);
    int n = mesh.num_vertices();

    // classify critical vertices
    struct Crit {
        int v;
        int nl, nu;
    };
    std::vector<Crit> crits;
    for (int i = 0; i < n; ++i) {
        int v = sw.order[static_cast<size_t>(i)];
        int nl = sw.link_components(v, true);
        int nu = sw.link_components(v, false);
        if (nl == 1 && nu == 1) continue;
        if (nl > 2 || nu > 2 || (nl == 2 && nu != 2) || (nu == 2 && nl != 2))
            throw NonMorseInput("degenerate vertex in the sampled field");
        crits.push_back({v, nl, nu});
    }
    std::sort(crits.begin(), crits.end(),
              [&](const Crit& a, const Crit& b) { return sw.below(a.v, b.v); });

    MeshReebGraph out;
    std::map<int, int> reeb_vertex_of;
    for (const Crit& c : crits) {
        MeshReebVertex v;
        v.kind = (c.nl == 2) ? reeb::VertexKind::HyperbolicLeaf
                             : reeb::VertexKind::EllipticExtremum;
        v.value = mesh.value[static_cast<size_t>(c.v)];
        v.mesh_vertex = c.v;
        reeb_vertex_of[c.v] = static_cast<int>(out.vertices.size());
        out.vertices.push_back(v);
    }

    // edge spans the level after w iff tail <= w < head in sweep order
    auto crossing = [&](int rank_level) {
        // component id per mesh edge encoded as edge -> root over a map
        std::map<std::pair<int, int>, int> edge_ids;
        std::vector<std::pair<int, int>> edges;
        for (const auto& tri : mesh.tris) {
            for (int e = 0; e < 3; ++e) {
                int a = tri[static_cast<size_t>(e)], b = tri[static_cast<size_t>((e + 1) % 3)];
                if (sw.rank[static_cast<size_t>(a)] > sw.rank[static_cast<size_t>(b)]) std::swap(a, b);
                if (sw.rank[static_cast<size_t>(a)] <= rank_level &&
                    sw.rank[static_cast<size_t>(b)] > rank_level) {
                    auto key = std::make_pair(a, b);
                    if (!edge_ids.count(key)) {
                        edge_ids[key] = static_cast<int>(edges.size());
                        edges.push_back(key);
                    }
                }
            }
        }
        UnionFind uf(static_cast<int>(edges.size()));
        for (const auto& tri : mesh.tris) {
            std::vector<int> ids;
            for (int e = 0; e < 3; ++e) {
                int a = tri[static_cast<size_t>(e)], b = tri[static_cast<size_t>((e + 1) % 3)];
                if (sw.rank[static_cast<size_t>(a)] > sw.rank[static_cast<size_t>(b)]) std::swap(a, b);
                auto it = edge_ids.find({a, b});
                if (it != edge_ids.end()) ids.push_back(it->second);
            }
            for (size_t i = 1; i < ids.size(); ++i) uf.unite(ids[0], ids[static_cast<size_t>(i)]);
        }
        return std::make_pair(edges, std::move(uf));
    };

    // active Reeb arcs keyed by a representative crossing mesh edge
    struct Active {
        std::pair<int, int> rep_edge;
        int lower_reeb_vertex;
    };
    std::vector<Active> active;

    auto component_of = [&](const std::vector<std::pair<int, int>>& edges, UnionFind& uf,
                            const std::pair<int, int>& rep) {
        for (size_t i = 0; i < edges.size(); ++i)
            if (edges[i] == rep) return uf.find(static_cast<int>(i));
        return -1;
    };

    std::set<int> critical_set;
    for (const Crit& c : crits) critical_set.insert(c.v);

    for (int pos = 0; pos < n; ++pos) {
        int w = sw.order[static_cast<size_t>(pos)];
        if (!critical_set.count(w)) {
            // regular vertex: contours survive, but an anchor ending here
            // must hop onto an upper-star edge of the same contour
            for (Active& a : active) {
                if (a.rep_edge.second != w) continue;
                bool ok = false;
                for (int t : sw.vertex_tris[static_cast<size_t>(w)]) {
                    for (int k : mesh.tris[static_cast<size_t>(t)]) {
                        if (k == w || sw.below(k, w)) continue;
                        a.rep_edge = {w, k};
                        ok = true;
                        break;
                    }
                    if (ok) break;
                }
                if (!ok) throw QuantError("regular vertex without an upper edge");
            }
            continue;
        }
        int rw = sw.rank[static_cast<size_t>(w)];

        // components just below w (level after rank rw - 1)
        if (rw > 0 && !active.empty()) {
            auto [edges, uf] = crossing(rw - 1);
            // map component root -> active arcs on it
            std::map<int, std::vector<size_t>> on_comp;
            for (size_t a = 0; a < active.size(); ++a) {
                int root = component_of(edges, uf, active[a].rep_edge);
                if (root < 0) throw QuantError("sweep lost track of a contour");
                on_comp[root].push_back(a);
            }
            // components touching w's lower star end here
            std::set<int> ending;
            for (size_t i = 0; i < edges.size(); ++i)
                if (edges[i].second == w) ending.insert(uf.find(static_cast<int>(i)));
            std::vector<Active> still;
            for (auto& [root, idxs] : on_comp) {
                if (idxs.size() != 1) throw QuantError("two contours merged without a saddle");
                if (ending.count(root)) {
                    out.edges.emplace_back(active[idxs[0]].lower_reeb_vertex,
                                           reeb_vertex_of.at(w));
                } else {
                    // keep going: re-anchor on an edge that also spans past w
                    Active a = active[idxs[0]];
                    bool ok = false;
                    for (size_t i = 0; i < edges.size(); ++i) {
                        if (uf.find(static_cast<int>(i)) != root) continue;
                        if (sw.rank[static_cast<size_t>(edges[i].second)] > rw) {
                            a.rep_edge = edges[i];
                            ok = true;
                            break;
                        }
                    }
                    if (!ok) throw QuantError("contour has no edge spanning the event");
                    still.push_back(a);
                }
            }
            active = std::move(still);
        }

        // components just above w: new arcs out of w
        if (rw < n - 1) {
            auto [edges, uf] = crossing(rw);
            std::set<int> seen;
            for (size_t i = 0; i < edges.size(); ++i) {
                if (edges[i].first != w) continue;  // upper-star edge
                int root = uf.find(static_cast<int>(i));
                if (seen.count(root)) continue;
                seen.insert(root);
                Active a;
                a.rep_edge = edges[i];
                a.lower_reeb_vertex = reeb_vertex_of.at(w);
                active.push_back(a);
            }
        }
    }
    if (!active.empty()) throw QuantError("sweep finished with open contours");
    return out;
}

bool reeb_isomorphic(const MeshReebGraph& a, const MeshReebGraph& b) {
    if (a.vertices.size() != b.vertices.size() || a.edges.size() != b.edges.size()) return false;
    auto signature = [](const MeshReebGraph& g) {
        std::vector<int> deg(g.vertices.size(), 0);
        for (auto [lo, hi] : g.edges) {
            deg[static_cast<size_t>(lo)]++;
            deg[static_cast<size_t>(hi)]++;
        }
        // two refinement rounds over (kind, degree) labels
        std::vector<unsigned long long> label(g.vertices.size());
        for (size_t i = 0; i < g.vertices.size(); ++i)
            label[i] = (g.vertices[i].kind == reeb::VertexKind::HyperbolicLeaf ? 1000u : 0u) +
                       static_cast<unsigned>(deg[i]);
        for (int round = 0; round < 2; ++round) {
            std::vector<std::vector<unsigned long long>> nbr(g.vertices.size());
            for (auto [lo, hi] : g.edges) {
                nbr[static_cast<size_t>(lo)].push_back(label[static_cast<size_t>(hi)]);
                nbr[static_cast<size_t>(hi)].push_back(label[static_cast<size_t>(lo)]);
            }
            for (size_t i = 0; i < g.vertices.size(); ++i) {
                std::sort(nbr[i].begin(), nbr[i].end());
                unsigned long long h = label[i];
                for (unsigned long long x : nbr[i]) h = h * 1315423911ull + x;
                label[i] = h;
            }
        }
        std::sort(label.begin(), label.end());
        return label;
    };
    return signature(a) == signature(b);
}

TriMesh sample_system_mesh(const geometry::SurfaceSystem& sys, int nx, int ny) {
    const geometry::Chart& chart = sys.tracing_chart();
    bool per_x = chart.period_x > 0, per_y = chart.period_y > 0;
    int vx = per_x ? nx : nx + 1;
    int vy = per_y ? ny : ny + 1;
    TriMesh m;
    auto vid = [&](int i, int j) {
        int ii = per_x ? (i % nx + nx) % nx : i;
        int jj = per_y ? (j % ny + ny) % ny : j;
        return ii * vy + jj;
    };
    for (int i = 0; i < vx; ++i) {
        for (int j = 0; j < vy; ++j) {
            double x = chart.domain.x0 + chart.domain.width() * i / nx;
            double y = chart.domain.y0 + chart.domain.height() * j / ny;
            m.pos.push_back({x, y, 0});
            m.value.push_back(chart.F(x, y));
        }
    }
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            if (!per_x && i + 1 > nx) continue;
            int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            m.tris.push_back({a, b, c});
            m.tris.push_back({a, c, d});
        }
    }
    // close the non-periodic x ends with cap vertices (poles)
    if (!per_x) {
        for (const geometry::Chart& cap : sys.charts) {
            if (!cap.has_proxy) continue;
            double fpole = cap.F(0, 0);
            bool top = cap.proxy_x > 0.5 * (chart.domain.x0 + chart.domain.x1);
            int pole = m.num_vertices();
            m.pos.push_back({top ? chart.domain.x1 : chart.domain.x0, 0, 0});
            m.value.push_back(fpole);
            int row = top ? nx : 0;
            for (int j = 0; j < ny; ++j) {
                int a = vid(row, j), b = vid(row, j + 1);
                if (top)
                    m.tris.push_back({a, b, pole});
                else
                    m.tris.push_back({b, a, pole});
            }
        }
    }
    return m;
}

} // namespace quantsurf::mesh
