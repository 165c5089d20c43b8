#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "quantsurf/geometry.hpp"
#include "quantsurf/reeb.hpp"

namespace quantsurf::mesh {

struct TriMesh {
    std::vector<std::array<double, 3>> pos;
    std::vector<double> value;
    std::vector<std::array<int, 3>> tris;

    int num_vertices() const { return static_cast<int>(value.size()); }
};

/// Plain-text rows: `v x y z f` and `t i j k` (0-based indices).
TriMesh parse_mesh(std::istream& in);
TriMesh load_mesh(const std::string& path);

/// Sweep Reeb graph of a sampled field.  Ties are broken by vertex index
/// (simulation of simplicity); saddles become HyperbolicLeaf vertices.
struct MeshReebVertex {
    reeb::VertexKind kind = reeb::VertexKind::EllipticExtremum;
    double value = 0;
    int mesh_vertex = -1;
};

struct MeshReebGraph {
    std::vector<MeshReebVertex> vertices;
    std::vector<std::pair<int, int>> edges;  // (lower, upper) vertex indices

    int count(reeb::VertexKind kind) const;
};

MeshReebGraph sweep_reeb(const TriMesh& mesh);

/// Kind- and degree-refined isomorphism test for the small graphs here.
bool reeb_isomorphic(const MeshReebGraph& a, const MeshReebGraph& b);

/// Triangulation of a system's tracing chart (plus pole vertices supplied
/// by proxy-carrying cap charts), for sweeping the analytic builtins.
TriMesh sample_system_mesh(const geometry::SurfaceSystem& sys, int nx, int ny);

} // namespace quantsurf::mesh
