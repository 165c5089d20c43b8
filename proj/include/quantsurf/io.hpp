#pragma once

#include <string>

#include "quantsurf/cech.hpp"
#include "quantsurf/geometry.hpp"
#include "quantsurf/mesh.hpp"
#include "quantsurf/quantize.hpp"

namespace quantsurf::io {

/// Locale-independent formatting with 12 significant digits.
std::string fmt(double v);

/// System description file: either {"builtin": name, "params": {...}} or
/// explicit charts with expression strings (see README for the schema).
geometry::SurfaceSystem load_system(const std::string& path);
geometry::SurfaceSystem parse_system(const std::string& json_text);

/// Jet-complex model file: leaf-graph adjacency, jet order, per-family
/// action polynomials and BS parameters.
struct CechModelFile {
    cech::LeafGraph graph;
    int N = 0;
    std::vector<cech::Poly> actions;
    std::vector<std::vector<double>> bs;
};
CechModelFile load_cech_model(const std::string& path);
CechModelFile parse_cech_model(const std::string& json_text);

std::string singularities_json(const quantize::SystemAnalysis& analysis);
std::string reeb_json(const quantize::SystemAnalysis& analysis);
std::string mesh_reeb_json(const mesh::MeshReebGraph& graph);
std::string report_json(const quantize::QuantizationReport& report);
std::string profile_csv(const transport::ActionProfile& profile);
std::string action_plot_svg(const quantize::SystemAnalysis& analysis);

void write_file(const std::string& path, const std::string& content);

} // namespace quantsurf::io
