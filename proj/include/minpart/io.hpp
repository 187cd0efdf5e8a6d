#pragma once

// JSON and CSV views of the library's results. Requires nlohmann/json.

#include "minpart/analytic.hpp"
#include "minpart/bounds.hpp"
#include "minpart/fem.hpp"
#include "minpart/nodal.hpp"
#include "minpart/optimizer.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace minpart {

using Json = nlohmann::ordered_json;

namespace detail {

// JSON has no infinity; empty parts are written as null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json numbers(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

inline void full_precision(std::ostream& os) { os << std::setprecision(std::numeric_limits<double>::max_digits10); }

}  // namespace detail

inline Json to_json(const Spectrum& s) {
    Json j;
    std::vector<double> values, residuals;
    for (const auto& p : s.pairs) {
        values.push_back(p.value);
        residuals.push_back(p.residual);
    }
    j["eigenvalues"] = detail::numbers(values);
    j["residuals"] = detail::numbers(residuals);
    j["clusters"] = s.clusters;
    j["cluster_tol"] = s.cluster_tol;
    j["iterations"] = s.iterations;
    return j;
}

inline Json to_json(const PartitionGraph& g) {
    Json j;
    j["nodes"] = g.nodes;
    Json edges = Json::array();
    for (auto [a, b] : g.edges) edges.push_back({a, b});
    j["edges"] = edges;
    if (g.coloring) j["coloring"] = *g.coloring;
    return j;
}

inline Json to_json(const JunctionAngles& t) {
    auto deg = [](std::vector<double> v) {
        for (double& x : v) x *= 180.0 / std::numbers::pi;
        return v;
    };
    Json j;
    j["point"] = {t.point.x, t.point.y};
    j["multiplicity"] = t.multiplicity;
    j["directions_deg"] = deg(t.directions);
    j["gaps_deg"] = deg(t.gaps);
    return j;
}

inline Json to_json(const AnalyticMode& m) {
    return Json{{"index", m.index},
                {"eigenvalue", m.eigenvalue},
                {"multiplicity", m.multiplicity},
                {"nodal_count", m.nodal_count},
                {"degenerate", m.degenerate}};
}

inline Json to_json(const BoundsReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? detail::number(*v) : Json(nullptr); };
    Json j;
    j["k"] = r.k;
    j["area"] = r.area;
    j["faber_krahn_lower"] = r.faber_krahn_lower;
    j["hexagon_rate"] = r.hexagon_rate;
    j["lambda_k"] = opt(r.lambda_k);
    j["L_k"] = opt(r.L_k);
    j["computed_Lambda"] = opt(r.computed_Lambda);
    j["sandwich_ok"] = to_string(r.sandwich_ok);
    j["courant_sharp"] = r.courant_sharp;
    return j;
}

/// Partition summary; `extras` are appended as given.
inline Json to_json(const Partition& part, const Json& extras = Json::object()) {
    Json j;
    j["k"] = part.k();
    j["p"] = std::isinf(part.p) ? Json("inf") : Json(part.p);
    j["objective"] = detail::number(part.objective);
    j["part_values"] = detail::numbers(part.part_values);
    j["equalization_gap"] = equalization_gap(part);
    std::vector<double> areas;
    for (int i = 0; i < part.k(); ++i) areas.push_back(part.labeling.part_area(i));
    j["part_areas"] = areas;
    j["unassigned_area"] = part.labeling.unassigned_area();
    auto graph = partition_graph(part.labeling);
    const auto bip = is_bipartite(graph);
    if (bip.bipartite) graph.coloring = bip.coloring;
    j["bipartite"] = bip.bipartite;
    j["graph"] = to_json(graph);
    if (!bip.bipartite) j["odd_cycle"] = bip.odd_cycle;
    if (std::isfinite(part.objective)) {
        const auto res = inequality_residuals(part, part.objective);
        j["i1_residual"] = res.i1;
        j["i2_residual"] = res.i2;
        j["residual_scales"] = res.scales;
    }
    j["iterations"] = part.iterations;
    j["converged"] = part.converged;
    j["history"] = detail::numbers(part.history);
    j["log"] = part.log;
    for (const auto& [key, value] : extras.items()) j[key] = value;
    return j;
}

/// x,y,value per vertex.
inline void write_field_csv(std::ostream& os, const ScalarField& f) {
    detail::full_precision(os);
    os << "x,y,value\n";
    const auto& P = f.mesh->vertices();
    for (int v = 0; v < f.mesh->vertex_count(); ++v) os << P[v].x << ',' << P[v].y << ',' << f.values[v] << '\n';
}

/// triangle,cx,cy,label per triangle (-1 for unassigned).
inline void write_labeling_csv(std::ostream& os, const Labeling& l) {
    detail::full_precision(os);
    os << "triangle,cx,cy,label\n";
    for (int t = 0; t < l.mesh->triangle_count(); ++t) {
        const Point c = l.mesh->triangle_centroid(t);
        os << t << ',' << c.x << ',' << c.y << ',' << l.labels[t] << '\n';
    }
}

/// polyline,x,y per point.
inline void write_polylines_csv(std::ostream& os, const std::vector<Polyline>& lines) {
    detail::full_precision(os);
    os << "polyline,x,y\n";
    for (size_t i = 0; i < lines.size(); ++i)
        for (const auto& p : lines[i]) os << i << ',' << p.x << ',' << p.y << '\n';
}

/// Legacy VTK ASCII unstructured grid with one point-data array per field.
inline void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<std::pair<std::string, Vector>>& fields) {
    detail::full_precision(os);
    os << "# vtk DataFile Version 3.0\nminpart\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.vertex_count() << " double\n";
    for (const auto& p : mesh.vertices()) os << p.x << ' ' << p.y << " 0\n";
    os << "CELLS " << mesh.triangle_count() << ' ' << 4 * mesh.triangle_count() << '\n';
    for (const auto& t : mesh.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "CELL_TYPES " << mesh.triangle_count() << '\n';
    for (int t = 0; t < mesh.triangle_count(); ++t) os << "5\n";
    if (fields.empty()) return;
    os << "POINT_DATA " << mesh.vertex_count() << '\n';
    for (const auto& [name, values] : fields) {
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (Eigen::Index v = 0; v < values.size(); ++v) os << values[v] << '\n';
    }
}

}  // namespace minpart
