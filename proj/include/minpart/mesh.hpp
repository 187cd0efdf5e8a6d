#pragma once

#include "minpart/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace minpart {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point a, Point b) = default;
};

inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

enum class Marker : std::uint8_t { Dirichlet, Neumann };

struct BoundaryEdge {
    int a = 0;
    int b = 0;
    Marker marker = Marker::Dirichlet;
    /// Edge approximates a circular arc; refinement projects its midpoint.
    bool on_arc = false;
};

struct Arc {
    Point center;
    double radius = 1.0;
};

using Triangle = std::array<int, 3>;

/// Conforming triangulation of a planar domain. Immutable after
/// construction; edge and adjacency tables are built once in the
/// constructor so that downstream algorithms can share the mesh freely.
class Mesh {
public:
    Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles,
         std::vector<BoundaryEdge> boundary_edges, double domain_area,
         std::optional<Arc> arc = std::nullopt)
        : vertices_(std::move(vertices)),
          triangles_(std::move(triangles)),
          boundary_edges_(std::move(boundary_edges)),
          domain_area_(domain_area),
          arc_(arc) {
        const int nv = static_cast<int>(vertices_.size());
        for (const auto& t : triangles_)
            for (int v : t)
                if (v < 0 || v >= nv) throw InvalidArgument("mesh: triangle index out of range");
        for (const auto& e : boundary_edges_)
            if (e.a < 0 || e.a >= nv || e.b < 0 || e.b >= nv)
                throw InvalidArgument("mesh: boundary edge index out of range");
        if (!(domain_area_ > 0.0)) throw InvalidArgument("mesh: domain area must be positive");
        build_topology();
    }

    const std::vector<Point>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
    double domain_area() const { return domain_area_; }
    const std::optional<Arc>& arc() const { return arc_; }

    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int triangle_count() const { return static_cast<int>(triangles_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    /// Unique undirected edges, each stored with the smaller index first.
    const std::vector<std::array<int, 2>>& edges() const { return edges_; }
    /// Edge ids of a triangle; entry i is the edge opposite local vertex i.
    const std::array<int, 3>& triangle_edges(int t) const { return triangle_edges_[t]; }
    /// The one or two triangles incident to an edge (second is -1 on the boundary).
    const std::array<int, 2>& edge_triangles(int e) const { return edge_triangles_[e]; }
    /// Edge id for a vertex pair, or -1.
    int find_edge(int a, int b) const {
        auto it = edge_index_.find(edge_key(a, b));
        return it == edge_index_.end() ? -1 : it->second;
    }

    const std::vector<int>& neighbors(int v) const { return vertex_neighbors_[v]; }
    const std::vector<int>& vertex_triangles(int v) const { return vertex_triangles_[v]; }

    bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }
    /// A vertex touched by at least one Dirichlet-marked boundary edge.
    bool is_dirichlet_vertex(int v) const { return dirichlet_vertex_[v] != 0; }

    double triangle_area(int t) const {
        const auto& tri = triangles_[t];
        return 0.5 * cross(vertices_[tri[1]] - vertices_[tri[0]], vertices_[tri[2]] - vertices_[tri[0]]);
    }
    Point triangle_centroid(int t) const {
        const auto& tri = triangles_[t];
        const Point s = vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]];
        return (1.0 / 3.0) * s;
    }

    double mesh_area() const {
        double s = 0.0;
        for (int t = 0; t < triangle_count(); ++t) s += triangle_area(t);
        return s;
    }

    double max_edge_length() const {
        double h = 0.0;
        for (const auto& e : edges_) h = std::max(h, norm(vertices_[e[1]] - vertices_[e[0]]));
        return h;
    }

private:
    static std::uint64_t edge_key(int a, int b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    }

    void build_topology() {
        const int nv = vertex_count();
        vertex_neighbors_.assign(nv, {});
        vertex_triangles_.assign(nv, {});
        triangle_edges_.resize(triangles_.size());
        edge_index_.reserve(triangles_.size() * 2);
        for (int t = 0; t < triangle_count(); ++t) {
            const auto& tri = triangles_[t];
            for (int i = 0; i < 3; ++i) {
                vertex_triangles_[tri[i]].push_back(t);
                const int a = tri[(i + 1) % 3];
                const int b = tri[(i + 2) % 3];
                const auto key = edge_key(a, b);
                auto [it, inserted] = edge_index_.try_emplace(key, static_cast<int>(edges_.size()));
                if (inserted) {
                    edges_.push_back({std::min(a, b), std::max(a, b)});
                    edge_triangles_.push_back({t, -1});
                    vertex_neighbors_[a].push_back(b);
                    vertex_neighbors_[b].push_back(a);
                } else {
                    auto& et = edge_triangles_[it->second];
                    if (et[1] != -1) throw InvalidArgument("mesh: edge shared by more than two triangles");
                    et[1] = t;
                }
                triangle_edges_[t][i] = it->second;
            }
        }
        for (auto& n : vertex_neighbors_) std::sort(n.begin(), n.end());
        boundary_vertex_.assign(nv, 0);
        dirichlet_vertex_.assign(nv, 0);
        for (const auto& e : boundary_edges_) {
            boundary_vertex_[e.a] = boundary_vertex_[e.b] = 1;
            if (e.marker == Marker::Dirichlet) dirichlet_vertex_[e.a] = dirichlet_vertex_[e.b] = 1;
        }
    }

    std::vector<Point> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<BoundaryEdge> boundary_edges_;
    double domain_area_;
    std::optional<Arc> arc_;

    std::vector<std::array<int, 2>> edges_;
    std::vector<std::array<int, 3>> triangle_edges_;
    std::vector<std::array<int, 2>> edge_triangles_;
    std::unordered_map<std::uint64_t, int> edge_index_;
    std::vector<std::vector<int>> vertex_neighbors_;
    std::vector<std::vector<int>> vertex_triangles_;
    std::vector<char> boundary_vertex_;
    std::vector<char> dirichlet_vertex_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

inline MeshPtr share(Mesh mesh) { return std::make_shared<const Mesh>(std::move(mesh)); }

namespace detail {

// Boundary edges are the edges with a single incident triangle, oriented so
// the domain lies on the left.
inline std::vector<BoundaryEdge> topological_boundary(const std::vector<Point>& vertices,
                                                      const std::vector<Triangle>& triangles,
                                                      Marker marker) {
    std::map<std::pair<int, int>, int> count;
    for (const auto& t : triangles)
        for (int i = 0; i < 3; ++i) {
            int a = t[i], b = t[(i + 1) % 3];
            ++count[{std::min(a, b), std::max(a, b)}];
        }
    std::vector<BoundaryEdge> out;
    for (const auto& t : triangles)
        for (int i = 0; i < 3; ++i) {
            int a = t[i], b = t[(i + 1) % 3];
            if (count[{std::min(a, b), std::max(a, b)}] == 1) out.push_back({a, b, marker, false});
        }
    (void)vertices;
    return out;
}

inline void require(bool ok, const char* message) {
    if (!ok) throw InvalidArgument(message);
}

}  // namespace detail

/// Structured rectangle [0,a]x[0,b]. The shorter side gets n cells, the longer
/// side round(n * long/short) cells; each cell is split along its
/// lower-left to upper-right diagonal.
/// Split of the grid cells of build_rectangle: every cell along the same
/// diagonal, or alternating in a checkerboard so that, for even cell counts,
/// the mesh keeps all mirror symmetries of the rectangle.
enum class Diagonal { Fixed, Alternating };

inline Mesh build_rectangle(double a, double b, int n, Diagonal diagonal = Diagonal::Fixed) {
    detail::require(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b),
                    "build_rectangle: dimensions must be positive");
    detail::require(n >= 2, "build_rectangle: need at least 2 cells per side");
    int nx = n, ny = n;
    if (a >= b)
        nx = static_cast<int>(std::lround(n * a / b));
    else
        ny = static_cast<int>(std::lround(n * b / a));
    std::vector<Point> vertices;
    vertices.reserve(static_cast<size_t>(nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) vertices.push_back({a * i / nx, b * j / ny});
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    std::vector<Triangle> triangles;
    triangles.reserve(static_cast<size_t>(2) * nx * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (diagonal == Diagonal::Fixed || (i + j) % 2 == 0) {
                triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                triangles.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                triangles.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    std::vector<BoundaryEdge> boundary;
    for (int i = 0; i < nx; ++i) boundary.push_back({id(i, 0), id(i + 1, 0)});
    for (int j = 0; j < ny; ++j) boundary.push_back({id(nx, j), id(nx, j + 1)});
    for (int i = nx; i > 0; --i) boundary.push_back({id(i, ny), id(i - 1, ny)});
    for (int j = ny; j > 0; --j) boundary.push_back({id(0, j), id(0, j - 1)});
    return Mesh(std::move(vertices), std::move(triangles), std::move(boundary), a * b);
}

namespace detail {

// Triangulates the annular strip between two polylines of ring vertices that
// are ordered by increasing angle. Fractions give each vertex's relative
// position along its polyline in [0, 1].
inline void stitch_rings(const std::vector<int>& inner, const std::vector<double>& inner_pos,
                         const std::vector<int>& outer, const std::vector<double>& outer_pos,
                         std::vector<Triangle>& triangles) {
    size_t p = 0, q = 0;
    while (p + 1 < inner.size() || q + 1 < outer.size()) {
        const bool advance_outer =
            p + 1 >= inner.size() ||
            (q + 1 < outer.size() &&
             0.5 * (outer_pos[q] + outer_pos[q + 1]) <= 0.5 * (inner_pos[p] + inner_pos[p + 1]));
        if (advance_outer) {
            triangles.push_back({inner[p], outer[q], outer[q + 1]});
            ++q;
        } else {
            triangles.push_back({inner[p], outer[q], inner[p + 1]});
            ++p;
        }
    }
}

}  // namespace detail

/// Disk of the given radius centered at the origin: `rings` concentric rings,
/// ring i at radius i/rings carrying base*i equally spaced vertices. The
/// default base of 6 gives the classic hexagonal ring mesh; base 8 keeps the
/// first three angular doublets exactly degenerate in the discrete spectrum.
inline Mesh build_disk(double radius, int rings, int base = 6) {
    detail::require(radius > 0.0 && std::isfinite(radius), "build_disk: radius must be positive");
    detail::require(rings >= 1, "build_disk: refinement level must be >= 1");
    detail::require(base >= 3, "build_disk: base ring count must be >= 3");
    std::vector<Point> vertices{{0.0, 0.0}};
    std::vector<std::vector<int>> ring_ids(rings + 1);
    ring_ids[0] = {0};
    for (int i = 1; i <= rings; ++i) {
        const int count = base * i;
        const double r = radius * i / rings;
        for (int j = 0; j < count; ++j) {
            const double theta = 2.0 * std::numbers::pi * j / count;
            ring_ids[i].push_back(static_cast<int>(vertices.size()));
            vertices.push_back({r * std::cos(theta), r * std::sin(theta)});
        }
    }
    std::vector<Triangle> triangles;
    for (int s = 0; s < base; ++s) {
        for (int i = 1; i <= rings; ++i) {
            // One sector of the strip between ring i-1 and ring i.
            std::vector<int> inner, outer;
            std::vector<double> inner_pos, outer_pos;
            const int ni = i - 1, no = i;
            if (ni == 0) {
                inner = {0};
                inner_pos = {0.0};
            } else {
                for (int j = 0; j <= ni; ++j) {
                    inner.push_back(ring_ids[i - 1][(s * ni + j) % (base * ni)]);
                    inner_pos.push_back(static_cast<double>(j) / ni);
                }
            }
            for (int j = 0; j <= no; ++j) {
                outer.push_back(ring_ids[i][(s * no + j) % (base * no)]);
                outer_pos.push_back(static_cast<double>(j) / no);
            }
            detail::stitch_rings(inner, inner_pos, outer, outer_pos, triangles);
        }
    }
    std::vector<BoundaryEdge> boundary;
    const auto& outer = ring_ids[rings];
    for (size_t j = 0; j < outer.size(); ++j)
        boundary.push_back({outer[j], outer[(j + 1) % outer.size()], Marker::Dirichlet, true});
    return Mesh(std::move(vertices), std::move(triangles), std::move(boundary),
                std::numbers::pi * radius * radius, Arc{{0.0, 0.0}, radius});
}

struct SectorMarkers {
    Marker radii = Marker::Dirichlet;
    Marker arc = Marker::Dirichlet;
};

/// Circular sector {0 <= theta <= opening, r <= radius}. An opening of 2*pi
/// yields the disk slit along theta = 0: the two radii coincide geometrically
/// but use distinct vertices, so the slit is a genuine boundary.
inline Mesh build_sector(double opening, double radius, int rings, SectorMarkers markers = {},
                         int base = 6) {
    detail::require(opening > 0.0 && opening <= 2.0 * std::numbers::pi + 1e-14,
                    "build_sector: opening must lie in (0, 2*pi]");
    detail::require(radius > 0.0 && std::isfinite(radius), "build_sector: radius must be positive");
    detail::require(rings >= 1, "build_sector: refinement level must be >= 1");
    std::vector<Point> vertices{{0.0, 0.0}};
    std::vector<std::vector<int>> ring_ids(rings + 1);
    ring_ids[0] = {0};
    std::vector<int> segments(rings + 1, 0);
    for (int i = 1; i <= rings; ++i) {
        segments[i] = std::max(1, static_cast<int>(std::lround(base * i * opening / (2.0 * std::numbers::pi))));
        const double r = radius * i / rings;
        for (int j = 0; j <= segments[i]; ++j) {
            const double theta = j == segments[i] ? opening : opening * j / segments[i];
            ring_ids[i].push_back(static_cast<int>(vertices.size()));
            vertices.push_back({r * std::cos(theta), r * std::sin(theta)});
        }
    }
    std::vector<Triangle> triangles;
    for (int i = 1; i <= rings; ++i) {
        std::vector<double> inner_pos, outer_pos;
        if (i == 1)
            inner_pos = {0.0};
        else
            for (int j = 0; j <= segments[i - 1]; ++j) inner_pos.push_back(static_cast<double>(j) / segments[i - 1]);
        for (int j = 0; j <= segments[i]; ++j) outer_pos.push_back(static_cast<double>(j) / segments[i]);
        detail::stitch_rings(ring_ids[i - 1], inner_pos, ring_ids[i], outer_pos, triangles);
    }
    std::vector<BoundaryEdge> boundary;
    for (int i = 0; i < rings; ++i)
        boundary.push_back({ring_ids[i].front(), ring_ids[i + 1].front(), markers.radii, false});
    const auto& rim = ring_ids[rings];
    for (size_t j = 0; j + 1 < rim.size(); ++j) boundary.push_back({rim[j], rim[j + 1], markers.arc, true});
    for (int i = rings; i > 0; --i)
        boundary.push_back({ring_ids[i].back(), ring_ids[i - 1].back(), markers.radii, false});
    return Mesh(std::move(vertices), std::move(triangles), std::move(boundary),
                0.5 * opening * radius * radius, Arc{{0.0, 0.0}, radius});
}

/// Regular hexagon of the given area centered at the origin, one vertex on
/// the positive x axis, triangulated on a uniform triangular lattice with n
/// subdivisions per side (6 n^2 triangles).
inline Mesh build_hexagon(double area, int n) {
    detail::require(area > 0.0 && std::isfinite(area), "build_hexagon: area must be positive");
    detail::require(n >= 1, "build_hexagon: refinement level must be >= 1");
    const double circumradius = std::sqrt(2.0 * area / (3.0 * std::sqrt(3.0)));
    const Point u{circumradius / n, 0.0};
    const Point v{0.5 * circumradius / n, 0.5 * std::sqrt(3.0) * circumradius / n};
    auto inside = [n](int a, int b) { return std::abs(a) <= n && std::abs(b) <= n && std::abs(a + b) <= n; };
    std::map<std::pair<int, int>, int> index;
    std::vector<Point> vertices;
    for (int b = -n; b <= n; ++b)
        for (int a = -n; a <= n; ++a)
            if (inside(a, b)) {
                index[{a, b}] = static_cast<int>(vertices.size());
                vertices.push_back(a * u + b * v);
            }
    std::vector<Triangle> triangles;
    for (int b = -n; b < n; ++b)
        for (int a = -n; a < n; ++a) {
            if (inside(a, b) && inside(a + 1, b) && inside(a, b + 1))
                triangles.push_back({index[{a, b}], index[{a + 1, b}], index[{a, b + 1}]});
            if (inside(a + 1, b) && inside(a + 1, b + 1) && inside(a, b + 1))
                triangles.push_back({index[{a + 1, b}], index[{a + 1, b + 1}], index[{a, b + 1}]});
        }
    auto boundary = detail::topological_boundary(vertices, triangles, Marker::Dirichlet);
    return Mesh(std::move(vertices), std::move(triangles), std::move(boundary), area);
}

/// Uniform 1-to-4 refinement by edge midpoints. Midpoints of arc edges are
/// projected back onto the arc; markers are inherited.
inline Mesh refine(const Mesh& mesh) {
    std::vector<Point> vertices = mesh.vertices();
    const int nv = mesh.vertex_count();
    for (const auto& e : mesh.edges()) vertices.push_back(0.5 * (vertices[e[0]] + vertices[e[1]]));
    auto mid = [&](int a, int b) { return nv + mesh.find_edge(a, b); };
    std::vector<BoundaryEdge> boundary;
    for (const auto& be : mesh.boundary_edges()) {
        const int m = mid(be.a, be.b);
        if (be.on_arc && mesh.arc()) {
            const auto& arc = *mesh.arc();
            const Point d = vertices[m] - arc.center;
            vertices[m] = arc.center + (arc.radius / norm(d)) * d;
        }
        boundary.push_back({be.a, m, be.marker, be.on_arc});
        boundary.push_back({m, be.b, be.marker, be.on_arc});
    }
    std::vector<Triangle> triangles;
    triangles.reserve(mesh.triangles().size() * 4);
    for (const auto& t : mesh.triangles()) {
        const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
        triangles.push_back({t[0], ab, ca});
        triangles.push_back({ab, t[1], bc});
        triangles.push_back({ca, bc, t[2]});
        triangles.push_back({ab, bc, ca});
    }
    return Mesh(std::move(vertices), std::move(triangles), std::move(boundary), mesh.domain_area(), mesh.arc());
}

/// Returns a copy whose boundary markers are reassigned by `marker_of`, which
/// receives each boundary edge's endpoints.
inline Mesh with_markers(const Mesh& mesh, const std::function<Marker(Point, Point)>& marker_of) {
    auto boundary = mesh.boundary_edges();
    for (auto& e : boundary) e.marker = marker_of(mesh.vertices()[e.a], mesh.vertices()[e.b]);
    return Mesh(mesh.vertices(), mesh.triangles(), std::move(boundary), mesh.domain_area(), mesh.arc());
}

/// Line used as a mirror: all points origin + t * direction.
struct Axis {
    Point origin;
    Point direction{1.0, 0.0};

    double signed_distance(Point p) const {
        const double len = norm(direction);
        return cross(direction, p - origin) / len;
    }
    Point reflect(Point p) const {
        const double len2 = dot(direction, direction);
        const Point d = p - origin;
        const Point along = (dot(d, direction) / len2) * direction;
        return origin + along - (d - along);
    }
};

/// Result of mirroring a half-domain mesh across an axis.
struct ReflectedMesh {
    Mesh mesh;
    /// For each vertex of the full mesh, the half-mesh vertex it comes from.
    std::vector<int> source;
    /// For each vertex of the full mesh, whether it is a mirror image
    /// (false for original vertices and for vertices on the axis).
    std::vector<char> mirrored;
    /// Full-mesh index of the mirror image of each half-mesh vertex
    /// (the vertex itself when it lies on the axis).
    std::vector<int> image;
};

/// Glues a half-domain mesh to its mirror image across `axis`. Boundary
/// edges lying on the axis become interior edges.
inline ReflectedMesh reflect_mesh(const Mesh& half, const Axis& axis) {
    const int nv = half.vertex_count();
    double scale = 0.0;
    for (const auto& p : half.vertices()) scale = std::max(scale, norm(p - axis.origin));
    const double eps = 1e-12 * std::max(scale, 1.0);
    std::vector<Point> vertices = half.vertices();
    std::vector<int> source(nv), image(nv);
    std::vector<char> mirrored(nv, 0), on_axis(nv, 0);
    for (int v = 0; v < nv; ++v) source[v] = v;
    for (int v = 0; v < nv; ++v) {
        const double d = axis.signed_distance(half.vertices()[v]);
        if (std::abs(d) <= eps) {
            on_axis[v] = 1;
            image[v] = v;
        } else {
            image[v] = static_cast<int>(vertices.size());
            vertices.push_back(axis.reflect(half.vertices()[v]));
            source.push_back(v);
            mirrored.push_back(1);
        }
    }
    std::vector<Triangle> triangles = half.triangles();
    for (const auto& t : half.triangles()) triangles.push_back({image[t[0]], image[t[2]], image[t[1]]});
    std::vector<BoundaryEdge> boundary;
    for (const auto& e : half.boundary_edges()) {
        if (on_axis[e.a] && on_axis[e.b]) continue;
        boundary.push_back(e);
        boundary.push_back({image[e.b], image[e.a], e.marker, e.on_arc});
    }
    return {Mesh(std::move(vertices), std::move(triangles), std::move(boundary), 2.0 * half.domain_area(),
                 half.arc()),
            std::move(source), std::move(mirrored), std::move(image)};
}

/// Checks the structural invariants of a mesh; returns a list of violations
/// (empty when the mesh is valid).
inline std::vector<std::string> validate(const Mesh& mesh) {
    std::vector<std::string> problems;
    for (int t = 0; t < mesh.triangle_count(); ++t)
        if (!(mesh.triangle_area(t) > 0.0)) {
            problems.push_back("triangle " + std::to_string(t) + " has nonpositive signed area");
            break;
        }
    std::vector<int> marked(mesh.edge_count(), 0);
    for (const auto& be : mesh.boundary_edges()) {
        const int e = mesh.find_edge(be.a, be.b);
        if (e < 0) {
            problems.push_back("boundary edge is not a mesh edge");
            continue;
        }
        ++marked[e];
    }
    int boundary_edges = 0;
    for (int e = 0; e < mesh.edge_count(); ++e) {
        const bool single = mesh.edge_triangles(e)[1] == -1;
        boundary_edges += single;
        if (single && marked[e] != 1) problems.push_back("edge " + std::to_string(e) + " on boundary but not marked once");
        if (!single && marked[e] != 0) problems.push_back("interior edge " + std::to_string(e) + " marked as boundary");
    }
    (void)boundary_edges;
    const int euler = mesh.vertex_count() - mesh.edge_count() + mesh.triangle_count();
    if (euler != 1) problems.push_back("Euler characteristic " + std::to_string(euler) + " != 1");
    if (!mesh.arc()) {
        const double area = mesh.mesh_area();
        if (std::abs(area - mesh.domain_area()) > 1e-12 * mesh.domain_area())
            problems.push_back("polygonal mesh area differs from domain area");
    }
    return problems;
}

// Text format:
//   minpart-mesh v1
//   <vertex count>      then one "x y" line per vertex
//   <triangle count>    then one "i j k" line per triangle (0-based)
//   <boundary count>    then one "i j D|N" line per boundary edge
inline void write_mesh(std::ostream& os, const Mesh& mesh) {
    std::ostringstream buf;
    buf.precision(std::numeric_limits<double>::max_digits10);
    buf << "minpart-mesh v1\n" << mesh.vertex_count() << '\n';
    for (const auto& p : mesh.vertices()) buf << p.x << ' ' << p.y << '\n';
    buf << mesh.triangle_count() << '\n';
    for (const auto& t : mesh.triangles()) buf << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    buf << mesh.boundary_edges().size() << '\n';
    for (const auto& e : mesh.boundary_edges())
        buf << e.a << ' ' << e.b << ' ' << (e.marker == Marker::Dirichlet ? 'D' : 'N') << '\n';
    os << buf.str();
}

inline Mesh read_mesh(std::istream& is) {
    std::string header;
    std::getline(is, header);
    if (header.rfind("minpart-mesh v1", 0) != 0) throw InvalidArgument("read_mesh: missing 'minpart-mesh v1' header");
    auto read_count = [&is](const char* what) {
        long long n = -1;
        if (!(is >> n) || n < 0) throw InvalidArgument(std::string("read_mesh: bad ") + what + " count");
        return static_cast<size_t>(n);
    };
    std::vector<Point> vertices(read_count("vertex"));
    for (auto& p : vertices)
        if (!(is >> p.x >> p.y)) throw InvalidArgument("read_mesh: truncated vertex list");
    std::vector<Triangle> triangles(read_count("triangle"));
    for (auto& t : triangles)
        if (!(is >> t[0] >> t[1] >> t[2])) throw InvalidArgument("read_mesh: truncated triangle list");
    std::vector<BoundaryEdge> boundary(read_count("boundary edge"));
    for (auto& e : boundary) {
        char m = 0;
        if (!(is >> e.a >> e.b >> m) || (m != 'D' && m != 'N'))
            throw InvalidArgument("read_mesh: bad boundary edge line");
        e.marker = m == 'D' ? Marker::Dirichlet : Marker::Neumann;
    }
    double area = 0.0;
    for (const auto& t : triangles)
        area += 0.5 * cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
    return Mesh(std::move(vertices), std::move(triangles), std::move(boundary), area);
}

}  // namespace minpart
