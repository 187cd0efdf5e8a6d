#pragma once

#include "minpart/error.hpp"
#include "minpart/fem.hpp"
#include "minpart/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <set>
#include <utility>
#include <vector>

namespace minpart {

inline constexpr int kUnassigned = -1;

/// Per-triangle part labels in {0..k-1} or kUnassigned.
struct Labeling {
    MeshPtr mesh;
    std::vector<int> labels;
    int k = 0;
    /// Sign of the field on each part (nodal labelings only; empty otherwise).
    std::vector<int> part_sign;

    double part_area(int part) const {
        double a = 0.0;
        for (int t = 0; t < mesh->triangle_count(); ++t)
            if (labels[t] == part) a += mesh->triangle_area(t);
        return a;
    }
    double unassigned_area() const { return part_area(kUnassigned); }
};

namespace detail {

inline double sup_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Sign class of each vertex: +1, -1, or 0 for |u| <= thr. Dirichlet
// boundary vertices get 0 since the boundary condition, not the field,
// makes them vanish.
inline std::vector<int> vertex_signs(const Mesh& mesh, const Vector& u, double thr) {
    std::vector<int> s(mesh.vertex_count(), 0);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (mesh.is_dirichlet_vertex(v)) continue;
        s[v] = u[v] > thr ? 1 : (u[v] < -thr ? -1 : 0);
    }
    return s;
}

// Edge-connected components of triangles sharing the same group id (>= 0).
// Returns a label per triangle, numbered in order of first triangle index.
inline std::vector<int> triangle_components(const Mesh& mesh, const std::vector<int>& group, int& count) {
    std::vector<int> comp(mesh.triangle_count(), kUnassigned);
    count = 0;
    std::vector<int> stack;
    for (int t0 = 0; t0 < mesh.triangle_count(); ++t0) {
        if (group[t0] < 0 || comp[t0] != kUnassigned) continue;
        comp[t0] = count;
        stack.push_back(t0);
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            for (int e : mesh.triangle_edges(t)) {
                const auto& et = mesh.edge_triangles(e);
                const int nb = et[0] == t ? et[1] : et[0];
                if (nb >= 0 && comp[nb] == kUnassigned && group[nb] == group[t]) {
                    comp[nb] = count;
                    stack.push_back(nb);
                }
            }
        }
        ++count;
    }
    return comp;
}

}  // namespace detail

/// Nodal domains of a field: triangles whose vertices share a strict sign
/// (|u| > zero_tol * max|u|) grouped into edge-connected components. Values
/// at Dirichlet boundary vertices do not take part in the sign test.
inline Labeling extract_nodal_domains(const ScalarField& field, double zero_tol = 1e-8) {
    const Mesh& mesh = *field.mesh;
    const double sup = detail::sup_norm(field.values);
    if (!(sup > 0.0)) throw InvalidArgument("extract_nodal_domains: field is identically zero");
    const auto sign = detail::vertex_signs(mesh, field.values, zero_tol * sup);
    std::vector<int> group(mesh.triangle_count(), -1);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        int s = 0;
        bool mixed = false, any = false;
        for (int v : mesh.triangles()[t]) {
            if (mesh.is_dirichlet_vertex(v)) continue;
            if (!any) {
                s = sign[v];
                any = true;
            } else if (sign[v] != s) {
                mixed = true;
            }
        }
        if (any && !mixed && s != 0) group[t] = s > 0 ? 1 : 0;
    }
    Labeling out;
    out.mesh = field.mesh;
    out.labels = detail::triangle_components(mesh, group, out.k);
    out.part_sign.assign(out.k, 0);
    for (int t = 0; t < mesh.triangle_count(); ++t)
        if (out.labels[t] >= 0) out.part_sign[out.labels[t]] = group[t] == 1 ? 1 : -1;
    return out;
}

/// Number of nodal domains of a field.
inline int nodal_count(const ScalarField& field, double zero_tol = 1e-8) {
    return extract_nodal_domains(field, zero_tol).k;
}

using Polyline = std::vector<Point>;

namespace detail {

// A point of a zero-level-set graph, identified by how it was produced so
// neighbouring triangles generate the same node.
struct LevelNode {
    enum Kind : int { Vertex = 0, Edge = 1, Cell = 2 };
    int kind = Vertex;
    int id = 0;
    friend auto operator<=>(const LevelNode&, const LevelNode&) = default;
};

using Segment = std::pair<LevelNode, LevelNode>;

// Chains segments into polylines. Walks start at nodes of odd degree
// (endpoints, triple junctions); nodes of even degree >= 4 are crossed
// going as straight as possible; remaining closed loops come last.
inline std::vector<Polyline> chain_segments(const std::set<Segment>& segments,
                                            const std::map<LevelNode, Point>& where) {
    std::map<LevelNode, std::vector<int>> incident;
    std::vector<Segment> segs(segments.begin(), segments.end());
    for (size_t i = 0; i < segs.size(); ++i) {
        incident[segs[i].first].push_back(static_cast<int>(i));
        incident[segs[i].second].push_back(static_cast<int>(i));
    }
    std::vector<char> used(segs.size(), 0);
    std::vector<Polyline> out;
    auto other = [&](int s, const LevelNode& n) { return segs[s].first == n ? segs[s].second : segs[s].first; };
    auto walk = [&](LevelNode start, int first_seg) {
        Polyline line{where.at(start)};
        LevelNode cur = start;
        int seg = first_seg;
        while (seg >= 0) {
            used[seg] = 1;
            const LevelNode next = other(seg, cur);
            const Point dir_in = where.at(next) - where.at(cur);
            line.push_back(where.at(next));
            cur = next;
            const auto& inc = incident[cur];
            seg = -1;
            if (inc.size() % 2 == 1) break;
            double best = -2.0;
            for (int cand : inc) {
                if (used[cand]) continue;
                const Point d = where.at(other(cand, cur)) - where.at(cur);
                const double c = dot(d, dir_in) / std::max(norm(d) * norm(dir_in), 1e-300);
                if (c > best) {
                    best = c;
                    seg = cand;
                }
            }
        }
        out.push_back(std::move(line));
    };
    for (const auto& [node, inc] : incident)
        if (inc.size() % 2 == 1)
            for (int s : inc)
                if (!used[s]) walk(node, s);
    for (const auto& [node, inc] : incident)
        for (int s : inc)
            if (!used[s]) walk(node, s);
    return out;
}

}  // namespace detail

/// Zero set of the piecewise-linear interpolant, chained into polylines.
/// Dirichlet vertices vanish by construction and carry no sign; they take
/// the mean of their interior neighbours instead (a one-sided proxy for the
/// normal derivative), so nodal lines end on boundary edges where that proxy
/// changes sign, to within O(h).
inline std::vector<Polyline> nodal_set(const ScalarField& field, double zero_tol = 1e-8) {
    const Mesh& mesh = *field.mesh;
    const double sup = detail::sup_norm(field.values);
    if (!(sup > 0.0)) throw InvalidArgument("nodal_set: field is identically zero");
    Vector values = field.values;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (!mesh.is_dirichlet_vertex(v)) continue;
        double sum = 0.0;
        int count = 0;
        for (int w : mesh.neighbors(v))
            if (!mesh.is_dirichlet_vertex(w)) {
                sum += field.values[w];
                ++count;
            }
        values[v] = count ? sum / count : 0.0;
    }
    const double thr = zero_tol * sup;
    std::vector<int> sign(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) sign[v] = values[v] > thr ? 1 : (values[v] < -thr ? -1 : 0);
    using detail::LevelNode;
    std::set<detail::Segment> segments;
    std::map<LevelNode, Point> where;
    const auto& P = mesh.vertices();
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        std::vector<LevelNode> pts;
        for (int i = 0; i < 3; ++i)
            if (sign[tri[i]] == 0) {
                pts.push_back({LevelNode::Vertex, tri[i]});
                where[pts.back()] = P[tri[i]];
            }
        for (int i = 0; i < 3; ++i) {
            const int a = tri[(i + 1) % 3], b = tri[(i + 2) % 3];
            if (sign[a] * sign[b] < 0) {
                const double ua = values[a], ub = values[b];
                const double s = ua / (ua - ub);
                LevelNode n{LevelNode::Edge, mesh.triangle_edges(t)[i]};
                where[n] = P[a] + s * (P[b] - P[a]);
                pts.push_back(n);
            }
        }
        if (pts.size() != 2) continue;
        segments.insert(std::minmax(pts[0], pts[1]));
    }
    return detail::chain_segments(segments, where);
}

/// Interfaces of a k-field configuration: per vertex the field of largest
/// value wins, and interfaces run where the two (or three) leading fields
/// are equal under linear interpolation. With fields (u+, u-) this is the
/// nodal set of u.
inline std::vector<Polyline> interface_set(const Mesh& mesh, const std::vector<Vector>& fields) {
    const int k = static_cast<int>(fields.size());
    if (k < 2) return {};
    const int nv = mesh.vertex_count();
    std::vector<int> winner(nv, -1);
    for (int v = 0; v < nv; ++v) {
        double best = 0.0;
        for (int i = 0; i < k; ++i)
            if (fields[i][v] > best) {
                best = fields[i][v];
                winner[v] = i;
            }
    }
    // Vertices where every field vanishes (Dirichlet boundary) take the
    // label that dominates their neighbourhood.
    for (int v = 0; v < nv; ++v) {
        if (winner[v] >= 0) continue;
        std::vector<double> acc(k, 0.0);
        for (int w : mesh.neighbors(v))
            for (int i = 0; i < k; ++i) acc[i] += std::max(fields[i][w], 0.0);
        const auto it = std::max_element(acc.begin(), acc.end());
        if (*it > 0.0) winner[v] = static_cast<int>(it - acc.begin());
    }
    using detail::LevelNode;
    std::set<detail::Segment> segments;
    std::map<LevelNode, Point> where;
    const auto& P = mesh.vertices();
    auto crossing = [&](int t, int local) -> LevelNode {
        const auto& tri = mesh.triangles()[t];
        const int a = tri[(local + 1) % 3], b = tri[(local + 2) % 3];
        const int i = winner[a], j = winner[b];
        const double da = fields[i][a] - fields[j][a];
        const double db = fields[i][b] - fields[j][b];
        const double s = (da - db) != 0.0 ? std::clamp(da / (da - db), 0.0, 1.0) : 0.5;
        LevelNode n{LevelNode::Edge, mesh.triangle_edges(t)[local]};
        where[n] = P[a] + s * (P[b] - P[a]);
        return n;
    };
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const int w0 = winner[tri[0]], w1 = winner[tri[1]], w2 = winner[tri[2]];
        if (w0 < 0 || w1 < 0 || w2 < 0) continue;
        if (w0 == w1 && w1 == w2) continue;
        std::vector<LevelNode> cuts;
        for (int local = 0; local < 3; ++local)
            if (winner[tri[(local + 1) % 3]] != winner[tri[(local + 2) % 3]]) cuts.push_back(crossing(t, local));
        if (cuts.size() == 2) {
            segments.insert(std::minmax(cuts[0], cuts[1]));
            continue;
        }
        // Three labels: the junction is where the three leading fields agree.
        const Vector& f0 = fields[w0];
        const Vector& f1 = fields[w1];
        const Vector& f2 = fields[w2];
        // Barycentric b1, b2 (b0 = 1 - b1 - b2) solving f0 = f1 = f2.
        auto diff = [&](const Vector& f, const Vector& g, int v) { return f[v] - g[v]; };
        Eigen::Matrix2d a;
        Eigen::Vector2d rhs;
        for (int r = 0; r < 2; ++r) {
            const Vector& g = r == 0 ? f1 : f2;
            const double d0 = diff(f0, g, tri[0]), d1 = diff(f0, g, tri[1]), d2 = diff(f0, g, tri[2]);
            a(r, 0) = d1 - d0;
            a(r, 1) = d2 - d0;
            rhs[r] = -d0;
        }
        Eigen::Vector2d bary(1.0 / 3.0, 1.0 / 3.0);
        if (std::abs(a.determinant()) > 1e-300) {
            Eigen::Vector2d sol = a.partialPivLu().solve(rhs);
            if (sol[0] >= 0.0 && sol[1] >= 0.0 && sol[0] + sol[1] <= 1.0) bary = sol;
        }
        LevelNode center{LevelNode::Cell, t};
        where[center] = (1.0 - bary[0] - bary[1]) * P[tri[0]] + bary[0] * P[tri[1]] + bary[1] * P[tri[2]];
        for (const auto& c : cuts) segments.insert(std::minmax(center, c));
    }
    return detail::chain_segments(segments, where);
}

/// Per-vertex multiplicity m(x): number of distinct part labels among the
/// triangles incident to x.
struct MultiplicityMap {
    std::vector<int> m;

    /// Vertices with m(x) >= h.
    std::vector<int> at_least(int h) const {
        std::vector<int> out;
        for (size_t v = 0; v < m.size(); ++v)
            if (m[v] >= h) out.push_back(static_cast<int>(v));
        return out;
    }
};

inline MultiplicityMap multiplicity(const Labeling& labeling) {
    const Mesh& mesh = *labeling.mesh;
    MultiplicityMap out;
    out.m.assign(mesh.vertex_count(), 0);
    std::vector<int> seen;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        seen.clear();
        for (int t : mesh.vertex_triangles(v))
            if (labeling.labels[t] != kUnassigned) seen.push_back(labeling.labels[t]);
        std::sort(seen.begin(), seen.end());
        out.m[v] = static_cast<int>(std::unique(seen.begin(), seen.end()) - seen.begin());
    }
    return out;
}

struct PartitionGraph {
    int nodes = 0;
    /// Undirected edges (i < j), sorted, no duplicates.
    std::vector<std::pair<int, int>> edges;
    std::optional<std::vector<int>> coloring;

    std::vector<std::vector<int>> adjacency() const {
        std::vector<std::vector<int>> adj(nodes);
        for (auto [a, b] : edges) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        return adj;
    }
};

/// Parts i and j are neighbours when they share a mesh edge or when some
/// unassigned triangle shares an edge with both (the discrete nodal set is
/// one triangle wide). A nodal line running along mesh edges leaves a wider
/// strip whose vertices touch no part; such a strip joins i and j when at
/// least two of its vertices are adjacent to both, so that contact at a
/// single point (a crossing) does not count.
inline PartitionGraph partition_graph(const Labeling& labeling) {
    const Mesh& mesh = *labeling.mesh;
    std::set<std::pair<int, int>> edges;
    auto add = [&edges](int a, int b) {
        if (a != b && a >= 0 && b >= 0) edges.insert(std::minmax(a, b));
    };
    for (int e = 0; e < mesh.edge_count(); ++e) {
        const auto& et = mesh.edge_triangles(e);
        if (et[1] >= 0) add(labeling.labels[et[0]], labeling.labels[et[1]]);
    }
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        if (labeling.labels[t] != kUnassigned) continue;
        std::vector<int> touching;
        for (int e : mesh.triangle_edges(t)) {
            const auto& et = mesh.edge_triangles(e);
            const int nb = et[0] == t ? et[1] : et[0];
            if (nb >= 0 && labeling.labels[nb] != kUnassigned) touching.push_back(labeling.labels[nb]);
        }
        for (size_t i = 0; i < touching.size(); ++i)
            for (size_t j = i + 1; j < touching.size(); ++j) add(touching[i], touching[j]);
    }
    std::vector<std::vector<int>> parts_at(mesh.vertex_count());
    for (int t = 0; t < mesh.triangle_count(); ++t)
        if (labeling.labels[t] != kUnassigned)
            for (int v : mesh.triangles()[t]) parts_at[v].push_back(labeling.labels[t]);
    std::map<std::pair<int, int>, int> strip_contacts;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (!parts_at[v].empty()) continue;
        std::vector<int> near;
        for (int w : mesh.neighbors(v)) near.insert(near.end(), parts_at[w].begin(), parts_at[w].end());
        std::sort(near.begin(), near.end());
        near.erase(std::unique(near.begin(), near.end()), near.end());
        for (size_t i = 0; i < near.size(); ++i)
            for (size_t j = i + 1; j < near.size(); ++j) ++strip_contacts[{near[i], near[j]}];
    }
    for (const auto& [pair, count] : strip_contacts)
        if (count >= 2) add(pair.first, pair.second);
    PartitionGraph g;
    g.nodes = labeling.k;
    g.edges.assign(edges.begin(), edges.end());
    return g;
}

struct BipartiteResult {
    bool bipartite = true;
    /// Two-coloring witness (0/1 per node) when bipartite.
    std::vector<int> coloring;
    /// Node sequence of an odd cycle when not bipartite.
    std::vector<int> odd_cycle;
};

/// Breadth-first two-coloring.
inline BipartiteResult is_bipartite(const PartitionGraph& graph) {
    const auto adj = graph.adjacency();
    std::vector<int> color(graph.nodes, -1), parent(graph.nodes, -1), depth(graph.nodes, 0);
    for (int root = 0; root < graph.nodes; ++root) {
        if (color[root] >= 0) continue;
        color[root] = 0;
        std::queue<int> q;
        q.push(root);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (int w : adj[u]) {
                if (color[w] < 0) {
                    color[w] = 1 - color[u];
                    parent[w] = u;
                    depth[w] = depth[u] + 1;
                    q.push(w);
                } else if (color[w] == color[u]) {
                    // Odd cycle: u -> ... -> lca <- ... <- w, closed by edge (u, w).
                    std::vector<int> left{u}, right{w};
                    int a = u, b = w;
                    while (a != b) {
                        if (depth[a] >= depth[b]) {
                            a = parent[a];
                            left.push_back(a);
                        } else {
                            b = parent[b];
                            right.push_back(b);
                        }
                    }
                    right.pop_back();
                    left.insert(left.end(), right.rbegin(), right.rend());
                    return {false, {}, left};
                }
            }
        }
    }
    return {true, color, {}};
}

struct JunctionAngles {
    Point point;
    int multiplicity = 0;
    /// Outgoing tangent directions in radians, sorted in [0, 2*pi).
    std::vector<double> directions;
    /// Consecutive angular gaps between the sorted directions (sum 2*pi).
    std::vector<double> gaps;
};

namespace detail {

// Least-squares direction of the points q[1..] relative to q[0], oriented
// away from q[0].
inline double tangent_direction(const std::vector<Point>& q) {
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    Point mean{};
    for (size_t i = 1; i < q.size(); ++i) {
        const Point d = q[i] - q[0];
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
        mean = mean + d;
    }
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    Point dir{std::cos(theta), std::sin(theta)};
    if (dot(dir, mean) < 0.0) dir = -1.0 * dir;
    double ang = std::atan2(dir.y, dir.x);
    if (ang < 0.0) ang += 2.0 * std::numbers::pi;
    return ang;
}

}  // namespace detail

/// Equal-angle diagnostic at points of multiplicity >= 3. Adjacent vertices
/// with m >= 3 are merged into one junction; every polyline passing within
/// two local mesh sizes of it contributes its outgoing arcs, whose tangents
/// are fitted over the `segments_per_arc` nearest segments.
inline std::vector<JunctionAngles> triple_point_angles(const Labeling& labeling,
                                                       const std::vector<Polyline>& polylines,
                                                       int segments_per_arc = 3) {
    const Mesh& mesh = *labeling.mesh;
    const auto mult = multiplicity(labeling);
    std::vector<int> cluster(mesh.vertex_count(), -1);
    std::vector<std::vector<int>> clusters;
    for (int v : mult.at_least(3)) {
        if (cluster[v] >= 0) continue;
        clusters.emplace_back();
        std::vector<int> stack{v};
        cluster[v] = static_cast<int>(clusters.size()) - 1;
        while (!stack.empty()) {
            const int x = stack.back();
            stack.pop_back();
            clusters.back().push_back(x);
            for (int w : mesh.neighbors(x))
                if (cluster[w] < 0 && mult.m[w] >= 3) {
                    cluster[w] = cluster[v];
                    stack.push_back(w);
                }
        }
    }
    std::vector<JunctionAngles> out;
    for (const auto& members : clusters) {
        JunctionAngles j;
        Point c{};
        double local_h = 0.0;
        for (int v : members) {
            c = c + mesh.vertices()[v];
            j.multiplicity = std::max(j.multiplicity, mult.m[v]);
            for (int w : mesh.neighbors(v)) local_h = std::max(local_h, norm(mesh.vertices()[w] - mesh.vertices()[v]));
        }
        c = (1.0 / static_cast<double>(members.size())) * c;
        double spread = 0.0;
        for (int v : members) spread = std::max(spread, norm(mesh.vertices()[v] - c));
        const double reach = spread + 2.0 * local_h;
        // A polyline ending near the junction contributes one arc from that
        // end; one passing through contributes two from its closest point.
        std::vector<Point> starts;
        const size_t n = static_cast<size_t>(segments_per_arc);
        auto forward = [&](const Polyline& line, size_t from) {
            std::vector<Point> q(line.begin() + static_cast<long>(from),
                                 line.begin() + static_cast<long>(std::min(line.size(), from + n + 1)));
            j.directions.push_back(detail::tangent_direction(q));
            starts.push_back(line[from]);
        };
        auto backward = [&](const Polyline& line, size_t from) {
            std::vector<Point> q;
            for (size_t i = from + 1; i-- > (from >= n ? from - n : 0);) q.push_back(line[i]);
            j.directions.push_back(detail::tangent_direction(q));
            starts.push_back(line[from]);
        };
        for (const auto& line : polylines) {
            if (line.size() < 2) continue;
            const bool head = norm(line.front() - c) <= reach;
            const bool tail = norm(line.back() - c) <= reach;
            if (head) forward(line, 0);
            if (tail) backward(line, line.size() - 1);
            if (head || tail) continue;
            size_t best = 0;
            for (size_t i = 1; i < line.size(); ++i)
                if (norm(line[i] - c) < norm(line[best] - c)) best = i;
            if (norm(line[best] - c) > reach) continue;
            forward(line, best);
            backward(line, best);
        }
        if (!starts.empty()) {
            Point s{};
            for (const auto& p : starts) s = s + p;
            j.point = (1.0 / static_cast<double>(starts.size())) * s;
        } else {
            j.point = c;
        }
        std::sort(j.directions.begin(), j.directions.end());
        for (size_t i = 0; i < j.directions.size(); ++i) {
            const double next = i + 1 < j.directions.size() ? j.directions[i + 1]
                                                             : j.directions.front() + 2.0 * std::numbers::pi;
            j.gaps.push_back(next - j.directions[i]);
        }
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace minpart
