#pragma once

#include "minpart/error.hpp"
#include "minpart/mesh.hpp"

#include <fstream>
#include <numbers>
#include <string>
#include <vector>

namespace minpart {

/// Named domain plus discretization parameters.
struct DomainSpec {
    /// square, rectangle, disk, sector, hexagon or file.
    std::string kind = "square";
    double a = 1.0;  ///< square side / rectangle width
    double b = 1.0;  ///< rectangle height
    double radius = 1.0;
    double opening = 2.0 * std::numbers::pi / 3.0;
    double area = 1.0;  ///< hexagon area
    /// Cells on the shorter side (rectangles), rings (disk, sector), lattice
    /// steps from center to corner (hexagon).
    int n = 32;
    /// Extra uniform refinements applied after building.
    int refine = 0;
    /// Vertices on the first ring of disk and sector meshes.
    int base = 6;
    /// Cell split of square and rectangle meshes: fixed or alternating.
    std::string diagonal = "fixed";
    std::string file;
};

inline void validate(const DomainSpec& d) {
    static const std::vector<std::string> kinds{"square", "rectangle", "disk", "sector", "hexagon", "file"};
    if (std::find(kinds.begin(), kinds.end(), d.kind) == kinds.end())
        throw InvalidArgument("domain: unknown kind '" + d.kind + "'");
    if (d.n < 1) throw InvalidArgument("domain: n must be >= 1");
    if (d.refine < 0) throw InvalidArgument("domain: refine must be >= 0");
    if (!(d.a > 0 && d.b > 0 && d.radius > 0 && d.area > 0)) throw InvalidArgument("domain: sizes must be positive");
    if (!(d.opening > 0 && d.opening <= 2 * std::numbers::pi)) throw InvalidArgument("domain: opening must be in (0, 2 pi]");
    if (d.diagonal != "fixed" && d.diagonal != "alternating")
        throw InvalidArgument("domain: diagonal must be 'fixed' or 'alternating'");
    if (d.base < 3) throw InvalidArgument("domain: base must be >= 3");
    if (d.kind == "file" && d.file.empty()) throw InvalidArgument("domain: kind 'file' needs a mesh file");
}

/// Mesh at resolution `n` (before the spec's extra refinements).
inline Mesh build_base(const DomainSpec& d, int n) {
    const Diagonal diag = d.diagonal == "alternating" ? Diagonal::Alternating : Diagonal::Fixed;
    if (d.kind == "square") return build_rectangle(d.a, d.a, n, diag);
    if (d.kind == "rectangle") return build_rectangle(d.a, d.b, n, diag);
    if (d.kind == "disk") return build_disk(d.radius, n, d.base);
    if (d.kind == "sector") return build_sector(d.opening, d.radius, n, {}, d.base);
    if (d.kind == "hexagon") return build_hexagon(d.area, n);
    std::ifstream in(d.file);
    if (!in) throw InvalidArgument("domain: cannot open mesh file '" + d.file + "'");
    return read_mesh(in);
}

inline MeshPtr build_domain(const DomainSpec& d) {
    validate(d);
    Mesh m = build_base(d, d.n);
    for (int i = 0; i < d.refine; ++i) m = refine(m);
    return share(std::move(m));
}

/// Nested meshes, coarsest first: the base mesh at n / 2^(levels-1) refined
/// once per level; the last one matches build_domain's resolution.
inline std::vector<MeshPtr> build_levels(const DomainSpec& d, int levels) {
    validate(d);
    if (levels < 1) throw InvalidArgument("domain: levels must be >= 1");
    const int shrink = 1 << (levels - 1);
    if (d.kind == "file" && levels > 1) throw InvalidArgument("domain: a mesh file cannot be coarsened");
    if (d.n % shrink != 0 || d.n / shrink < 1)
        throw InvalidArgument("domain: n must be divisible by 2^(levels-1)");
    std::vector<MeshPtr> out;
    Mesh m = build_base(d, d.n / shrink);
    for (int l = 0; l < levels; ++l) {
        if (l > 0) m = refine(m);
        out.push_back(share(m));
    }
    if (d.refine > 0) {
        for (int i = 0; i < d.refine; ++i) m = refine(m);
        out.push_back(share(std::move(m)));
    }
    return out;
}

}  // namespace minpart
