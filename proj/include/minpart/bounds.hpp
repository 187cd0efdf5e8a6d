#pragma once

#include "minpart/analytic.hpp"
#include "minpart/error.hpp"
#include "minpart/fem.hpp"
#include "minpart/mesh.hpp"
#include "minpart/nodal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace minpart {

/// k pi j_{0,1}^2 / area: no k-partition of a domain of this area has a
/// smaller maximal ground-state energy.
inline double faber_krahn_lower(int k, double area) {
    if (k < 1) throw InvalidArgument("faber_krahn_lower: k must be >= 1");
    if (!(area > 0.0)) throw InvalidArgument("faber_krahn_lower: area must be positive");
    const double j = bessel_zero(0.0, 1);
    return k * std::numbers::pi * j * j / area;
}

/// Ground-state energy of the regular hexagon of unit area: FEM on two
/// lattice resolutions n and 2n, combined by one Richardson step.
inline double hexagon_ground_energy(int n = 12) {
    if (n < 1) throw InvalidArgument("hexagon_ground_energy: resolution must be >= 1");
    const double coarse = solve_eigen(share(build_hexagon(1.0, n)), 0.0, 1).pairs.front().value;
    const double fine = solve_eigen(share(build_hexagon(1.0, 2 * n)), 0.0, 1).pairs.front().value;
    return (4.0 * fine - coarse) / 3.0;
}

/// Asymptotic energy per part of hexagonal tilings, lambda_1(Hx_1) / area.
inline double hexagon_rate(double area, int n = 12) {
    if (!(area > 0.0)) throw InvalidArgument("hexagon_rate: area must be positive");
    return hexagon_ground_energy(n) / area;
}

enum class Check { Holds, Violated, Unknown };

inline const char* to_string(Check c) {
    switch (c) {
        case Check::Holds: return "holds";
        case Check::Violated: return "violated";
        default: return "unknown";
    }
}

struct SandwichReport {
    /// lambda_k <= Lambda + tol.
    Check lower = Check::Unknown;
    /// Lambda <= L_k + tol.
    Check upper = Check::Unknown;
    /// Overall: Violated if either side is, Unknown if a side is missing.
    Check state = Check::Unknown;
    /// (Lambda - lambda_k) / lambda_k and (L_k - Lambda) / L_k when known.
    std::optional<double> lower_margin;
    std::optional<double> upper_margin;
};

/// Checks lambda_k <= Lambda <= L_k with relative tolerance `tol`.
inline SandwichReport sandwich_check(double lambda_k, std::optional<double> Lambda, std::optional<double> L_k,
                                     double tol = 0.02) {
    SandwichReport r;
    if (Lambda) {
        r.lower = lambda_k <= *Lambda * (1.0 + tol) ? Check::Holds : Check::Violated;
        r.lower_margin = (*Lambda - lambda_k) / lambda_k;
        if (L_k) {
            r.upper = *Lambda <= *L_k * (1.0 + tol) ? Check::Holds : Check::Violated;
            r.upper_margin = (*L_k - *Lambda) / *L_k;
        }
    } else if (L_k) {
        r.upper = lambda_k <= *L_k * (1.0 + tol) ? Check::Unknown : Check::Violated;
    }
    if (r.lower == Check::Violated || r.upper == Check::Violated) r.state = Check::Violated;
    else if (r.lower == Check::Holds && r.upper == Check::Holds) r.state = Check::Holds;
    return r;
}

/// One entry of an ordered spectrum: eigenvalue and the nodal count of the
/// eigenfunction chosen for it.
struct SpectralEntry {
    double eigenvalue = 0.0;
    int nodal_count = 0;
    /// Set when the count depends on the basis chosen in a degenerate
    /// eigenspace.
    bool ambiguous = false;
};

inline std::vector<SpectralEntry> entries_of(const std::vector<AnalyticMode>& modes) {
    std::vector<SpectralEntry> out;
    for (const auto& m : modes) out.push_back({m.eigenvalue, m.nodal_count, false});
    return out;
}

/// Entries of a FEM spectrum. Inside a cluster the nodal count is taken over
/// the basis vectors and over rotations cos(t) u_a + sin(t) u_b of each pair
/// (t in steps of pi / `angles`); the entry is ambiguous when these counts
/// differ and carries the largest one.
inline std::vector<SpectralEntry> fem_entries(const Spectrum& s, double zero_tol = 1e-8, int angles = 8) {
    std::vector<SpectralEntry> out;
    for (const auto& p : s.pairs) out.push_back({p.value, nodal_count(p.field, zero_tol), false});
    for (const auto& c : s.clusters) {
        if (c.size() < 2) continue;
        int lo = out[c.front()].nodal_count, hi = lo;
        for (size_t a = 0; a < c.size(); ++a)
            for (size_t b = a + 1; b < c.size(); ++b)
                for (int i = 0; i < angles; ++i) {
                    const double t = std::numbers::pi * i / angles;
                    const Vector v = std::cos(t) * s.pairs[c[a]].field.values + std::sin(t) * s.pairs[c[b]].field.values;
                    const int mu = nodal_count(ScalarField(s.pairs[c[a]].field.mesh, v), zero_tol);
                    lo = std::min(lo, mu);
                    hi = std::max(hi, mu);
                }
        for (int i : c) {
            out[i].nodal_count = hi;
            out[i].ambiguous = lo != hi;
        }
    }
    return out;
}

struct CourantScan {
    /// k (1-based) with lambda_{k-1} < lambda_k and an eigenfunction of
    /// lambda_k having k nodal domains.
    std::vector<int> sharp;
    std::vector<int> skipped;
    std::vector<std::string> warnings;
};

/// Courant-sharp indices of an ordered spectrum. Entries within
/// `cluster_tol` (relative) form one eigenvalue whose index is the first
/// position; clusters with an ambiguous entry are skipped with a warning.
inline CourantScan courant_sharp_scan(const std::vector<SpectralEntry>& spectrum, double cluster_tol = 1e-6) {
    CourantScan out;
    size_t i = 0;
    while (i < spectrum.size()) {
        size_t j = i + 1;
        while (j < spectrum.size() &&
               std::abs(spectrum[j].eigenvalue - spectrum[j - 1].eigenvalue) <= cluster_tol * std::abs(spectrum[j].eigenvalue))
            ++j;
        const int k = static_cast<int>(i) + 1;
        bool ambiguous = false, hit = false;
        for (size_t e = i; e < j; ++e) {
            ambiguous |= spectrum[e].ambiguous;
            hit |= spectrum[e].nodal_count == k;
        }
        if (ambiguous) {
            out.skipped.push_back(k);
            out.warnings.push_back("eigenvalue " + std::to_string(k) + ": degenerate cluster of size " +
                                   std::to_string(j - i) + " with basis-dependent nodal counts; skipped");
        } else if (hit) {
            out.sharp.push_back(k);
        }
        i = j;
    }
    return out;
}

struct PleijelRatios {
    std::vector<double> ratios;
    /// Largest n <= n_max with mu(u_n) = n.
    int last_equal = 0;
};

inline PleijelRatios pleijel_ratios(const std::vector<SpectralEntry>& spectrum, int n_max) {
    if (n_max < 1) throw InvalidArgument("pleijel_ratios: n_max must be >= 1");
    PleijelRatios out;
    const int n = std::min<int>(n_max, static_cast<int>(spectrum.size()));
    for (int i = 1; i <= n; ++i) {
        out.ratios.push_back(static_cast<double>(spectrum[i - 1].nodal_count) / i);
        if (spectrum[i - 1].nodal_count == i) out.last_equal = i;
    }
    return out;
}

struct BoundsReport {
    int k = 1;
    double area = 1.0;
    double faber_krahn_lower = 0.0;
    double hexagon_rate = 0.0;
    std::optional<double> lambda_k;
    std::optional<double> L_k;
    std::optional<double> computed_Lambda;
    Check sandwich_ok = Check::Unknown;
    bool courant_sharp = false;
};

/// Assembles a report; lambda_k and L_k are optional, Courant-sharpness is
/// declared when lambda_k = L_k within `tol`.
inline BoundsReport make_bounds_report(int k, double area, std::optional<double> lambda_k, std::optional<double> L_k,
                                       std::optional<double> Lambda, double tol = 0.02, int hexagon_n = 12) {
    BoundsReport r;
    r.k = k;
    r.area = area;
    r.faber_krahn_lower = faber_krahn_lower(k, area);
    r.hexagon_rate = hexagon_rate(area, hexagon_n);
    r.lambda_k = lambda_k;
    r.L_k = L_k;
    r.computed_Lambda = Lambda;
    if (lambda_k) r.sandwich_ok = sandwich_check(*lambda_k, Lambda, L_k, tol).state;
    if (lambda_k && L_k) r.courant_sharp = std::abs(*L_k - *lambda_k) <= tol * *L_k;
    return r;
}

}  // namespace minpart
