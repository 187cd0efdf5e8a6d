#pragma once

#include "minpart/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace minpart {

namespace detail {

inline void check_bessel_range(double order, double x, const char* who) {
    if (!(order >= 0.0 && order <= 20.0)) throw InvalidArgument(std::string(who) + ": order outside [0, 20]");
    if (!(x >= 0.0 && x <= 200.0)) throw InvalidArgument(std::string(who) + ": argument outside [0, 200]");
}

inline double bessel_series(double nu, double x) {
    const double q = -0.25 * x * x;
    double term = std::exp(nu * std::log(0.5 * x) - std::lgamma(nu + 1.0));
    double sum = term;
    for (int m = 1; m < 500; ++m) {
        term *= q / (m * (m + nu));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum) && m > 0.5 * x) break;
    }
    return sum;
}

// Hankel expansion, valid for x much larger than nu^2.
inline double bessel_asymptotic(double nu, double x) {
    const double mu = 4.0 * nu * nu;
    double p = 1.0, q = 0.0, term = 1.0, last = std::numeric_limits<double>::max();
    for (int k = 1; k < 60; ++k) {
        term *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * x);
        if (std::abs(term) > last) break;
        last = std::abs(term);
        if (k % 2 == 1) q += (k % 4 == 1 ? 1.0 : -1.0) * term;
        else p += (k % 4 == 2 ? -1.0 : 1.0) * term;
        if (last < 1e-17) break;
    }
    const double chi = x - (0.5 * nu + 0.25) * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

// Miller's backward recurrence normalized by
//   sum_k (nu + 2k) Gamma(nu + k) / k! J_{nu+2k}(x) = (x/2)^nu.
inline double bessel_miller(double nu, double x) {
    const int n = static_cast<int>(x + 60.0 + 2.0 * std::sqrt(x) * 6.0);
    double above = 0.0, cur = 1e-280, target = 0.0, norm = 0.0;
    for (int m = n; m >= 0; --m) {
        const double order = nu + m;
        if (m % 2 == 0) {
            const int k = m / 2;
            const double coef = order == 0.0 ? 1.0 : std::exp(std::log(order) + std::lgamma(nu + k) - std::lgamma(k + 1.0));
            norm += coef * cur;
        }
        if (m == 0) target = cur;
        else {
            const double below = 2.0 * order / x * cur - above;
            above = cur;
            cur = below;
        }
        if (std::abs(cur) > 1e250) {
            cur *= 1e-250;
            above *= 1e-250;
            norm *= 1e-250;
            target *= 1e-250;
        }
    }
    return target / norm * std::pow(0.5 * x, nu);
}

}  // namespace detail

/// Bessel function of the first kind J_order(x), order in [0, 20],
/// x in [0, 200].
inline double bessel_j(double order, double x) {
    detail::check_bessel_range(order, x, "bessel_j");
    if (x == 0.0) return order == 0.0 ? 1.0 : 0.0;
    if (x < 12.0) return detail::bessel_series(order, x);
    if (x > 25.0 + order * order) return detail::bessel_asymptotic(order, x);
    return detail::bessel_miller(order, x);
}

/// k-th positive zero of J_order.
inline double bessel_zero(double order, int k) {
    if (!(order >= 0.0 && order <= 20.0)) throw InvalidArgument("bessel_zero: order outside [0, 20]");
    if (k < 1) throw InvalidArgument("bessel_zero: index must be >= 1");
    // Zeros are spaced by more than 2.4 and the first exceeds the order, so
    // a 0.2 scan from there brackets each one separately.
    const double step = 0.2;
    double a = std::max(order, 1e-3), fa = bessel_j(order, a);
    int found = 0;
    while (true) {
        double b = a + step;
        if (b > 200.0) throw InvalidArgument("bessel_zero: zero beyond supported range");
        double fb = bessel_j(order, b);
        if (fb == 0.0) {
            if (++found == k) return b;
            b += 1e-9;
            fb = bessel_j(order, b);
        } else if ((fa < 0.0) != (fb < 0.0)) {
            if (++found == k) {
                // Newton inside [a, b] with bisection as fallback;
                // J' = (nu/x) J - J_{nu+1} where nu + 1 is in range.
                const bool newton = order + 1.0 <= 20.0;
                double x = 0.5 * (a + b);
                for (int it = 0; it < 200; ++it) {
                    const double f = bessel_j(order, x);
                    if (f == 0.0) return x;
                    if ((f < 0.0) == (fa < 0.0)) a = x, fa = f;
                    else b = x;
                    double next = 0.5 * (a + b);
                    if (newton) {
                        const double nx = x - f / (order / x * f - bessel_j(order + 1.0, x));
                        if (nx > a && nx < b) next = nx;
                    }
                    if (std::abs(next - x) < 1e-15 * x || b - a < 1e-14 * x) return next;
                    x = next;
                }
                return x;
            }
        }
        a = b;
        fa = fb;
    }
}

/// Closed-form eigenmode of the disk or a rectangle.
struct AnalyticMode {
    /// (l, k) for the disk, (m, n) for a rectangle.
    std::array<int, 2> index{};
    double eigenvalue = 0.0;
    int multiplicity = 1;
    int nodal_count = 1;
    /// Rectangle entries whose eigenvalue coincides with another one.
    bool degenerate = false;
};

/// First `count` Dirichlet eigenvalues of the unit disk, doublets listed
/// twice, each with its nodal count (k for l = 0, 2lk otherwise).
inline std::vector<AnalyticMode> disk_spectrum(int count) {
    if (count < 0 || count > 50) throw InvalidArgument("disk_spectrum: count must be in [0, 50]");
    // j_{l,k} < 16 covers the first 50 eigenvalues with room to spare.
    const double bound = 16.0;
    std::vector<AnalyticMode> modes;
    for (int l = 0; l <= 20 && l < bound; ++l)
        for (int k = 1;; ++k) {
            const double j = bessel_zero(l, k);
            if (j > bound) break;
            const AnalyticMode mode{{l, k}, j * j, l == 0 ? 1 : 2, l == 0 ? k : 2 * l * k, false};
            for (int c = 0; c < mode.multiplicity; ++c) modes.push_back(mode);
        }
    std::sort(modes.begin(), modes.end(), [](const AnalyticMode& a, const AnalyticMode& b) {
        return a.eigenvalue != b.eigenvalue ? a.eigenvalue < b.eigenvalue : a.index < b.index;
    });
    modes.resize(static_cast<size_t>(count));
    return modes;
}

/// Whether the (l, k) disk eigenvalue is Courant-sharp: its first position
/// in the ordered spectrum equals the nodal count of its eigenfunctions.
inline bool disk_courant_sharp(int l, int k) {
    if (l < 0 || k < 1) throw InvalidArgument("disk_courant_sharp: need l >= 0, k >= 1");
    const auto spec = disk_spectrum(50);
    for (size_t i = 0; i < spec.size(); ++i)
        if (spec[i].index == std::array<int, 2>{l, k}) return spec[i].nodal_count == static_cast<int>(i) + 1;
    throw InvalidArgument("disk_courant_sharp: mode beyond the first 50 eigenvalues");
}

/// Dirichlet eigenvalues pi^2 (m^2/a^2 + n^2/b^2) of [0,a]x[0,b], sorted,
/// with nodal count mn.
inline std::vector<AnalyticMode> rectangle_spectrum(double a, double b, int count) {
    if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("rectangle_spectrum: side lengths must be positive");
    if (count < 0) throw InvalidArgument("rectangle_spectrum: negative count");
    std::vector<AnalyticMode> modes;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    for (int m = 1; m <= count; ++m)
        for (int n = 1; n <= count; ++n)
            modes.push_back({{m, n}, pi2 * (m * m / (a * a) + n * n / (b * b)), 1, m * n, false});
    std::sort(modes.begin(), modes.end(), [](const AnalyticMode& x, const AnalyticMode& y) {
        return x.eigenvalue != y.eigenvalue ? x.eigenvalue < y.eigenvalue : x.index < y.index;
    });
    modes.resize(static_cast<size_t>(count));
    for (size_t i = 0; i + 1 < modes.size(); ++i)
        if (std::abs(modes[i + 1].eigenvalue - modes[i].eigenvalue) <= 1e-12 * modes[i + 1].eigenvalue)
            modes[i].degenerate = modes[i + 1].degenerate = true;
    return modes;
}

/// Smallest eigenvalue of [0,a]x[0,b] with an eigenfunction of exactly k
/// nodal domains among the product modes: pi^2 min_{mn=k} (m^2/a^2 + n^2/b^2).
inline double rectangle_Lk(double a, double b, int k) {
    if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("rectangle_Lk: side lengths must be positive");
    if (k < 1) throw InvalidArgument("rectangle_Lk: k must be >= 1");
    double best = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= k; ++m)
        if (k % m == 0) {
            const int n = k / m;
            best = std::min(best, m * m / (a * a) + static_cast<double>(n) * n / (b * b));
        }
    return std::numbers::pi * std::numbers::pi * best;
}

/// Interval conditions under which the (m, n) product mode of a rectangle
/// is Courant-sharp, as functions of `ratio` (generic, non-resonant sides).
/// The mode has m half-waves along the side of length 1 and n along the side
/// of length sqrt(ratio), i.e. the eigenvalue pi^2 (m^2 + n^2 / ratio). The
/// intervals are sufficient, not sharp: (2, 3) stays Courant-sharp up to
/// ratio 7/3.
inline bool rectangle_courant_sharp(int m, int n, double ratio) {
    if (m < 1 || n < 1) throw InvalidArgument("rectangle_courant_sharp: need m, n >= 1");
    if (!(ratio > 0.0)) throw InvalidArgument("rectangle_courant_sharp: ratio must be positive");
    auto within = [](double r, double lo, double hi) { return lo <= r && r <= hi; };
    if (m == 1 && n == 1) return true;
    if (std::min(m, n) >= 3) return false;
    if ((m == 2 && n >= 4) || (m >= 4 && n == 2)) return false;
    if (m == 2 && n == 3) return within(ratio, 8.0 / 5.0, 5.0 / 3.0);
    if (m == 3 && n == 2) return within(1.0 / ratio, 8.0 / 5.0, 5.0 / 3.0);
    if (m == 2 && n == 2) return within(ratio, 3.0 / 5.0, 5.0 / 3.0);
    if (m == 1) return ratio > (static_cast<double>(n) * n - 1.0) / 3.0;
    return 1.0 / ratio > (static_cast<double>(m) * m - 1.0) / 3.0;
}

/// Dirichlet eigenvalue of the unit-radius sector of the given opening with
/// angular index n and radial index k: j_{n pi / opening, k}^2.
inline double sector_eigenvalue(double opening, int n, int k) {
    if (!(opening > 0.0 && opening <= 2.0 * std::numbers::pi))
        throw InvalidArgument("sector_eigenvalue: opening must be in (0, 2 pi]");
    if (n < 1 || k < 1) throw InvalidArgument("sector_eigenvalue: need n, k >= 1");
    const double j = bessel_zero(n * std::numbers::pi / opening, k);
    return j * j;
}

}  // namespace minpart
