#include "minpart/analytic.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

using namespace minpart;
using Catch::Approx;

namespace {

const double pi = std::numbers::pi;
const double pi2 = pi * pi;

// Sorted pi^2 (m^2 / a^2 + n^2 / b^2) by brute force over a generous box.
std::vector<double> enumerate_rectangle(double a, double b, int count) {
    std::vector<double> v;
    for (int m = 1; m <= 40; ++m)
        for (int n = 1; n <= 40; ++n) v.push_back(pi2 * (m * m / (a * a) + n * n / (b * b)));
    std::sort(v.begin(), v.end());
    v.resize(count);
    return v;
}

}  // namespace

TEST_CASE("bessel_j special values") {
    CHECK(bessel_j(0, 0) == 1.0);
    CHECK(bessel_j(1, 0) == 0.0);
    CHECK(bessel_j(0.5, pi / 2) == Approx(std::sqrt(2 / (pi * pi / 2)) * std::sin(pi / 2)).epsilon(1e-12));
    CHECK(std::abs(bessel_j(0, 2.404826)) < 1e-5);
    CHECK_THROWS_AS(bessel_j(-1, 1), InvalidArgument);
    CHECK_THROWS_AS(bessel_j(21, 1), InvalidArgument);
    CHECK_THROWS_AS(bessel_j(0, 201), InvalidArgument);
    CHECK_THROWS_AS(bessel_j(0, -1), InvalidArgument);
}

TEST_CASE("bessel_j against the standard library") {
    // Errors are measured against the local oscillation amplitude, which
    // is what ten significant digits mean near a zero.
    double worst = 0.0;
    for (double nu : {0.0, 0.5, 1.0, 1.5, 2.0, 3.7, 5.0, 8.0, 12.3, 20.0})
        for (double x = 0.05; x <= 200.0; x *= 1.07) {
            const double ref = std::cyl_bessel_j(nu, x);
            const double amp = std::max(std::abs(ref), std::min(1.0, std::sqrt(2.0 / (pi * x))));
            worst = std::max(worst, std::abs(bessel_j(nu, x) - ref) / amp);
        }
    CHECK(worst < 1e-9);
}

TEST_CASE("bessel zeros") {
    CHECK(bessel_zero(0, 1) == Approx(2.40).margin(0.01));
    CHECK(bessel_zero(0, 1) == Approx(2.404825557695773).epsilon(1e-10));
    CHECK(bessel_zero(1.5, 1) == Approx(4.49).margin(0.01));
    for (int k = 1; k <= 6; ++k) CHECK(bessel_zero(0.5, k) == Approx(k * pi).epsilon(1e-10));
    for (double nu : {0.0, 1.0, 2.5, 7.0, 15.0})
        for (int k = 1; k <= 4; ++k) CHECK(std::abs(std::cyl_bessel_j(nu, bessel_zero(nu, k))) < 1e-10);
    CHECK_THROWS_AS(bessel_zero(0, 0), InvalidArgument);
    CHECK_THROWS_AS(bessel_zero(25, 1), InvalidArgument);
}

TEST_CASE("interlacing of zeros") {
    for (int l = 0; l <= 8; ++l)
        for (int k = 1; k <= 4; ++k) {
            const double z = bessel_zero(l, k);
            CHECK(z < bessel_zero(l + 1, k));
            CHECK(bessel_zero(l + 1, k) < bessel_zero(l, k + 1));
            if (l > 0) CHECK(z < bessel_zero(0, k + l));
        }
}

TEST_CASE("disk spectrum") {
    const auto s = disk_spectrum(15);
    REQUIRE(s.size() == 15);
    const std::vector<std::array<int, 2>> first{{0, 1}, {1, 1}, {1, 1}, {2, 1}, {2, 1}, {0, 2}};
    for (size_t i = 0; i < first.size(); ++i) CHECK(s[i].index == first[i]);
    CHECK(s[14].index == std::array<int, 2>{0, 3});
    CHECK(s[14].nodal_count == 3);
    CHECK(s[6].index == std::array<int, 2>{3, 1});
    CHECK(s[6].nodal_count == 6);
    CHECK(s[6].eigenvalue == s[7].eigenvalue);
    for (size_t i = 0; i + 1 < s.size(); ++i) CHECK(s[i].eigenvalue <= s[i + 1].eigenvalue);
    for (const auto& m : s) {
        const auto [l, k] = m.index;
        CHECK(m.eigenvalue == Approx(std::pow(bessel_zero(l, k), 2)).epsilon(1e-14));
        CHECK(m.multiplicity == (l == 0 ? 1 : 2));
        CHECK(m.nodal_count == (l == 0 ? k : 2 * l * k));
    }
    CHECK(disk_spectrum(50).size() == 50);
    CHECK_THROWS_AS(disk_spectrum(51), InvalidArgument);
}

TEST_CASE("disk Courant-sharp modes") {
    CHECK(disk_courant_sharp(0, 1));
    CHECK(disk_courant_sharp(1, 1));
    CHECK(disk_courant_sharp(2, 1));
    CHECK_FALSE(disk_courant_sharp(0, 2));
    CHECK_FALSE(disk_courant_sharp(3, 1));
    CHECK_FALSE(disk_courant_sharp(1, 2));
    CHECK_THROWS_AS(disk_courant_sharp(-1, 1), InvalidArgument);
}

TEST_CASE("rectangle spectrum") {
    const auto sq = rectangle_spectrum(1, 1, 30);
    CHECK(sq[0].eigenvalue == Approx(2 * pi2));
    CHECK(sq[0].index == std::array<int, 2>{1, 1});
    CHECK(sq[3].eigenvalue == Approx(8 * pi2));
    CHECK(sq[3].index == std::array<int, 2>{2, 2});
    CHECK(sq[1].degenerate);
    CHECK_FALSE(sq[3].degenerate);
    const auto brute = enumerate_rectangle(1, 1, 30);
    for (int i = 0; i < 30; ++i) {
        CHECK(sq[i].eigenvalue == Approx(brute[i]).epsilon(1e-14));
        CHECK(sq[i].nodal_count == sq[i].index[0] * sq[i].index[1]);
        // pi^2 times a sum of two squares.
        const double s = sq[i].eigenvalue / pi2;
        CHECK(s == Approx(std::round(s)).epsilon(1e-12));
    }
    const auto irr = rectangle_spectrum(1, 1 / std::sqrt(2.0), 10);
    for (const auto& m : irr) CHECK_FALSE(m.degenerate);
    CHECK_THROWS_AS(rectangle_spectrum(0, 1, 3), InvalidArgument);
}

TEST_CASE("rectangle L_k") {
    CHECK(rectangle_Lk(1, 1, 4) == Approx(8 * pi2));
    CHECK(rectangle_Lk(1, 1, 1) == Approx(2 * pi2));
    for (int p : {2, 3, 5, 7, 11}) CHECK(rectangle_Lk(1, 1, p) == Approx(pi2 * (1 + p * p)));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> side(0.3, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double a = side(rng), b = side(rng);
        for (int k = 1; k <= 12; ++k) CHECK(rectangle_Lk(a, b, k) >= 2 * pi2 * k / (a * b) * (1 - 1e-12));
    }
    CHECK_THROWS_AS(rectangle_Lk(1, 1, 0), InvalidArgument);
}

TEST_CASE("rectangle Courant-sharp classifier") {
    CHECK(rectangle_courant_sharp(2, 3, 1.62));
    CHECK_FALSE(rectangle_courant_sharp(3, 3, 1.62));
    CHECK_FALSE(rectangle_courant_sharp(3, 3, 0.5));
    CHECK(rectangle_courant_sharp(1, 2, 1.01));
    CHECK_FALSE(rectangle_courant_sharp(1, 2, 0.99));
    CHECK(rectangle_courant_sharp(1, 1, 123.0));
    CHECK(rectangle_courant_sharp(2, 2, 1.0));
    CHECK_FALSE(rectangle_courant_sharp(2, 4, 1.0));
    CHECK(rectangle_courant_sharp(3, 2, 1 / 1.62));
    CHECK_THROWS_AS(rectangle_courant_sharp(0, 1, 1.0), InvalidArgument);
    CHECK_THROWS_AS(rectangle_courant_sharp(1, 1, 0.0), InvalidArgument);
}

TEST_CASE("classifier agrees with enumeration") {
    // A positive answer means the (m, n) eigenvalue sits at position mn of
    // the spectrum of [0,1]x[0,sqrt(ratio)].
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> log_ratio(std::log(0.2), std::log(12.0));
    int positives = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const double ratio = std::exp(log_ratio(rng));
        const auto spec = rectangle_spectrum(1, std::sqrt(ratio), 60);
        for (int m = 1; m <= 6; ++m)
            for (int n = 1; n <= 6; ++n) {
                if (!rectangle_courant_sharp(m, n, ratio)) continue;
                ++positives;
                const double value = pi2 * (m * m + n * n / ratio);
                REQUIRE(m * n <= static_cast<int>(spec.size()));
                CHECK(spec[m * n - 1].eigenvalue == Approx(value).epsilon(1e-12));
                CHECK(spec[m * n - 1].index == std::array<int, 2>{m, n});
            }
    }
    CHECK(positives > 50);
}

TEST_CASE("sector eigenvalues") {
    const auto disk = disk_spectrum(5);
    CHECK(sector_eigenvalue(pi / 2, 1, 1) == Approx(disk[3].eigenvalue).epsilon(1e-12));
    CHECK(sector_eigenvalue(pi / 2, 1, 1) == Approx(26.4).margin(0.1));
    CHECK(sector_eigenvalue(2 * pi / 3, 1, 1) == Approx(20.2).margin(0.1));
    CHECK(sector_eigenvalue(pi, 1, 1) == Approx(disk[1].eigenvalue).epsilon(1e-12));
    // Narrower sectors have larger ground states.
    CHECK(sector_eigenvalue(2 * pi / 3, 1, 1) < sector_eigenvalue(pi / 2, 1, 1));
    CHECK_THROWS_AS(sector_eigenvalue(0, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(sector_eigenvalue(pi, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(sector_eigenvalue(0.1, 1, 1), InvalidArgument);
}
