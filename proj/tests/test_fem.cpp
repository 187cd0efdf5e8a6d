#include "minpart/fem.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>

using namespace minpart;
using Catch::Approx;

namespace {

const double pi = std::numbers::pi;
const double pi2 = pi * pi;

MeshPtr square(int n) { return share(build_rectangle(1, 1, n)); }

}  // namespace

TEST_CASE("assembled forms") {
    const auto mesh = square(8);
    const Forms f = assemble(*mesh);
    // Constants lie in the kernel of the Dirichlet energy.
    const Vector ones = Vector::Ones(mesh->vertex_count());
    CHECK((f.stiffness * ones).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(ones.dot(f.mass * ones) == Approx(1.0));
    const Forms shifted = assemble(*mesh, 3.5);
    CHECK((SparseMatrix(shifted.stiffness - f.stiffness - 3.5 * f.mass)).norm() < 1e-12);
    const Forms lumped = assemble(*mesh, 0.0, MassKind::Lumped);
    CHECK(ones.dot(lumped.mass * ones) == Approx(1.0));
    CHECK_THROWS_AS(assemble(*mesh, Potential(Vector::Zero(3))), InvalidArgument);
}

TEST_CASE("square spectrum") {
    const auto mesh = square(32);
    const Spectrum s = solve_eigen(mesh, 0.0, 6);
    REQUIRE(s.pairs.size() == 6);
    const double exact[] = {2, 5, 5, 8, 10, 10};
    for (int i = 0; i < 6; ++i) {
        CHECK(s.pairs[i].value >= exact[i] * pi2);
        CHECK(s.pairs[i].value == Approx(exact[i] * pi2).epsilon(0.02));
        CHECK(s.pairs[i].residual <= 1e-8);
        if (i > 0) CHECK(s.pairs[i].value >= s.pairs[i - 1].value);
    }
    const Forms f = assemble(*mesh);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            const double ip = s.pairs[i].field.values.dot(f.mass * s.pairs[j].field.values);
            CHECK(ip == Approx(i == j ? 1.0 : 0.0).margin(1e-8));
        }
    CHECK(rayleigh_quotient(s.pairs[0].field, f) == Approx(s.pairs[0].value).epsilon(1e-10));
}

TEST_CASE("convergence order of the first eigenvalue") {
    std::vector<double> err;
    for (int n : {8, 16, 32, 64}) err.push_back(solve_eigen(square(n), 0.0, 1).pairs[0].value - 2 * pi2);
    for (size_t i = 0; i + 1 < err.size(); ++i) {
        const double order = std::log2(err[i] / err[i + 1]);
        CHECK((order >= 1.8 && order <= 2.2));
    }
}

TEST_CASE("interpolated eigenfunction Rayleigh quotient converges at second order") {
    std::vector<double> err;
    for (int n : {16, 32}) {
        const auto mesh = square(n);
        const auto u = ScalarField::interpolate(mesh, [](Point p) { return std::sin(pi * p.x) * std::sin(pi * p.y); });
        err.push_back(rayleigh_quotient(u, assemble(*mesh)) - 2 * pi2);
    }
    CHECK(err[0] / err[1] == Approx(4.0).epsilon(0.1));
}

TEST_CASE("constant potential shifts every eigenvalue") {
    const auto mesh = square(16);
    const auto a = solve_eigen(mesh, 0.0, 4), b = solve_eigen(mesh, 5.0, 4);
    for (int i = 0; i < 4; ++i) CHECK(b.pairs[i].value - a.pairs[i].value == Approx(5.0).margin(1e-7));
    // Negative potentials need the internal shift, which must not leak out.
    const auto c = solve_eigen(mesh, -30.0, 4);
    for (int i = 0; i < 4; ++i) CHECK(c.pairs[i].value - a.pairs[i].value == Approx(-30.0).margin(1e-7));
    CHECK(c.shift > 0.0);
}

TEST_CASE("disk ground state") {
    const auto s = solve_eigen(share(build_disk(1, 16)), 0.0, 1);
    CHECK(s.pairs[0].value == Approx(2.404825557695773 * 2.404825557695773).epsilon(0.01));
}

TEST_CASE("ground states on supports") {
    const auto mesh = square(32);
    std::vector<char> all(mesh->vertex_count(), 1), left(mesh->vertex_count(), 0), none(mesh->vertex_count(), 0);
    for (int v = 0; v < mesh->vertex_count(); ++v) left[v] = mesh->vertices()[v].x < 0.5;
    CHECK(energy_of(ground_state_on_support(mesh, all)) == Approx(solve_eigen(mesh, 0.0, 1).pairs[0].value));
    CHECK(energy_of(ground_state_on_support(mesh, left)) == Approx(5 * pi2).epsilon(0.03));
    CHECK(std::isinf(energy_of(ground_state_on_support(mesh, none))));
    CHECK_THROWS_AS(ground_state_on_support(mesh, std::vector<char>(3, 1)), InvalidArgument);
}

TEST_CASE("domain monotonicity on random nested masks") {
    const auto mesh = square(16);
    const Forms f = assemble(*mesh);
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        // Outer mask: a random disk; inner mask: a random subset of it.
        const Point c{u(rng), u(rng)};
        const double r = 0.2 + 0.4 * u(rng);
        std::vector<char> outer(mesh->vertex_count()), inner(mesh->vertex_count());
        for (int v = 0; v < mesh->vertex_count(); ++v) {
            outer[v] = norm(mesh->vertices()[v] - c) < r;
            inner[v] = outer[v] && norm(mesh->vertices()[v] - c) < r * (0.5 + 0.5 * u(rng));
        }
        const double lo = energy_of(ground_state_on_support(mesh, f, 0.0, outer));
        const double hi = energy_of(ground_state_on_support(mesh, f, 0.0, inner));
        CHECK(hi >= lo * (1 - 1e-10));
    }
}

TEST_CASE("mixed boundary conditions") {
    const Mesh half = build_rectangle(1, 0.5, 16);
    const auto top_neumann = share(with_markers(half, [](Point a, Point b) {
        return a.y == 0.5 && b.y == 0.5 ? Marker::Neumann : Marker::Dirichlet;
    }));
    CHECK(mixed_bc_solve(top_neumann, 0.0, 1).pairs[0].value == Approx(2 * pi2).epsilon(0.01));
    CHECK(mixed_bc_solve(share(half), 0.0, 1).pairs[0].value == Approx(5 * pi2).epsilon(0.02));

    SectorMarkers radii;
    radii.radii = Marker::Neumann;
    const auto quarter = share(build_sector(pi / 2, 1, 16, radii));
    CHECK(mixed_bc_solve(quarter, 0.0, 1).pairs[0].value == Approx(5.783185962946784).epsilon(0.01));

    const auto all_neumann =
        share(with_markers(half, [](Point, Point) { return Marker::Neumann; }));
    CHECK_THROWS_AS(mixed_bc_solve(all_neumann, 0.0, 1), InvalidArgument);
}

TEST_CASE("eigen solver argument checks") {
    const auto mesh = square(4);
    CHECK_THROWS_AS(solve_eigen(mesh, 0.0, 0), InvalidArgument);
    CHECK_THROWS_AS(solve_eigen(mesh, 0.0, 100), InvalidArgument);
    CHECK_THROWS_AS(rayleigh_quotient(Vector::Zero(mesh->vertex_count()), assemble(*mesh)), InvalidArgument);
}
