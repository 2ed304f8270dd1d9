#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "radiff/operators.hpp"
#include "radiff/quadrature.hpp"
#include "radiff/threading.hpp"

using namespace radiff;

namespace {
const double kPi = std::acos(-1.0);

ScalarField random_field(const PeriodicGrid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ScalarField s(g);
    for (double& x : s.v) x = dist(rng);
    return s;
}
}  // namespace

TEST_CASE("quadrature moment identities") {
    for (auto [np, na] : {std::pair{2, 4}, {4, 8}, {8, 16}, {6, 12}}) {
        AngularQuadrature q = build_quadrature(np, na);
        CHECK(q.ndirs() == np * na);
        CHECK(std::abs(q.weight_sum() - 1.0) <= 1e-14);
        for (const Vec3& w : q.dirs)
            CHECK(std::abs(std::sqrt(dot(w, w)) - 1.0) <= 1e-14);
        Vec3 m1 = q.first_moment();
        for (int a = 0; a < 3; ++a) CHECK(std::abs(m1[a]) <= 1e-13);
        auto m2 = q.second_moment();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                CHECK(std::abs(m2[3 * r + c] - (r == c ? 1.0 / 3.0 : 0.0)) <= 1e-10);
    }
}

TEST_CASE("quadrature rejects degenerate parameters") {
    CHECK_THROWS_AS(build_quadrature(1, 8), std::invalid_argument);
    CHECK_THROWS_AS(build_quadrature(4, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_quadrature(4, 7), std::invalid_argument);
}

TEST_CASE("angular average: constant, odd, and second-moment inputs") {
    AngularQuadrature q = build_quadrature(4, 8);
    PeriodicGrid g = PeriodicGrid::make(8, 1, 1);

    DirectionalField f(g, q.ndirs(), 2.5);
    ScalarField fbar = angular_average(q, f);
    for (double v : fbar.v) CHECK(v == doctest::Approx(2.5).epsilon(1e-15));

    const Vec3 a{0.3, -1.1, 0.7};
    for (int m = 0; m < q.ndirs(); ++m)
        for (int c = 0; c < g.cells(); ++c) f.at(m, c) = dot(q.dirs[m], a);
    fbar = angular_average(q, f);
    for (double v : fbar.v) CHECK(std::abs(v) <= 1e-13);

    ScalarField gx = ScalarField::from_function(g, [](Vec3 x) { return 1.0 + x[0]; });
    for (int m = 0; m < q.ndirs(); ++m)
        for (int c = 0; c < g.cells(); ++c)
            f.at(m, c) = q.dirs[m][0] * q.dirs[m][0] * gx.v[c];
    fbar = angular_average(q, f);
    for (int c = 0; c < g.cells(); ++c)
        CHECK(std::abs(fbar.v[c] - gx.v[c] / 3.0) <= 1e-10);
}

TEST_CASE("difference operators annihilate constants") {
    PeriodicGrid g = PeriodicGrid::make(12, 6, 4);
    ScalarField c(g, 3.7);
    for (const ScalarField& d : grad(c))
        for (double v : d.v) CHECK(v == 0.0);
    for (double v : laplacian(c).v) CHECK(v == 0.0);
}

TEST_CASE("gradient matches the centered finite-difference symbol of sin") {
    PeriodicGrid g = PeriodicGrid::make(32, 1, 1);
    ScalarField s = ScalarField::from_function(
        g, [](Vec3 x) { return std::sin(2.0 * kPi * x[0]); });
    auto d = grad(s);
    // centered FD of sin(kx) is (sin kh / h) cos(kx), k = 2 pi
    const double k = 2.0 * kPi;
    const double sym = std::sin(k * g.h[0]) / g.h[0];
    for (int i = 0; i < g.n[0]; ++i) {
        const double x = (i + 0.5) * g.h[0];
        CHECK(d[0].v[i] == doctest::Approx(sym * std::cos(k * x)).epsilon(1e-12));
        CHECK(d[1].v[i] == 0.0);
        CHECK(d[2].v[i] == 0.0);
    }
}

TEST_CASE("laplacian equals div_face of grad_face") {
    PeriodicGrid g = PeriodicGrid::make(10, 7, 5, 1.0, 2.0, 0.5);
    ScalarField s = random_field(g, 7);
    ScalarField lap = laplacian(s);
    ScalarField composed = div_face(grad_face(s));
    for (int c = 0; c < g.cells(); ++c)
        CHECK(std::abs(lap.v[c] - composed.v[c]) <= 1e-13 * std::max(1.0, std::abs(lap.v[c])));
}

TEST_CASE("conservative flux forms have zero cell sum") {
    PeriodicGrid g = PeriodicGrid::make(16, 8, 1);
    ScalarField s = random_field(g, 11);
    for (double& x : s.v) x += 2.0;  // keep positive
    double scale = cell_sum(s);

    for (const VelocityField& u :
         {VelocityField::constant({0.8, -0.3, 0.0}), VelocityField::taylor_green(1.3),
          VelocityField::compressible_sine(0.9)}) {
        CHECK(std::abs(cell_sum(div_flux_centered(u, 0.0, s))) <= 1e-12 * std::abs(scale));
        CHECK(std::abs(cell_sum(div_flux_upwind(u, 0.0, s))) <= 1e-12 * std::abs(scale));
    }

    AngularQuadrature q = build_quadrature(2, 4);
    DirectionalField f(g, q.ndirs());
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(0.0, 2.0);
    for (double& x : f.v) x = dist(rng);
    DirectionalField t = upwind_transport(q, f, 2.5);
    for (int m = 0; m < q.ndirs(); ++m) {
        double acc = 0.0;
        for (int c = 0; c < g.cells(); ++c) acc += t.at(m, c);
        CHECK(std::abs(acc * g.cell_volume()) <= 1e-12 * g.cells());
    }
}

TEST_CASE("upwind transport: constants give zero, unit CFL shifts exactly") {
    PeriodicGrid g = PeriodicGrid::make(16, 1, 1);
    AngularQuadrature q = build_quadrature(2, 4);

    DirectionalField c(g, q.ndirs(), 4.0);
    for (double v : upwind_transport(q, c, 1.0).v) CHECK(v == 0.0);

    // single direction aligned with e1: forward Euler with dt = h / w1 moves a
    // step profile exactly one cell
    AngularQuadrature e1;
    e1.dirs = {{1.0, 0.0, 0.0}};
    e1.weights = {1.0};
    DirectionalField f(g, 1);
    for (int i = 0; i < g.n[0]; ++i) f.at(0, i) = i < 8 ? 1.0 : 0.0;
    DirectionalField rhs = upwind_transport(e1, f, 1.0);
    DirectionalField shifted(g, 1);
    for (int i = 0; i < g.n[0]; ++i)
        shifted.at(0, i) = f.at(0, i) - g.h[0] * rhs.at(0, i);
    for (int i = 0; i < g.n[0]; ++i)
        CHECK(shifted.at(0, i) == doctest::Approx(f.at(0, g.wrap(i - 1, 0))).epsilon(1e-14));
}

TEST_CASE("slab axes contribute nothing to difference operators") {
    PeriodicGrid g = PeriodicGrid::make(8, 1, 1);
    ScalarField s = random_field(g, 3);
    auto d = grad(s);
    for (double v : d[1].v) CHECK(v == 0.0);
    for (double v : d[2].v) CHECK(v == 0.0);
}

TEST_CASE("norms: constants, sine, and the H2 >= L2 ordering") {
    PeriodicGrid g = PeriodicGrid::make(64, 1, 1);
    ScalarField z(g, 0.0);
    CHECK(norm_linf(z) == 0.0);
    CHECK(norm_l2(z) == 0.0);
    CHECK(norm_h2(z) == 0.0);

    ScalarField c(g, -2.0);
    CHECK(norm_linf(c) == 2.0);
    CHECK(norm_l2(c) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(norm_h2(c) == doctest::Approx(2.0).epsilon(1e-14));

    ScalarField s = ScalarField::from_function(
        g, [](Vec3 x) { return std::sin(2.0 * kPi * x[0]); });
    CHECK(std::abs(norm_l2(s) - std::sqrt(0.5)) <= 1e-3);
    CHECK(norm_h2(s) >= norm_l2(s));

    ScalarField r = random_field(g, 19);
    CHECK(norm_h2(r) >= norm_l2(r));
}

TEST_CASE("backward Euler diffusion: solves the system and preserves the mean") {
    PeriodicGrid g = PeriodicGrid::make(32, 1, 1);
    ScalarField b = random_field(g, 23);
    const double dt = 0.37;
    ScalarField x = backward_euler_diffusion(b, dt, 1e-12);
    ScalarField residual = x - dt * laplacian(x) - b;
    CHECK(norm_linf(residual) <= 1e-10 * std::max(1.0, norm_linf(b)));
    CHECK(std::abs(cell_sum(x) - cell_sum(b)) <= 1e-13 * std::max(1.0, std::abs(cell_sum(b))));
}

TEST_CASE("bicgstab solves a shifted diffusion operator") {
    PeriodicGrid g = PeriodicGrid::make(24, 1, 1);
    ScalarField b = random_field(g, 29);
    auto apply = [](const ScalarField& s) {
        ScalarField out = s - 0.1 * laplacian(s);
        for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += 0.5 * s.v[i];
        return out;
    };
    ScalarField x = bicgstab(apply, b, ScalarField(g), 1e-13);
    ScalarField residual = apply(x) - b;
    CHECK(norm_l2(residual) <= 1e-11 * std::max(1.0, norm_l2(b)));
}

TEST_CASE("parallel_for results do not depend on the thread count") {
    PeriodicGrid g = PeriodicGrid::make(128, 1, 1);
    ScalarField s = random_field(g, 31);
    set_threads(1);
    ScalarField l1 = laplacian(s);
    set_threads(8);
    ScalarField l8 = laplacian(s);
    set_threads(1);
    for (int c = 0; c < g.cells(); ++c) CHECK(l1.v[c] == l8.v[c]);
}
