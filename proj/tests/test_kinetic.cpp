#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "radiff/kinetic.hpp"
#include "radiff/threading.hpp"

using namespace radiff;

namespace {

// brackets the root of the strictly increasing map used by relaxation_solve
double bisect_theta(double rhs_const, double coef_lin, double coef_quart) {
    // solves coef_lin * theta + coef_quart * theta^4 = rhs_const on (0, hi]
    double lo = 0.0, hi = 1.0;
    while (coef_lin * hi + coef_quart * hi * hi * hi * hi < rhs_const) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (coef_lin * mid + coef_quart * mid * mid * mid * mid < rhs_const ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("emission is the grey quartic and rejects nonpositive input") {
    PeriodicGrid g = PeriodicGrid::make(4, 1, 1);
    for (auto [c, expect] : {std::pair{1.0, 1.0}, {3.0, 81.0}, {0.5, 0.0625}}) {
        ScalarField th(g, c);
        for (double v : emission(th).v) CHECK(v == doctest::Approx(expect).epsilon(1e-15));
    }
    ScalarField bad(g, 0.0);
    CHECK_THROWS_AS(emission(bad), std::domain_error);
}

TEST_CASE("relaxation_solve: equilibrium fixed point") {
    for (double c : {0.5, 1.0, 2.0}) {
        auto [fbar, theta] = relaxation_solve(c * c * c * c, c, 0.3, 1e-3, 1e-13);
        CHECK(std::abs(fbar - c * c * c * c) <= 1e-13);
        CHECK(std::abs(theta - c) <= 1e-13);
    }
}

TEST_CASE("relaxation_solve conserves fbar + theta on 1000 random inputs") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> fdist(0.0, 5.0), tdist(0.05, 3.0);
    std::uniform_real_distribution<double> edist(0.05, 0.9), dtdist(1e-5, 1e-1);
    for (int i = 0; i < 1000; ++i) {
        double fs = fdist(rng), ts = tdist(rng), eps = edist(rng), dt = dtdist(rng);
        auto [fbar, theta] = relaxation_solve(fs, ts, eps, dt, 1e-13);
        CHECK(std::abs((fbar + theta) - (fs + ts)) <= 1e-13 * std::max(1.0, fs + ts));
        CHECK(theta > 0.0);
        CHECK(fbar >= 0.0);
    }
}

TEST_CASE("relaxation_solve matches a bisection oracle at eps = dt = 1") {
    // eps = dt = 1, fbar* = 0, theta* = 1: the implicit pair is
    // 2 fbar = theta^4 and theta - 1 = fbar - theta^4, so 2 theta + theta^4 = 2
    auto [fbar, theta] = relaxation_solve(0.0, 1.0, 1.0, 1.0, 1e-14);
    double ref = bisect_theta(2.0, 2.0, 1.0);
    CHECK(theta == doctest::Approx(ref).epsilon(1e-12));
    CHECK(fbar + theta == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("global equilibrium is preserved by step") {
    PeriodicGrid g = PeriodicGrid::make(8, 8, 1);
    AngularQuadrature q = build_quadrature(2, 4);
    const double c = 1.3;
    KineticState s{DirectionalField(g, q.ndirs(), c * c * c * c), ScalarField(g, c), 0.0};
    KineticParams p;
    p.epsilon = 0.1;
    p.dt = p.stable_dt(g);
    VelocityField u = VelocityField::zero();
    for (int i = 0; i < 20; ++i) s = step(s, p, q, u);
    for (double v : s.theta.v) CHECK(std::abs(v - c) <= 1e-13);
    for (double v : s.f.v) CHECK(std::abs(v - c * c * c * c) <= 1e-12);
}

TEST_CASE("cell sum of theta + fbar drifts below 1e-11 relative per step") {
    PeriodicGrid g = PeriodicGrid::make(32, 1, 1);
    AngularQuadrature q = build_quadrature(4, 8);
    const double tp = 2.0 * std::acos(-1.0);
    ScalarField th = ScalarField::from_function(
        g, [&](Vec3 x) { return 1.0 + 0.2 * std::sin(tp * x[0]); });
    DirectionalField h(g, q.ndirs());
    for (int m = 0; m < q.ndirs(); ++m)
        for (int c = 0; c < g.cells(); ++c) {
            double t4 = th.v[c] * th.v[c] * th.v[c] * th.v[c];
            h.at(m, c) = t4 + 0.05 * (1.0 + q.dirs[m][0]);
        }
    KineticParams p;
    p.epsilon = 0.2;
    p.dt = p.stable_dt(g);
    VelocityField u = VelocityField::compressible_sine(0.3);

    KineticState s{h, th, 0.0};
    double mass = cell_sum(s.theta + angular_average(q, s.f));
    for (int i = 0; i < 25; ++i) {
        s = step(s, p, q, u);
        double m2 = cell_sum(s.theta + angular_average(q, s.f));
        CHECK(std::abs(m2 - mass) <= 1e-11 * std::abs(mass));
        mass = m2;
    }
}

TEST_CASE("positivity is preserved from nonnegative data") {
    PeriodicGrid g = PeriodicGrid::make(32, 1, 1);
    AngularQuadrature q = build_quadrature(2, 4);
    const double tp = 2.0 * std::acos(-1.0);
    ScalarField th = ScalarField::from_function(
        g, [&](Vec3 x) { return 0.5 + 0.4 * std::sin(tp * x[0]); });
    DirectionalField h(g, q.ndirs());
    for (int m = 0; m < q.ndirs(); ++m)
        for (int c = 0; c < g.cells(); ++c)
            h.at(m, c) = 0.01 + 0.5 * (1.0 + q.dirs[m][0] * std::sin(tp * (c + 0.5) / 32.0));
    KineticParams p;
    p.epsilon = 0.3;
    p.dt = p.stable_dt(g);
    KineticState s{h, th, 0.0};
    for (int i = 0; i < 50; ++i) {
        s = step(s, p, q, VelocityField::zero());
        for (double v : s.f.v) CHECK(v >= 0.0);
        for (double v : s.theta.v) CHECK(v > 0.0);
    }
}

TEST_CASE("step rejects a CFL-violating dt") {
    PeriodicGrid g = PeriodicGrid::make(16, 1, 1);
    AngularQuadrature q = build_quadrature(2, 4);
    KineticState s{DirectionalField(g, q.ndirs(), 1.0), ScalarField(g, 1.0), 0.0};
    KineticParams p;
    p.epsilon = 0.1;
    p.dt = 10.0 * p.stable_dt(g);
    CHECK_THROWS_AS(step(s, p, q, VelocityField::zero()), std::invalid_argument);
}

TEST_CASE("spatially homogeneous trajectory matches a fine RK4 ODE oracle") {
    // constant-in-x isotropic data reduce the system to
    //   eps^2 f' + f = theta^4,  eps^2 theta' = f - theta^4
    const double eps = 0.5;
    PeriodicGrid g = PeriodicGrid::make(1, 1, 1);
    AngularQuadrature q = build_quadrature(4, 8);
    KineticParams p;
    p.epsilon = eps;
    p.dt = 1e-6;  // homogeneous: no transport CFL, splitting error ~ 0.74 dt

    KineticState s{DirectionalField(g, q.ndirs(), 0.0), ScalarField(g, 1.0), 0.0};
    const double t_end = 0.5;
    int steps = static_cast<int>(std::round(t_end / p.dt));

    // reference: classical RK4 at dt/10 on the reduced 2-ODE system
    double f = 0.0, th = 1.0;
    const double hdt = p.dt / 10.0;
    auto rhs = [eps](double fv, double tv, double& df, double& dth) {
        double b = tv * tv * tv * tv;
        df = (b - fv) / (eps * eps);
        dth = (fv - b) / (eps * eps);
    };
    for (int i = 0; i < steps; ++i) {
        s = step(s, p, q, VelocityField::zero());
        for (int k = 0; k < 10; ++k) {
            double k1f, k1t, k2f, k2t, k3f, k3t, k4f, k4t;
            rhs(f, th, k1f, k1t);
            rhs(f + 0.5 * hdt * k1f, th + 0.5 * hdt * k1t, k2f, k2t);
            rhs(f + 0.5 * hdt * k2f, th + 0.5 * hdt * k2t, k3f, k3t);
            rhs(f + hdt * k3f, th + hdt * k3t, k4f, k4t);
            f += hdt / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
            th += hdt / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        }
        CHECK(std::abs(s.theta.v[0] - th) <= 1e-6);
        CHECK(std::abs(s.f.v[0] - f) <= 1e-6);
    }
}

TEST_CASE("run returns the initial state for t_end = 0 and honors snapshots") {
    PeriodicGrid g = PeriodicGrid::make(16, 1, 1);
    AngularQuadrature q = build_quadrature(2, 4);
    DirectionalField h(g, q.ndirs(), 1.0);
    ScalarField th(g, 1.0);
    KineticParams p;
    p.epsilon = 0.2;
    p.dt = p.stable_dt(g);

    auto traj = run(h, th, p, q, VelocityField::zero(), 0.0);
    REQUIRE(traj.size() == 1);
    CHECK(traj[0].t == 0.0);

    auto traj2 = run(h, th, p, q, VelocityField::zero(), 0.05, {0.02, 0.04});
    REQUIRE(traj2.size() == 3);
    CHECK(traj2[0].t == doctest::Approx(0.02).epsilon(1e-9));
    CHECK(traj2[1].t == doctest::Approx(0.04).epsilon(1e-9));
    CHECK(traj2[2].t == doctest::Approx(0.05).epsilon(1e-9));
}

TEST_CASE("linear solver obeys the frozen-source sup bound") {
    // |f|_inf <= (1 + eps^2)(|h|_inf + |F|_inf) for the linear problem
    PeriodicGrid g = PeriodicGrid::make(32, 1, 1);
    AngularQuadrature q = build_quadrature(2, 4);
    const double tp = 2.0 * std::acos(-1.0);
    DirectionalField h(g, q.ndirs()), F(g, q.ndirs());
    for (int m = 0; m < q.ndirs(); ++m)
        for (int c = 0; c < g.cells(); ++c) {
            double x = (c + 0.5) / 32.0;
            h.at(m, c) = 1.0 + 0.5 * q.dirs[m][0] * std::cos(tp * x);
            F.at(m, c) = 0.8 + 0.2 * std::sin(tp * x);
        }
    KineticParams p;
    p.epsilon = 0.4;
    p.dt = p.stable_dt(g);
    DirectionalField sol = run_linear(h, F, p, q, 0.2);
    const double bound = (1.0 + p.epsilon * p.epsilon) * (norm_linf(h) + norm_linf(F));
    CHECK(norm_linf(sol) <= bound);
}

TEST_CASE("step is bit-identical across thread counts") {
    PeriodicGrid g = PeriodicGrid::make(64, 1, 1);
    AngularQuadrature q = build_quadrature(4, 8);
    const double tp = 2.0 * std::acos(-1.0);
    ScalarField th = ScalarField::from_function(
        g, [&](Vec3 x) { return 1.0 + 0.1 * std::sin(tp * x[0]); });
    DirectionalField h(g, q.ndirs());
    for (int m = 0; m < q.ndirs(); ++m)
        for (int c = 0; c < g.cells(); ++c)
            h.at(m, c) = th.v[c] * th.v[c] * th.v[c] * th.v[c] + 0.05 * (1.0 + q.dirs[m][0]);
    KineticParams p;
    p.epsilon = 0.2;
    p.dt = p.stable_dt(g);

    set_threads(1);
    KineticState a{h, th, 0.0};
    for (int i = 0; i < 10; ++i) a = step(a, p, q, VelocityField::zero());
    set_threads(8);
    KineticState b{h, th, 0.0};
    for (int i = 0; i < 10; ++i) b = step(b, p, q, VelocityField::zero());
    set_threads(1);
    for (size_t i = 0; i < a.f.v.size(); ++i) CHECK(a.f.v[i] == b.f.v[i]);
    for (size_t i = 0; i < a.theta.v.size(); ++i) CHECK(a.theta.v[i] == b.theta.v[i]);
}
