#include "radiff/limit.hpp"

#include <cmath>
#include <stdexcept>

namespace radiff {

namespace {

inline double pow3(double x) { return x * x * x; }
inline double pow4(double x) { double x2 = x * x; return x2 * x2; }

// operator shared by the order-0 Picard iteration and the order-1 equation:
// A(psi) = (1+4c^3) psi / dt + div(u psi) - lap(psi) - (4/3) lap(c^3 psi)
ScalarField apply_limit_operator(const ScalarField& psi, const ScalarField& c3,
                                 double dt, const VelocityField& u, double t) {
    const int n = psi.grid.cells();
    ScalarField mixed(psi.grid);
    for (int i = 0; i < n; ++i) mixed.v[i] = c3.v[i] * psi.v[i];
    ScalarField lap_psi = laplacian(psi);
    ScalarField lap_mixed = laplacian(mixed);
    ScalarField out(psi.grid);
    for (int i = 0; i < n; ++i)
        out.v[i] = (1.0 + 4.0 * c3.v[i]) * psi.v[i] / dt - lap_psi.v[i]
                   - (4.0 / 3.0) * lap_mixed.v[i];
    if (!u.is_zero()) {
        ScalarField adv = div_flux_upwind(u, t, psi);
        for (int i = 0; i < n; ++i) out.v[i] += adv.v[i];
    }
    return out;
}

LimitState limit_step_once(const LimitState& s, double dt, const VelocityField& u,
                           const LimitParams& params, bool& converged) {
    const PeriodicGrid& g = s.theta0.grid;
    const int n = g.cells();
    const double t_new = s.t + dt;

    ScalarField theta_n = s.theta0;
    ScalarField iterate = theta_n;
    converged = false;
    for (int m = 0; m < params.picard_max_iters; ++m) {
        // linearize B about the current iterate c; the regrouped right-hand
        // side collapses to [theta^n + (theta^n)^4 + 3 c^4]/dt - lap(c^4)
        ScalarField c3(g), c4(g);
        for (int i = 0; i < n; ++i) {
            c3.v[i] = pow3(iterate.v[i]);
            c4.v[i] = c3.v[i] * iterate.v[i];
        }
        ScalarField lap_c4 = laplacian(c4);
        ScalarField rhs(g);
        for (int i = 0; i < n; ++i)
            rhs.v[i] = (theta_n.v[i] + pow4(theta_n.v[i]) + 3.0 * c4.v[i]) / dt
                       - lap_c4.v[i];

        auto apply = [&](const ScalarField& psi) {
            return apply_limit_operator(psi, c3, dt, u, t_new);
        };
        ScalarField next = bicgstab(apply, rhs, iterate, params.linear_tol);

        double diff = 0.0;
        for (int i = 0; i < n; ++i)
            diff = std::max(diff, std::abs(next.v[i] - iterate.v[i]));
        iterate = std::move(next);
        if (diff <= params.picard_tol) {
            converged = true;
            break;
        }
    }
    return LimitState{std::move(iterate), t_new};
}

}  // namespace

LimitState limit_step(const LimitState& s, double dt, const VelocityField& u,
                      const LimitParams& params) {
    if (!(dt > 0.0)) throw std::invalid_argument("limit_step: dt must be positive");
    for (double th : s.theta0.v)
        if (!(th > 0.0)) throw std::domain_error("limit_step: nonpositive theta0");

    bool converged = false;
    LimitState next = limit_step_once(s, dt, u, params, converged);
    if (converged) return next;
    if (params.max_halvings <= 0)
        throw std::runtime_error("limit_step: Picard stalled after max dt halvings");
    LimitParams halved = params;
    halved.max_halvings = params.max_halvings - 1;
    LimitState mid = limit_step(s, 0.5 * dt, u, halved);
    return limit_step(mid, 0.5 * dt, u, halved);
}

Order1State order1_step(const ScalarField& theta0_old, const ScalarField& theta0_new,
                        const Order1State& s1, double dt, const VelocityField& u,
                        const LimitParams& params) {
    const PeriodicGrid& g = s1.theta1.grid;
    const int n = g.cells();
    const double t_new = s1.t + dt;

    ScalarField c3(g);
    for (int i = 0; i < n; ++i) c3.v[i] = pow3(theta0_new.v[i]);
    ScalarField rhs(g);
    for (int i = 0; i < n; ++i)
        rhs.v[i] = (1.0 + 4.0 * pow3(theta0_old.v[i])) * s1.theta1.v[i] / dt;

    auto apply = [&](const ScalarField& psi) {
        return apply_limit_operator(psi, c3, dt, u, t_new);
    };
    ScalarField theta1 = bicgstab(apply, rhs, s1.theta1, params.linear_tol);
    return Order1State{std::move(theta1), t_new};
}

DirectionalField order1_f(const AngularQuadrature& quad, const ScalarField& theta0,
                          const ScalarField& theta1) {
    const PeriodicGrid& g = theta0.grid;
    const int n = g.cells();
    ScalarField b0(g);
    for (int i = 0; i < n; ++i) b0.v[i] = pow4(theta0.v[i]);
    auto gb = grad(b0);
    DirectionalField f1(g, quad.ndirs());
    for (int m = 0; m < quad.ndirs(); ++m) {
        double* fm = f1.slice(m);
        const Vec3& w = quad.dirs[m];
        for (int c = 0; c < n; ++c)
            fm[c] = 4.0 * pow3(theta0.v[c]) * theta1.v[c]
                    - (w[0] * gb[0].v[c] + w[1] * gb[1].v[c] + w[2] * gb[2].v[c]);
    }
    return f1;
}

DirectionalField residual_L1(const AngularQuadrature& quad, const DirectionalField& f,
                             const DirectionalField& df_dt, const ScalarField& theta,
                             double eps) {
    const int n = f.grid.cells();
    const double e2 = eps * eps;
    ScalarField fbar = angular_average(quad, f);
    DirectionalField stream = directional_grad(quad, f);
    DirectionalField out(f.grid, f.ndirs);
    for (int m = 0; m < f.ndirs; ++m) {
        const double* fm = f.slice(m);
        const double* dm = df_dt.slice(m);
        const double* sm = stream.slice(m);
        double* om = out.slice(m);
        for (int c = 0; c < n; ++c)
            om[c] = e2 * dm[c] + eps * sm[c] + e2 * (fm[c] - fbar.v[c]) + fm[c]
                    - pow4(theta.v[c]);
    }
    return out;
}

ScalarField residual_L2(const AngularQuadrature& quad, const DirectionalField& f,
                        const ScalarField& theta, const ScalarField& dtheta_dt,
                        const VelocityField& u, double t, double eps) {
    const int n = theta.grid.cells();
    const double e2 = eps * eps;
    ScalarField fbar = angular_average(quad, f);
    ScalarField lap = laplacian(theta);
    ScalarField out(theta.grid);
    for (int c = 0; c < n; ++c)
        out.v[c] = e2 * dtheta_dt.v[c] - e2 * lap.v[c] - (fbar.v[c] - pow4(theta.v[c]));
    if (!u.is_zero()) {
        ScalarField adv = div_flux_centered(u, t, theta);
        for (int c = 0; c < n; ++c) out.v[c] += e2 * adv.v[c];
    }
    return out;
}

}  // namespace radiff
