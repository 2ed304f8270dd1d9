#include "radiff/kinetic.hpp"

#include <cmath>
#include <stdexcept>

#include "radiff/threading.hpp"

namespace radiff {

ScalarField emission(const ScalarField& theta) {
    ScalarField b(theta.grid);
    for (size_t i = 0; i < theta.v.size(); ++i) {
        const double th = theta.v[i];
        if (!(th > 0.0)) throw std::domain_error("emission: nonpositive temperature");
        const double th2 = th * th;
        b.v[i] = th2 * th2;
    }
    return b;
}

std::pair<double, double> relaxation_solve(double fbar_star, double theta_star,
                                           double eps, double dt, double tol,
                                           int max_iters) {
    if (fbar_star < 0.0 || !(theta_star > 0.0))
        throw std::domain_error("relaxation_solve: requires fbar* >= 0 and theta* > 0");

    // work with r = dt/eps^2 to avoid eps^2/dt overflow for small eps
    const double r = dt / (eps * eps);
    const double total = fbar_star + theta_star;  // conserved exactly

    // residual g(theta) = r theta^4 + (1+r) theta - (theta* + r total),
    // strictly increasing on theta > 0 with a unique root in (0, total]
    auto g = [&](double th) {
        const double th2 = th * th;
        return r * th2 * th2 + (1.0 + r) * th - (theta_star + r * total);
    };
    auto dg = [&](double th) { return 4.0 * r * th * th * th + (1.0 + r); };

    double lo = 0.0, hi = total;
    double th = theta_star;  // equilibrium inputs converge in one residual check
    for (int it = 0; it < max_iters; ++it) {
        const double res = g(th);
        if (std::abs(res) <= tol * std::max(1.0, theta_star + r * total))
            return {total - th, th};
        if (res > 0.0) hi = th; else lo = th;
        double next = th - res / dg(th);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection fallback
        if (next == th) return {total - th, th};
        th = next;
    }
    throw std::runtime_error("relaxation_solve: Newton did not converge");
}

namespace {

void check_finite(const KineticState& s) {
    for (double x : s.f.v)
        if (!std::isfinite(x)) throw std::runtime_error("kinetic step: non-finite f");
    for (double x : s.theta.v)
        if (!std::isfinite(x)) throw std::runtime_error("kinetic step: non-finite theta");
}

}  // namespace

KineticState step(const KineticState& state, const KineticParams& params,
                  const AngularQuadrature& quad, const VelocityField& u) {
    const PeriodicGrid& g = state.f.grid;
    const double eps = params.epsilon;
    const double dt = params.dt;
    if (!(dt > 0.0)) throw std::invalid_argument("kinetic step: dt must be positive");
    if (dt > params.cfl * eps * g.min_h() * (1.0 + 1e-12))
        throw std::invalid_argument("kinetic step: CFL violated (dt > cfl*eps*min_h)");

    KineticState out;
    out.t = state.t + dt;

    // (a) explicit upwind transport of f at speed 1/eps
    DirectionalField fs = state.f;
    {
        DirectionalField tr = upwind_transport(quad, state.f, 1.0 / eps);
        for (size_t i = 0; i < fs.v.size(); ++i) fs.v[i] -= dt * tr.v[i];
    }

    // (b) conservative upwind advection of theta
    ScalarField ths = state.theta;
    if (!u.is_zero()) {
        ScalarField adv = div_flux_upwind(u, state.t, state.theta);
        for (size_t i = 0; i < ths.v.size(); ++i) ths.v[i] -= dt * adv.v[i];
    }

    // (c) implicit diffusion of theta
    ths = backward_euler_diffusion(ths, dt, params.diffusion_solver_tol);

    // (d) implicit cell-local relaxation + scattering with exact recovery
    ScalarField fbar_star = angular_average(quad, fs);
    const int cells = g.cells();
    ScalarField fbar_new(g), th_new(g);
    parallel_for(cells, [&](int cb, int ce) {
        for (int c = cb; c < ce; ++c) {
            auto [fb, th] = relaxation_solve(fbar_star.v[c], ths.v[c], eps, dt,
                                             params.newton_tol, params.newton_max_iters);
            fbar_new.v[c] = fb;
            th_new.v[c] = th;
        }
    });

    const double r = dt / (eps * eps);
    DirectionalField fn(g, fs.ndirs);
    parallel_for(fs.ndirs, [&](int mb, int me) {
        for (int m = mb; m < me; ++m) {
            const double* src = fs.slice(m);
            double* dst = fn.slice(m);
            for (int c = 0; c < cells; ++c) {
                const double th2 = th_new.v[c] * th_new.v[c];
                dst[c] = (src[c] + dt * fbar_new.v[c] + r * th2 * th2) / (1.0 + dt + r);
            }
        }
    });

    out.f = std::move(fn);
    out.theta = std::move(th_new);
    check_finite(out);
    return out;
}

std::vector<KineticState> run(const DirectionalField& h, const ScalarField& theta0,
                              const KineticParams& params, const AngularQuadrature& quad,
                              const VelocityField& u, double t_end,
                              const std::vector<double>& snapshot_times,
                              const std::function<void(const KineticState&)>& on_step) {
    KineticState s{h, theta0, 0.0};
    std::vector<KineticState> snaps;
    size_t next_snap = 0;
    auto take_snaps = [&](const KineticState& st) {
        while (next_snap < snapshot_times.size() &&
               st.t >= snapshot_times[next_snap] - 1e-12) {
            snaps.push_back(st);
            ++next_snap;
        }
    };
    take_snaps(s);
    const double base_dt = params.dt > 0.0 ? params.dt : params.stable_dt(h.grid);
    while (s.t < t_end - 1e-12) {
        double target = t_end;
        if (next_snap < snapshot_times.size())
            target = std::min(target, snapshot_times[next_snap]);
        KineticParams p = params;
        p.dt = std::min(base_dt, target - s.t);
        s = step(s, p, quad, u);
        if (on_step) on_step(s);
        take_snaps(s);
    }
    if (snaps.empty() || snaps.back().t < t_end - 1e-12) snaps.push_back(s);
    return snaps;
}

DirectionalField linear_step(const DirectionalField& f, const DirectionalField& F,
                             const KineticParams& params, const AngularQuadrature& quad) {
    const PeriodicGrid& g = f.grid;
    const double eps = params.epsilon;
    const double dt = params.dt;
    if (dt > params.cfl * eps * g.min_h() * (1.0 + 1e-12))
        throw std::invalid_argument("linear_step: CFL violated");

    DirectionalField fs = f;
    {
        DirectionalField tr = upwind_transport(quad, f, 1.0 / eps);
        for (size_t i = 0; i < fs.v.size(); ++i) fs.v[i] -= dt * tr.v[i];
    }

    // implicit relaxation with frozen source: averaging the update equation
    // decouples fbar, then each direction is recovered exactly
    ScalarField fbar_star = angular_average(quad, fs);
    ScalarField Fbar = angular_average(quad, F);
    const double r = dt / (eps * eps);
    const int cells = g.cells();
    ScalarField fbar_new(g);
    for (int c = 0; c < cells; ++c)
        fbar_new.v[c] = (fbar_star.v[c] + r * Fbar.v[c]) / (1.0 + r);

    DirectionalField fn(g, f.ndirs);
    parallel_for(f.ndirs, [&](int mb, int me) {
        for (int m = mb; m < me; ++m) {
            const double* src = fs.slice(m);
            const double* Fm = F.slice(m);
            double* dst = fn.slice(m);
            for (int c = 0; c < cells; ++c)
                dst[c] = (src[c] + dt * fbar_new.v[c] + r * Fm[c]) / (1.0 + dt + r);
        }
    });
    return fn;
}

DirectionalField run_linear(const DirectionalField& h, const DirectionalField& F,
                            const KineticParams& params, const AngularQuadrature& quad,
                            double t_end) {
    DirectionalField f = h;
    double t = 0.0;
    const double base_dt = params.dt > 0.0 ? params.dt : params.stable_dt(h.grid);
    while (t < t_end - 1e-12) {
        KineticParams p = params;
        p.dt = std::min(base_dt, t_end - t);
        f = linear_step(f, F, p, quad);
        t += p.dt;
    }
    return f;
}

}  // namespace radiff
