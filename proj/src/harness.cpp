#include "radiff/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "radiff/kinetic.hpp"
#include "radiff/limit.hpp"
#include "radiff/operators.hpp"

namespace radiff {

namespace {

inline double pow4(double x) { double x2 = x * x; return x2 * x2; }

const double kTwoPi = 2.0 * std::acos(-1.0);

std::string fmt_time(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", t);
    return buf;
}

}  // namespace

ScalarField make_theta0(const PeriodicGrid& grid, const DataPreset& preset) {
    if (!(preset.a > 0.0)) throw std::invalid_argument("make_theta0: a must be positive");
    if (preset.theta == DataPreset::Theta::Sine && !(preset.a - std::abs(preset.b) > 0.0))
        throw std::invalid_argument("make_theta0: sine preset needs a - |b| > 0");
    if (preset.theta == DataPreset::Theta::Constant)
        return ScalarField(grid, preset.a);
    return ScalarField::from_function(grid, [&](Vec3 x) {
        return preset.a + preset.b * std::sin(kTwoPi * x[0] / grid.length[0]);
    });
}

DirectionalField make_h(const PeriodicGrid& grid, const AngularQuadrature& quad,
                        const DataPreset& preset, const ScalarField& theta0) {
    ScalarField bump = ScalarField::from_function(
        grid, [&](Vec3 x) { return std::cos(kTwoPi * x[0] / grid.length[0]); });
    DirectionalField h(grid, quad.ndirs());
    const int n = grid.cells();
    for (int m = 0; m < h.ndirs; ++m) {
        const double gfac = preset.g == DataPreset::Perturbation::Directional
                                ? 1.0 + quad.dirs[m][0]
                                : 1.0;
        double* dst = h.slice(m);
        for (int c = 0; c < n; ++c)
            dst[c] = pow4(theta0.v[c]) + preset.eta * gfac * bump.v[c];
    }
    for (double x : h.v)
        if (!(x > 0.0))
            throw std::domain_error("make_h: perturbation drives h nonpositive");
    return h;
}

RateResult fit_rate(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3)
        throw std::invalid_argument("fit_rate: need at least 3 points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [eps, err] : points) {
        if (!(eps > 0.0) || !(err > 0.0))
            throw std::invalid_argument("fit_rate: nonpositive value");
        const double x = std::log(eps), y = std::log(err);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double n = static_cast<double>(points.size());
    const double det = n * sxx - sx * sx;
    if (det == 0.0) throw std::invalid_argument("fit_rate: degenerate abscissae");
    RateResult r;
    r.slope = (n * sxy - sx * sy) / det;
    r.intercept = (sy - r.slope * sx) / n;
    for (const auto& [eps, err] : points) {
        const double res = std::abs(std::log(err) - (r.slope * std::log(eps) + r.intercept));
        r.max_residual = std::max(r.max_residual, res);
    }
    return r;
}

namespace {

struct Problem {
    AngularQuadrature quad;
    ScalarField theta0_init;
    DirectionalField h;
    CompatibleData data;
    LayerTrajectory layer0;
    LayerTrajectory layer1;
};

Problem build_problem(const SweepConfig& cfg, const PeriodicGrid& grid) {
    Problem p;
    p.quad = build_quadrature(cfg.n_polar, cfg.n_azimuth);
    p.theta0_init = make_theta0(grid, cfg.data);
    p.h = make_h(grid, p.quad, cfg.data, p.theta0_init);
    p.data = compatible_theta00(p.quad, p.h, p.theta0_init);
    p.layer0 = zeroth_layer(p.quad, p.h, p.theta0_init, p.data.theta00, cfg.tau_max, cfg.dtau);
    p.layer1 = first_layer(p.quad, p.layer0, p.data, cfg.tau_max);
    return p;
}

struct InteriorStates {
    std::vector<ScalarField> theta0;
    std::vector<ScalarField> theta1;
};

// advance the limit system and its order-1 correction in lockstep, capturing
// states at each requested (sorted ascending) time
InteriorStates advance_interior(const Problem& p, const VelocityField& u, double dt,
                                const std::vector<double>& times) {
    LimitParams lp;
    LimitState s0{p.data.theta00, 0.0};
    Order1State s1{p.data.theta10, 0.0};
    InteriorStates out;
    for (double target : times) {
        if (target < s0.t - 1e-14)
            throw std::invalid_argument("advance_interior: times not ascending");
        while (s0.t < target - 1e-14) {
            const double step_dt = std::min(dt, target - s0.t);
            LimitState next = limit_step(s0, step_dt, u, lp);
            s1 = order1_step(s0.theta0, next.theta0, s1, step_dt, u, lp);
            s0 = std::move(next);
        }
        out.theta0.push_back(s0.theta0);
        out.theta1.push_back(s1.theta1);
    }
    return out;
}

std::vector<ErrorRow> errors_for_eps(const SweepConfig& cfg, const PeriodicGrid& grid,
                                     const Problem& p, const InteriorStates& interior,
                                     const std::vector<double>& times, double eps) {
    KineticParams kp;
    kp.epsilon = eps;
    kp.cfl = cfg.cfl;
    kp.dt = kp.stable_dt(grid);
    auto snaps = run(p.h, p.theta0_init, kp, p.quad, cfg.u, times.back(), times);
    if (snaps.size() != times.size())
        throw std::runtime_error("run_sweep: snapshot count mismatch");

    std::vector<ErrorRow> rows;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        for (int order = 0; order <= 1; ++order) {
            CompositeFields comp =
                order == 0
                    ? composite(p.quad, interior.theta0[i], p.layer0, eps, t)
                    : composite(p.quad, interior.theta0[i], interior.theta1[i], p.layer0,
                                p.layer1, eps, t);
            ErrorRow row;
            row.epsilon = eps;
            row.t = t;
            row.composite_order = order;
            row.err_linf_f = norm_linf(snaps[i].f - comp.f);
            ScalarField dtheta = snaps[i].theta - comp.theta;
            row.err_linf_theta = norm_linf(dtheta);
            row.err_h2_theta = norm_h2(dtheta);
            rows.push_back(row);
        }
    }
    return rows;
}

double row_metric(const ErrorRow& r, int k) {
    return k == 0 ? r.err_linf_f : (k == 1 ? r.err_linf_theta : r.err_h2_theta);
}

const char* metric_name(int k) {
    return k == 0 ? "err_linf_f" : (k == 1 ? "err_linf_theta" : "err_h2_theta");
}

PeriodicGrid refine_grid(const PeriodicGrid& g) {
    return PeriodicGrid::make(g.slab(0) ? 1 : 2 * g.n[0], g.slab(1) ? 1 : 2 * g.n[1],
                              g.slab(2) ? 1 : 2 * g.n[2], g.length[0], g.length[1],
                              g.length[2]);
}

void validate_sweep(const SweepConfig& cfg) {
    if (cfg.epsilons.empty() || cfg.t_eval.empty())
        throw std::invalid_argument("run_sweep: empty epsilon or time list");
    for (double e : cfg.epsilons)
        if (!(e > 0.0 && e < 1.0))
            throw std::invalid_argument("run_sweep: epsilon not in (0,1)");
    for (double t : cfg.t_eval)
        if (!(t > 0.0)) throw std::invalid_argument("run_sweep: t_eval must be positive");
}

}  // namespace

ConvergenceReport run_sweep(const SweepConfig& cfg) {
    validate_sweep(cfg);
    std::vector<double> epsilons = cfg.epsilons;
    std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
    std::vector<double> times = cfg.t_eval;
    std::sort(times.begin(), times.end());

    Problem p = build_problem(cfg, cfg.grid);
    InteriorStates interior = advance_interior(p, cfg.u, cfg.limit_dt, times);

    ConvergenceReport report;
    for (double eps : epsilons) {
        auto rows = errors_for_eps(cfg, cfg.grid, p, interior, times, eps);
        report.rows.insert(report.rows.end(), rows.begin(), rows.end());
    }

    double max_err = 0.0;
    for (const ErrorRow& r : report.rows)
        max_err = std::max({max_err, r.err_linf_f, r.err_linf_theta, r.err_h2_theta});
    if (max_err <= 1e-10) {
        report.degenerate = true;
        report.note = "degenerate: zero errors";
        return report;
    }

    // refinement sensitivity: rerun the extreme epsilons at double resolution
    // and mark any metric whose error moves by more than 10%
    std::vector<std::string> flagged;  // "metric@t=..#order"
    if (cfg.refinement_check) {
        SweepConfig rcfg = cfg;
        rcfg.grid = refine_grid(cfg.grid);
        Problem rp = build_problem(rcfg, rcfg.grid);
        InteriorStates rinterior = advance_interior(rp, rcfg.u, rcfg.limit_dt, times);
        std::vector<double> check_eps = {epsilons.front()};
        if (epsilons.size() > 1) check_eps.push_back(epsilons.back());
        for (double eps : check_eps) {
            auto rrows = errors_for_eps(rcfg, rcfg.grid, rp, rinterior, times, eps);
            for (const ErrorRow& rr : rrows) {
                for (const ErrorRow& cr : report.rows) {
                    if (cr.epsilon != rr.epsilon || cr.t != rr.t ||
                        cr.composite_order != rr.composite_order)
                        continue;
                    for (int k = 0; k < 3; ++k) {
                        const double coarse = row_metric(cr, k);
                        const double fine = row_metric(rr, k);
                        if (coarse <= 1e-12 && fine <= 1e-12) continue;
                        if (std::abs(fine - coarse) > 0.10 * std::max(coarse, 1e-300))
                            flagged.push_back(std::string(metric_name(k)) + "@t=" +
                                              fmt_time(cr.t) + "#" +
                                              std::to_string(cr.composite_order));
                    }
                }
            }
        }
    }

    for (int order = 0; order <= 1; ++order)
        for (double t : times)
            for (int k = 0; k < 3; ++k) {
                RateFit fit;
                fit.metric = std::string(metric_name(k)) + "@t=" + fmt_time(t);
                fit.composite_order = order;
                std::vector<std::pair<double, double>> pts;
                bool positive = true;
                for (const ErrorRow& r : report.rows) {
                    if (r.t != t || r.composite_order != order) continue;
                    if (!(row_metric(r, k) > 0.0)) positive = false;
                    pts.emplace_back(r.epsilon, row_metric(r, k));
                }
                if (!positive || pts.size() < 3) {
                    fit.flag = "degenerate";
                } else {
                    RateResult rr = fit_rate(pts);
                    fit.slope = rr.slope;
                    fit.intercept = rr.intercept;
                    fit.max_residual = rr.max_residual;
                    const std::string key = fit.metric + "#" + std::to_string(order);
                    if (std::find(flagged.begin(), flagged.end(), key) != flagged.end())
                        fit.flag = "discretization-limited";
                }
                report.rates.push_back(fit);
            }
    return report;
}

ResidualReport residual_sweep(const SweepConfig& cfg) {
    validate_sweep(cfg);
    std::vector<double> epsilons = cfg.epsilons;
    std::sort(epsilons.begin(), epsilons.end(), std::greater<>());
    std::vector<double> base_times = cfg.t_eval;
    std::sort(base_times.begin(), base_times.end());

    Problem p = build_problem(cfg, cfg.grid);

    // every (t - dt, t, t + dt) triple needed across the sweep, one interior run
    std::vector<double> all_times;
    auto delta_for = [](double eps) { return std::min(1e-3, 5e-3 * eps * eps); };
    for (double eps : epsilons)
        for (double t : base_times) {
            const double d = delta_for(eps);
            if (t - d <= 0.0)
                throw std::invalid_argument("residual_sweep: t_eval too small for snapshots");
            all_times.push_back(t - d);
            all_times.push_back(t);
            all_times.push_back(t + d);
        }
    std::sort(all_times.begin(), all_times.end());
    all_times.erase(std::unique(all_times.begin(), all_times.end()), all_times.end());
    InteriorStates interior = advance_interior(p, cfg.u, cfg.limit_dt, all_times);
    auto time_index = [&](double t) {
        auto it = std::lower_bound(all_times.begin(), all_times.end(), t);
        return static_cast<std::size_t>(it - all_times.begin());
    };

    ResidualReport report;
    for (double eps : epsilons)
        for (double t : base_times) {
            const double d = delta_for(eps);
            for (int order = 0; order <= 1; ++order) {
                CompositeFields c[3];
                const double ts[3] = {t - d, t, t + d};
                for (int j = 0; j < 3; ++j) {
                    const std::size_t i = time_index(ts[j]);
                    c[j] = order == 0
                               ? composite(p.quad, interior.theta0[i], p.layer0, eps, ts[j])
                               : composite(p.quad, interior.theta0[i], interior.theta1[i],
                                           p.layer0, p.layer1, eps, ts[j]);
                }
                DirectionalField df_dt = (1.0 / (2.0 * d)) * (c[2].f - c[0].f);
                ScalarField dth_dt = (1.0 / (2.0 * d)) * (c[2].theta - c[0].theta);
                ResidualRow row;
                row.epsilon = eps;
                row.t = t;
                row.composite_order = order;
                row.res_l1 = norm_linf(residual_L1(p.quad, c[1].f, df_dt, c[1].theta, eps));
                row.res_l2 =
                    norm_linf(residual_L2(p.quad, c[1].f, c[1].theta, dth_dt, cfg.u, t, eps));
                report.rows.push_back(row);
            }
        }

    double max_res = 0.0;
    for (const ResidualRow& r : report.rows)
        max_res = std::max({max_res, r.res_l1, r.res_l2});
    if (max_res <= 1e-12) {
        report.degenerate = true;
        report.note = "degenerate: zero residuals";
        return report;
    }

    for (int order = 0; order <= 1; ++order)
        for (double t : base_times)
            for (int k = 0; k < 2; ++k) {
                RateFit fit;
                fit.metric = std::string(k == 0 ? "res_l1" : "res_l2") + "@t=" + fmt_time(t);
                fit.composite_order = order;
                std::vector<std::pair<double, double>> pts;
                bool positive = true;
                for (const ResidualRow& r : report.rows) {
                    if (r.t != t || r.composite_order != order) continue;
                    const double v = k == 0 ? r.res_l1 : r.res_l2;
                    if (!(v > 0.0)) positive = false;
                    pts.emplace_back(r.epsilon, v);
                }
                if (!positive || pts.size() < 3) {
                    fit.flag = "degenerate";
                } else {
                    RateResult rr = fit_rate(pts);
                    fit.slope = rr.slope;
                    fit.intercept = rr.intercept;
                    fit.max_residual = rr.max_residual;
                }
                report.rates.push_back(fit);
            }
    return report;
}

}  // namespace radiff
