#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "radiff/config.hpp"
#include "radiff/harness.hpp"
#include "radiff/io.hpp"
#include "radiff/kinetic.hpp"
#include "radiff/layers.hpp"
#include "radiff/limit.hpp"
#include "radiff/operators.hpp"
#include "radiff/oracle.hpp"
#include "radiff/threading.hpp"

namespace fs = std::filesystem;
using namespace radiff;

namespace {

constexpr const char* kVersion = "radiff 0.1.0";

struct Common {
    std::string config_path;
    std::string out_dir = "run";
    unsigned long seed = 0;
    int threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "configuration file");
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--seed", c.seed, "seed recorded with the run");
    cmd->add_option("--threads", c.threads, "worker thread count (0 = hardware)");
}

RunConfig load_config(const Common& c) {
    if (c.config_path.empty()) return RunConfig{};
    std::ifstream in(c.config_path);
    if (!in) throw std::runtime_error("cannot open config file " + c.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void prepare_run_dir(const Common& c, const RunConfig& cfg, const std::string& subcommand) {
    fs::create_directories(c.out_dir);
    std::ofstream(fs::path(c.out_dir) / "config.ini") << echo_config(cfg);
    std::ofstream(fs::path(c.out_dir) / "version.txt") << kVersion << "\n";
    std::ofstream meta(fs::path(c.out_dir) / "run_meta.txt");
    meta << "subcommand = " << subcommand << "\n";
    meta << "seed = " << c.seed << "\n";
    meta << "threads = " << c.threads << "\n";
    if (c.threads > 0) set_threads(c.threads);
}

std::string out_path(const Common& c, const std::string& name) {
    return (fs::path(c.out_dir) / name).string();
}

double field_min(const std::vector<double>& v) {
    double m = v.empty() ? 0.0 : v[0];
    for (double x : v) m = std::min(m, x);
    return m;
}

double field_max(const std::vector<double>& v) {
    double m = v.empty() ? 0.0 : v[0];
    for (double x : v) m = std::max(m, x);
    return m;
}

// --- subcommand bodies ---

int run_quadcheck(const Common& c, const RunConfig& cfg) {
    AngularQuadrature quad = build_quadrature(cfg.n_polar, cfg.n_azimuth);
    const double r_sum = std::abs(quad.weight_sum() - 1.0);
    const Vec3 fm = quad.first_moment();
    const double r_first = std::max({std::abs(fm[0]), std::abs(fm[1]), std::abs(fm[2])});
    const auto sm = quad.second_moment();
    double r_diag = 0.0, r_off = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double v = sm[3 * i + j];
            if (i == j) r_diag = std::max(r_diag, std::abs(v - 1.0 / 3.0));
            else r_off = std::max(r_off, std::abs(v));
        }

    std::vector<std::vector<std::string>> rows = {
        {"weight_sum", format_g17(r_sum)},
        {"first_moment", format_g17(r_first)},
        {"second_moment_diag", format_g17(r_diag)},
        {"second_moment_offdiag", format_g17(r_off)},
    };
    write_csv(out_path(c, "quadcheck.csv"), "moment,residual", rows);
    for (const auto& row : rows) std::cout << row[0] << " residual: " << row[1] << "\n";
    return 0;
}

int run_simulate(const Common& c, const RunConfig& cfg) {
    const PeriodicGrid grid = cfg.grid();
    AngularQuadrature quad = build_quadrature(cfg.n_polar, cfg.n_azimuth);
    const DataPreset preset = cfg.data_preset();
    ScalarField theta0 = make_theta0(grid, preset);
    DirectionalField h = make_h(grid, quad, preset, theta0);
    const VelocityField u = cfg.velocity();

    KineticParams kp;
    kp.epsilon = cfg.epsilon;
    kp.cfl = cfg.cfl;
    kp.newton_tol = cfg.newton_tol;
    kp.diffusion_solver_tol = cfg.diffusion_tol;
    kp.dt = cfg.dt_policy == "fixed" ? cfg.dt : kp.stable_dt(grid);

    const double vol = grid.cell_volume();
    std::vector<std::vector<std::string>> rows;
    auto record = [&](const KineticState& s) {
        ScalarField fbar = angular_average(quad, s.f);
        rows.push_back({format_g17(s.t), format_g17(vol * (cell_sum(s.theta) + cell_sum(fbar))),
                        format_g17(field_min(s.theta.v)), format_g17(field_max(s.theta.v)),
                        format_g17(field_min(s.f.v)), format_g17(field_max(s.f.v))});
    };
    record(KineticState{h, theta0, 0.0});
    auto snaps = run(h, theta0, kp, quad, u, cfg.t_end, cfg.snapshots, record);
    write_csv(out_path(c, "kinetic.csv"), "t,energy,theta_min,theta_max,f_min,f_max", rows);
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        const std::string tag = std::to_string(i);
        dump_scalar(out_path(c, "theta_" + tag + ".bin"), snaps[i].theta, snaps[i].t, cfg.epsilon);
        dump_directional(out_path(c, "f_" + tag + ".bin"), snaps[i].f, snaps[i].t, cfg.epsilon);
    }
    std::cout << "simulate: " << rows.size() - 1 << " steps, " << snaps.size()
              << " snapshots written to " << c.out_dir << "\n";
    return 0;
}

int run_limit_cmd(const Common& c, const RunConfig& cfg) {
    const PeriodicGrid grid = cfg.grid();
    AngularQuadrature quad = build_quadrature(cfg.n_polar, cfg.n_azimuth);
    const DataPreset preset = cfg.data_preset();
    ScalarField theta0_init = make_theta0(grid, preset);
    DirectionalField h = make_h(grid, quad, preset, theta0_init);
    const VelocityField u = cfg.velocity();

    CompatibleData data = compatible_theta00(quad, h, theta0_init);
    LimitState s{data.theta00, 0.0};
    const double vol = grid.cell_volume();
    std::vector<std::vector<std::string>> rows;
    auto record = [&](const LimitState& st) {
        double mass = 0.0;
        for (double th : st.theta0.v) mass += th + th * th * th * th;
        rows.push_back({format_g17(st.t), format_g17(vol * mass),
                        format_g17(field_min(st.theta0.v)), format_g17(field_max(st.theta0.v))});
    };
    record(s);
    std::size_t next_snap = 0;
    int dumped = 0;
    while (s.t < cfg.t_end - 1e-14) {
        double target = cfg.t_end;
        if (next_snap < cfg.snapshots.size())
            target = std::min(target, cfg.snapshots[next_snap]);
        s = limit_step(s, std::min(cfg.limit_dt, target - s.t), u);
        record(s);
        if (next_snap < cfg.snapshots.size() && s.t >= cfg.snapshots[next_snap] - 1e-12) {
            dump_scalar(out_path(c, "theta0_" + std::to_string(dumped++) + ".bin"), s.theta0,
                        s.t, 0.0);
            ++next_snap;
        }
    }
    dump_scalar(out_path(c, "theta0_final.bin"), s.theta0, s.t, 0.0);
    write_csv(out_path(c, "limit.csv"), "t,mass_theta_plus_theta4,theta_min,theta_max", rows);
    std::cout << "limit: advanced to t = " << format_g17(s.t) << "\n";
    return 0;
}

int run_layers_cmd(const Common& c, const RunConfig& cfg) {
    const PeriodicGrid grid = cfg.grid();
    AngularQuadrature quad = build_quadrature(cfg.n_polar, cfg.n_azimuth);
    const DataPreset preset = cfg.data_preset();
    ScalarField theta0_init = make_theta0(grid, preset);
    DirectionalField h = make_h(grid, quad, preset, theta0_init);

    CompatibleData data = compatible_theta00(quad, h, theta0_init);
    LayerTrajectory layer0 = zeroth_layer(quad, h, theta0_init, data.theta00, cfg.tau_max,
                                          cfg.dtau);
    LayerTrajectory layer1 = first_layer(quad, layer0, data, cfg.tau_max);

    auto traj_csv = [&](const LayerTrajectory& traj, const std::string& name) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < traj.taus.size(); ++i)
            rows.push_back({format_g17(traj.taus[i]), format_g17(norm_linf(traj.thetaI[i])),
                            format_g17(norm_linf(fI_at(quad, traj, traj.taus[i])))});
        write_csv(out_path(c, name), "tau,norm_thetaI,norm_fI", rows);
    };
    traj_csv(layer0, "layer0.csv");
    traj_csv(layer1, "layer1.csv");

    dump_scalar(out_path(c, "theta00.bin"), data.theta00, 0.0, 0.0);
    dump_scalar(out_path(c, "theta10.bin"), data.theta10, 0.0, 0.0);
    dump_scalar(out_path(c, "l0.bin"), data.l0, 0.0, 0.0);
    dump_scalar(out_path(c, "l1.bin"), data.l1, 0.0, 0.0);
    int dumped = 0;
    for (double tau : cfg.snapshots) {
        dump_scalar(out_path(c, "thetaI0_" + std::to_string(dumped) + ".bin"),
                    thetaI_at(layer0, tau), tau, 0.0);
        dump_scalar(out_path(c, "thetaI1_" + std::to_string(dumped) + ".bin"),
                    thetaI_at(layer1, tau), tau, 0.0);
        ++dumped;
    }
    std::cout << "layers: sigma_fit order 0 = " << format_g17(layer0.sigma_fit)
              << ", order 1 = " << format_g17(layer1.sigma_fit) << "\n";
    return 0;
}

int run_oracle_cmd(const Common& c, const RunConfig& cfg) {
    const PeriodicGrid grid = cfg.grid();
    AngularQuadrature quad = build_quadrature(cfg.n_polar, cfg.n_azimuth);
    const DataPreset preset = cfg.data_preset();
    const double tp = 2.0 * std::acos(-1.0);

    auto theta0_fn = [preset, grid, tp](const Vec3& x) {
        return preset.theta == DataPreset::Theta::Constant
                   ? preset.a
                   : preset.a + preset.b * std::sin(tp * x[0] / grid.length[0]);
    };
    auto h_fn = [preset, grid, tp, theta0_fn](const Vec3& x, const Vec3& w) {
        const double th = theta0_fn(x);
        const double gfac =
            preset.g == DataPreset::Perturbation::Directional ? 1.0 + w[0] : 1.0;
        return th * th * th * th + preset.eta * gfac * std::cos(tp * x[0] / grid.length[0]);
    };
    auto F_fn = [theta0_fn](double, const Vec3& x, const Vec3&) {
        const double th = theta0_fn(x);
        return th * th * th * th;  // emission frozen at the initial temperature
    };

    TransportProblem prob;
    prob.epsilon = cfg.epsilon;
    prob.lattice = grid;
    prob.quad = quad;
    prob.h = h_fn;
    prob.F = F_fn;
    prob.t_eval = cfg.t_end;

    OracleResult res = solve_fixed_point(prob);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < res.iterate_norms.size(); ++k)
        rows.push_back({std::to_string(k + 1), format_g17(res.iterate_norms[k]),
                        std::isnan(res.ratios[k]) ? "" : format_g17(res.ratios[k])});
    write_csv(out_path(c, "oracle.csv"), "iter,v_norm,ratio", rows);

    // cross-validate the grid kinetic solver (frozen source) at the config
    // resolution and at x2 refinement
    std::vector<std::vector<std::string>> vrows;
    for (int refine = 0; refine < 2; ++refine) {
        PeriodicGrid g = refine == 0
                             ? grid
                             : PeriodicGrid::make(grid.slab(0) ? 1 : 2 * grid.n[0],
                                                  grid.slab(1) ? 1 : 2 * grid.n[1],
                                                  grid.slab(2) ? 1 : 2 * grid.n[2],
                                                  grid.length[0], grid.length[1], grid.length[2]);
        DirectionalField hg(g, quad.ndirs());
        DirectionalField Fg(g, quad.ndirs());
        for (int m = 0; m < quad.ndirs(); ++m)
            for (int iz = 0; iz < g.n[2]; ++iz)
                for (int iy = 0; iy < g.n[1]; ++iy)
                    for (int ix = 0; ix < g.n[0]; ++ix) {
                        const Vec3 x = g.center(ix, iy, iz);
                        hg.at(m, g.index(ix, iy, iz)) = h_fn(x, quad.dirs[m]);
                        Fg.at(m, g.index(ix, iy, iz)) = F_fn(0.0, x, quad.dirs[m]);
                    }
        KineticParams kp;
        kp.epsilon = cfg.epsilon;
        kp.cfl = cfg.cfl;
        kp.dt = kp.stable_dt(g);
        DirectionalField sol = run_linear(hg, Fg, kp, quad, cfg.t_end);
        vrows.push_back({std::to_string(std::max({g.n[0], g.n[1], g.n[2]})),
                         format_g17(cross_validate(sol, prob, res))});
    }
    write_csv(out_path(c, "oracle_validation.csv"), "resolution,max_discrepancy", vrows);
    std::cout << "oracle: " << res.iterations << " iterations, |I|_inf = "
              << format_g17(res.max_abs()) << "\n";
    return 0;
}

int run_converge(const Common& c, const RunConfig& cfg) {
    ConvergenceReport report = run_sweep(cfg.sweep_config());
    std::vector<std::vector<std::string>> erows;
    for (const ErrorRow& r : report.rows)
        erows.push_back({format_g17(r.epsilon), format_g17(r.t), format_g17(r.err_linf_f),
                         format_g17(r.err_linf_theta), format_g17(r.err_h2_theta),
                         std::to_string(r.composite_order)});
    write_csv(out_path(c, "errors.csv"),
              "epsilon,t,err_linf_f,err_linf_theta,err_h2_theta,composite_order", erows);
    std::vector<std::vector<std::string>> rrows;
    for (const RateFit& r : report.rates)
        rrows.push_back({r.metric, std::to_string(r.composite_order), format_g17(r.slope),
                         format_g17(r.intercept), format_g17(r.max_residual), r.flag});
    write_csv(out_path(c, "rates.csv"), "metric,composite_order,slope,intercept,max_residual,flag",
              rrows);
    if (report.degenerate)
        std::cout << "converge: slope fit skipped (" << report.note << ")\n";
    else
        for (const RateFit& r : report.rates)
            if (r.composite_order == 0 && r.metric.rfind("err_linf_theta", 0) == 0)
                std::cout << "converge: " << r.metric << " slope = " << format_g17(r.slope)
                          << (r.flag.empty() ? "" : " [" + r.flag + "]") << "\n";
    return 0;
}

int run_residuals(const Common& c, const RunConfig& cfg) {
    ResidualReport report = residual_sweep(cfg.sweep_config());
    std::vector<std::vector<std::string>> rows;
    for (const ResidualRow& r : report.rows)
        rows.push_back({format_g17(r.epsilon), format_g17(r.t), format_g17(r.res_l1),
                        format_g17(r.res_l2), std::to_string(r.composite_order)});
    write_csv(out_path(c, "residuals.csv"), "epsilon,t,res_l1,res_l2,composite_order", rows);
    std::vector<std::vector<std::string>> rrows;
    for (const RateFit& r : report.rates)
        rrows.push_back({r.metric, std::to_string(r.composite_order), format_g17(r.slope),
                         format_g17(r.intercept), format_g17(r.max_residual), r.flag});
    write_csv(out_path(c, "rates.csv"),
              "metric,composite_order,slope,intercept,max_residual,flag", rrows);
    if (report.degenerate)
        std::cout << "residuals: slope fit skipped (" << report.note << ")\n";
    else
        for (const RateFit& r : report.rates)
            if (r.composite_order == 1)
                std::cout << "residuals: " << r.metric << " slope = " << format_g17(r.slope)
                          << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the radiative-transfer diffusion limit"};
    app.require_subcommand(1);

    Common common;
    CLI::App* quadcheck = app.add_subcommand("quadcheck", "angular quadrature moment residuals");
    CLI::App* simulate = app.add_subcommand("simulate", "run the kinetic solver");
    CLI::App* limit = app.add_subcommand("limit", "run the limit diffusion solver");
    CLI::App* layers = app.add_subcommand("layers", "compatible data and initial layers");
    CLI::App* oracle = app.add_subcommand("oracle", "Duhamel fixed-point oracle + validation");
    CLI::App* converge = app.add_subcommand("converge", "epsilon sweep and rate fit");
    CLI::App* residuals = app.add_subcommand("residuals", "composite residual sweep");
    for (CLI::App* cmd : {quadcheck, simulate, limit, layers, oracle, converge, residuals})
        add_common(cmd, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const RunConfig cfg = load_config(common);
        const std::string sub = app.get_subcommands().front()->get_name();
        prepare_run_dir(common, cfg, sub);
        if (sub == "quadcheck") return run_quadcheck(common, cfg);
        if (sub == "simulate") return run_simulate(common, cfg);
        if (sub == "limit") return run_limit_cmd(common, cfg);
        if (sub == "layers") return run_layers_cmd(common, cfg);
        if (sub == "oracle") return run_oracle_cmd(common, cfg);
        if (sub == "converge") return run_converge(common, cfg);
        if (sub == "residuals") return run_residuals(common, cfg);
        std::cerr << "error: usage: unknown subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::string joined;
        for (std::size_t i = 0; i < e.errors.size(); ++i)
            joined += (i ? "; " : "") + e.errors[i];
        std::cerr << "error: config: " << joined << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: invalid: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: invalid: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: runtime: " << e.what() << "\n";
        return 1;
    }
}
