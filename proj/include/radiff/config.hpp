#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "radiff/grid.hpp"
#include "radiff/harness.hpp"
#include "radiff/velocity.hpp"

namespace radiff {

/// Parse/validation failure; message lists every error with its line number.
struct ConfigError : std::runtime_error {
    std::vector<std::string> errors;
    explicit ConfigError(std::vector<std::string> errs);
};

/// Fully validated run configuration. The file format is INI-style:
/// `[section]` headers, `key = value` lines, `#` comments. Unknown sections
/// or keys are rejected; every run directory receives the normalized echo.
struct RunConfig {
    // [grid]
    int nx = 512, ny = 1, nz = 1;
    double lx = 1.0, ly = 1.0, lz = 1.0;

    // [quadrature]
    int n_polar = 8;
    int n_azimuth = 16;

    // [model]
    double epsilon = 0.1;
    std::string u_preset = "zero";  // zero | constant | taylor_green | compressible_sine
    double u_amplitude = 0.0;
    Vec3 u_vector{0.0, 0.0, 0.0};

    // [data]
    std::string theta0_preset = "constant";  // constant | sine
    double a = 1.0;
    double b = 0.1;
    std::string g_preset = "directional";  // isotropic | directional
    double eta = 0.05;

    // [run]
    std::string dt_policy = "cfl";  // cfl | fixed
    double dt = 0.0;                // used by the fixed policy
    double cfl = 0.8;
    double t_end = 0.1;
    std::vector<double> snapshots;
    double newton_tol = 1e-12;
    double diffusion_tol = 1e-10;
    double tau_max = 40.0;
    double dtau = 1e-2;
    double limit_dt = 5e-5;

    // [sweep]
    std::vector<double> epsilons = {0.4, 0.2, 0.1, 0.05};
    std::vector<double> t_eval = {0.05, 0.1};
    bool refinement_check = true;

    bool operator==(const RunConfig&) const = default;

    PeriodicGrid grid() const { return PeriodicGrid::make(nx, ny, nz, lx, ly, lz); }
    VelocityField velocity() const;
    DataPreset data_preset() const;
    SweepConfig sweep_config() const;
};

/// Parse and validate; throws ConfigError listing all problems.
RunConfig parse_config(const std::string& text);

/// Canonical normalized form: every effective value, fixed section and key
/// order, 17-significant-digit numbers. parse(echo(parse(t))) == parse(t).
std::string echo_config(const RunConfig& cfg);

}  // namespace radiff
