#pragma once

#include <string>
#include <utility>
#include <vector>

#include "radiff/field.hpp"
#include "radiff/layers.hpp"
#include "radiff/quadrature.hpp"
#include "radiff/velocity.hpp"

namespace radiff {

/// Initial-data presets: theta0 is constant or a + b sin(2 pi x1); h is
/// (theta0)^4 plus eta times a spatial bump, optionally tilted in direction.
struct DataPreset {
    enum class Theta { Constant, Sine };
    enum class Perturbation { Isotropic, Directional };
    Theta theta = Theta::Constant;
    double a = 1.0;
    double b = 0.1;
    Perturbation g = Perturbation::Directional;
    double eta = 0.05;
};

ScalarField make_theta0(const PeriodicGrid& grid, const DataPreset& preset);
DirectionalField make_h(const PeriodicGrid& grid, const AngularQuadrature& quad,
                        const DataPreset& preset, const ScalarField& theta0);

struct SweepConfig {
    std::vector<double> epsilons = {0.4, 0.2, 0.1, 0.05};
    std::vector<double> t_eval = {0.05, 0.1};
    PeriodicGrid grid = PeriodicGrid::make(512, 1, 1);
    int n_polar = 8;
    int n_azimuth = 16;
    DataPreset data;
    VelocityField u;  // default zero
    bool refinement_check = true;
    double cfl = 0.8;
    double tau_max = 40.0;
    double dtau = 1e-2;
    double limit_dt = 5e-5;
};

struct ErrorRow {
    double epsilon = 0.0;
    double t = 0.0;
    double err_linf_f = 0.0;
    double err_linf_theta = 0.0;
    double err_h2_theta = 0.0;
    int composite_order = 0;
};

struct RateFit {
    std::string metric;
    int composite_order = 0;
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
    std::string flag;  // empty, "degenerate", or "discretization-limited"
};

struct ConvergenceReport {
    std::vector<ErrorRow> rows;  // epsilon descending, then t, then order
    std::vector<RateFit> rates;
    bool degenerate = false;
    std::string note;
};

struct RateResult {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};

/// Log-log least squares over (eps, err) pairs; needs >= 3 points, err > 0.
RateResult fit_rate(const std::vector<std::pair<double, double>>& points);

/// Run the kinetic solver across the sweep, measure errors against the
/// order-0 and order-0+1 composites, and fit rates. With refinement_check the
/// largest and smallest eps are rerun at doubled resolution and any order-0
/// error moving by more than 10% marks the affected fits
/// "discretization-limited".
ConvergenceReport run_sweep(const SweepConfig& cfg);

struct ResidualRow {
    double epsilon = 0.0;
    double t = 0.0;
    double res_l1 = 0.0;
    double res_l2 = 0.0;
    int composite_order = 0;
};

struct ResidualReport {
    std::vector<ResidualRow> rows;
    std::vector<RateFit> rates;
    bool degenerate = false;
    std::string note;
};

/// Evaluate the full-system residual operators on the composite itself (time
/// derivatives by centered snapshot differences with spacing
/// min(1e-3, 5e-3 eps^2)) and fit the decay rate in eps. The order-0+1
/// composite should give slope >= 1.6; order 0 is reported for contrast.
ResidualReport residual_sweep(const SweepConfig& cfg);

}  // namespace radiff
