#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "radiff/field.hpp"
#include "radiff/operators.hpp"
#include "radiff/quadrature.hpp"
#include "radiff/velocity.hpp"

namespace radiff {

/// One time level of the full eps-dependent radiation/temperature system.
struct KineticState {
    DirectionalField f;
    ScalarField theta;
    double t = 0.0;
};

struct KineticParams {
    double epsilon = 0.1;  // in (0,1)
    double dt = 0.0;       // must respect dt <= cfl * epsilon * min(h)
    double cfl = 0.8;
    double newton_tol = 1e-12;
    int newton_max_iters = 50;
    double diffusion_solver_tol = 1e-10;

    /// Transport-limited step for this grid.
    double stable_dt(const PeriodicGrid& g) const { return cfl * epsilon * g.min_h(); }
};

/// Grey-body emission B(theta) = theta^4; rejects nonpositive temperatures.
ScalarField emission(const ScalarField& theta);

/// Implicit cell-local solve of the stiff radiation/temperature coupling:
///   eps^2 (fbar - fbar_star)/dt + fbar = theta^4
///   eps^2 (theta - theta_star)/dt     = fbar - theta^4
/// Summing the two equations forces fbar + theta = fbar_star + theta_star
/// exactly; the remaining scalar equation in theta is strictly monotone and
/// solved by safeguarded Newton with bisection fallback.
std::pair<double, double> relaxation_solve(double fbar_star, double theta_star,
                                           double eps, double dt, double tol,
                                           int max_iters = 50);

/// One Lie-split step: explicit upwind transport of f, conservative upwind
/// advection and implicit diffusion of theta, then the implicit cell-local
/// relaxation with exact directional recovery.
KineticState step(const KineticState& state, const KineticParams& params,
                  const AngularQuadrature& quad, const VelocityField& u);

/// Advance to t_end; snapshot_times must be increasing. The callback receives
/// each requested snapshot (and the final state).
std::vector<KineticState> run(const DirectionalField& h, const ScalarField& theta0,
                              const KineticParams& params, const AngularQuadrature& quad,
                              const VelocityField& u, double t_end,
                              const std::vector<double>& snapshot_times = {},
                              const std::function<void(const KineticState&)>& on_step = {});

/// Linear transport step with frozen source F in place of B(theta):
///   eps^2 df/dt + eps w.grad f + eps^2 (f - fbar) + f = F.
DirectionalField linear_step(const DirectionalField& f, const DirectionalField& F,
                             const KineticParams& params, const AngularQuadrature& quad);

/// Run the frozen-source linear problem to t_end.
DirectionalField run_linear(const DirectionalField& h, const DirectionalField& F,
                            const KineticParams& params, const AngularQuadrature& quad,
                            double t_end);

}  // namespace radiff
