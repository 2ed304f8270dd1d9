#pragma once

#include "radiff/field.hpp"
#include "radiff/operators.hpp"
#include "radiff/quadrature.hpp"
#include "radiff/velocity.hpp"

namespace radiff {

/// State of the limiting nonlinear diffusion system; the radiation field is
/// derived: f0 = theta0^4.
struct LimitState {
    ScalarField theta0;
    double t = 0.0;
};

/// Order-1 interior correction field.
struct Order1State {
    ScalarField theta1;
    double t = 0.0;
};

struct LimitParams {
    double picard_tol = 1e-10;
    int picard_max_iters = 100;
    double linear_tol = 1e-13;
    int max_halvings = 5;
};

/// Backward-Euler step of d/dt(theta + theta^4) + div(u theta)
/// - lap(theta + theta^4/3) = 0, solved by Picard iteration with lagged
/// coefficients. The discretization conserves the cell sum of theta + theta^4
/// up to the linear-solver residual. Halves dt internally on Picard stall.
LimitState limit_step(const LimitState& s, double dt, const VelocityField& u,
                      const LimitParams& params = {});

/// Backward-Euler step of the linear order-1 equation
/// d/dt((1+4 theta0^3) theta1) + div(u theta1) - lap(theta1 + (4/3) theta0^3 theta1) = 0
/// with theta0 coefficients lagged to the new time level.
Order1State order1_step(const ScalarField& theta0_old, const ScalarField& theta0_new,
                        const Order1State& s1, double dt, const VelocityField& u,
                        const LimitParams& params = {});

/// f1 = 4 theta0^3 theta1 - w . grad(theta0^4) (centered gradient).
DirectionalField order1_f(const AngularQuadrature& quad, const ScalarField& theta0,
                          const ScalarField& theta1);

/// Residual operators of the full system, evaluated with the core discrete
/// operators; time derivatives are supplied (centered snapshot differences).
DirectionalField residual_L1(const AngularQuadrature& quad, const DirectionalField& f,
                             const DirectionalField& df_dt, const ScalarField& theta,
                             double eps);
ScalarField residual_L2(const AngularQuadrature& quad, const DirectionalField& f,
                        const ScalarField& theta, const ScalarField& dtheta_dt,
                        const VelocityField& u, double t, double eps);

}  // namespace radiff
