#pragma once

#include <vector>

#include "radiff/field.hpp"
#include "radiff/operators.hpp"
#include "radiff/quadrature.hpp"

namespace radiff {

/// Compatible data bridging general initial data (h, theta0) to the limit
/// system: theta00 is the unique positive root of theta^4 + theta = l0 with
/// l0 = hbar + theta0. The order-1 pieces (l1, theta10, f10) are filled in by
/// first_layer.
struct CompatibleData {
    ScalarField theta00;
    ScalarField l0;
    ScalarField theta10;
    ScalarField l1;
    DirectionalField f10;
};

/// Fast-time trajectory of one initial-layer order on a uniform tau grid.
/// Only the isotropic components are stored per node; the directional layer
/// is reconstructed on demand from its exact exponential (Duhamel) form.
struct LayerTrajectory {
    int order = 0;
    std::vector<double> taus;
    std::vector<ScalarField> thetaI;  // theta_{I,order} at each node
    double sigma_fit = 0.0;           // fitted decay rate of log |thetaI|_inf

    ScalarField theta00;      // frozen coefficient field
    DirectionalField h_fluct; // h - hbar (order-0 directional reconstruction)

    // order-1 reconstruction data
    ScalarField theta10;
    DirectionalField f10;
    DirectionalField grad_h;               // w . grad(h - hbar)
    std::vector<ScalarField> theta0_nodes; // order-0 layer along the same grid
    std::vector<ScalarField> phi;          // Duhamel integral of the isotropic source
    std::vector<ScalarField> psi;          // Duhamel integral of theta_{I,0}

    double dtau() const { return taus.size() > 1 ? taus[1] - taus[0] : 1e-2; }
};

/// Scalar root of theta^4 + theta = l0, l0 > 0; safeguarded Newton with a
/// bisection bracket, residual below 1e-12 * max(1, l0).
double compatible_root(double l0);

/// Pointwise l0 = hbar + theta0 and theta00 = root of theta^4 + theta = l0.
CompatibleData compatible_theta00(const AngularQuadrature& quad, const DirectionalField& h,
                                  const ScalarField& theta0_init);

/// Integrate the order-0 layer ODE
///   d/dtau thetaI + (1+4 theta00^3) thetaI = -6 theta00^2 thetaI^2
///                                            - 4 theta00 thetaI^3 - thetaI^4
/// by RK4 from thetaI(0) = theta0_init - theta00, truncated when the layer
/// has decayed below 1e-12 or at tau_max. The directional layer is exact:
///   f_{I,0}(tau) = e^{-tau} (h - hbar) - thetaI(tau),
/// which makes fbar_{I,0} + thetaI identically zero up to quadrature roundoff.
LayerTrajectory zeroth_layer(const AngularQuadrature& quad, const DirectionalField& h,
                             const ScalarField& theta0_init, const ScalarField& theta00,
                             double tau_max = 40.0, double dtau = 1e-2);

/// Build l1 = -int_0^inf <w . grad f_{I,0}> dtau (trapezoid on the stored tau
/// grid plus the exact exponential tail), theta10 = l1 / (1+4 theta00^3),
/// f10 = 4 theta00^3 theta10 - w . grad theta00^4, then integrate the coupled
/// order-1 layer system by RK4. The directional first layer is reconstructed
/// from stored isotropic Duhamel integrals phi, psi:
///   f_{I,1}(tau) = -e^{-tau} f10 - tau e^{-tau} w.grad(h - hbar)
///                  + phi(tau) + w . grad psi(tau).
LayerTrajectory first_layer(const AngularQuadrature& quad, const LayerTrajectory& zeroth,
                            CompatibleData& data, double tau_max = 40.0);

/// Layer temperature at arbitrary tau >= 0: exact at stored nodes, a short
/// RK4 step from the preceding node otherwise (keeps difference quotients in
/// tau clean, which interpolation would not).
ScalarField thetaI_at(const LayerTrajectory& traj, double tau);

/// Directional layer at arbitrary tau via the exponential reconstruction.
DirectionalField fI_at(const AngularQuadrature& quad, const LayerTrajectory& traj, double tau);

/// Composite approximation at slow time t (tau = t/eps^2). Order 0:
/// theta_comp = theta0 + theta_{I,0}, f_comp = theta0^4 + f_{I,0}.
struct CompositeFields {
    DirectionalField f;
    ScalarField theta;
};
CompositeFields composite(const AngularQuadrature& quad, const ScalarField& theta0,
                          const LayerTrajectory& layer0, double eps, double t);

/// Order-0+1 composite: adds eps * (theta1 + theta_{I,1}) and
/// eps * (f1 + f_{I,1}) with f1 = 4 theta0^3 theta1 - w . grad theta0^4.
CompositeFields composite(const AngularQuadrature& quad, const ScalarField& theta0,
                          const ScalarField& theta1, const LayerTrajectory& layer0,
                          const LayerTrajectory& layer1, double eps, double t);

/// Picard iteration on the Duhamel form of the scalar order-0 layer ODE for a
/// single cell; retained as an independent cross-check of the RK4 integrator.
std::vector<double> layer_picard(double theta00, double thetaI_init, double tau_max,
                                 double dtau, double tol = 1e-12, int max_iters = 200);

}  // namespace radiff
