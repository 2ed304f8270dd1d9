#pragma once

#include <array>
#include <functional>

#include "radiff/field.hpp"
#include "radiff/quadrature.hpp"
#include "radiff/velocity.hpp"

namespace radiff {

// --- differences (all periodic; slab axes contribute 0) ---

/// Second-order centered gradient at cell centers.
std::array<ScalarField, 3> grad(const ScalarField& s);

/// Centered divergence of a cell-centered vector field.
ScalarField div_centered(const std::array<ScalarField, 3>& v);

/// Face gradient: component a holds (s[i+1]-s[i])/h at face i+1/2.
std::array<ScalarField, 3> grad_face(const ScalarField& s);

/// Divergence of face fluxes: (F[i+1/2]-F[i-1/2])/h. div_face(grad_face(s))
/// reproduces the 7-point laplacian exactly.
ScalarField div_face(const std::array<ScalarField, 3>& flux);

/// Standard 7-point periodic laplacian.
ScalarField laplacian(const ScalarField& s);

/// Conservative centered flux form of div(u s); cell sum is exactly 0.
ScalarField div_flux_centered(const VelocityField& u, double t, const ScalarField& s);

/// Conservative first-order upwind flux form of div(u s).
ScalarField div_flux_upwind(const VelocityField& u, double t, const ScalarField& s);

/// Per-direction first-order upwind discretization of speed*(w_m . grad f).
/// Conservative: the cell sum over each direction slice is exactly 0.
DirectionalField upwind_transport(const AngularQuadrature& quad,
                                  const DirectionalField& f, double speed);

/// Centered w_m . grad of each direction slice (used to build expansion fields).
DirectionalField directional_grad(const AngularQuadrature& quad, const DirectionalField& f);

// --- norms ---

double norm_linf(const ScalarField& s);
double norm_linf(const DirectionalField& f);
/// Cell-volume-weighted L2; directional fields additionally weight by quadrature.
double norm_l2(const ScalarField& s);
double norm_l2(const AngularQuadrature& quad, const DirectionalField& f);
/// sqrt(|s|_2^2 + sum_i |D_i s|_2^2 + sum_ij |D_i D_j s|_2^2), centered differences.
double norm_h2(const ScalarField& s);

double cell_sum(const ScalarField& s);

// --- linear solves ---

/// Solve (I - dt*laplacian) x = b by conjugate gradients; initial guess b.
/// Stops at |r|_inf <= tol * max(|b|_inf, 1). The returned x is shifted by a
/// constant so that the cell sum of x equals the cell sum of b exactly
/// (constants are in the kernel of the laplacian).
ScalarField backward_euler_diffusion(const ScalarField& b, double dt, double tol,
                                     int max_iters = 10000);

/// Matrix-free BiCGStab for a general sparse operator; initial guess x0.
/// Stops at |r|_2 <= tol * max(|b|_2, tiny).
ScalarField bicgstab(const std::function<ScalarField(const ScalarField&)>& apply,
                     const ScalarField& b, const ScalarField& x0, double tol,
                     int max_iters = 10000);

}  // namespace radiff
