#pragma once

#include <functional>
#include <vector>

#include "radiff/field.hpp"
#include "radiff/grid.hpp"
#include "radiff/quadrature.hpp"

namespace radiff {

/// Evaluable radiation intensity I(t, x, w).
using Evaluable = std::function<double(double, const Vec3&, const Vec3&)>;

/// Mesh-free linear transport problem
///   eps^2 dI/dt + eps w.grad I + eps^2 (I - Ibar) + I = F,  I(0) = h,
/// solved by Picard iteration on its Duhamel (characteristics) form. The
/// lattice grid only fixes the periodic box and the tabulation resolution for
/// the angular-average table; it is not a discretization of the operator.
struct TransportProblem {
    double epsilon = 0.1;
    PeriodicGrid lattice;
    AngularQuadrature quad;
    std::function<double(const Vec3&, const Vec3&)> h;  // h(x, w)
    Evaluable F;                                        // F(t, x, w)
    double t_eval = 0.1;

    int panels_per_unit_tau = 64;  // 3-point Gauss per panel along characteristics
    double s_spacing = 1.0 / 32.0; // fast-time spacing of the Ibar table
    std::vector<Vec3> sample_points;  // default: 5 per non-slab axis, tensor product
};

/// One application of the Duhamel map: returns the next Picard iterate as a
/// closure,
///   I(t,x,w) = h(x - (t/eps) w, w) e^{-(1+eps^2) t/eps^2}
///            + int_0^{t/eps^2} (eps^2 Ibar_prev + F)(eps^2 s, x - eps(t/eps^2 - s) w, w)
///                              e^{-(1+eps^2)(t/eps^2 - s)} ds,
/// with backtraced positions wrapped periodically.
Evaluable duhamel_apply(const Evaluable& I_prev, const TransportProblem& prob);

struct OracleResult {
    std::vector<Vec3> sample_points;
    std::vector<double> sample_values;  // index = point * ndirs + dir
    std::vector<double> iterate_norms;  // sup of successive differences per iteration
    std::vector<double> ratios;         // iterate_norms[k+1] / iterate_norms[k]
    int iterations = 0;

    double max_abs() const;
};

/// Picard iteration to the fixed point. The angular average of each iterate
/// is tabulated on (fast time) x lattice and interpolated along backtraced
/// characteristics (cubic in time, 6-point Lagrange per periodic axis); the
/// contraction of the map damps the interpolation error. Norms are measured
/// over the table and the sample set; the measured ratios obey the
/// eps^2/(1+eps^2) contraction bound.
OracleResult solve_fixed_point(const TransportProblem& prob, double tol = 1e-12,
                               int max_iters = 100);

/// Periodic trilinear sample of one direction slice at a physical point.
double sample_trilinear(const DirectionalField& f, int m, const Vec3& x);

/// Max discrepancy between a grid solution of the same linear problem and the
/// oracle values over the sample set.
double cross_validate(const DirectionalField& grid_solution, const TransportProblem& prob,
                      const OracleResult& oracle);

/// The default sample set for a problem (5 points per non-slab axis).
std::vector<Vec3> default_sample_points(const PeriodicGrid& g);

}  // namespace radiff
