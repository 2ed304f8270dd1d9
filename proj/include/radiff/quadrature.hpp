#pragma once

#include <vector>

#include "radiff/field.hpp"
#include "radiff/grid.hpp"

namespace radiff {

/// Product quadrature on the unit sphere: Gauss-Legendre in cos(polar) times
/// uniform azimuth. Weights are normalized to sum to 1, so the angular
/// average of f is the plain weighted sum over directions.
struct AngularQuadrature {
    std::vector<Vec3> dirs;
    std::vector<double> weights;

    int ndirs() const { return static_cast<int>(dirs.size()); }

    double weight_sum() const;
    Vec3 first_moment() const;                   // sum w_m * dirs_m (should vanish)
    std::array<double, 9> second_moment() const; // sum w_m * dirs_m (x) dirs_m (row-major)
};

/// n_polar >= 2 Gauss-Legendre levels, n_azimuth >= 4 (even) uniform angles.
AngularQuadrature build_quadrature(int n_polar, int n_azimuth);

/// Pointwise weighted angular average over directions.
ScalarField angular_average(const AngularQuadrature& quad, const DirectionalField& f);

/// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace radiff
