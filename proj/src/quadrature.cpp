#include "radiff/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace radiff {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-like initial guess, refined by Newton on P_n
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

AngularQuadrature build_quadrature(int n_polar, int n_azimuth) {
    if (n_polar < 2)
        throw std::invalid_argument("build_quadrature: n_polar must be >= 2");
    if (n_azimuth < 4 || n_azimuth % 2 != 0)
        throw std::invalid_argument("build_quadrature: n_azimuth must be even and >= 4");

    std::vector<double> mu, wmu;
    gauss_legendre(n_polar, mu, wmu);

    const double pi = std::acos(-1.0);
    AngularQuadrature q;
    q.dirs.reserve(static_cast<size_t>(n_polar) * n_azimuth);
    q.weights.reserve(static_cast<size_t>(n_polar) * n_azimuth);
    for (int i = 0; i < n_polar; ++i) {
        double s = std::sqrt(std::max(0.0, 1.0 - mu[i] * mu[i]));
        for (int j = 0; j < n_azimuth; ++j) {
            double phi = 2.0 * pi * (j + 0.5) / n_azimuth;
            q.dirs.push_back({s * std::cos(phi), s * std::sin(phi), mu[i]});
            // GL weights sum to 2 over mu; fold in 1/(2*n_azimuth) so the
            // total is 1 (the 1/|S^2| of the angular average)
            q.weights.push_back(wmu[i] / (2.0 * n_azimuth));
        }
    }
    return q;
}

double AngularQuadrature::weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

Vec3 AngularQuadrature::first_moment() const {
    Vec3 m{0, 0, 0};
    for (size_t i = 0; i < dirs.size(); ++i) m = m + weights[i] * dirs[i];
    return m;
}

std::array<double, 9> AngularQuadrature::second_moment() const {
    std::array<double, 9> m{};
    for (size_t i = 0; i < dirs.size(); ++i)
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                m[3 * r + c] += weights[i] * dirs[i][r] * dirs[i][c];
    return m;
}

ScalarField angular_average(const AngularQuadrature& quad, const DirectionalField& f) {
    ScalarField out(f.grid);
    const int cells = f.grid.cells();
    // fixed direction-major accumulation order: bit-stable across thread counts
    for (int m = 0; m < f.ndirs; ++m) {
        const double w = quad.weights[m];
        const double* fm = f.slice(m);
        for (int c = 0; c < cells; ++c) out.v[c] += w * fm[c];
    }
    return out;
}

}  // namespace radiff
