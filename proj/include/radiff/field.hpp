#pragma once

#include <functional>
#include <vector>

#include "radiff/grid.hpp"

namespace radiff {

/// Cell-centered scalar field (theta-like quantities).
struct ScalarField {
    PeriodicGrid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const PeriodicGrid& g, double fill = 0.0)
        : grid(g), v(static_cast<size_t>(g.cells()), fill) {}

    static ScalarField from_function(const PeriodicGrid& g,
                                     const std::function<double(Vec3)>& fn) {
        ScalarField s(g);
        for (int iz = 0; iz < g.n[2]; ++iz)
            for (int iy = 0; iy < g.n[1]; ++iy)
                for (int ix = 0; ix < g.n[0]; ++ix)
                    s.v[g.index(ix, iy, iz)] = fn(g.center(ix, iy, iz));
        return s;
    }

    double& operator()(int ix, int iy, int iz) { return v[grid.index(ix, iy, iz)]; }
    double operator()(int ix, int iy, int iz) const { return v[grid.index(ix, iy, iz)]; }
    size_t size() const { return v.size(); }
};

/// Field over directions x grid cells (f-like quantities). Direction index is
/// outermost: value(m, c) = v[m * cells + c].
struct DirectionalField {
    PeriodicGrid grid;
    int ndirs = 0;
    std::vector<double> v;

    DirectionalField() = default;
    DirectionalField(const PeriodicGrid& g, int n_dirs, double fill = 0.0)
        : grid(g), ndirs(n_dirs), v(static_cast<size_t>(g.cells()) * n_dirs, fill) {}

    double& at(int m, int c) { return v[static_cast<size_t>(m) * grid.cells() + c]; }
    double at(int m, int c) const { return v[static_cast<size_t>(m) * grid.cells() + c]; }

    double* slice(int m) { return v.data() + static_cast<size_t>(m) * grid.cells(); }
    const double* slice(int m) const { return v.data() + static_cast<size_t>(m) * grid.cells(); }

    size_t size() const { return v.size(); }
};

inline ScalarField operator-(const ScalarField& a, const ScalarField& b) {
    ScalarField r(a.grid);
    for (size_t i = 0; i < a.v.size(); ++i) r.v[i] = a.v[i] - b.v[i];
    return r;
}

inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
    ScalarField r(a.grid);
    for (size_t i = 0; i < a.v.size(); ++i) r.v[i] = a.v[i] + b.v[i];
    return r;
}

inline ScalarField operator*(double s, const ScalarField& a) {
    ScalarField r(a.grid);
    for (size_t i = 0; i < a.v.size(); ++i) r.v[i] = s * a.v[i];
    return r;
}

inline DirectionalField operator-(const DirectionalField& a, const DirectionalField& b) {
    DirectionalField r(a.grid, a.ndirs);
    for (size_t i = 0; i < a.v.size(); ++i) r.v[i] = a.v[i] - b.v[i];
    return r;
}

inline DirectionalField operator+(const DirectionalField& a, const DirectionalField& b) {
    DirectionalField r(a.grid, a.ndirs);
    for (size_t i = 0; i < a.v.size(); ++i) r.v[i] = a.v[i] + b.v[i];
    return r;
}

inline DirectionalField operator*(double s, const DirectionalField& a) {
    DirectionalField r(a.grid, a.ndirs);
    for (size_t i = 0; i < a.v.size(); ++i) r.v[i] = s * a.v[i];
    return r;
}

}  // namespace radiff
