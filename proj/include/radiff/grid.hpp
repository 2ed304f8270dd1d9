#pragma once

#include <array>
#include <stdexcept>

namespace radiff {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// Uniform tensor grid on the 3-torus. Axes with a single cell are "slab"
/// axes: fields are constant along them and difference operators return 0.
struct PeriodicGrid {
    std::array<int, 3> n{1, 1, 1};
    std::array<double, 3> length{1.0, 1.0, 1.0};
    std::array<double, 3> h{1.0, 1.0, 1.0};

    static PeriodicGrid make(int nx, int ny, int nz,
                             double lx = 1.0, double ly = 1.0, double lz = 1.0) {
        if (nx < 1 || ny < 1 || nz < 1)
            throw std::invalid_argument("PeriodicGrid: cell counts must be >= 1");
        if (lx <= 0 || ly <= 0 || lz <= 0)
            throw std::invalid_argument("PeriodicGrid: domain lengths must be positive");
        PeriodicGrid g;
        g.n = {nx, ny, nz};
        g.length = {lx, ly, lz};
        g.h = {lx / nx, ly / ny, lz / nz};
        return g;
    }

    int cells() const { return n[0] * n[1] * n[2]; }
    bool slab(int axis) const { return n[axis] == 1; }

    int index(int ix, int iy, int iz) const { return (iz * n[1] + iy) * n[0] + ix; }

    int wrap(int i, int axis) const {
        int m = n[axis];
        i %= m;
        return i < 0 ? i + m : i;
    }

    Vec3 center(int ix, int iy, int iz) const {
        return {(ix + 0.5) * h[0], (iy + 0.5) * h[1], (iz + 0.5) * h[2]};
    }

    double cell_volume() const { return h[0] * h[1] * h[2]; }

    // smallest spacing over non-slab axes; falls back to 1 for a fully
    // homogeneous grid (no transport CFL applies there)
    double min_h() const {
        double m = -1.0;
        for (int a = 0; a < 3; ++a)
            if (!slab(a) && (m < 0 || h[a] < m)) m = h[a];
        return m < 0 ? 1.0 : m;
    }

    bool operator==(const PeriodicGrid&) const = default;
};

}  // namespace radiff
