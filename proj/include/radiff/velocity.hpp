#pragma once

#include <cmath>
#include <string>
#include <stdexcept>

#include "radiff/grid.hpp"

namespace radiff {

/// Smooth periodic velocity presets; all are C^infinity on the torus.
struct VelocityField {
    enum class Preset { Zero, Constant, TaylorGreen, CompressibleSine };

    Preset preset = Preset::Zero;
    Vec3 a{0, 0, 0};        // Constant preset vector
    double amplitude = 0.0; // TaylorGreen / CompressibleSine amplitude

    static VelocityField zero() { return {}; }
    static VelocityField constant(const Vec3& a) {
        VelocityField u;
        u.preset = Preset::Constant;
        u.a = a;
        return u;
    }
    static VelocityField taylor_green(double amp) {
        VelocityField u;
        u.preset = Preset::TaylorGreen;
        u.amplitude = amp;
        return u;
    }
    static VelocityField compressible_sine(double amp) {
        VelocityField u;
        u.preset = Preset::CompressibleSine;
        u.amplitude = amp;
        return u;
    }

    Vec3 eval(double /*t*/, const Vec3& x) const {
        const double tp = 2.0 * std::acos(-1.0);
        switch (preset) {
            case Preset::Zero:
                return {0, 0, 0};
            case Preset::Constant:
                return a;
            case Preset::TaylorGreen:
                return {amplitude * std::sin(tp * x[0]) * std::cos(tp * x[1]) * std::cos(tp * x[2]),
                        -amplitude * std::cos(tp * x[0]) * std::sin(tp * x[1]) * std::cos(tp * x[2]),
                        0.0};
            case Preset::CompressibleSine:
                return {amplitude * std::sin(tp * x[0]),
                        amplitude * std::sin(tp * x[1]),
                        amplitude * std::sin(tp * x[2])};
        }
        return {0, 0, 0};
    }

    bool is_zero() const { return preset == Preset::Zero; }
};

}  // namespace radiff
