#include "radiff/operators.hpp"

#include <cmath>
#include <stdexcept>

#include "radiff/threading.hpp"

namespace radiff {

namespace {

// apply fn(c, c_minus, c_plus, h) over all cells along axis a
template <class Fn>
void for_axis(const PeriodicGrid& g, int a, Fn&& fn) {
    const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
    const double h = g.h[a];
    for (int iz = 0; iz < nz; ++iz)
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix) {
                int i[3] = {ix, iy, iz};
                int im[3] = {ix, iy, iz};
                int ip[3] = {ix, iy, iz};
                im[a] = g.wrap(i[a] - 1, a);
                ip[a] = g.wrap(i[a] + 1, a);
                fn(g.index(ix, iy, iz), g.index(im[0], im[1], im[2]),
                   g.index(ip[0], ip[1], ip[2]), h);
            }
}

}  // namespace

std::array<ScalarField, 3> grad(const ScalarField& s) {
    const PeriodicGrid& g = s.grid;
    std::array<ScalarField, 3> out{ScalarField(g), ScalarField(g), ScalarField(g)};
    for (int a = 0; a < 3; ++a) {
        if (g.slab(a)) continue;
        for_axis(g, a, [&](int c, int cm, int cp, double h) {
            out[a].v[c] = (s.v[cp] - s.v[cm]) / (2.0 * h);
        });
    }
    return out;
}

ScalarField div_centered(const std::array<ScalarField, 3>& v) {
    const PeriodicGrid& g = v[0].grid;
    ScalarField out(g);
    for (int a = 0; a < 3; ++a) {
        if (g.slab(a)) continue;
        for_axis(g, a, [&](int c, int cm, int cp, double h) {
            out.v[c] += (v[a].v[cp] - v[a].v[cm]) / (2.0 * h);
        });
    }
    return out;
}

std::array<ScalarField, 3> grad_face(const ScalarField& s) {
    const PeriodicGrid& g = s.grid;
    std::array<ScalarField, 3> out{ScalarField(g), ScalarField(g), ScalarField(g)};
    for (int a = 0; a < 3; ++a) {
        if (g.slab(a)) continue;
        for_axis(g, a, [&](int c, int /*cm*/, int cp, double h) {
            out[a].v[c] = (s.v[cp] - s.v[c]) / h;
        });
    }
    return out;
}

ScalarField div_face(const std::array<ScalarField, 3>& flux) {
    const PeriodicGrid& g = flux[0].grid;
    ScalarField out(g);
    for (int a = 0; a < 3; ++a) {
        if (g.slab(a)) continue;
        for_axis(g, a, [&](int c, int cm, int /*cp*/, double h) {
            out.v[c] += (flux[a].v[c] - flux[a].v[cm]) / h;
        });
    }
    return out;
}

ScalarField laplacian(const ScalarField& s) {
    const PeriodicGrid& g = s.grid;
    ScalarField out(g);
    for (int a = 0; a < 3; ++a) {
        if (g.slab(a)) continue;
        for_axis(g, a, [&](int c, int cm, int cp, double h) {
            out.v[c] += (s.v[cp] - 2.0 * s.v[c] + s.v[cm]) / (h * h);
        });
    }
    return out;
}

namespace {

// face-centered velocity component a at face i+1/2 of the cell behind it
double face_velocity(const VelocityField& u, double t, const PeriodicGrid& g,
                     int ix, int iy, int iz, int a) {
    Vec3 x = g.center(ix, iy, iz);
    x[a] += 0.5 * g.h[a];
    return u.eval(t, x)[a];
}

template <class FaceValue>
ScalarField div_flux(const VelocityField& u, double t, const ScalarField& s,
                     FaceValue&& face_value) {
    const PeriodicGrid& g = s.grid;
    ScalarField out(g);
    if (u.is_zero()) return out;
    const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
    for (int a = 0; a < 3; ++a) {
        if (g.slab(a)) continue;
        // flux through face i+1/2, then telescoping divergence
        ScalarField flux(g);
        for (int iz = 0; iz < nz; ++iz)
            for (int iy = 0; iy < ny; ++iy)
                for (int ix = 0; ix < nx; ++ix) {
                    int i[3] = {ix, iy, iz};
                    int ip[3] = {ix, iy, iz};
                    ip[a] = g.wrap(i[a] + 1, a);
                    const int c = g.index(ix, iy, iz);
                    const int cp = g.index(ip[0], ip[1], ip[2]);
                    const double uf = face_velocity(u, t, g, ix, iy, iz, a);
                    flux.v[c] = uf * face_value(s.v[c], s.v[cp], uf);
                }
        for_axis(g, a, [&](int c, int cm, int /*cp*/, double h) {
            out.v[c] += (flux.v[c] - flux.v[cm]) / h;
        });
    }
    return out;
}

}  // namespace

ScalarField div_flux_centered(const VelocityField& u, double t, const ScalarField& s) {
    return div_flux(u, t, s, [](double sl, double sr, double) { return 0.5 * (sl + sr); });
}

ScalarField div_flux_upwind(const VelocityField& u, double t, const ScalarField& s) {
    return div_flux(u, t, s, [](double sl, double sr, double uf) { return uf > 0.0 ? sl : sr; });
}

DirectionalField upwind_transport(const AngularQuadrature& quad,
                                  const DirectionalField& f, double speed) {
    if (speed < 0.0) throw std::invalid_argument("upwind_transport: speed must be >= 0");
    const PeriodicGrid& g = f.grid;
    DirectionalField out(g, f.ndirs);
    parallel_for(f.ndirs, [&](int mb, int me) {
        for (int m = mb; m < me; ++m) {
            const double* fm = f.slice(m);
            double* om = out.slice(m);
            for (int a = 0; a < 3; ++a) {
                if (g.slab(a)) continue;
                const double wa = speed * quad.dirs[m][a];
                if (wa == 0.0) continue;
                for_axis(g, a, [&](int c, int cm, int cp, double h) {
                    om[c] += wa > 0.0 ? wa * (fm[c] - fm[cm]) / h
                                      : wa * (fm[cp] - fm[c]) / h;
                });
            }
        }
    });
    return out;
}

DirectionalField directional_grad(const AngularQuadrature& quad, const DirectionalField& f) {
    const PeriodicGrid& g = f.grid;
    DirectionalField out(g, f.ndirs);
    parallel_for(f.ndirs, [&](int mb, int me) {
        for (int m = mb; m < me; ++m) {
            const double* fm = f.slice(m);
            double* om = out.slice(m);
            for (int a = 0; a < 3; ++a) {
                if (g.slab(a)) continue;
                const double wa = quad.dirs[m][a];
                for_axis(g, a, [&](int c, int cm, int cp, double h) {
                    om[c] += wa * (fm[cp] - fm[cm]) / (2.0 * h);
                });
            }
        }
    });
    return out;
}

double norm_linf(const ScalarField& s) {
    double m = 0.0;
    for (double x : s.v) m = std::max(m, std::abs(x));
    return m;
}

double norm_linf(const DirectionalField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

double norm_l2(const ScalarField& s) {
    double acc = 0.0;
    for (double x : s.v) acc += x * x;
    return std::sqrt(acc * s.grid.cell_volume());
}

double norm_l2(const AngularQuadrature& quad, const DirectionalField& f) {
    double acc = 0.0;
    const int cells = f.grid.cells();
    for (int m = 0; m < f.ndirs; ++m) {
        const double* fm = f.slice(m);
        double dir_acc = 0.0;
        for (int c = 0; c < cells; ++c) dir_acc += fm[c] * fm[c];
        acc += quad.weights[m] * dir_acc;
    }
    return std::sqrt(acc * f.grid.cell_volume());
}

double norm_h2(const ScalarField& s) {
    double acc = norm_l2(s);
    acc *= acc;
    auto d1 = grad(s);
    for (int a = 0; a < 3; ++a) {
        if (s.grid.slab(a)) continue;
        double na = norm_l2(d1[a]);
        acc += na * na;
        auto d2 = grad(d1[a]);
        for (int b = 0; b < 3; ++b) {
            if (s.grid.slab(b)) continue;
            double nb = norm_l2(d2[b]);
            acc += nb * nb;
        }
    }
    return std::sqrt(acc);
}

double cell_sum(const ScalarField& s) {
    double acc = 0.0;
    for (double x : s.v) acc += x;
    return acc;
}

ScalarField backward_euler_diffusion(const ScalarField& b, double dt, double tol,
                                     int max_iters) {
    const PeriodicGrid& g = b.grid;
    const int n = g.cells();
    ScalarField x = b;
    auto apply = [&](const ScalarField& v) {
        ScalarField lap = laplacian(v);
        ScalarField out(g);
        for (int c = 0; c < n; ++c) out.v[c] = v.v[c] - dt * lap.v[c];
        return out;
    };

    ScalarField r = apply(x);
    for (int c = 0; c < n; ++c) r.v[c] = b.v[c] - r.v[c];
    const double target = tol * std::max(norm_linf(b), 1.0);

    ScalarField p = r;
    double rr = 0.0;
    for (int c = 0; c < n; ++c) rr += r.v[c] * r.v[c];
    int it = 0;
    while (norm_linf(r) > target && it++ < max_iters) {
        ScalarField ap = apply(p);
        double pap = 0.0;
        for (int c = 0; c < n; ++c) pap += p.v[c] * ap.v[c];
        if (pap == 0.0) break;
        const double alpha = rr / pap;
        for (int c = 0; c < n; ++c) {
            x.v[c] += alpha * p.v[c];
            r.v[c] -= alpha * ap.v[c];
        }
        double rr_new = 0.0;
        for (int c = 0; c < n; ++c) rr_new += r.v[c] * r.v[c];
        const double beta = rr_new / rr;
        rr = rr_new;
        for (int c = 0; c < n; ++c) p.v[c] = r.v[c] + beta * p.v[c];
    }

    // constants are in the kernel of the laplacian: shift so the cell sum
    // matches b exactly, keeping the step conservative
    const double shift = (cell_sum(b) - cell_sum(x)) / n;
    for (int c = 0; c < n; ++c) x.v[c] += shift;
    return x;
}

ScalarField bicgstab(const std::function<ScalarField(const ScalarField&)>& apply,
                     const ScalarField& b, const ScalarField& x0, double tol,
                     int max_iters) {
    const int n = b.grid.cells();
    auto dot2 = [n](const ScalarField& a, const ScalarField& c) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += a.v[i] * c.v[i];
        return s;
    };

    ScalarField x = x0;
    ScalarField r = apply(x);
    for (int i = 0; i < n; ++i) r.v[i] = b.v[i] - r.v[i];
    double bnorm = std::sqrt(dot2(b, b));
    const double target = tol * std::max(bnorm, 1e-300);
    if (std::sqrt(dot2(r, r)) <= target) return x;

    ScalarField rhat = r;
    ScalarField p = r;
    double rho = dot2(rhat, r);
    for (int it = 0; it < max_iters; ++it) {
        ScalarField v = apply(p);
        const double alpha = rho / dot2(rhat, v);
        ScalarField s = r;
        for (int i = 0; i < n; ++i) s.v[i] -= alpha * v.v[i];
        if (std::sqrt(dot2(s, s)) <= target) {
            for (int i = 0; i < n; ++i) x.v[i] += alpha * p.v[i];
            return x;
        }
        ScalarField t = apply(s);
        const double omega = dot2(t, s) / dot2(t, t);
        for (int i = 0; i < n; ++i) {
            x.v[i] += alpha * p.v[i] + omega * s.v[i];
            r.v[i] = s.v[i] - omega * t.v[i];
        }
        if (std::sqrt(dot2(r, r)) <= target) return x;
        const double rho_new = dot2(rhat, r);
        const double beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for (int i = 0; i < n; ++i) p.v[i] = r.v[i] + beta * (p.v[i] - omega * v.v[i]);
    }
    throw std::runtime_error("bicgstab: no convergence");
}

}  // namespace radiff
