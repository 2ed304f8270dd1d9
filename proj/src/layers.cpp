#include "radiff/layers.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "radiff/limit.hpp"
#include "radiff/threading.hpp"

namespace radiff {

namespace {

inline double pow3(double x) { return x * x * x; }
inline double pow4(double x) { double x2 = x * x; return x2 * x2; }

// order-0 layer right-hand side: full quartic expansion of
// -(thetaI + B(theta00 + thetaI) - B(theta00))
inline double rhs0(double a, double th) {
    return -((1.0 + 4.0 * pow3(a)) * th + th * th * (6.0 * a * a + th * (4.0 * a + th)));
}

inline double rk4_theta0(double a, double th, double s) {
    const double k1 = rhs0(a, th);
    const double k2 = rhs0(a, th + 0.5 * s * k1);
    const double k3 = rhs0(a, th + 0.5 * s * k2);
    const double k4 = rhs0(a, th + s * k3);
    return th + (s / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// coupled order-0/1 layer state at one cell: the linear theta_{I,1} equation
// plus the two isotropic Duhamel integrals needed to rebuild f_{I,1}
struct L1State {
    double th0, th1, phi, psi;
};

inline L1State l1_rhs(double a, double t10, const L1State& y) {
    const double a3 = pow3(a);
    const double b3 = pow3(a + y.th0);
    L1State d;
    d.th0 = rhs0(a, y.th0);
    d.th1 = -(1.0 + 4.0 * b3) * y.th1 - 4.0 * (b3 - a3) * t10;
    d.phi = -y.phi + 4.0 * b3 * (t10 + y.th1) - 4.0 * a3 * t10;
    d.psi = -y.psi + y.th0;
    return d;
}

inline L1State l1_axpy(const L1State& y, double s, const L1State& d) {
    return {y.th0 + s * d.th0, y.th1 + s * d.th1, y.phi + s * d.phi, y.psi + s * d.psi};
}

inline L1State rk4_layer1(double a, double t10, const L1State& y, double s) {
    const L1State k1 = l1_rhs(a, t10, y);
    const L1State k2 = l1_rhs(a, t10, l1_axpy(y, 0.5 * s, k1));
    const L1State k3 = l1_rhs(a, t10, l1_axpy(y, 0.5 * s, k2));
    const L1State k4 = l1_rhs(a, t10, l1_axpy(y, s, k3));
    L1State out = y;
    const double c = s / 6.0;
    out.th0 += c * (k1.th0 + 2.0 * k2.th0 + 2.0 * k3.th0 + k4.th0);
    out.th1 += c * (k1.th1 + 2.0 * k2.th1 + 2.0 * k3.th1 + k4.th1);
    out.phi += c * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
    out.psi += c * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi);
    return out;
}

// least-squares slope of log(norm) vs tau over nodes above the noise floor
double fit_sigma(const std::vector<double>& taus, const std::vector<double>& norms) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int k = 0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (norms[i] <= 1e-11) continue;
        const double x = taus[i], y = std::log(norms[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++k;
    }
    if (k < 3) return 0.0;
    const double det = k * sxx - sx * sx;
    if (det == 0.0) return 0.0;
    return -(k * sxy - sx * sy) / det;
}

std::size_t node_below(const LayerTrajectory& traj, double tau) {
    const double dt = traj.dtau();
    auto i = static_cast<std::size_t>(std::floor(tau / dt + 1e-9));
    if (i >= traj.taus.size()) i = traj.taus.size() - 1;
    return i;
}

}  // namespace

double compatible_root(double l0) {
    if (!(l0 > 0.0)) throw std::domain_error("compatible_root: l0 must be positive");
    // root lies in (0, min(l0, l0^{1/4})]
    double lo = 0.0;
    double hi = std::min(l0, std::pow(l0, 0.25));
    double th = hi;
    const double scale = std::max(1.0, l0);
    for (int it = 0; it < 200; ++it) {
        const double res = pow4(th) + th - l0;
        // run to stagnation: the monotone residual reaches a few ulps of l0
        if (std::abs(res) <= 1e-15 * scale) return th;
        if (res > 0.0) hi = th; else lo = th;
        double next = th - res / (4.0 * pow3(th) + 1.0);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == th || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * th)
            return th;
        th = next;
    }
    return th;
}

CompatibleData compatible_theta00(const AngularQuadrature& quad, const DirectionalField& h,
                                  const ScalarField& theta0_init) {
    const PeriodicGrid& g = theta0_init.grid;
    if (!(h.grid == g))
        throw std::invalid_argument("compatible_theta00: grid mismatch");
    for (double x : theta0_init.v)
        if (!(x > 0.0)) throw std::domain_error("compatible_theta00: nonpositive theta0");

    CompatibleData data;
    data.l0 = angular_average(quad, h);
    const int n = g.cells();
    for (int c = 0; c < n; ++c) data.l0.v[c] += theta0_init.v[c];
    data.theta00 = ScalarField(g);
    parallel_for(n, [&](int b, int e) {
        for (int c = b; c < e; ++c) data.theta00.v[c] = compatible_root(data.l0.v[c]);
    });
    return data;
}

LayerTrajectory zeroth_layer(const AngularQuadrature& quad, const DirectionalField& h,
                             const ScalarField& theta0_init, const ScalarField& theta00,
                             double tau_max, double dtau) {
    const PeriodicGrid& g = theta00.grid;
    if (!(h.grid == g) || !(theta0_init.grid == g))
        throw std::invalid_argument("zeroth_layer: grid mismatch");
    if (!(dtau > 0.0) || !(tau_max >= dtau))
        throw std::invalid_argument("zeroth_layer: need 0 < dtau <= tau_max");

    LayerTrajectory traj;
    traj.order = 0;
    traj.theta00 = theta00;

    ScalarField hbar = angular_average(quad, h);
    traj.h_fluct = DirectionalField(g, h.ndirs);
    const int n = g.cells();
    for (int m = 0; m < h.ndirs; ++m) {
        const double* src = h.slice(m);
        double* dst = traj.h_fluct.slice(m);
        for (int c = 0; c < n; ++c) dst[c] = src[c] - hbar.v[c];
    }
    const double hnorm = norm_linf(traj.h_fluct);

    ScalarField th = theta0_init - theta00;
    std::vector<double> norms;
    double tau = 0.0;
    auto push = [&](const ScalarField& f) {
        traj.taus.push_back(tau);
        traj.thetaI.push_back(f);
        norms.push_back(norm_linf(f));
    };
    push(th);
    const double norm0 = norms[0];
    if (norm0 <= 1e-13 && hnorm <= 1e-13) return traj;  // well-prepared: layer is zero

    while (tau < tau_max - 1e-12) {
        ScalarField next(g);
        parallel_for(n, [&](int b, int e) {
            for (int c = b; c < e; ++c)
                next.v[c] = rk4_theta0(theta00.v[c], th.v[c], dtau);
        });
        th = std::move(next);
        tau += dtau;
        push(th);
        for (int c = 0; c < n; ++c)
            if (!(theta00.v[c] + th.v[c] > 0.0))
                throw std::domain_error("zeroth_layer: composite temperature left (0, inf)");
        if (norms.back() > norm0 * (1.0 + 1e-6) + 1e-12)
            throw std::runtime_error("zeroth_layer: layer amplitude growing "
                                     "(smallness hypothesis violated)");
        if (norms.back() <= 1e-12 && std::exp(-tau) * hnorm + norms.back() <= 1e-12) break;
    }
    traj.sigma_fit = fit_sigma(traj.taus, norms);
    return traj;
}

LayerTrajectory first_layer(const AngularQuadrature& quad, const LayerTrajectory& zeroth,
                            CompatibleData& data, double tau_max) {
    if (zeroth.order != 0 || zeroth.taus.empty())
        throw std::invalid_argument("first_layer: needs a populated order-0 trajectory");
    const PeriodicGrid& g = data.theta00.grid;
    const int n = g.cells();
    const double dtau = zeroth.dtau();

    // l1 = -int_0^inf <w . grad f_{I,0}> dtau. The thetaI part of f_{I,0} is
    // isotropic and averages against <w> = 0, so the integrand is exactly
    // e^{-tau} <w . grad(h - hbar)> and the integral evaluates in closed form
    // (int_0^inf e^{-tau} dtau = 1).
    DirectionalField gh = directional_grad(quad, zeroth.h_fluct);
    ScalarField avg_gh = angular_average(quad, gh);
    data.l1 = -1.0 * avg_gh;

    data.theta10 = ScalarField(g);
    for (int c = 0; c < n; ++c)
        data.theta10.v[c] = data.l1.v[c] / (1.0 + 4.0 * pow3(data.theta00.v[c]));
    data.f10 = order1_f(quad, data.theta00, data.theta10);

    LayerTrajectory traj;
    traj.order = 1;
    traj.theta00 = data.theta00;
    traj.theta10 = data.theta10;
    traj.f10 = data.f10;
    traj.grad_h = std::move(gh);
    traj.h_fluct = zeroth.h_fluct;

    ScalarField th0 = zeroth.thetaI.front();
    ScalarField th1 = -1.0 * data.theta10;
    ScalarField phi(g), psi(g);
    std::vector<double> norms;
    double tau = 0.0;
    auto push = [&]() {
        traj.taus.push_back(tau);
        traj.theta0_nodes.push_back(th0);
        traj.thetaI.push_back(th1);
        traj.phi.push_back(phi);
        traj.psi.push_back(psi);
        norms.push_back(norm_linf(th1));
    };
    push();
    auto iso_norm = [&]() {
        return std::max(std::max(norm_linf(th0), norm_linf(th1)),
                        std::max(norm_linf(phi), norm_linf(psi)));
    };
    if (iso_norm() <= 1e-13) {
        traj.sigma_fit = 0.0;  // f_{I,1} is still reconstructed from f10/grad_h
        return traj;
    }
    const double norm0 = norms[0];

    while (tau < tau_max - 1e-12) {
        ScalarField n0(g), n1(g), nphi(g), npsi(g);
        parallel_for(n, [&](int b, int e) {
            for (int c = b; c < e; ++c) {
                L1State y{th0.v[c], th1.v[c], phi.v[c], psi.v[c]};
                y = rk4_layer1(data.theta00.v[c], data.theta10.v[c], y, dtau);
                n0.v[c] = y.th0;
                n1.v[c] = y.th1;
                nphi.v[c] = y.phi;
                npsi.v[c] = y.psi;
            }
        });
        th0 = std::move(n0);
        th1 = std::move(n1);
        phi = std::move(nphi);
        psi = std::move(npsi);
        tau += dtau;
        push();
        if (norms.back() > 10.0 * std::max(norm0, 1e-6))
            throw std::runtime_error("first_layer: layer amplitude growing "
                                     "(smallness hypothesis violated)");
        if (iso_norm() <= 1e-13) break;
    }
    traj.sigma_fit = fit_sigma(traj.taus, norms);
    return traj;
}

namespace {

// advance the order-1 layer state from node i to tau (one short step inside
// the grid, uniform steps past the stored end)
void layer1_at(const LayerTrajectory& traj, double tau, ScalarField& th0, ScalarField& th1,
               ScalarField& phi, ScalarField& psi) {
    const std::size_t i = node_below(traj, tau);
    th0 = traj.theta0_nodes[i];
    th1 = traj.thetaI[i];
    phi = traj.phi[i];
    psi = traj.psi[i];
    if (traj.taus.size() == 1 && norm_linf(th0) <= 1e-13 && norm_linf(th1) <= 1e-13 &&
        norm_linf(phi) <= 1e-13 && norm_linf(psi) <= 1e-13)
        return;  // degenerate trajectory: state is identically zero
    double remaining = tau - traj.taus[i];
    const double dt = traj.dtau();
    const int n = th0.grid.cells();
    while (remaining > 1e-14) {
        const double s = std::min(remaining, dt);
        parallel_for(n, [&](int b, int e) {
            for (int c = b; c < e; ++c) {
                L1State y{th0.v[c], th1.v[c], phi.v[c], psi.v[c]};
                y = rk4_layer1(traj.theta00.v[c], traj.theta10.v[c], y, s);
                th0.v[c] = y.th0;
                th1.v[c] = y.th1;
                phi.v[c] = y.phi;
                psi.v[c] = y.psi;
            }
        });
        remaining -= s;
    }
}

}  // namespace

ScalarField thetaI_at(const LayerTrajectory& traj, double tau) {
    if (traj.taus.empty()) throw std::invalid_argument("thetaI_at: empty trajectory");
    if (tau < -1e-15) throw std::domain_error("thetaI_at: negative tau");
    if (tau < 0.0) tau = 0.0;
    if (traj.order == 0) {
        const std::size_t i = node_below(traj, tau);
        ScalarField th = traj.thetaI[i];
        if (traj.taus.size() == 1 && norm_linf(th) <= 1e-13) return th;
        double remaining = tau - traj.taus[i];
        const double dt = traj.dtau();
        const int n = th.grid.cells();
        while (remaining > 1e-14) {
            const double s = std::min(remaining, dt);
            parallel_for(n, [&](int b, int e) {
                for (int c = b; c < e; ++c)
                    th.v[c] = rk4_theta0(traj.theta00.v[c], th.v[c], s);
            });
            remaining -= s;
        }
        return th;
    }
    ScalarField th0, th1, phi, psi;
    layer1_at(traj, tau, th0, th1, phi, psi);
    return th1;
}

DirectionalField fI_at(const AngularQuadrature& quad, const LayerTrajectory& traj, double tau) {
    if (tau < -1e-15) throw std::domain_error("fI_at: negative tau");
    if (tau < 0.0) tau = 0.0;
    const PeriodicGrid& g = traj.theta00.grid;
    const int n = g.cells();
    const double damp = std::exp(-tau);
    DirectionalField out(g, quad.ndirs());
    if (traj.order == 0) {
        ScalarField th = thetaI_at(traj, tau);
        for (int m = 0; m < out.ndirs; ++m) {
            const double* hf = traj.h_fluct.slice(m);
            double* dst = out.slice(m);
            for (int c = 0; c < n; ++c) dst[c] = damp * hf[c] - th.v[c];
        }
        return out;
    }
    ScalarField th0, th1, phi, psi;
    layer1_at(traj, tau, th0, th1, phi, psi);
    auto gp = grad(psi);
    for (int m = 0; m < out.ndirs; ++m) {
        const Vec3& w = quad.dirs[m];
        const double* f10 = traj.f10.slice(m);
        const double* gh = traj.grad_h.slice(m);
        double* dst = out.slice(m);
        for (int c = 0; c < n; ++c)
            dst[c] = -damp * f10[c] - tau * damp * gh[c] + phi.v[c]
                     + w[0] * gp[0].v[c] + w[1] * gp[1].v[c] + w[2] * gp[2].v[c];
    }
    return out;
}

CompositeFields composite(const AngularQuadrature& quad, const ScalarField& theta0,
                          const LayerTrajectory& layer0, double eps, double t) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("composite: eps not in (0,1)");
    if (t < 0.0) throw std::domain_error("composite: negative time");
    const double tau = t / (eps * eps);
    const PeriodicGrid& g = theta0.grid;
    const int n = g.cells();

    CompositeFields r;
    r.theta = theta0 + thetaI_at(layer0, tau);
    r.f = fI_at(quad, layer0, tau);
    for (int m = 0; m < r.f.ndirs; ++m) {
        double* dst = r.f.slice(m);
        for (int c = 0; c < n; ++c) dst[c] += pow4(theta0.v[c]);
    }
    return r;
}

CompositeFields composite(const AngularQuadrature& quad, const ScalarField& theta0,
                          const ScalarField& theta1, const LayerTrajectory& layer0,
                          const LayerTrajectory& layer1, double eps, double t) {
    CompositeFields r = composite(quad, theta0, layer0, eps, t);
    if (layer1.order != 1) throw std::invalid_argument("composite: layer1 has wrong order");
    const double tau = t / (eps * eps);
    const int n = theta0.grid.cells();

    ScalarField th1I = thetaI_at(layer1, tau);
    for (int c = 0; c < n; ++c) r.theta.v[c] += eps * (theta1.v[c] + th1I.v[c]);

    DirectionalField f1 = order1_f(quad, theta0, theta1);
    DirectionalField fI1 = fI_at(quad, layer1, tau);
    for (int m = 0; m < r.f.ndirs; ++m) {
        double* dst = r.f.slice(m);
        const double* a = f1.slice(m);
        const double* b = fI1.slice(m);
        for (int c = 0; c < n; ++c) dst[c] += eps * (a[c] + b[c]);
    }
    return r;
}

std::vector<double> layer_picard(double theta00, double thetaI_init, double tau_max,
                                 double dtau, double tol, int max_iters) {
    if (!(dtau > 0.0) || !(tau_max >= dtau))
        throw std::invalid_argument("layer_picard: need 0 < dtau <= tau_max");
    const double a = theta00;
    const double sigma = 1.0 + 4.0 * pow3(a);
    auto nonlin = [&](double th) {
        return -th * th * (6.0 * a * a + th * (4.0 * a + th));
    };
    const auto npts = static_cast<std::size_t>(std::floor(tau_max / dtau + 1e-9)) + 1;
    const double decay = std::exp(-sigma * dtau);

    std::vector<double> cur(npts), next(npts);
    for (std::size_t i = 0; i < npts; ++i)
        cur[i] = thetaI_init * std::exp(-sigma * dtau * static_cast<double>(i));
    for (int it = 0; it < max_iters; ++it) {
        // next_i = e^{-sigma tau_i} th(0) + int_0^{tau_i} e^{-sigma (tau_i - s)} N(cur_s) ds,
        // the integral accumulated by damped trapezoid (no large exponentials)
        double acc = 0.0;
        next[0] = thetaI_init;
        for (std::size_t i = 1; i < npts; ++i) {
            acc = decay * acc + 0.5 * dtau * (decay * nonlin(cur[i - 1]) + nonlin(cur[i]));
            next[i] = thetaI_init * std::exp(-sigma * dtau * static_cast<double>(i)) + acc;
        }
        double diff = 0.0;
        for (std::size_t i = 0; i < npts; ++i)
            diff = std::max(diff, std::abs(next[i] - cur[i]));
        cur.swap(next);
        if (diff <= tol) return cur;
    }
    throw std::runtime_error("layer_picard: fixed point did not converge");
}

}  // namespace radiff
