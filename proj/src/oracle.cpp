#include "radiff/oracle.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <stdexcept>

#include "radiff/threading.hpp"

namespace radiff {

namespace {

inline double wrap_coord(double x, double length) {
    x = std::fmod(x, length);
    if (x < 0.0) x += length;
    return x;
}

inline Vec3 wrap_point(Vec3 x, const PeriodicGrid& g) {
    for (int a = 0; a < 3; ++a) x[a] = wrap_coord(x[a], g.length[a]);
    return x;
}

// 3-point Gauss on [0,1]
constexpr double kGaussNode[3] = {0.11270166537925831, 0.5, 0.88729833462074169};
constexpr double kGaussWeight[3] = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};

double duhamel_eval(const TransportProblem& prob,
                    const std::function<double(double, const Vec3&)>& ibar_prev,
                    double t, const Vec3& x, const Vec3& w) {
    const double eps = prob.epsilon;
    const double e2 = eps * eps;
    const double T = t / e2;

    Vec3 x0 = x;
    for (int a = 0; a < 3; ++a) x0[a] -= (t / eps) * w[a];
    double val = prob.h(wrap_point(x0, prob.lattice), w) * std::exp(-(1.0 + e2) * T);
    if (!(T > 0.0)) return val;

    const int panels = std::max(1, static_cast<int>(std::ceil(prob.panels_per_unit_tau * T)));
    const double dp = T / panels;
    for (int p = 0; p < panels; ++p) {
        const double sa = p * dp;
        for (int q = 0; q < 3; ++q) {
            const double s = sa + kGaussNode[q] * dp;
            Vec3 xs = x;
            for (int a = 0; a < 3; ++a) xs[a] -= eps * (T - s) * w[a];
            xs = wrap_point(xs, prob.lattice);
            double src = prob.F ? prob.F(e2 * s, xs, w) : 0.0;
            if (ibar_prev) src += e2 * ibar_prev(e2 * s, xs);
            val += kGaussWeight[q] * dp * src * std::exp(-(1.0 + e2) * (T - s));
        }
    }
    return val;
}

// tabulated angular average on (fast time) x lattice; cubic in time, 6-point
// periodic Lagrange per non-slab spatial axis
struct IbarTable {
    const PeriodicGrid* grid = nullptr;
    double inv_e2 = 0.0;
    double ds = 0.0;
    int nt = 0;
    std::vector<double> vals;  // j * cells + cell

    double eval(double t, const Vec3& x) const {
        // time weights (clamped cubic)
        double u = t * inv_e2 / ds;
        if (u < 0.0) u = 0.0;
        if (u > nt - 1) u = nt - 1;
        int j0 = static_cast<int>(std::floor(u)) - 1;
        if (j0 < 0) j0 = 0;
        if (j0 > nt - 4) j0 = nt - 4;
        const double xi = u - j0;
        double wt[4];
        wt[0] = -(xi - 1.0) * (xi - 2.0) * (xi - 3.0) / 6.0;
        wt[1] = xi * (xi - 2.0) * (xi - 3.0) / 2.0;
        wt[2] = -xi * (xi - 1.0) * (xi - 3.0) / 2.0;
        wt[3] = xi * (xi - 1.0) * (xi - 2.0) / 6.0;

        // spatial weights per axis
        int cnt[3];
        int idx[3][6];
        double wgt[3][6];
        for (int a = 0; a < 3; ++a) {
            const int n = grid->n[a];
            if (n == 1) {
                cnt[a] = 1;
                idx[a][0] = 0;
                wgt[a][0] = 1.0;
                continue;
            }
            cnt[a] = 6;
            const double ua = x[a] / grid->h[a] - 0.5;
            const int i0 = static_cast<int>(std::floor(ua));
            const double za = ua - i0;
            // nodes at offsets {-2,...,3} relative to i0
            for (int k = 0; k < 6; ++k) {
                const int d = k - 2;
                idx[a][k] = grid->wrap(i0 + d, a);
                double num = 1.0, den = 1.0;
                for (int e = -2; e <= 3; ++e) {
                    if (e == d) continue;
                    num *= za - e;
                    den *= static_cast<double>(d - e);
                }
                wgt[a][k] = num / den;
            }
        }

        double acc = 0.0;
        const int cells = grid->cells();
        for (int j = 0; j < 4; ++j) {
            const double* base = vals.data() + static_cast<std::size_t>(j0 + j) * cells;
            double sp = 0.0;
            for (int kz = 0; kz < cnt[2]; ++kz)
                for (int ky = 0; ky < cnt[1]; ++ky) {
                    double row = 0.0;
                    for (int kx = 0; kx < cnt[0]; ++kx)
                        row += wgt[0][kx] * base[grid->index(idx[0][kx], idx[1][ky], idx[2][kz])];
                    sp += wgt[1][ky] * wgt[2][kz] * row;
                }
            acc += wt[j] * sp;
        }
        return acc;
    }
};

}  // namespace

Evaluable duhamel_apply(const Evaluable& I_prev, const TransportProblem& prob) {
    if (!prob.h) throw std::invalid_argument("duhamel_apply: problem has no initial data h");
    auto sp = std::make_shared<const TransportProblem>(prob);
    std::function<double(double, const Vec3&)> ibar;
    if (I_prev) {
        Evaluable prev = I_prev;
        ibar = [sp, prev](double t, const Vec3& x) {
            double acc = 0.0;
            for (int m = 0; m < sp->quad.ndirs(); ++m)
                acc += sp->quad.weights[m] * prev(t, x, sp->quad.dirs[m]);
            return acc;
        };
    }
    return [sp, ibar](double t, const Vec3& x, const Vec3& w) {
        return duhamel_eval(*sp, ibar, t, x, w);
    };
}

std::vector<Vec3> default_sample_points(const PeriodicGrid& g) {
    std::vector<double> coords[3];
    for (int a = 0; a < 3; ++a) {
        if (g.n[a] == 1) {
            coords[a] = {0.5 * g.length[a]};
        } else {
            for (int i = 0; i < 5; ++i)
                coords[a].push_back((i + 0.5) / 5.0 * g.length[a]);
        }
    }
    std::vector<Vec3> pts;
    for (double z : coords[2])
        for (double y : coords[1])
            for (double x : coords[0]) pts.push_back({x, y, z});
    return pts;
}

double OracleResult::max_abs() const {
    double m = 0.0;
    for (double v : sample_values) m = std::max(m, std::abs(v));
    return m;
}

OracleResult solve_fixed_point(const TransportProblem& prob, double tol, int max_iters) {
    if (!(prob.epsilon > 0.0 && prob.epsilon < 1.0))
        throw std::invalid_argument("solve_fixed_point: epsilon not in (0,1)");
    if (!(prob.t_eval > 0.0)) throw std::invalid_argument("solve_fixed_point: t_eval <= 0");
    if (!prob.h) throw std::invalid_argument("solve_fixed_point: problem has no initial data h");
    if (!(tol > 0.0)) throw std::invalid_argument("solve_fixed_point: tol <= 0");
    for (int a = 0; a < 3; ++a)
        if (prob.lattice.n[a] > 1 && prob.lattice.n[a] < 6)
            throw std::invalid_argument("solve_fixed_point: active lattice axes need >= 6 points");

    const double e2 = prob.epsilon * prob.epsilon;
    const double S = prob.t_eval / e2;
    const int nt = std::max(4, static_cast<int>(std::ceil(S / prob.s_spacing - 1e-9)) + 1);
    const double ds = S / (nt - 1);
    const int cells = prob.lattice.cells();
    const int nd = prob.quad.ndirs();
    const double wsum = prob.quad.weight_sum();

    OracleResult res;
    res.sample_points =
        prob.sample_points.empty() ? default_sample_points(prob.lattice) : prob.sample_points;
    const int np = static_cast<int>(res.sample_points.size());

    IbarTable table;
    table.grid = &prob.lattice;
    table.inv_e2 = 1.0 / e2;
    table.ds = ds;
    table.nt = nt;
    table.vals.assign(static_cast<std::size_t>(nt) * cells, 0.0);

    std::vector<double> samples(static_cast<std::size_t>(np) * nd, 0.0);
    bool converged = false;

    for (int it = 0; it < max_iters; ++it) {
        std::function<double(double, const Vec3&)> ibar;
        if (it > 0)
            ibar = [&table, wsum](double t, const Vec3& x) { return wsum * table.eval(t, x); };

        std::vector<double> next(table.vals.size());
        parallel_for(nt * cells, [&](int b, int e) {
            for (int k = b; k < e; ++k) {
                const int j = k / cells;
                const int c = k % cells;
                const int ix = c % prob.lattice.n[0];
                const int iy = (c / prob.lattice.n[0]) % prob.lattice.n[1];
                const int iz = c / (prob.lattice.n[0] * prob.lattice.n[1]);
                const Vec3 x = prob.lattice.center(ix, iy, iz);
                const double t = e2 * (j * ds);
                double acc = 0.0;
                for (int m = 0; m < nd; ++m)
                    acc += prob.quad.weights[m] *
                           duhamel_eval(prob, ibar, t, x, prob.quad.dirs[m]);
                next[k] = acc;
            }
        });
        std::vector<double> snew(samples.size());
        parallel_for(np * nd, [&](int b, int e) {
            for (int k = b; k < e; ++k) {
                const int p = k / nd;
                const int m = k % nd;
                snew[k] = duhamel_eval(prob, ibar, prob.t_eval, res.sample_points[p],
                                       prob.quad.dirs[m]);
            }
        });

        double diff = 0.0;
        for (std::size_t k = 0; k < next.size(); ++k)
            diff = std::max(diff, std::abs(next[k] - table.vals[k]));
        for (std::size_t k = 0; k < snew.size(); ++k)
            diff = std::max(diff, std::abs(snew[k] - samples[k]));

        table.vals.swap(next);
        samples.swap(snew);
        res.iterate_norms.push_back(diff);
        const std::size_t n = res.iterate_norms.size();
        if (n == 1 || res.iterate_norms[n - 2] <= 0.0)
            res.ratios.push_back(std::numeric_limits<double>::quiet_NaN());
        else
            res.ratios.push_back(diff / res.iterate_norms[n - 2]);
        res.iterations = it + 1;
        if (diff <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw std::runtime_error("solve_fixed_point: max_iters exceeded before tolerance");
    res.sample_values = std::move(samples);
    return res;
}

double sample_trilinear(const DirectionalField& f, int m, const Vec3& x) {
    const PeriodicGrid& g = f.grid;
    int i0[3], i1[3];
    double w1[3];
    for (int a = 0; a < 3; ++a) {
        if (g.n[a] == 1) {
            i0[a] = i1[a] = 0;
            w1[a] = 0.0;
            continue;
        }
        const double u = wrap_coord(x[a], g.length[a]) / g.h[a] - 0.5;
        const int i = static_cast<int>(std::floor(u));
        w1[a] = u - i;
        i0[a] = g.wrap(i, a);
        i1[a] = g.wrap(i + 1, a);
    }
    const double* s = f.slice(m);
    double acc = 0.0;
    for (int cz = 0; cz < 2; ++cz)
        for (int cy = 0; cy < 2; ++cy)
            for (int cx = 0; cx < 2; ++cx) {
                const double w = (cx ? w1[0] : 1.0 - w1[0]) * (cy ? w1[1] : 1.0 - w1[1]) *
                                 (cz ? w1[2] : 1.0 - w1[2]);
                if (w == 0.0) continue;
                acc += w * s[g.index(cx ? i1[0] : i0[0], cy ? i1[1] : i0[1],
                                     cz ? i1[2] : i0[2])];
            }
    return acc;
}

double cross_validate(const DirectionalField& grid_solution, const TransportProblem& prob,
                      const OracleResult& oracle) {
    const int nd = prob.quad.ndirs();
    if (grid_solution.ndirs != nd)
        throw std::invalid_argument("cross_validate: direction count mismatch");
    if (oracle.sample_values.size() != oracle.sample_points.size() * static_cast<std::size_t>(nd))
        throw std::invalid_argument("cross_validate: oracle result shape mismatch");
    double worst = 0.0;
    for (std::size_t p = 0; p < oracle.sample_points.size(); ++p)
        for (int m = 0; m < nd; ++m) {
            const double gv = sample_trilinear(grid_solution, m, oracle.sample_points[p]);
            worst = std::max(worst, std::abs(gv - oracle.sample_values[p * nd + m]));
        }
    return worst;
}

}  // namespace radiff
