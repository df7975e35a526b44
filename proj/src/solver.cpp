#include "hjm/solver.hpp"

#include "hjm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hjm {

namespace {

// Flat index of the neighbor one node up/down along an axis; bounded axes
// return the node itself past the end, which extends the data constantly.
long neighbor_up(const Grid& g, const std::vector<long>& strides,
                 const std::vector<int>& multi, long flat, int axis) {
    const auto& a = g.axes[axis];
    if (multi[axis] + 1 < a.n) return flat + strides[axis];
    return a.periodic ? flat - static_cast<long>(a.n - 1) * strides[axis] : flat;
}

long neighbor_down(const Grid& g, const std::vector<long>& strides,
                   const std::vector<int>& multi, long flat, int axis) {
    const auto& a = g.axes[axis];
    if (multi[axis] > 0) return flat - strides[axis];
    return a.periodic ? flat + static_cast<long>(a.n - 1) * strides[axis] : flat;
}

std::vector<long> row_major_strides(const Grid& g) {
    std::vector<long> s(g.dim());
    long acc = 1;
    for (int i = g.dim() - 1; i >= 0; --i) {
        s[i] = acc;
        acc *= g.axes[i].n;
    }
    return s;
}

void advance_odometer(const Grid& g, std::vector<int>& multi) {
    for (int i = g.dim() - 1; i >= 0; --i) {
        if (++multi[i] < g.axes[i].n) return;
        multi[i] = 0;
    }
}

}  // namespace

std::vector<double> estimate_alpha(const HamiltonianField& H, const GridFunction& u0,
                                   double inflation) {
    const Grid& g = u0.grid();
    const int d = g.dim();
    if (H.dim() != d) throw ConfigError("Hamiltonian and grid dimensions disagree");
    const auto strides = row_major_strides(g);
    const auto& v = u0.values();

    // Bounding box of the discrete slopes of the initial datum.
    Vec glo = Vec::Constant(d, std::numeric_limits<double>::infinity());
    Vec ghi = Vec::Constant(d, -std::numeric_limits<double>::infinity());
    std::vector<int> multi(d, 0);
    for (long f = 0; f < g.size(); ++f, advance_odometer(g, multi)) {
        for (int i = 0; i < d; ++i) {
            const long up = neighbor_up(g, strides, multi, f, i);
            const long dn = neighbor_down(g, strides, multi, f, i);
            const double span = (up == f || dn == f) ? g.axes[i].dx() : 2.0 * g.axes[i].dx();
            const double slope = (v[up] - v[dn]) / span;
            glo[i] = std::min(glo[i], slope);
            ghi[i] = std::max(ghi[i], slope);
        }
    }
    const Vec center = 0.5 * (glo + ghi);
    const Vec half = 0.5 * inflation * (ghi - glo);
    const Vec plo = center - half, phi = center + half;

    // Momenta: box corners, center, and a low-discrepancy filling.
    std::vector<Vec> momenta;
    for (int mask = 0; mask < (1 << d); ++mask) {
        Vec p(d);
        for (int i = 0; i < d; ++i) p[i] = (mask & (1 << i)) ? phi[i] : plo[i];
        momenta.push_back(p);
    }
    momenta.push_back(center);
    for (auto& p : halton_box(16, plo, phi, 11)) momenta.push_back(p);

    const long stride = std::max<long>(1, g.size() / 64);
    std::vector<double> alpha(d, 0.0);
    auto absorb = [&](const Vec& q) {
        for (const auto& p : momenta) {
            const Vec gp = H.grad_p(q, p);
            for (int i = 0; i < d; ++i) alpha[i] = std::max(alpha[i], std::abs(gp[i]));
        }
    };
    for (long f = 0; f < g.size(); f += stride) absorb(g.point(g.multi_index(f)));
    absorb(g.point(g.multi_index(g.size() - 1)));
    return alpha;
}

double cfl_dt(double lambda, const std::vector<double>& alpha,
              const std::vector<double>& dx) {
    if (alpha.size() != dx.size()) throw ConfigError("speed and spacing counts disagree");
    if (lambda <= 0) throw ConfigError("step fraction must be positive");
    double denom = 0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (dx[i] <= 0) throw ConfigError("spacing must be positive");
        denom += alpha[i] / dx[i];
    }
    if (denom <= 0) return std::numeric_limits<double>::infinity();
    return lambda / denom;
}

GridFunction lax_friedrichs_step(const GridFunction& u, const HamiltonianField& H,
                                 double dt, const std::vector<double>& alpha) {
    const Grid& g = u.grid();
    const int d = g.dim();
    if (static_cast<int>(alpha.size()) != d)
        throw ConfigError("one viscosity coefficient per axis is required");
    if (!(dt > 0)) throw ConfigError("step must be positive");
    if (H.dim() != d) throw ConfigError("Hamiltonian and grid dimensions disagree");

    const auto strides = row_major_strides(g);
    const auto& v = u.values();
    GridFunction next(g);
    auto& w = next.values();

    Vec q(d), dc(d);
    std::vector<int> multi(d, 0);
    for (long f = 0; f < g.size(); ++f, advance_odometer(g, multi)) {
        double visc = 0;
        for (int i = 0; i < d; ++i) {
            const auto& a = g.axes[i];
            q[i] = a.min + multi[i] * a.dx();
            const double up = v[neighbor_up(g, strides, multi, f, i)];
            const double dn = v[neighbor_down(g, strides, multi, f, i)];
            dc[i] = (up - dn) / (2.0 * a.dx());
            visc += 0.5 * alpha[i] * (up - 2.0 * v[f] + dn) / a.dx();
        }
        w[f] = v[f] - dt * (H.value(q, dc) - visc);
    }
    if (!w.allFinite()) throw NonFinite("update produced a non-finite value");
    return next;
}

SolveResult solve_cp(const HamiltonianField& H, const Grid& grid,
                     const std::function<double(const Vec&)>& u0, double t_end,
                     const SolveOptions& opt) {
    if (t_end < 0) throw ConfigError("final time must be nonnegative");
    GridFunction u(grid);
    u.fill(u0);
    if (!u.values().allFinite()) throw NonFinite("initial datum is not finite");

    std::vector<double> alpha = opt.alpha_override
                                    ? *opt.alpha_override
                                    : estimate_alpha(H, u, opt.alpha_inflation);
    if (static_cast<int>(alpha.size()) != grid.dim())
        throw ConfigError("one viscosity coefficient per axis is required");

    std::vector<double> dx;
    for (const auto& a : grid.axes) dx.push_back(a.dx());
    double dt = opt.dt_override ? *opt.dt_override : cfl_dt(opt.cfl, alpha, dx);
    if (!(dt > 0)) throw CFLViolation("computed step is not positive");
    if (!std::isfinite(dt) || dt > t_end) dt = t_end;

    SolveDiagnostics diag;
    diag.alpha = alpha;
    diag.dt = dt;
    double t = 0;
    if (opt.observer) opt.observer(t, u);
    while (t < t_end - 1e-12 * std::max(1.0, t_end)) {
        const double h = std::min(dt, t_end - t);
        u = lax_friedrichs_step(u, H, h, alpha);
        t += h;
        ++diag.steps;
        if (opt.observer) opt.observer(t, u);
    }
    diag.t_final = t;
    return SolveResult{std::move(u), diag};
}

SolveResult solve_cp_on_manifold(const ManifoldHamiltonian& Hbar, const Chart& chart,
                                 const Grid& grid,
                                 const std::function<double(const Vec&)>& u0,
                                 double t_end, const SolveOptions& opt) {
    if (grid.dim() != Hbar.manifold().dim())
        throw ConfigError("chart grid rank must match the manifold dimension");
    return solve_cp(pullback_to_chart(Hbar, chart), grid, u0, t_end, opt);
}

double pde_residual(const HamiltonianField& H, const SpaceTimeField& u, double t,
                    const Vec& q, double h) {
    if (!(h > 0)) throw ConfigError("differencing step must be positive");
    const double ut = (u.value(t + h, q) - u.value(t - h, q)) / (2.0 * h);
    Vec grad(q.size());
    for (int i = 0; i < q.size(); ++i) {
        Vec qp = q, qm = q;
        qp[i] += h;
        qm[i] -= h;
        grad[i] = (u.value(t, qp) - u.value(t, qm)) / (2.0 * h);
    }
    return std::abs(ut + H.value(q, grad));
}

double linf_error(const GridFunction& u, const std::function<double(const Vec&)>& exact,
                  double margin) {
    const Grid& g = u.grid();
    double worst = 0;
    long counted = 0;
    for (long f = 0; f < g.size(); ++f) {
        const Vec q = g.point(g.multi_index(f));
        bool keep = true;
        for (int i = 0; i < g.dim() && keep; ++i) {
            const auto& a = g.axes[i];
            const double tol = 1e-12 * (a.max - a.min);
            if (!a.periodic &&
                (q[i] < a.min + margin - tol || q[i] > a.max - margin + tol))
                keep = false;
        }
        if (!keep) continue;
        worst = std::max(worst, std::abs(u.values()[f] - exact(q)));
        ++counted;
    }
    if (counted == 0) throw ConfigError("margin excludes every node");
    return worst;
}

}  // namespace hjm
