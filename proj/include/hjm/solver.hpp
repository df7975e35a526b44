#pragma once

#include "hjm/grid.hpp"
#include "hjm/hamiltonian.hpp"
#include "hjm/transfer.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace hjm {

struct SolveOptions {
    double cfl = 0.4;
    std::optional<double> dt_override;
    std::optional<std::vector<double>> alpha_override;
    double alpha_inflation = 1.5;
    // Called with (t, state) after the initial fill and after every step;
    // lets callers record the whole time history without rerunning.
    std::function<void(double, const GridFunction&)> observer;
};

struct SolveDiagnostics {
    int steps = 0;
    double dt = 0;
    double t_final = 0;
    std::vector<double> alpha;
};

struct SolveResult {
    GridFunction u;
    SolveDiagnostics diag;
};

// Per-axis bounds on |dH/dp_i| sampled over grid nodes and over momenta from
// the inflated bounding box of the initial discrete slopes.
std::vector<double> estimate_alpha(const HamiltonianField& H, const GridFunction& u0,
                                   double inflation);

// Time-step bound lambda / sum_i alpha_i / dx_i.
double cfl_dt(double lambda, const std::vector<double>& alpha,
              const std::vector<double>& dx);

// One forward-Euler step of the monotone central scheme with artificial
// viscosity alpha.  Periodic axes wrap; bounded axes extend constantly.
GridFunction lax_friedrichs_step(const GridFunction& u, const HamiltonianField& H,
                                 double dt, const std::vector<double>& alpha);

SolveResult solve_cp(const HamiltonianField& H, const Grid& grid,
                     const std::function<double(const Vec&)>& u0, double t_end,
                     const SolveOptions& opt);

// Solves the manifold problem in the coordinates of one adapted chart; the
// grid and the initial datum live in the first dim(M) chart coordinates.
SolveResult solve_cp_on_manifold(const ManifoldHamiltonian& Hbar, const Chart& chart,
                                 const Grid& grid,
                                 const std::function<double(const Vec&)>& u0,
                                 double t_end, const SolveOptions& opt);

// |du/dt + H(q, grad u)| by central differencing with step h.
double pde_residual(const HamiltonianField& H, const SpaceTimeField& u, double t,
                    const Vec& q, double h);

// Largest node error against a reference, skipping nodes within margin of a
// bounded axis end.
double linf_error(const GridFunction& u, const std::function<double(const Vec&)>& exact,
                  double margin);

}  // namespace hjm
