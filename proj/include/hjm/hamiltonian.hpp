#pragma once

#include "hjm/common.hpp"
#include "hjm/manifold.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace hjm {

// Autonomous Hamiltonian H(q, p) with optional analytic first derivatives.
// Missing derivatives fall back to central differences with a step scaled by
// the argument magnitude.
class HamiltonianField {
public:
    using EvalFn = std::function<double(const Vec&, const Vec&)>;
    using GradFn = std::function<Vec(const Vec&, const Vec&)>;

    HamiltonianField() = default;
    HamiltonianField(std::string name, int dim, EvalFn eval)
        : name_(std::move(name)), dim_(dim), eval_(std::move(eval)) {}

    HamiltonianField& with_grad_q(GradFn g) { grad_q_ = std::move(g); return *this; }
    HamiltonianField& with_grad_p(GradFn g) { grad_p_ = std::move(g); return *this; }

    double value(const Vec& q, const Vec& p) const;
    Vec grad_q(const Vec& q, const Vec& p) const;
    Vec grad_p(const Vec& q, const Vec& p) const;

    bool analytic_grad_q() const { return static_cast<bool>(grad_q_); }
    bool analytic_grad_p() const { return static_cast<bool>(grad_p_); }
    int dim() const { return dim_; }
    const std::string& name() const { return name_; }
    explicit operator bool() const { return static_cast<bool>(eval_); }

private:
    std::string name_;
    int dim_ = 0;
    EvalFn eval_;
    GradFn grad_q_, grad_p_;
};

struct FlowState {
    Vec q;
    Vec p;
    double t = 0;
};

// (dq/dt, dp/dt) = (grad_p H, -grad_q H).
std::pair<Vec, Vec> hamiltonian_vector_field(const HamiltonianField& H, const Vec& q,
                                             const Vec& p);

// Classical RK4 on the canonical equations; the returned trajectory includes
// the initial state and lands exactly on t_end.
std::vector<FlowState> integrate_flow(const HamiltonianField& H, FlowState start,
                                      double t_end, double dt);

struct SamplingPlan {
    int count = 1000;
    double momentum_radius = 5.0;
    std::uint64_t seed = 0;
};

// Residuals of the two equivalent characterizations of invariance of M x R^d
// under the flow, measured independently over a deterministic sample set:
//   tangency:            sup |(I - P_q) grad_p H(q,p)|
//   normal independence: sup |H(q,p) - H(q, P_q p)|
// For the phase-space variant, tm_residual adds the second-order condition
//   sup |(I - P_q) grad_q H(q,p) + h_q(grad_p H, p)|   with tangent p.
struct InvarianceReport {
    int sample_count = 0;
    double tolerance = 0;
    double max_tangency = 0;
    double max_normal_independence = 0;
    double max_tm_residual = 0;
    bool tangency_ok = false;
    bool normal_independence_ok = false;
    bool tm_ok = false;
};

InvarianceReport check_m_invariance(const HamiltonianField& H, const Submanifold& M,
                                    const SamplingPlan& plan, double tolerance);

InvarianceReport check_tm_invariance(const HamiltonianField& H, const Submanifold& M,
                                     const SamplingPlan& plan, double tolerance);

double normal_independence_defect(const HamiltonianField& H, const Submanifold& M,
                                  const Vec& q, const Vec& p);

// Sampled sanity check of the standing growth bounds: |d2H| <= C,
// |grad_p H| <= C (1 + |p|), |H| <= C (1 + |p|^2). Ratios are maxima of the
// measured quantity over its bound; satisfied means every ratio stays within
// a small slack of 1.
struct GrowthReport {
    double c = 0;
    int sample_count = 0;
    double max_hessian_ratio = 0;
    double max_grad_p_ratio = 0;
    double max_value_ratio = 0;
    bool satisfied = false;
};

GrowthReport check_growth_assumptions(const HamiltonianField& H, double q_radius,
                                      double p_radius, double C,
                                      const SamplingPlan& plan);

// Coordinate change of the Hamiltonian under a chart phi:
//   (pullback H)(q, p) = H(phi(q), (d phi(q))^-T p).
// grad_p transfers by the chain rule whenever H has it; grad_q transfers only
// for affine charts, where the Jacobian has no point dependence.
HamiltonianField pullback_hamiltonian(const HamiltonianField& H, const Chart& chart);

}  // namespace hjm
