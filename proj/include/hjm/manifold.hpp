#pragma once

#include "hjm/common.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hjm {

// A coordinate map phi from chart coordinates to the ambient space. When the
// chart is adapted to a submanifold, the manifold is the image of the first
// m coordinates with the trailing ones held at zero.
struct Chart {
    int ambient_dim = 0;
    std::function<Vec(const Vec&)> map;        // chart coords -> ambient
    std::function<Vec(const Vec&)> inverse;    // ambient -> chart coords
    std::function<Mat(const Vec&)> jacobian;   // d(map), optional: differenced if absent
    std::function<bool(const Vec&)> in_domain; // chart coords; absent means everywhere
    bool affine = false;                       // jacobian independent of the point
    std::string name;
};

Mat chart_jacobian(const Chart& chart, const Vec& c);
bool chart_contains(const Chart& chart, const Vec& c);

// Level-set description F(x) = 0 with dF of full row rank along the zero set.
struct ImplicitRep {
    std::function<Vec(const Vec&)> constraint;
    std::function<Mat(const Vec&)> jacobian;                 // optional: differenced if absent
    std::function<std::vector<Mat>(const Vec&)> hessians;    // optional, one block per constraint row
};

struct ParametricRep {
    std::vector<Chart> charts;  // adapted charts
};

// An embedded m-dimensional submanifold of R^d together with a tube radius
// theta used to gate closest-point queries. theta is taken on trust from the
// caller; ambiguous projections are still detected and refused when the
// multistart search exposes them.
class Submanifold {
public:
    Submanifold(int ambient_dim, int dim, double theta, ImplicitRep rep,
                Tolerances tol = default_tolerances());
    Submanifold(int ambient_dim, int dim, double theta, ParametricRep rep,
                Tolerances tol = default_tolerances());

    int ambient_dim() const { return ambient_dim_; }
    int dim() const { return dim_; }
    int codim() const { return ambient_dim_ - dim_; }
    double theta() const { return theta_; }
    const Tolerances& tol() const { return tol_; }

    bool has_implicit() const { return implicit_.has_value(); }
    const ImplicitRep& implicit_rep() const;
    bool has_charts() const { return parametric_.has_value(); }
    const Chart& chart(int i = 0) const;

    // Deterministic points on the manifold; drives Newton restarts and the
    // invariance samplers. Catalog manifolds install exact samplers, generic
    // implicit ones project a low-discrepancy cloud from sample_box.
    std::vector<Vec> sample_points(int count, std::uint64_t seed) const;
    void set_sampler(std::function<std::vector<Vec>(int, std::uint64_t)> fn);
    void set_sample_box(Vec lo, Vec hi);

    // Attach an adapted chart to a manifold built from an implicit rep, so
    // chart-grid solves can run alongside constraint-based geometry.
    void attach_chart(Chart c);

    // Cached restart points for closest-point searches.
    const std::vector<Vec>& restart_cloud() const;

    std::string name;

private:
    int ambient_dim_ = 0;
    int dim_ = 0;
    double theta_ = 0;
    Tolerances tol_;
    std::optional<ImplicitRep> implicit_;
    std::optional<ParametricRep> parametric_;
    std::function<std::vector<Vec>(int, std::uint64_t)> sampler_;
    Vec box_lo_, box_hi_;
    std::shared_ptr<std::vector<Vec>> cloud_;  // rebuilt when the sampler changes

    void rebuild_cloud();
};

// Constraint Jacobian dF(x), analytic when available, differenced otherwise.
Mat implicit_jacobian(const Submanifold& M, const Vec& x);

bool on_manifold(const Submanifold& M, const Vec& q);

// Orthogonal projector onto T_qM; requires q on M.
Mat projector_matrix(const Submanifold& M, const Vec& q);

// Smooth extension of the projector field to a neighborhood of M. Agrees with
// projector_matrix on M; used for differencing and for Hamiltonians that need
// a projector away from the manifold.
Mat extended_projector(const Submanifold& M, const Vec& x);

// Directional derivative of the extended projector field along an arbitrary
// ambient direction v. Analytic when the implicit rep carries Hessians,
// central differences otherwise.
Mat projector_field_derivative(const Submanifold& M, const Vec& q, const Vec& v);

// h_q(v, w) for tangent v, w; normal-valued and symmetric.
Vec second_fundamental_form(const Submanifold& M, const Vec& q, const Vec& v, const Vec& w);

// h*_q(a, n) for tangent a and normal n; tangent-valued adjoint defined by
// <c, h*(a,n)> = <h(a,c), n>.
Vec weingarten_adjoint(const Submanifold& M, const Vec& q, const Vec& a, const Vec& n);

struct ClosestPoint {
    Vec point;
    double dist = 0;
};

// Orthogonal projection onto M from inside the tube. Multistart Newton on the
// stationarity system; refuses ambiguous and out-of-tube queries.
ClosestPoint closest_point(const Submanifold& M, const Vec& q);

struct TangentFrame {
    Mat tangent;  // d x m, orthonormal columns
    Mat normal;   // d x (d-m), orthonormal columns
};

// Deterministic frame: pivoted Gram-Schmidt over projector columns, largest
// residual first, each vector's largest-magnitude entry made positive.
TangentFrame tangent_frame(const Submanifold& M, const Vec& q);

// Inverse differential of the tube projection pi_M at q, applied to a vector
// tangent at the foot point: v^{-1}(q) p = p - dP(p) (q - foot).
Vec v_inverse_apply(const Submanifold& M, const Vec& q, const Vec& p);

// Matrix of v^{-1}(q) in the deterministic tangent frame at the foot point.
Mat v_inverse_matrix(const Submanifold& M, const Vec& q);

// Forward map v(q) p, computed by solving with the frame matrix.
Vec v_apply(const Submanifold& M, const Vec& q, const Vec& p);

}  // namespace hjm
