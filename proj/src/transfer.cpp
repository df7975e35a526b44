#include "hjm/transfer.hpp"

#include <Eigen/Cholesky>

#include <utility>

namespace hjm {

double SpaceTimeField::value(double t, const Vec& q) const {
    if (!eval) throw ConfigError("empty space-time field");
    if (q.size() != dim) throw ConfigError("space-time field query has the wrong dimension");
    return eval(t, q);
}

ManifoldScalarField::ManifoldScalarField(std::shared_ptr<const Submanifold> manifold,
                                         std::function<double(double, const Vec&)> eval,
                                         std::string name)
    : manifold_(std::move(manifold)), eval_(std::move(eval)), name_(std::move(name)) {
    if (!manifold_) throw ConfigError("manifold field needs a manifold");
    if (!eval_) throw ConfigError("manifold field needs an evaluator");
}

double ManifoldScalarField::value_on(double t, const Vec& qtilde) const {
    if (!on_manifold(*manifold_, qtilde))
        throw NotOnManifold("field evaluated away from the manifold");
    return eval_(t, qtilde);
}

double ManifoldScalarField::value(double t, const Vec& q) const {
    return eval_(t, closest_point(*manifold_, q).point);
}

ManifoldHamiltonian::ManifoldHamiltonian(std::shared_ptr<const Submanifold> manifold,
                                         std::function<double(const Vec&, const Vec&)> eval,
                                         std::string name)
    : manifold_(std::move(manifold)), eval_(std::move(eval)), name_(std::move(name)) {
    if (!manifold_) throw ConfigError("manifold Hamiltonian needs a manifold");
    if (!eval_) throw ConfigError("manifold Hamiltonian needs an evaluator");
}

double ManifoldHamiltonian::value_on(const Vec& qtilde, const Vec& ptangent) const {
    if (!on_manifold(*manifold_, qtilde))
        throw NotOnManifold("Hamiltonian evaluated away from the manifold");
    const Mat P = projector_matrix(*manifold_, qtilde);
    const double off = (ptangent - P * ptangent).norm();
    if (off > manifold_->tol().tangency_rel * (1.0 + ptangent.norm()))
        throw NotTangent("momentum has a normal component");
    return eval_(qtilde, ptangent);
}

ManifoldHamiltonian::ValueAndDefect ManifoldHamiltonian::value_and_defect(
    const Vec& qtilde, const Vec& p) const {
    if (!on_manifold(*manifold_, qtilde))
        throw NotOnManifold("Hamiltonian evaluated away from the manifold");
    const Mat P = projector_matrix(*manifold_, qtilde);
    ValueAndDefect r;
    r.value = eval_(qtilde, P * p);
    r.defect = std::abs(eval_(qtilde, p) - r.value);
    return r;
}

ManifoldHamiltonian restrict_hamiltonian(const HamiltonianField& H,
                                         std::shared_ptr<const Submanifold> manifold) {
    if (!manifold) throw ConfigError("restriction needs a manifold");
    if (H.dim() != manifold->ambient_dim())
        throw ConfigError("Hamiltonian and manifold dimensions disagree");
    return ManifoldHamiltonian(
        std::move(manifold), [H](const Vec& q, const Vec& p) { return H.value(q, p); },
        "restrict:" + H.name());
}

HamiltonianField extend_hamiltonian(const ManifoldHamiltonian& Hbar) {
    auto manifold = Hbar.manifold_ptr();
    return HamiltonianField(
        "extend:" + Hbar.name(), manifold->ambient_dim(),
        [Hbar, manifold](const Vec& q, const Vec& p) {
            const auto cp = closest_point(*manifold, q);
            const Mat P = projector_matrix(*manifold, cp.point);
            const Vec pt = P * p;
            // Tangent correction of the closest-point retraction: the normal
            // offset tilts tangent momenta through the projector derivative.
            const Vec w =
                pt - projector_field_derivative(*manifold, cp.point, pt) * (q - cp.point);
            return Hbar.value_on(cp.point, w);
        });
}

ManifoldScalarField restrict_solution(const SpaceTimeField& u,
                                      std::shared_ptr<const Submanifold> manifold) {
    if (!manifold) throw ConfigError("restriction needs a manifold");
    if (u.dim != manifold->ambient_dim())
        throw ConfigError("field and manifold dimensions disagree");
    return ManifoldScalarField(
        std::move(manifold), [u](double t, const Vec& q) { return u.value(t, q); },
        "restrict:field");
}

SpaceTimeField extend_solution(const ManifoldScalarField& ubar, double a) {
    SpaceTimeField u;
    u.dim = ubar.manifold().ambient_dim();
    u.eval = [ubar, a](double t, const Vec& q) {
        const auto cp = closest_point(ubar.manifold(), q);
        return ubar.value_on(t, cp.point) + a * cp.dist * cp.dist;
    };
    return u;
}

HamiltonianField pullback_to_chart(const ManifoldHamiltonian& Hbar, const Chart& chart) {
    const int m = Hbar.manifold().dim();
    const int d = Hbar.manifold().ambient_dim();
    if (chart.ambient_dim != d)
        throw ConfigError("chart and manifold ambient dimensions disagree");
    return HamiltonianField(
        "chart:" + Hbar.name(), m, [Hbar, chart, m, d](const Vec& c, const Vec& w) {
            Vec ce = Vec::Zero(d);
            ce.head(m) = c;
            if (!chart_contains(chart, ce))
                throw ChartDomain("chart coordinates outside the domain");
            const Vec x = chart.map(ce);
            const Mat dPhi = chart_jacobian(chart, ce).leftCols(m);
            const Mat gram = dPhi.transpose() * dPhi;
            Eigen::LDLT<Mat> ldlt(gram);
            if (ldlt.info() != Eigen::Success)
                throw SingularMap("chart differential is rank deficient");
            const Vec w_amb = dPhi * ldlt.solve(w);
            if (!w_amb.allFinite())
                throw SingularMap("chart differential is rank deficient");
            return Hbar.value_on(x, w_amb);
        });
}

}  // namespace hjm
