#include "doctest.h"

#include "hjm/catalog.hpp"
#include "hjm/hamiltonian.hpp"

#include <cmath>
#include <memory>

using namespace hjm;

namespace {

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// Test-local central differencing, kept independent of the library fallback.
Vec fd_grad(const std::function<double(const Vec&)>& f, const Vec& x) {
    const double h = 1e-6 * (1.0 + x.norm());
    Vec g(x.size());
    for (int j = 0; j < x.size(); ++j) {
        Vec xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        g[j] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("catalog values and analytic gradients agree with differencing") {
    auto M = std::make_shared<const Submanifold>(make_circle(1.0));
    std::vector<HamiltonianField> hs;
    hs.push_back(make_free(2));
    hs.push_back(make_rotation());
    hs.push_back(make_transport(vec2(1.0, 0.5)));
    hs.push_back(make_abs(2));
    hs.push_back(make_tangent_kinetic(M));

    const Vec q = vec2(0.8, -0.6), p = vec2(0.4, 1.1);
    for (const auto& H : hs) {
        Vec gq = fd_grad([&](const Vec& x) { return H.value(x, p); }, q);
        Vec gp = fd_grad([&](const Vec& y) { return H.value(q, y); }, p);
        CHECK((H.grad_q(q, p) - gq).norm() < 1e-7);
        CHECK((H.grad_p(q, p) - gp).norm() < 1e-7);
    }

    CHECK(make_free(2).value(q, p) == doctest::Approx(0.5 * p.squaredNorm()));
    CHECK(make_rotation().value(q, p) ==
          doctest::Approx(-p[0] * q[1] + p[1] * q[0]));
    CHECK(make_abs(2).value(q, p) == doctest::Approx(p.norm()));
}

TEST_CASE("vector field pairs the gradients with the canonical signs") {
    auto H = make_rotation();
    auto [dq, dp] = hamiltonian_vector_field(H, vec2(1, 0), vec2(0, 1));
    CHECK((dq - vec2(0, 1)).norm() < 1e-14);
    CHECK((dp - vec2(-1, 0)).norm() < 1e-14);
}

TEST_CASE("flow: rotation case against the matrix exponential") {
    auto H = make_rotation();
    FlowState s{vec2(1, 0), vec2(0.3, 0.4), 0.0};
    auto traj = integrate_flow(H, s, 1.0, 1e-3);
    const auto& last = traj.back();
    CHECK(last.t == doctest::Approx(1.0).epsilon(1e-12));
    const double c = std::cos(1.0), sn = std::sin(1.0);
    CHECK((last.q - vec2(c, sn)).norm() < 1e-9);
    CHECK((last.p - vec2(0.3 * c - 0.4 * sn, 0.3 * sn + 0.4 * c)).norm() < 1e-9);
}

TEST_CASE("flow: transport case is reproduced exactly") {
    auto H = make_transport(vec2(1.0, -2.0));
    FlowState s{vec2(0, 0), vec2(0.7, 0.1), 0.0};
    auto traj = integrate_flow(H, s, 0.5, 0.01);
    CHECK((traj.back().q - vec2(0.5, -1.0)).norm() < 1e-13);
    CHECK((traj.back().p - s.p).norm() < 1e-13);
}

TEST_CASE("flow: fourth-order accuracy on a nonlinear case") {
    // Pendulum energy p^2/2 - cos(q) in one degree of freedom.
    HamiltonianField H("pendulum", 1, [](const Vec& q, const Vec& p) {
        return 0.5 * p[0] * p[0] - std::cos(q[0]);
    });
    H.with_grad_q([](const Vec& q, const Vec& p) {
        Vec g(1);
        g[0] = std::sin(q[0]);
        (void)p;
        return g;
    });
    H.with_grad_p([](const Vec&, const Vec& p) { return p; });

    Vec q0(1), p0(1);
    q0 << 1.2;
    p0 << 0.3;
    auto run = [&](double dt) {
        auto traj = integrate_flow(H, {q0, p0, 0.0}, 1.0, dt);
        Vec z(2);
        z << traj.back().q[0], traj.back().p[0];
        return z;
    };
    Vec ref = run(1.0 / 6400.0);
    const double e1 = (run(0.02) - ref).norm();
    const double e2 = (run(0.01) - ref).norm();
    const double order = std::log2(e1 / e2);
    CHECK(order > 3.5);
}

TEST_CASE("flow: energy is conserved along catalog trajectories") {
    auto M = std::make_shared<const Submanifold>(make_circle(1.0));
    std::vector<HamiltonianField> hs;
    hs.push_back(make_free(2));
    hs.push_back(make_rotation());
    hs.push_back(make_transport(vec2(0.3, 0.9)));
    hs.push_back(make_abs(2));
    hs.push_back(make_tangent_kinetic(M));
    for (const auto& H : hs) {
        FlowState s{vec2(0.9, 0.1), vec2(0.5, 0.8), 0.0};
        const double e0 = H.value(s.q, s.p);
        double drift = 0;
        for (const auto& st : integrate_flow(H, s, 1.0, 1e-3))
            drift = std::max(drift, std::abs(H.value(st.q, st.p) - e0));
        CHECK(drift < 1e-6);
    }
}

TEST_CASE("flow: states leaving the finite range are rejected") {
    // The stage values stay finite; only the accumulated state overflows.
    HamiltonianField H("blowup", 1,
                       [](const Vec&, const Vec& p) { return 1e308 * p[0]; });
    H.with_grad_p([](const Vec&, const Vec&) {
        Vec g(1);
        g[0] = 1e308;
        return g;
    });
    H.with_grad_q([](const Vec&, const Vec&) { return Vec(Vec::Zero(1)); });
    Vec q0(1), p0(1);
    q0 << 1.0;
    p0 << 0.0;
    CHECK_THROWS_AS(integrate_flow(H, {q0, p0, 0.0}, 30.0, 0.5), const StepRejected&);
}

TEST_CASE("invariance: frozen residuals for the free Hamiltonian on the circle") {
    auto M = make_circle(1.0);
    auto H = make_free(2);
    const Vec q = vec2(0, 1), p = vec2(0, 1);
    const Mat P = projector_matrix(M, q);
    const Vec gp = H.grad_p(q, p);
    CHECK((gp - P * gp).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(normal_independence_defect(H, M, q, p) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("invariance: the two characterizations agree across the catalog") {
    auto Mshared = std::make_shared<const Submanifold>(make_circle(1.0));
    const Submanifold& M = *Mshared;
    SamplingPlan plan;
    plan.count = 400;
    const double tol = 1e-8;

    std::vector<std::pair<HamiltonianField, bool>> cases;
    cases.emplace_back(make_rotation(), true);
    cases.emplace_back(make_tangent_kinetic(Mshared), true);
    cases.emplace_back(make_free(2), false);
    cases.emplace_back(make_abs(2), false);
    cases.emplace_back(make_transport(vec2(1.0, 0.0)), false);

    for (const auto& [H, invariant] : cases) {
        auto rep = check_m_invariance(H, M, plan, tol);
        CHECK(rep.sample_count == 400);
        CHECK(rep.tangency_ok == invariant);
        CHECK(rep.normal_independence_ok == invariant);
        if (!invariant) {
            CHECK(rep.max_tangency > 1e-3);
            CHECK(rep.max_normal_independence > 1e-3);
        }
    }
}

TEST_CASE("invariance: phase-space variant on the circle") {
    auto M = make_circle(1.0);
    SamplingPlan plan;
    plan.count = 300;
    auto rep = check_tm_invariance(make_rotation(), M, plan, 1e-8);
    CHECK(rep.tm_ok);
    CHECK(rep.max_tm_residual < 1e-10);
    CHECK(rep.max_tangency < 1e-12);

    auto bad = check_tm_invariance(make_free(2), M, plan, 1e-8);
    CHECK_FALSE(bad.tm_ok);
    CHECK(bad.max_tm_residual > 1e-2);
}

TEST_CASE("invariance: tangent kinetic energy on the torus") {
    auto M = std::make_shared<const Submanifold>(make_torus(2.0, 0.5));
    SamplingPlan plan;
    plan.count = 200;
    auto rep = check_m_invariance(make_tangent_kinetic(M), *M, plan, 1e-8);
    CHECK(rep.tangency_ok);
    CHECK(rep.normal_independence_ok);
}

TEST_CASE("growth bounds: frozen verdicts for free and rotation") {
    SamplingPlan plan;
    plan.count = 120;
    auto ok = check_growth_assumptions(make_free(2), 2.0, 10.0, 1.0, plan);
    CHECK(ok.satisfied);
    CHECK(ok.max_hessian_ratio == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(ok.max_grad_p_ratio > 0.8);
    CHECK(ok.max_grad_p_ratio <= 1.0 + 1e-6);
    CHECK(ok.max_value_ratio > 0.4);
    CHECK(ok.max_value_ratio < 0.51);

    auto bad = check_growth_assumptions(make_free(2), 2.0, 10.0, 0.4, plan);
    CHECK_FALSE(bad.satisfied);

    auto rot_ok = check_growth_assumptions(make_rotation(), 2.0, 10.0, 2.0, plan);
    CHECK(rot_ok.satisfied);
    auto rot_bad = check_growth_assumptions(make_rotation(), 2.0, 10.0, 0.5, plan);
    CHECK_FALSE(rot_bad.satisfied);
}

TEST_CASE("flow keeps invariant initial conditions on the manifold") {
    auto H = make_rotation();
    FlowState s{vec2(1, 0), vec2(0.2, 1.4), 0.0};
    double worst = 0;
    for (const auto& st : integrate_flow(H, s, 1.0, 1e-3))
        worst = std::max(worst, std::abs(st.q.norm() - 1.0));
    CHECK(worst < 1e-6);
}

TEST_CASE("pullback: rigid rotation of a transport Hamiltonian") {
    auto H = make_transport(vec2(1.0, 0.5));
    auto chart = make_rotation_chart(0.7);
    auto Hp = pullback_hamiltonian(H, chart);
    Mat R(2, 2);
    R << std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::cos(0.7);
    const Vec q = vec2(0.3, -1.1), p = vec2(0.8, 0.2);
    // For an orthogonal chart the momentum transforms by the rotation itself.
    CHECK(Hp.value(q, p) == doctest::Approx(vec2(1.0, 0.5).dot(R * p)).epsilon(1e-12));
    Vec gp_want = fd_grad([&](const Vec& y) { return Hp.value(q, y); }, p);
    CHECK((Hp.grad_p(q, p) - gp_want).norm() < 1e-7);
}

TEST_CASE("pullback: identity chart reproduces values bitwise") {
    auto H = make_rotation();
    auto Hp = pullback_hamiltonian(H, make_identity_chart(2));
    for (double a : {-1.5, 0.0, 0.3, 2.0}) {
        const Vec q = vec2(a, 1.0 - a), p = vec2(0.5 * a, -a);
        CHECK(Hp.value(q, p) == H.value(q, p));
        CHECK(Hp.grad_p(q, p) == H.grad_p(q, p));
        CHECK(Hp.grad_q(q, p) == H.grad_q(q, p));
    }
}

TEST_CASE("pullback: classical solutions keep a zero residual in chart coordinates") {
    // Closed-form transported bump under <c, p>, composed with a rotation.
    const Vec c = vec2(1.0, -0.5);
    auto u = [&](double t, const Vec& x) {
        return std::exp(-(x - t * c).squaredNorm());
    };
    auto chart = make_rotation_chart(0.5);
    auto Hp = pullback_hamiltonian(make_transport(c), chart);
    auto uhat = [&](double t, const Vec& qc) { return u(t, chart.map(qc)); };

    double worst = 0;
    for (double t : {0.1, 0.4}) {
        for (auto& qc : std::vector<Vec>{vec2(0.2, 0.3), vec2(-0.5, 0.8), vec2(1.0, -0.2)}) {
            const double h = 1e-5;
            const double dt = (uhat(t + h, qc) - uhat(t - h, qc)) / (2.0 * h);
            Vec g = fd_grad([&](const Vec& x) { return uhat(t, x); }, qc);
            worst = std::max(worst, std::abs(dt + Hp.value(qc, g)));
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("pullback: chart domain is enforced") {
    Chart ch = make_identity_chart(2);
    ch.in_domain = [](const Vec& c) { return c.norm() < 1.0; };
    auto Hp = pullback_hamiltonian(make_free(2), ch);
    CHECK_THROWS_AS(Hp.value(vec2(2.0, 0.0), vec2(1, 0)), const ChartDomain&);
}

TEST_CASE("differenced gradients refuse non-finite values") {
    HamiltonianField H("sqrtp", 1,
                       [](const Vec&, const Vec& p) { return std::sqrt(p[0]); });
    Vec q(1), p(1);
    q << 0.0;
    p << 0.0;
    CHECK_THROWS_AS(H.grad_p(q, p), const Error&);
}
