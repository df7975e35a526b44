#include "doctest.h"

#include "hjm/catalog.hpp"
#include "hjm/transfer.hpp"

#include <cmath>
#include <memory>

using namespace hjm;

namespace {

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

std::shared_ptr<const Submanifold> unit_circle() {
    return std::make_shared<const Submanifold>(make_circle(1.0));
}

// Closed-form ambient solution transported by the planar rotation field,
// starting from u0(q) = q[0].
double rotated_coordinate(double t, const Vec& q) {
    return std::cos(t) * q[0] + std::sin(t) * q[1];
}

}  // namespace

TEST_CASE("restriction evaluates the ambient Hamiltonian at tangent pairs") {
    auto M = unit_circle();
    auto Hbar = restrict_hamiltonian(make_rotation(), M);
    CHECK(Hbar.value_on(vec2(1, 0), vec2(0, 1)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(Hbar.value_on(vec2(0, 1), vec2(-2, 0)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("restriction reports the off-tangent defect") {
    auto M = unit_circle();
    const Vec q = vec2(1, 0), p = vec2(1, 1);

    auto free_bar = restrict_hamiltonian(make_free(2), M);
    auto fr = free_bar.value_and_defect(q, p);
    CHECK(fr.value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fr.defect == doctest::Approx(0.5).epsilon(1e-12));

    auto rot_bar = restrict_hamiltonian(make_rotation(), M);
    auto rr = rot_bar.value_and_defect(q, p);
    CHECK(rr.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rr.defect < 1e-14);
}

TEST_CASE("restriction validates its arguments") {
    auto M = unit_circle();
    auto Hbar = restrict_hamiltonian(make_rotation(), M);
    CHECK_THROWS_AS(Hbar.value_on(vec2(2, 0), vec2(0, 1)), const NotOnManifold&);
    CHECK_THROWS_AS(Hbar.value_on(vec2(1, 0), vec2(1, 0)), const NotTangent&);
}

TEST_CASE("extending a restricted rotation gives back the rotation") {
    auto M = unit_circle();
    auto Hext = extend_hamiltonian(restrict_hamiltonian(make_rotation(), M));
    CHECK(Hext.dim() == 2);
    CHECK(Hext.value(vec2(2, 0), vec2(0, 1)) == doctest::Approx(2.0).epsilon(1e-10));

    auto rot = make_rotation();
    for (int i = 0; i < 30; ++i) {
        const double th = 0.21 * i, rho = 0.6 + 0.027 * i;
        const Vec q = rho * vec2(std::cos(th), std::sin(th));
        const Vec p = vec2(std::sin(3 * th), std::cos(2 * th) - 0.4);
        CHECK(Hext.value(q, p) == doctest::Approx(rot.value(q, p)).epsilon(1e-9));
    }
}

TEST_CASE("extension scales a restricted kinetic energy by the offset factor") {
    auto M = unit_circle();
    auto Hext = extend_hamiltonian(restrict_hamiltonian(make_free(2), M));
    // At radius 2 the tangent correction doubles the momentum before evaluating.
    CHECK(Hext.value(vec2(2, 0), vec2(0, 1)) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(Hext.value(vec2(1, 0), vec2(0, 1)) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("extension respects the tube radius") {
    auto M = std::make_shared<const Submanifold>(make_circle(1.0, 0.3));
    auto Hext = extend_hamiltonian(restrict_hamiltonian(make_rotation(), M));
    CHECK_THROWS_AS(Hext.value(vec2(2, 0), vec2(0, 1)), const OutsideTube&);
    CHECK(Hext.value(vec2(1.1, 0), vec2(0, 1)) == doctest::Approx(1.1).epsilon(1e-9));
}

TEST_CASE("solution restriction and extension round-trip on the manifold") {
    auto M = unit_circle();
    ManifoldScalarField ubar(M, rotated_coordinate, "rotated-coordinate");
    for (double a : {0.0, 1.0, -0.5}) {
        auto u = extend_solution(ubar, a);
        auto back = restrict_solution(u, M);
        for (double th : {0.0, 0.7, 2.2, 4.0}) {
            const Vec qt = vec2(std::cos(th), std::sin(th));
            CHECK(back.value_on(0.3, qt) ==
                  doctest::Approx(ubar.value_on(0.3, qt)).epsilon(1e-12));
        }
    }
}

TEST_CASE("extended solution adds the quadratic offset term") {
    auto M = unit_circle();
    ManifoldScalarField ubar(M, rotated_coordinate, "rotated-coordinate");
    const Vec q = vec2(2, 0);
    const double base = std::cos(0.3);
    CHECK(extend_solution(ubar, 0.0).value(0.3, q) == doctest::Approx(base).epsilon(1e-9));
    CHECK(extend_solution(ubar, 1.0).value(0.3, q) ==
          doctest::Approx(base + 1.0).epsilon(1e-9));
    CHECK(extend_solution(ubar, -0.5).value(0.3, q) ==
          doctest::Approx(base - 0.5).epsilon(1e-9));
}

TEST_CASE("manifold field snaps ambient queries to the closest point") {
    auto M = unit_circle();
    ManifoldScalarField ubar(M, rotated_coordinate, "rotated-coordinate");
    CHECK(ubar.value(0.0, vec2(1.7, 0.0)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(ubar.value_on(0.0, vec2(1.7, 0.0)), const NotOnManifold&);
}

TEST_CASE("extended closed-form solution satisfies the ambient equation") {
    // The restricted solution of the rotation problem, pushed off the circle
    // with each quadratic offset weight; differenced residuals stay at the
    // consistency floor for every weight.
    auto M = unit_circle();
    ManifoldScalarField ubar(M, rotated_coordinate, "rotated-coordinate");
    auto Hext = extend_hamiltonian(restrict_hamiltonian(make_rotation(), M));

    for (double a : {0.0, 1.0, -0.5}) {
        auto u = extend_solution(ubar, a);
        double worst = 0;
        for (int i = 0; i < 25; ++i) {
            const double th = 0.251 * i;
            const double rho = 0.65 + 0.028 * i;
            const Vec q = rho * vec2(std::cos(th), std::sin(th));
            for (double t : {0.1, 0.25, 0.4}) {
                const double h = 1e-5;
                const double du_dt =
                    (u.value(t + h, q) - u.value(t - h, q)) / (2.0 * h);
                Vec g(2);
                for (int j = 0; j < 2; ++j) {
                    Vec qp = q, qm = q;
                    qp[j] += h;
                    qm[j] -= h;
                    g[j] = (u.value(t, qp) - u.value(t, qm)) / (2.0 * h);
                }
                worst = std::max(worst, std::abs(du_dt + Hext.value(q, g)));
            }
        }
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("chart coordinates of a restricted rotation reduce to plain transport") {
    auto M = unit_circle();
    auto Hbar = restrict_hamiltonian(make_rotation(), M);
    auto Hc = pullback_to_chart(Hbar, M->chart(0));
    CHECK(Hc.dim() == 1);
    for (double th : {0.0, 0.9, 2.5, -1.2}) {
        for (double w : {-1.0, 0.3, 2.0}) {
            Vec c(1), pw(1);
            c << th;
            pw << w;
            CHECK(Hc.value(c, pw) == doctest::Approx(w).epsilon(1e-10));
        }
    }
}

TEST_CASE("chart coordinates on a flat piece keep the transport speed") {
    auto M = std::make_shared<const Submanifold>(make_flat(2, 3));
    Vec c(3);
    c << 1.0, -0.5, 0.0;
    auto Hbar = restrict_hamiltonian(make_transport(c), M);
    auto Hc = pullback_to_chart(Hbar, M->chart(0));
    CHECK(Hc.dim() == 2);
    Vec x = vec2(0.4, 1.2), w = vec2(0.8, -0.3);
    CHECK(Hc.value(x, w) == doctest::Approx(1.0 * 0.8 + (-0.5) * (-0.3)).epsilon(1e-12));
}

TEST_CASE("chart solution of the restricted problem has a vanishing residual") {
    auto M = unit_circle();
    auto Hc = pullback_to_chart(restrict_hamiltonian(make_rotation(), M), M->chart(0));
    auto uhat = [](double t, double th) { return std::cos(th - t); };
    double worst = 0;
    for (double th : {0.2, 1.3, 3.0, 5.1}) {
        for (double t : {0.05, 0.3}) {
            const double h = 1e-6;
            const double ut = (uhat(t + h, th) - uhat(t - h, th)) / (2 * h);
            const double uth = (uhat(t, th + h) - uhat(t, th - h)) / (2 * h);
            Vec c(1), w(1);
            c << th;
            w << uth;
            worst = std::max(worst, std::abs(ut + Hc.value(c, w)));
        }
    }
    CHECK(worst < 1e-8);
}
