#include "doctest.h"

#include "hjm/catalog.hpp"
#include "hjm/manifold.hpp"

#include <cmath>
#include <vector>

using namespace hjm;

namespace {

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

Vec vec3(double a, double b, double c) {
    Vec v(3);
    v << a, b, c;
    return v;
}

// Closed-form tangent projector of a centered round sphere (any dimension,
// any radius): I - x x^T / |x|^2. Used as an independent reference for the
// library path, which goes through the constraint Jacobian instead.
Mat round_projector(const Vec& x) {
    const int d = static_cast<int>(x.size());
    return Mat::Identity(d, d) - (x * x.transpose()) / x.squaredNorm();
}

// Directional derivative of a matrix field by central differences. Kept local
// to the tests so second-fundamental-form checks do not reuse library code.
template <typename Field>
Mat matrix_field_derivative(Field&& P, const Vec& q, const Vec& v, double h) {
    return (P(q + h * v) - P(q - h * v)) / (2.0 * h);
}

const double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("projector: flat plane inside R^3") {
    auto M = make_flat(2, 3);
    Mat want = Mat::Zero(3, 3);
    want(0, 0) = 1.0;
    want(1, 1) = 1.0;
    for (double s : {0.0, 1.0, -2.5}) {
        Mat P = projector_matrix(M, vec3(s, 2.0 * s, 0.0));
        CHECK((P - want).norm() < 1e-13);
    }
}

TEST_CASE("projector: circle and sphere match the rank-one closed form") {
    auto C = make_circle(1.0);
    for (double th : {0.0, 0.3, 1.1, 2.7, 4.0, 5.5}) {
        Vec q = vec2(std::cos(th), std::sin(th));
        Mat P = projector_matrix(C, q);
        CHECK((P - round_projector(q)).norm() < 1e-12);
        CHECK((P - P.transpose()).norm() < 1e-12);
        CHECK((P * P - P).norm() < 1e-12);
        CHECK(P.trace() == doctest::Approx(1.0).epsilon(1e-12));
    }

    auto C2 = make_circle(2.0);
    Vec q2 = vec2(2.0, 0.0);
    CHECK((projector_matrix(C2, q2) - round_projector(q2)).norm() < 1e-12);

    auto S = make_sphere(1.0, 3);
    for (auto& q : std::vector<Vec>{vec3(0, 0, 1), vec3(0.6, 0.8, 0.0),
                                    vec3(1, 2, 2) / 3.0}) {
        Mat P = projector_matrix(S, q);
        CHECK((P - round_projector(q)).norm() < 1e-12);
        CHECK(P.trace() == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("projector: torus tangent plane at the outer equator") {
    auto T = make_torus(2.0, 0.5);
    // At (R+r, 0, 0) the tangent directions are the two coordinate circles.
    Mat P = projector_matrix(T, vec3(2.5, 0.0, 0.0));
    Mat want = Mat::Zero(3, 3);
    want(1, 1) = 1.0;
    want(2, 2) = 1.0;
    CHECK((P - want).norm() < 1e-10);
}

TEST_CASE("projector: rejects points off the manifold") {
    auto C = make_circle(1.0);
    CHECK_THROWS_AS(projector_matrix(C, vec2(1.5, 0.0)), const NotOnManifold&);
}

TEST_CASE("projector laws hold on sampled catalog points") {
    std::vector<Submanifold> cases;
    cases.push_back(make_flat(1, 2));
    cases.push_back(make_circle(1.0));
    cases.push_back(make_sphere(1.0, 3));
    cases.push_back(make_torus(2.0, 0.5));
    for (const auto& M : cases) {
        for (const auto& q : M.sample_points(50, 7)) {
            Mat P = projector_matrix(M, q);
            CHECK((P - P.transpose()).norm() < 1e-10);
            CHECK((P * P - P).norm() < 1e-10);
            CHECK(std::abs(P.trace() - M.dim()) < 1e-8);
        }
    }
}

TEST_CASE("second fundamental form: circle curvature vector") {
    auto C = make_circle(1.0);

    // Frozen case worked out by hand: unit tangent at (1,0) is (0,1) and the
    // curvature vector points at the center.
    Vec h = second_fundamental_form(C, vec2(1, 0), vec2(0, 1), vec2(0, 1));
    CHECK(h[0] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(std::abs(h[1]) < 1e-6);

    for (double th : {0.3, 1.1, 2.7, 4.0}) {
        Vec q = vec2(std::cos(th), std::sin(th));
        Vec t = vec2(-std::sin(th), std::cos(th));
        Vec got = second_fundamental_form(C, q, t, 2.0 * t);
        Vec want = -2.0 * q;  // -<v,w> q on the unit circle
        CHECK((got - want).norm() < 1e-6);
        // Independent cross-check: difference the closed-form projector field.
        Mat dP = matrix_field_derivative(round_projector, q, t, 1e-5);
        CHECK((got - dP * (2.0 * t)).norm() < 1e-6);
    }
}

TEST_CASE("second fundamental form: sphere symmetry and closed form") {
    auto S = make_sphere(1.0, 3);
    for (auto& q : std::vector<Vec>{vec3(0, 0, 1), vec3(0.6, 0.8, 0.0)}) {
        TangentFrame F = tangent_frame(S, q);
        Vec a = F.tangent.col(0) + 0.5 * F.tangent.col(1);
        Vec b = F.tangent.col(1) - 2.0 * F.tangent.col(0);
        Vec hab = second_fundamental_form(S, q, a, b);
        Vec hba = second_fundamental_form(S, q, b, a);
        CHECK((hab - hba).norm() < 1e-6);
        CHECK((hab - (-a.dot(b) * q)).norm() < 1e-6);
        // Normality of the value.
        Mat P = projector_matrix(S, q);
        CHECK((P * hab).norm() < 1e-6);
    }
}

TEST_CASE("second fundamental form: torus principal directions") {
    auto T = make_torus(2.0, 0.5);
    Vec q = vec3(2.5, 0.0, 0.0);
    Vec e_outer = vec3(0, 1, 0);  // along the outer equator, radius R+r
    Vec e_tube = vec3(0, 0, 1);   // along the meridian circle, radius r
    Vec h_tube = second_fundamental_form(T, q, e_tube, e_tube);
    Vec h_outer = second_fundamental_form(T, q, e_outer, e_outer);
    Vec h_mixed = second_fundamental_form(T, q, e_outer, e_tube);
    CHECK((h_tube - vec3(-2.0, 0, 0)).norm() < 1e-5);    // curvature 1/r
    CHECK((h_outer - vec3(-0.4, 0, 0)).norm() < 1e-5);   // curvature 1/(R+r)
    CHECK(h_mixed.norm() < 1e-5);
}

TEST_CASE("second fundamental form: tangency is enforced") {
    auto C = make_circle(1.0);
    CHECK_THROWS_AS(second_fundamental_form(C, vec2(1, 0), vec2(1, 0), vec2(0, 1)),
                    const NotTangent&);
}

TEST_CASE("weingarten adjoint: frozen values and duality") {
    auto C = make_circle(1.0);
    Vec w = weingarten_adjoint(C, vec2(1, 0), vec2(0, 1), vec2(0.5, 0.0));
    CHECK((w - vec2(0.0, -0.5)).norm() < 1e-6);

    auto S = make_sphere(1.0, 3);
    Vec ws = weingarten_adjoint(S, vec3(0, 0, 1), vec3(1, 0, 0), vec3(0, 0, 2));
    CHECK((ws - vec3(-2.0, 0, 0)).norm() < 1e-6);

    // <c, h*(a,n)> = <h(a,c), n> across manifolds.
    std::vector<Submanifold> cases;
    cases.push_back(make_circle(1.0));
    cases.push_back(make_sphere(1.0, 3));
    cases.push_back(make_torus(2.0, 0.5));
    for (const auto& M : cases) {
        for (const auto& q : M.sample_points(8, 3)) {
            TangentFrame F = tangent_frame(M, q);
            const int m = M.dim();
            Vec a = F.tangent * Vec::LinSpaced(m, 0.4, 1.0);
            Vec c = F.tangent * Vec::LinSpaced(m, 1.0, 0.2);
            Vec n = F.normal * Vec::LinSpaced(M.ambient_dim() - m, 0.7, 0.9);
            const double lhs = c.dot(weingarten_adjoint(M, q, a, n));
            const double rhs = n.dot(second_fundamental_form(M, q, a, c));
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
        }
    }

    CHECK_THROWS_AS(weingarten_adjoint(C, vec2(1, 0), vec2(0, 1), vec2(0, 1)),
                    const NotNormal&);
}

TEST_CASE("closest point: circle, sphere, flat") {
    auto C = make_circle(1.0);
    auto cp = closest_point(C, vec2(2.0, 0.0));
    CHECK((cp.point - vec2(1, 0)).norm() < 1e-10);
    CHECK(cp.dist == doctest::Approx(1.0).epsilon(1e-10));

    auto cp2 = closest_point(C, 1.3 * vec2(0.6, 0.8));
    CHECK((cp2.point - vec2(0.6, 0.8)).norm() < 1e-10);
    CHECK(cp2.dist == doctest::Approx(0.3).epsilon(1e-9));

    // Idempotent on the manifold.
    auto cp3 = closest_point(C, cp2.point);
    CHECK((cp3.point - cp2.point).norm() < 1e-10);
    CHECK(cp3.dist < 1e-10);

    auto S = make_sphere(1.0, 3);
    auto cps = closest_point(S, vec3(0, 0, 1.5));
    CHECK((cps.point - vec3(0, 0, 1)).norm() < 1e-10);

    auto F = make_flat(1, 2);
    auto cpf = closest_point(F, vec2(3.0, 0.7));
    CHECK((cpf.point - vec2(3.0, 0.0)).norm() < 1e-12);
    CHECK(cpf.dist == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("closest point: torus") {
    auto T = make_torus(2.0, 0.5);
    auto cp = closest_point(T, vec3(2.8, 0.0, 0.0));
    CHECK((cp.point - vec3(2.5, 0, 0)).norm() < 1e-9);
    CHECK(cp.dist == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("closest point: ambiguous queries are refused") {
    auto C = make_circle(1.0);
    CHECK_THROWS_AS(closest_point(C, vec2(0.0, 0.0)), const Error&);
    auto T = make_torus(2.0, 0.5);
    CHECK_THROWS_AS(closest_point(T, vec3(0.0, 0.0, 0.0)), const Error&);
}

TEST_CASE("closest point: tube bound is enforced strictly") {
    auto C = make_circle(1.0, 0.5);
    CHECK_THROWS_AS(closest_point(C, vec2(2.0, 0.0)), const OutsideTube&);
    // Inside the tube the same query shape works.
    auto cp = closest_point(C, vec2(1.4, 0.0));
    CHECK((cp.point - vec2(1, 0)).norm() < 1e-10);
}

TEST_CASE("closest point: implicit rep with differenced Jacobian") {
    // Ellipse x^2/4 + y^2 = 1 given only through its constraint value.
    ImplicitRep rep;
    rep.constraint = [](const Vec& x) {
        Vec f(1);
        f[0] = x[0] * x[0] / 4.0 + x[1] * x[1] - 1.0;
        return f;
    };
    Submanifold E(2, 1, std::numeric_limits<double>::infinity(), rep);
    auto cp = closest_point(E, vec2(3.0, 0.0));
    CHECK((cp.point - vec2(2.0, 0.0)).norm() < 1e-7);
    CHECK(cp.dist == doctest::Approx(1.0).epsilon(1e-7));

    Mat P = projector_matrix(E, vec2(0.0, 1.0));
    Mat want = Mat::Zero(2, 2);
    want(0, 0) = 1.0;
    CHECK((P - want).norm() < 1e-6);
}

TEST_CASE("tangent frame: deterministic orthonormal bases") {
    auto C = make_circle(1.0);
    TangentFrame F = tangent_frame(C, vec2(1, 0));
    CHECK((F.tangent.col(0) - vec2(0, 1)).norm() < 1e-12);
    CHECK((F.normal.col(0) - vec2(1, 0)).norm() < 1e-12);

    auto Fl = tangent_frame(make_flat(1, 2), vec2(0, 0));
    CHECK((Fl.tangent.col(0) - vec2(1, 0)).norm() < 1e-12);
    CHECK((Fl.normal.col(0) - vec2(0, 1)).norm() < 1e-12);

    auto S = make_sphere(1.0, 3);
    Vec q = vec3(1, 2, 2) / 3.0;
    TangentFrame Fs = tangent_frame(S, q);
    CHECK((Fs.tangent.transpose() * Fs.tangent - Mat::Identity(2, 2)).norm() < 1e-10);
    CHECK((projector_matrix(S, q) * Fs.tangent - Fs.tangent).norm() < 1e-9);
    CHECK((Fs.normal.transpose() * Fs.tangent).norm() < 1e-10);

    // Bitwise repeatability.
    TangentFrame Fs2 = tangent_frame(S, q);
    CHECK(Fs.tangent == Fs2.tangent);
    CHECK(Fs.normal == Fs2.normal);
}

TEST_CASE("closest-point differential: frozen circle values") {
    auto C = make_circle(1.0);
    Vec r = v_inverse_apply(C, vec2(2.0, 0.0), vec2(0, 1));
    CHECK((r - vec2(0.0, 2.0)).norm() < 1e-7);

    Vec r2 = v_inverse_apply(C, vec2(0.5, 0.0), vec2(0, 1));
    CHECK((r2 - vec2(0.0, 0.5)).norm() < 1e-7);

    Vec r3 = v_apply(C, vec2(2.0, 0.0), vec2(0.0, 2.0));
    CHECK((r3 - vec2(0.0, 1.0)).norm() < 1e-7);

    Mat A = v_inverse_matrix(C, vec2(2.0, 0.0));
    REQUIRE(A.rows() == 1);
    CHECK(A(0, 0) == doctest::Approx(2.0).epsilon(1e-7));

    // On the manifold the map is the identity.
    Vec r4 = v_inverse_apply(C, vec2(0, 1), vec2(-1, 0));
    CHECK((r4 - vec2(-1, 0)).norm() < 1e-9);

    CHECK_THROWS_AS(v_inverse_apply(C, vec2(2.0, 0.0), vec2(1, 0)),
                    const NotTangent&);
}

TEST_CASE("closest-point differential: self-adjoint on the tangent space") {
    std::vector<std::pair<Submanifold, Vec>> cases;
    cases.emplace_back(make_sphere(1.0, 3), 1.3 * vec3(1, 2, 2) / 3.0);
    cases.emplace_back(make_torus(2.0, 0.5), vec3(2.7, 0.0, 0.15));
    for (const auto& [M, q] : cases) {
        Mat A = v_inverse_matrix(M, q);
        CHECK((A - A.transpose()).norm() < 1e-8);
    }
}

TEST_CASE("closest-point differential: matches differenced projection map") {
    std::vector<std::pair<Submanifold, Vec>> cases;
    cases.emplace_back(make_circle(1.0), vec2(1.3, 0.0));
    cases.emplace_back(make_circle(1.0), 0.8 * vec2(std::cos(2.0), std::sin(2.0)));
    cases.emplace_back(make_sphere(1.0, 3), 1.2 * vec3(0, 0, 1));
    cases.emplace_back(make_torus(2.0, 0.5), vec3(2.65, 0.0, 0.1));
    for (const auto& [M, q] : cases) {
        const Vec qt = closest_point(M, q).point;
        TangentFrame F = tangent_frame(M, qt);
        const int m = M.dim();
        const double h = 1e-6;
        Mat A_fd(m, m);
        for (int j = 0; j < m; ++j) {
            Vec col = (closest_point(M, q + h * F.tangent.col(j)).point -
                       closest_point(M, q - h * F.tangent.col(j)).point) /
                      (2.0 * h);
            A_fd.col(j) = F.tangent.transpose() * col;
        }
        Mat A_lib = v_inverse_matrix(M, q).inverse();
        CHECK((A_fd - A_lib).norm() < 1e-5);
    }
}

TEST_CASE("parametric rep: circle through its angle chart") {
    auto C = make_circle_parametric(1.0);
    for (double th : {0.0, 0.9, 2.2, -1.3}) {
        Vec q = vec2(std::cos(th), std::sin(th));
        CHECK((projector_matrix(C, q) - round_projector(q)).norm() < 1e-8);
    }
    auto cp = closest_point(C, vec2(2.0, 0.0));
    CHECK((cp.point - vec2(1, 0)).norm() < 1e-8);
    CHECK(cp.dist == doctest::Approx(1.0).epsilon(1e-8));

    // Same second-fundamental-form values as the implicit route.
    Vec h = second_fundamental_form(C, vec2(1, 0), vec2(0, 1), vec2(0, 1));
    CHECK((h - vec2(-1, 0)).norm() < 1e-5);
}

TEST_CASE("chart round trip") {
    auto C = make_circle_parametric(1.0);
    const Chart& ch = C.chart(0);
    for (double th : {0.0, 0.9, 2.2, -1.3}) {
        for (double s : {-0.2, 0.0, 0.4}) {
            Vec c = vec2(th, s);
            Vec back = ch.inverse(ch.map(c));
            CHECK((back - c).norm() < 1e-10);
        }
    }
}
