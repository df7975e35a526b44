#include "hjm/catalog.hpp"

#include "hjm/sampling.hpp"

#include <cmath>

namespace hjm {

namespace {

const double kTwoPi = 2.0 * M_PI;

Chart angle_chart(double r) {
    Chart ch;
    ch.ambient_dim = 2;
    ch.name = "angle";
    ch.map = [r](const Vec& c) {
        Vec x(2);
        const double rho = r + c[1];
        x << rho * std::cos(c[0]), rho * std::sin(c[0]);
        return x;
    };
    ch.inverse = [r](const Vec& x) {
        Vec c(2);
        c << std::atan2(x[1], x[0]), x.norm() - r;
        return c;
    };
    ch.jacobian = [r](const Vec& c) {
        const double rho = r + c[1];
        Mat J(2, 2);
        J << -rho * std::sin(c[0]), std::cos(c[0]),
              rho * std::cos(c[0]), std::sin(c[0]);
        return J;
    };
    ch.in_domain = [r](const Vec& c) { return r + c[1] > 0.1 * r; };
    return ch;
}

Chart torus_chart(double R, double r) {
    Chart ch;
    ch.ambient_dim = 3;
    ch.name = "angles";
    ch.map = [R, r](const Vec& c) {
        const double w = r + c[2];
        const double ring = R + w * std::cos(c[1]);
        Vec x(3);
        x << ring * std::cos(c[0]), ring * std::sin(c[0]), w * std::sin(c[1]);
        return x;
    };
    ch.inverse = [R, r](const Vec& x) {
        const double rho = std::hypot(x[0], x[1]);
        Vec c(3);
        c << std::atan2(x[1], x[0]), std::atan2(x[2], rho - R),
            std::hypot(rho - R, x[2]) - r;
        return c;
    };
    ch.jacobian = [R, r](const Vec& c) {
        const double w = r + c[2];
        const double ring = R + w * std::cos(c[1]);
        const double ct = std::cos(c[0]), st = std::sin(c[0]);
        const double cf = std::cos(c[1]), sf = std::sin(c[1]);
        Mat J(3, 3);
        J.col(0) << -ring * st, ring * ct, 0.0;
        J.col(1) << -w * sf * ct, -w * sf * st, w * cf;
        J.col(2) << cf * ct, cf * st, sf;
        return J;
    };
    ch.in_domain = [R, r](const Vec& c) {
        const double w = r + c[2];
        return w > 0.1 * r && R + w * std::cos(c[1]) > 0.1 * R;
    };
    return ch;
}

Chart sphere_chart(double r) {
    Chart ch;
    ch.ambient_dim = 3;
    ch.name = "spherical";
    ch.map = [r](const Vec& c) {
        const double w = r + c[2];
        Vec x(3);
        x << w * std::cos(c[1]) * std::cos(c[0]),
             w * std::cos(c[1]) * std::sin(c[0]),
             w * std::sin(c[1]);
        return x;
    };
    ch.inverse = [r](const Vec& x) {
        const double n = x.norm();
        Vec c(3);
        c << std::atan2(x[1], x[0]), std::asin(x[2] / n), n - r;
        return c;
    };
    ch.in_domain = [r](const Vec& c) {
        return std::abs(c[1]) < M_PI / 2 - 0.05 && r + c[2] > 0.1 * r;
    };
    return ch;
}

}  // namespace

Submanifold make_flat(int m, int d, double theta) {
    ImplicitRep rep;
    rep.constraint = [m, d](const Vec& x) { return Vec(x.tail(d - m)); };
    rep.jacobian = [m, d](const Vec&) {
        Mat J = Mat::Zero(d - m, d);
        J.rightCols(d - m).setIdentity();
        return J;
    };
    rep.hessians = [m, d](const Vec&) {
        return std::vector<Mat>(d - m, Mat::Zero(d, d));
    };
    Submanifold M(d, m, theta, rep);
    M.name = "flat";
    M.set_sampler([m, d](int count, std::uint64_t seed) {
        auto base = halton_box(count, Vec::Constant(m, -4.0), Vec::Constant(m, 4.0), seed);
        std::vector<Vec> out;
        out.reserve(count);
        for (auto& b : base) {
            Vec x = Vec::Zero(d);
            x.head(m) = b;
            out.push_back(std::move(x));
        }
        return out;
    });

    Chart ch;
    ch.ambient_dim = d;
    ch.name = "identity";
    ch.affine = true;
    ch.map = [](const Vec& c) { return c; };
    ch.inverse = [](const Vec& x) { return x; };
    ch.jacobian = [d](const Vec&) { return Mat(Mat::Identity(d, d)); };
    M.attach_chart(std::move(ch));
    return M;
}

Submanifold make_circle(double r, double theta) {
    ImplicitRep rep;
    rep.constraint = [r](const Vec& x) {
        Vec f(1);
        f[0] = x.squaredNorm() - r * r;
        return f;
    };
    rep.jacobian = [](const Vec& x) { return Mat(2.0 * x.transpose()); };
    rep.hessians = [](const Vec& x) {
        const int d = static_cast<int>(x.size());
        return std::vector<Mat>{Mat(2.0 * Mat::Identity(d, d))};
    };
    Submanifold M(2, 1, theta, rep);
    M.name = "circle";
    M.set_sampler([r](int count, std::uint64_t seed) {
        std::vector<Vec> out;
        out.reserve(count);
        auto u = halton_box(count, Vec::Zero(1), Vec::Constant(1, kTwoPi), seed);
        for (auto& th : u) {
            Vec x(2);
            x << r * std::cos(th[0]), r * std::sin(th[0]);
            out.push_back(std::move(x));
        }
        return out;
    });
    M.attach_chart(angle_chart(r));
    return M;
}

Submanifold make_sphere(double r, int d, double theta) {
    ImplicitRep rep;
    rep.constraint = [r](const Vec& x) {
        Vec f(1);
        f[0] = x.squaredNorm() - r * r;
        return f;
    };
    rep.jacobian = [](const Vec& x) { return Mat(2.0 * x.transpose()); };
    rep.hessians = [d](const Vec&) {
        return std::vector<Mat>{Mat(2.0 * Mat::Identity(d, d))};
    };
    Submanifold M(d, d - 1, theta, rep);
    M.name = "sphere";
    M.set_sampler([r, d](int count, std::uint64_t seed) {
        auto dirs = halton_sphere_dirs(count, d, seed);
        for (auto& v : dirs) v *= r;
        return dirs;
    });
    if (d == 3) M.attach_chart(sphere_chart(r));
    return M;
}

Submanifold make_torus(double R, double r, double theta) {
    ImplicitRep rep;
    rep.constraint = [R, r](const Vec& x) {
        const double rho = std::hypot(x[0], x[1]);
        Vec f(1);
        f[0] = (rho - R) * (rho - R) + x[2] * x[2] - r * r;
        return f;
    };
    rep.jacobian = [R](const Vec& x) {
        const double rho = std::hypot(x[0], x[1]);
        Mat J(1, 3);
        J << 2.0 * (rho - R) * x[0] / rho, 2.0 * (rho - R) * x[1] / rho, 2.0 * x[2];
        return J;
    };
    rep.hessians = [R](const Vec& x) {
        const double rho = std::hypot(x[0], x[1]);
        const double rho3 = rho * rho * rho;
        Mat H = Mat::Zero(3, 3);
        H(0, 0) = 2.0 - 2.0 * R * x[1] * x[1] / rho3;
        H(1, 1) = 2.0 - 2.0 * R * x[0] * x[0] / rho3;
        H(0, 1) = H(1, 0) = 2.0 * R * x[0] * x[1] / rho3;
        H(2, 2) = 2.0;
        return std::vector<Mat>{H};
    };
    Submanifold M(3, 2, theta, rep);
    M.name = "torus";
    M.set_sampler([R, r](int count, std::uint64_t seed) {
        Vec lo = Vec::Zero(2), hi = Vec::Constant(2, kTwoPi);
        auto angles = halton_box(count, lo, hi, seed);
        std::vector<Vec> out;
        out.reserve(count);
        for (auto& a : angles) {
            Vec x(3);
            x << (R + r * std::cos(a[1])) * std::cos(a[0]),
                 (R + r * std::cos(a[1])) * std::sin(a[0]),
                 r * std::sin(a[1]);
            out.push_back(std::move(x));
        }
        return out;
    });
    M.attach_chart(torus_chart(R, r));
    return M;
}

Submanifold make_circle_parametric(double r, double theta) {
    ParametricRep rep;
    rep.charts.push_back(angle_chart(r));
    Submanifold M(2, 1, theta, rep);
    M.name = "circle";
    M.set_sampler([r](int count, std::uint64_t seed) {
        std::vector<Vec> out;
        out.reserve(count);
        auto u = halton_box(count, Vec::Zero(1), Vec::Constant(1, kTwoPi), seed);
        for (auto& th : u) {
            Vec x(2);
            x << r * std::cos(th[0]), r * std::sin(th[0]);
            out.push_back(std::move(x));
        }
        return out;
    });
    return M;
}

Chart make_identity_chart(int d) {
    Chart ch;
    ch.ambient_dim = d;
    ch.name = "identity";
    ch.affine = true;
    ch.map = [](const Vec& c) { return c; };
    ch.inverse = [](const Vec& x) { return x; };
    ch.jacobian = [d](const Vec&) { return Mat(Mat::Identity(d, d)); };
    return ch;
}

Chart make_rotation_chart(double angle) {
    Mat R(2, 2);
    R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    Chart ch;
    ch.ambient_dim = 2;
    ch.name = "rotation";
    ch.affine = true;
    ch.map = [R](const Vec& c) { return Vec(R * c); };
    ch.inverse = [R](const Vec& x) { return Vec(R.transpose() * x); };
    ch.jacobian = [R](const Vec&) { return R; };
    return ch;
}

HamiltonianField make_free(int d) {
    HamiltonianField H("free", d,
                       [](const Vec&, const Vec& p) { return 0.5 * p.squaredNorm(); });
    H.with_grad_q([d](const Vec&, const Vec&) { return Vec(Vec::Zero(d)); });
    H.with_grad_p([](const Vec&, const Vec& p) { return p; });
    return H;
}

HamiltonianField make_rotation() {
    HamiltonianField H("rotation", 2, [](const Vec& q, const Vec& p) {
        return -p[0] * q[1] + p[1] * q[0];
    });
    H.with_grad_q([](const Vec&, const Vec& p) {
        Vec g(2);
        g << p[1], -p[0];
        return g;
    });
    H.with_grad_p([](const Vec& q, const Vec&) {
        Vec g(2);
        g << -q[1], q[0];
        return g;
    });
    return H;
}

HamiltonianField make_transport(Vec c) {
    const int d = static_cast<int>(c.size());
    HamiltonianField H("transport", d,
                       [c](const Vec&, const Vec& p) { return c.dot(p); });
    H.with_grad_q([d](const Vec&, const Vec&) { return Vec(Vec::Zero(d)); });
    H.with_grad_p([c](const Vec&, const Vec&) { return c; });
    return H;
}

HamiltonianField make_abs(int d) {
    HamiltonianField H("abs", d, [](const Vec&, const Vec& p) { return p.norm(); });
    H.with_grad_q([d](const Vec&, const Vec&) { return Vec(Vec::Zero(d)); });
    // Zero is the chosen subgradient at the kink.
    H.with_grad_p([d](const Vec&, const Vec& p) {
        const double n = p.norm();
        if (n < 1e-14) return Vec(Vec::Zero(d));
        return Vec(p / n);
    });
    return H;
}

HamiltonianField make_tangent_kinetic(std::shared_ptr<const Submanifold> M) {
    const int d = M->ambient_dim();
    HamiltonianField H("tangent_kinetic", d, [M](const Vec& q, const Vec& p) {
        return 0.5 * (extended_projector(*M, q) * p).squaredNorm();
    });
    H.with_grad_p([M](const Vec& q, const Vec& p) {
        return Vec(extended_projector(*M, q) * p);
    });
    H.with_grad_q([M, d](const Vec& q, const Vec& p) {
        const Vec Pp = extended_projector(*M, q) * p;
        Vec g(d);
        for (int i = 0; i < d; ++i) {
            Vec e = Vec::Zero(d);
            e[i] = 1.0;
            g[i] = Pp.dot(projector_field_derivative(*M, q, e) * p);
        }
        return g;
    });
    return H;
}

}  // namespace hjm
