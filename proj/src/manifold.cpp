#include "hjm/manifold.hpp"

#include "hjm/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hjm {

namespace {

constexpr int kRestartCloudSize = 128;
constexpr std::uint64_t kRestartCloudSeed = 2025;
constexpr int kNewtonStarts = 4;

bool finite(const Vec& v) { return v.allFinite(); }

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, int rows,
                double scale) {
    const int d = static_cast<int>(x.size());
    const double h = scale * (1.0 + x.norm());
    Mat J(rows, d);
    Vec xp = x, xm = x;
    for (int j = 0; j < d; ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return J;
}

}  // namespace

Mat chart_jacobian(const Chart& chart, const Vec& c) {
    if (!chart_contains(chart, c)) throw ChartDomain("chart evaluated outside its domain");
    if (chart.jacobian) return chart.jacobian(c);
    return fd_jacobian(chart.map, c, chart.ambient_dim, 1e-6);
}

bool chart_contains(const Chart& chart, const Vec& c) {
    return !chart.in_domain || chart.in_domain(c);
}

Submanifold::Submanifold(int ambient_dim, int dim, double theta, ImplicitRep rep,
                         Tolerances tol)
    : ambient_dim_(ambient_dim), dim_(dim), theta_(theta), tol_(tol),
      implicit_(std::move(rep)) {
    if (dim_ < 0 || dim_ >= ambient_dim_ || theta_ <= 0)
        throw ConfigError("submanifold dimensions or tube radius out of range");
    box_lo_ = Vec::Constant(ambient_dim_, -3.0);
    box_hi_ = Vec::Constant(ambient_dim_, 3.0);
    rebuild_cloud();
}

Submanifold::Submanifold(int ambient_dim, int dim, double theta, ParametricRep rep,
                         Tolerances tol)
    : ambient_dim_(ambient_dim), dim_(dim), theta_(theta), tol_(tol),
      parametric_(std::move(rep)) {
    if (dim_ < 0 || dim_ >= ambient_dim_ || theta_ <= 0)
        throw ConfigError("submanifold dimensions or tube radius out of range");
    if (parametric_->charts.empty()) throw ConfigError("parametric rep without charts");
    box_lo_ = Vec::Constant(ambient_dim_, -3.0);
    box_hi_ = Vec::Constant(ambient_dim_, 3.0);
    rebuild_cloud();
}

const ImplicitRep& Submanifold::implicit_rep() const {
    if (!implicit_) throw ConfigError("manifold has no implicit rep");
    return *implicit_;
}

const Chart& Submanifold::chart(int i) const {
    if (!parametric_ || i < 0 || i >= static_cast<int>(parametric_->charts.size()))
        throw ConfigError("chart index out of range");
    return parametric_->charts[i];
}

void Submanifold::set_sampler(std::function<std::vector<Vec>(int, std::uint64_t)> fn) {
    sampler_ = std::move(fn);
    rebuild_cloud();
}

void Submanifold::set_sample_box(Vec lo, Vec hi) {
    box_lo_ = std::move(lo);
    box_hi_ = std::move(hi);
    if (!sampler_) rebuild_cloud();
}

void Submanifold::attach_chart(Chart c) {
    if (!parametric_) parametric_ = ParametricRep{};
    parametric_->charts.push_back(std::move(c));
}

std::vector<Vec> Submanifold::sample_points(int count, std::uint64_t seed) const {
    if (sampler_) return sampler_(count, seed);
    if (!implicit_) throw ConfigError("manifold has neither sampler nor implicit rep");

    // Project a low-discrepancy cloud onto the zero set by damped Gauss-Newton.
    std::vector<Vec> out;
    const auto& F = implicit_->constraint;
    const int budget = 50 * count;
    std::uint64_t offset = 0;
    while (static_cast<int>(out.size()) < count && offset < static_cast<std::uint64_t>(budget)) {
        auto raw = halton_box(count, box_lo_, box_hi_, seed + offset);
        for (auto& x : raw) {
            Vec y = x;
            bool ok = false;
            for (int it = 0; it < 30; ++it) {
                Vec f = F(y);
                if (f.lpNorm<Eigen::Infinity>() <= tol_.on_manifold * (1.0 + y.norm())) {
                    ok = true;
                    break;
                }
                Mat J = implicit_jacobian(*this, y);
                Vec step = J.transpose() * (J * J.transpose())
                                               .colPivHouseholderQr()
                                               .solve(f);
                if (!finite(step)) break;
                y -= step;
            }
            if (ok && finite(y)) {
                out.push_back(y);
                if (static_cast<int>(out.size()) >= count) break;
            }
        }
        offset += count;
    }
    return out;
}

const std::vector<Vec>& Submanifold::restart_cloud() const { return *cloud_; }

void Submanifold::rebuild_cloud() {
    auto cloud = std::make_shared<std::vector<Vec>>();
    try {
        *cloud = sample_points(kRestartCloudSize, kRestartCloudSeed);
    } catch (const Error&) {
        // No sampler and no implicit rep: closest_point falls back to a
        // single start derived from the query.
    }
    cloud_ = std::move(cloud);
}

Mat implicit_jacobian(const Submanifold& M, const Vec& x) {
    const auto& rep = M.implicit_rep();
    if (rep.jacobian) return rep.jacobian(x);
    return fd_jacobian(rep.constraint, x, M.codim(), M.tol().grad_fd_step);
}

bool on_manifold(const Submanifold& M, const Vec& q) {
    if (M.has_implicit()) {
        Vec f = M.implicit_rep().constraint(q);
        return f.lpNorm<Eigen::Infinity>() <= M.tol().on_manifold * (1.0 + q.norm());
    }
    const Chart& ch = M.chart(0);
    Vec c = ch.inverse(q);
    for (int i = M.dim(); i < M.ambient_dim(); ++i) c[i] = 0.0;
    return (ch.map(c) - q).norm() <= M.tol().on_manifold * (1.0 + q.norm());
}

namespace {

Mat implicit_projector(const Submanifold& M, const Vec& x) {
    const Mat J = implicit_jacobian(M, x);
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = std::max(M.tol().rank, 1e-13 * sv(0));
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    if (rank != M.codim())
        throw RankDeficient("constraint Jacobian loses rank near the query point");
    const int d = M.ambient_dim();
    Mat P = Mat::Identity(d, d);
    const Mat& V = svd.matrixV();
    for (int i = 0; i < rank; ++i) P -= V.col(i) * V.col(i).transpose();
    return P;
}

Mat parametric_projector(const Submanifold& M, const Vec& x) {
    const Chart& ch = M.chart(0);
    Vec c = ch.inverse(x);
    if (!chart_contains(ch, c)) throw ChartDomain("point leaves the chart domain");
    for (int i = M.dim(); i < M.ambient_dim(); ++i) c[i] = 0.0;
    Mat B = chart_jacobian(ch, c).leftCols(M.dim());
    Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= std::max(M.tol().rank, 1e-13 * sv(0)))
        throw RankDeficient("chart differential loses rank");
    const Mat U = svd.matrixU();
    return U * U.transpose();
}

}  // namespace

Mat extended_projector(const Submanifold& M, const Vec& x) {
    if (!finite(x)) throw ConfigError("non-finite point");
    if (M.has_implicit()) return implicit_projector(M, x);
    return parametric_projector(M, x);
}

Mat projector_matrix(const Submanifold& M, const Vec& q) {
    if (!on_manifold(M, q))
        throw NotOnManifold("projector requested off the manifold");
    return extended_projector(M, q);
}

Mat projector_field_derivative(const Submanifold& M, const Vec& q, const Vec& v) {
    const int d = M.ambient_dim();
    const double nv = v.norm();
    if (nv == 0.0) return Mat::Zero(d, d);

    if (M.has_implicit() && M.implicit_rep().hessians) {
        const auto& rep = M.implicit_rep();
        const Mat A = implicit_jacobian(M, q);
        const auto H = rep.hessians(q);
        Mat dA(M.codim(), d);
        for (int k = 0; k < M.codim(); ++k) dA.row(k) = (H[k] * v).transpose();
        const Mat AAt = A * A.transpose();
        const Mat G = AAt.inverse();
        const Mat dAAt = dA * A.transpose() + A * dA.transpose();
        const Mat dG = -G * dAAt * G;
        const Mat dPn = dA.transpose() * G * A + A.transpose() * dG * A +
                        A.transpose() * G * dA;
        return -dPn;
    }

    const Vec u = v / nv;
    const double h = M.tol().projector_fd_step * (1.0 + q.norm());
    Mat D = (extended_projector(M, q + h * u) - extended_projector(M, q - h * u)) /
            (2.0 * h);
    return nv * D;
}

namespace {

void require_tangent(const Submanifold& M, const Mat& P, const Vec& v, const char* who) {
    const double nv = v.norm();
    if (nv == 0.0) return;
    if (((Mat::Identity(P.rows(), P.cols()) - P) * v).norm() > M.tol().tangency_rel * nv * (1.0 + 1.0))
        throw NotTangent(std::string(who) + ": vector is not tangent");
}

void require_normal(const Submanifold& M, const Mat& P, const Vec& n, const char* who) {
    const double nn = n.norm();
    if (nn == 0.0) return;
    if ((P * n).norm() > M.tol().tangency_rel * nn * (1.0 + 1.0))
        throw NotNormal(std::string(who) + ": vector is not normal");
}

}  // namespace

Vec second_fundamental_form(const Submanifold& M, const Vec& q, const Vec& v, const Vec& w) {
    const Mat P = projector_matrix(M, q);
    require_tangent(M, P, v, "second_fundamental_form");
    require_tangent(M, P, w, "second_fundamental_form");
    return projector_field_derivative(M, q, v) * w;
}

Vec weingarten_adjoint(const Submanifold& M, const Vec& q, const Vec& a, const Vec& n) {
    const Mat P = projector_matrix(M, q);
    require_tangent(M, P, a, "weingarten_adjoint");
    require_normal(M, P, n, "weingarten_adjoint");
    return projector_field_derivative(M, q, a) * n;
}

namespace {

struct Candidate {
    Vec point;
    double dist;
};

// Newton iteration on the stationarity system of the squared-distance
// Lagrangian: F(x) = 0 and x - q + dF(x)^T lam = 0.
bool implicit_project_from(const Submanifold& M, const Vec& q, const Vec& x0,
                           Vec* result) {
    const auto& rep = M.implicit_rep();
    const int d = M.ambient_dim();
    const int c = M.codim();
    const double res_tol =
        (rep.jacobian ? 1.0 : 1e3) * M.tol().newton_residual * (1.0 + q.norm());

    Vec x = x0;
    Mat J = implicit_jacobian(M, x);
    Vec lam = (J * J.transpose()).colPivHouseholderQr().solve(J * (q - x));

    auto residual = [&](const Vec& xx, const Vec& ll, const Mat& JJ) {
        Vec r(c + d);
        r.head(c) = rep.constraint(xx);
        r.tail(d) = xx - q + JJ.transpose() * ll;
        return r;
    };

    Vec r = residual(x, lam, J);
    for (int it = 0; it < M.tol().newton_max_iter; ++it) {
        if (r.lpNorm<Eigen::Infinity>() <= res_tol) {
            *result = x;
            return true;
        }
        // d/dx of dF^T lam: contraction of the constraint Hessians with lam.
        Mat Hl(d, d);
        if (rep.hessians) {
            const auto H = rep.hessians(x);
            Hl.setZero();
            for (int k = 0; k < c; ++k) Hl += lam[k] * H[k];
        } else {
            const double h = 1e-6 * (1.0 + x.norm());
            Vec xp = x, xm = x;
            for (int j = 0; j < d; ++j) {
                xp[j] = x[j] + h;
                xm[j] = x[j] - h;
                Hl.col(j) = (implicit_jacobian(M, xp).transpose() * lam -
                             implicit_jacobian(M, xm).transpose() * lam) /
                            (2.0 * h);
                xp[j] = x[j];
                xm[j] = x[j];
            }
        }
        Mat K = Mat::Zero(c + d, c + d);
        K.block(0, 0, c, d) = J;
        K.block(c, 0, d, d) = Mat::Identity(d, d) + Hl;
        K.block(c, d, d, c) = J.transpose();
        Vec delta = K.fullPivLu().solve(-r);
        if (!finite(delta)) return false;

        double scale = 1.0;
        for (int bt = 0; bt < 8; ++bt) {
            Vec xn = x + scale * delta.head(d);
            Vec ln = lam + scale * delta.tail(c);
            Mat Jn = implicit_jacobian(M, xn);
            Vec rn = residual(xn, ln, Jn);
            if (finite(rn) && rn.norm() < r.norm()) {
                x = xn;
                lam = ln;
                J = Jn;
                r = rn;
                break;
            }
            scale *= 0.5;
            if (bt == 7) return false;
        }
    }
    if (r.lpNorm<Eigen::Infinity>() <= res_tol) {
        *result = x;
        return true;
    }
    return false;
}

bool parametric_project_from(const Submanifold& M, const Vec& q, const Vec& c0,
                             Vec* result) {
    const Chart& ch = M.chart(0);
    const int m = M.dim();
    const double opt_tol = 1e-10 * (1.0 + q.norm());

    Vec c = c0;
    Vec cfull = Vec::Zero(M.ambient_dim());
    auto embed = [&](const Vec& cc) {
        cfull.head(m) = cc;
        return ch.map(cfull);
    };
    for (int it = 0; it < M.tol().newton_max_iter; ++it) {
        cfull.head(m) = c;
        if (!chart_contains(ch, cfull)) return false;
        Vec r = embed(c) - q;
        Mat J = chart_jacobian(ch, cfull).leftCols(m);
        Vec g = J.transpose() * r;
        if (g.lpNorm<Eigen::Infinity>() <= opt_tol) {
            *result = embed(c);
            return true;
        }
        Vec delta = (J.transpose() * J).colPivHouseholderQr().solve(-g);
        if (!finite(delta)) return false;
        double scale = 1.0;
        const double f0 = r.squaredNorm();
        for (int bt = 0; bt < 8; ++bt) {
            Vec cn = c + scale * delta;
            Vec rn = embed(cn) - q;
            if (finite(rn) && rn.squaredNorm() <= f0) {
                c = cn;
                break;
            }
            scale *= 0.5;
            if (bt == 7) return false;
        }
    }
    return false;
}

}  // namespace

ClosestPoint closest_point(const Submanifold& M, const Vec& q) {
    if (!finite(q)) throw ConfigError("non-finite query point");

    // Starts: the nearest restart-cloud points, plus a plain constraint
    // projection of the query itself.
    std::vector<Vec> starts;
    const auto& cloud = M.restart_cloud();
    if (!cloud.empty()) {
        std::vector<int> idx(cloud.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
            return (cloud[a] - q).squaredNorm() < (cloud[b] - q).squaredNorm();
        });
        for (int k = 0; k < std::min<int>(kNewtonStarts, idx.size()); ++k)
            starts.push_back(cloud[idx[k]]);
    }
    starts.push_back(q);

    std::vector<Candidate> found;
    for (const auto& s : starts) {
        Vec x;
        bool ok;
        if (M.has_implicit()) {
            ok = implicit_project_from(M, q, s, &x);
        } else {
            Vec c0 = M.chart(0).inverse(s).head(M.dim());
            ok = parametric_project_from(M, q, c0, &x);
        }
        if (ok) found.push_back({x, (x - q).norm()});
    }
    if (found.empty())
        throw OutsideTube("closest-point search did not converge");

    std::sort(found.begin(), found.end(),
              [](const Candidate& a, const Candidate& b) { return a.dist < b.dist; });
    const Candidate& best = found.front();
    for (size_t i = 1; i < found.size(); ++i) {
        if ((found[i].point - best.point).norm() > M.tol().point_separation &&
            found[i].dist - best.dist <= M.tol().equal_distance)
            throw NonUnique("two equally close projections found");
    }
    if (!(best.dist < M.theta()))
        throw OutsideTube("query lies outside the tube around the manifold");
    return {best.point, best.dist};
}

TangentFrame tangent_frame(const Submanifold& M, const Vec& q) {
    const Mat P = projector_matrix(M, q);
    const int d = M.ambient_dim();

    auto pivoted_basis = [&](const Mat& A, int want) {
        Mat cols = A;
        Mat basis(d, want);
        for (int k = 0; k < want; ++k) {
            int pivot = 0;
            double best = -1.0;
            for (int j = 0; j < cols.cols(); ++j) {
                const double n = cols.col(j).norm();
                if (n > best + 1e-15) {
                    best = n;
                    pivot = j;
                }
            }
            if (best <= 1e-8)
                throw RankDeficient("projector columns span too small a space");
            Vec v = cols.col(pivot) / best;
            // One re-orthogonalization pass keeps the basis clean.
            for (int i = 0; i < k; ++i) v -= basis.col(i).dot(v) * basis.col(i);
            v.normalize();
            int imax = 0;
            for (int i = 1; i < d; ++i)
                if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
            if (v[imax] < 0) v = -v;
            basis.col(k) = v;
            for (int j = 0; j < cols.cols(); ++j)
                cols.col(j) -= v.dot(cols.col(j)) * v;
        }
        return basis;
    };

    TangentFrame f;
    f.tangent = pivoted_basis(P, M.dim());
    f.normal = pivoted_basis(Mat::Identity(d, d) - P, M.codim());
    return f;
}

namespace {

// Shared core: foot point, normal offset, and the frame at the foot.
struct TubeDecomposition {
    Vec foot;
    Vec offset;
    Mat P;
};

TubeDecomposition decompose(const Submanifold& M, const Vec& q) {
    auto cp = closest_point(M, q);
    TubeDecomposition t;
    t.foot = cp.point;
    t.offset = q - cp.point;
    t.P = extended_projector(M, cp.point);
    return t;
}

}  // namespace

Vec v_inverse_apply(const Submanifold& M, const Vec& q, const Vec& p) {
    auto t = decompose(M, q);
    require_tangent(M, t.P, p, "v_inverse_apply");
    return p - projector_field_derivative(M, t.foot, p) * t.offset;
}

Mat v_inverse_matrix(const Submanifold& M, const Vec& q) {
    auto t = decompose(M, q);
    TangentFrame f = tangent_frame(M, t.foot);
    const int m = M.dim();
    Mat A(m, m);
    for (int j = 0; j < m; ++j) {
        Vec vj = f.tangent.col(j) -
                 projector_field_derivative(M, t.foot, f.tangent.col(j)) * t.offset;
        A.col(j) = f.tangent.transpose() * vj;
    }
    return A;
}

Vec v_apply(const Submanifold& M, const Vec& q, const Vec& p) {
    auto t = decompose(M, q);
    require_tangent(M, t.P, p, "v_apply");
    TangentFrame f = tangent_frame(M, t.foot);
    const int m = M.dim();
    Mat A(m, m);
    for (int j = 0; j < m; ++j) {
        Vec vj = f.tangent.col(j) -
                 projector_field_derivative(M, t.foot, f.tangent.col(j)) * t.offset;
        A.col(j) = f.tangent.transpose() * vj;
    }
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-12 * std::max(1.0, sv(0)))
        throw SingularMap("projection differential is numerically singular here");
    Vec y = svd.solve(f.tangent.transpose() * p);
    return f.tangent * y;
}

}  // namespace hjm
