#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace hjm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Base for all typed failures raised by the library. Callers that only care
// about pass/fail catch this; the harness maps subtypes onto exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class RankDeficient : public Error { public: using Error::Error; };
class NotOnManifold : public Error { public: using Error::Error; };
class NotTangent    : public Error { public: using Error::Error; };
class NotNormal     : public Error { public: using Error::Error; };
class OutsideTube   : public Error { public: using Error::Error; };
class NonUnique     : public Error { public: using Error::Error; };
class SingularMap   : public Error { public: using Error::Error; };
class ChartDomain   : public Error { public: using Error::Error; };

class NonFiniteGradient : public Error { public: using Error::Error; };
class StepRejected      : public Error { public: using Error::Error; };

class CFLViolation : public Error { public: using Error::Error; };
class NonFinite    : public Error { public: using Error::Error; };
class OutOfGrid    : public Error { public: using Error::Error; };

class ConfigError        : public Error { public: using Error::Error; };
class HypothesisViolated : public Error { public: using Error::Error; };

// Every comparison tolerance used by the geometry and transfer layers lives
// here so a change in one place propagates everywhere. Values are absolute
// unless the name says otherwise; "rel" tolerances scale with 1 + |q|.
struct Tolerances {
    double on_manifold      = 1e-9;   // |F(q)|_inf acceptance for "q lies on M"
    double tangency_rel     = 1e-8;   // |(I-P)v| / |v| acceptance for tangency
    double rank             = 1e-8;   // smallest singular value of dF considered nonzero
    double newton_residual  = 1e-12;  // closest-point stationarity residual
    int    newton_max_iter  = 50;
    double equal_distance   = 1e-8;   // two minimizers closer than this in distance: ambiguous
    double point_separation = 1e-6;   // two minimizers farther apart than this are distinct
    double projector_fd_step = 1e-4;  // scale for differencing the projector field
    double grad_fd_step      = 1e-6;  // scale for differencing Hamiltonians
    double pde_fd_step       = 1e-5;  // step for pointwise PDE residuals
};

inline const Tolerances& default_tolerances() {
    static const Tolerances t{};
    return t;
}

}  // namespace hjm
