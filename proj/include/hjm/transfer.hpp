#pragma once

#include "hjm/hamiltonian.hpp"
#include "hjm/manifold.hpp"

#include <functional>
#include <memory>
#include <string>

namespace hjm {

// Scalar field on a time interval times the ambient space.
struct SpaceTimeField {
    int dim = 0;
    std::function<double(double, const Vec&)> eval;

    double value(double t, const Vec& q) const;
};

// Scalar field defined along a submanifold.  value_on expects a point of the
// manifold; value snaps an ambient query to its closest point first.
class ManifoldScalarField {
  public:
    ManifoldScalarField(std::shared_ptr<const Submanifold> manifold,
                        std::function<double(double, const Vec&)> eval,
                        std::string name = "field");

    double value_on(double t, const Vec& qtilde) const;
    double value(double t, const Vec& q) const;

    const Submanifold& manifold() const { return *manifold_; }
    std::shared_ptr<const Submanifold> manifold_ptr() const { return manifold_; }
    const std::string& name() const { return name_; }

  private:
    std::shared_ptr<const Submanifold> manifold_;
    std::function<double(double, const Vec&)> eval_;
    std::string name_;
};

// Hamiltonian on the tangent bundle of a submanifold.  value_on expects a
// manifold point with a tangent momentum and validates both.
class ManifoldHamiltonian {
  public:
    struct ValueAndDefect {
        double value = 0;
        double defect = 0;
    };

    ManifoldHamiltonian(std::shared_ptr<const Submanifold> manifold,
                        std::function<double(const Vec&, const Vec&)> eval,
                        std::string name = "hbar");

    double value_on(const Vec& qtilde, const Vec& ptangent) const;

    // Evaluates at the tangent part of an arbitrary ambient momentum and
    // reports how much the value would change if the normal part mattered.
    ValueAndDefect value_and_defect(const Vec& qtilde, const Vec& p) const;

    const Submanifold& manifold() const { return *manifold_; }
    std::shared_ptr<const Submanifold> manifold_ptr() const { return manifold_; }
    const std::string& name() const { return name_; }

  private:
    std::shared_ptr<const Submanifold> manifold_;
    std::function<double(const Vec&, const Vec&)> eval_;
    std::string name_;
};

// The four transfer operations between the ambient problem and the manifold
// problem.  Extension of a Hamiltonian pulls the momentum back through the
// tangent correction map of the closest-point retraction; extension of a
// solution adds a * dist(q, M)^2 to the value at the closest point.
ManifoldHamiltonian restrict_hamiltonian(const HamiltonianField& H,
                                         std::shared_ptr<const Submanifold> manifold);
HamiltonianField extend_hamiltonian(const ManifoldHamiltonian& Hbar);
ManifoldScalarField restrict_solution(const SpaceTimeField& u,
                                      std::shared_ptr<const Submanifold> manifold);
SpaceTimeField extend_solution(const ManifoldScalarField& ubar, double a);

// Coordinate form of a manifold Hamiltonian in one adapted chart: the first
// dim(M) chart coordinates move along the manifold, the rest are normal
// offsets held at zero.
HamiltonianField pullback_to_chart(const ManifoldHamiltonian& Hbar, const Chart& chart);

}  // namespace hjm
