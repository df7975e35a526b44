#pragma once

#include "hjm/hamiltonian.hpp"
#include "hjm/manifold.hpp"

#include <limits>
#include <memory>

namespace hjm {

// Built-in manifolds. theta defaults to "unbounded": closest-point queries
// are then gated only by the ambiguity detector, which is what the worked
// examples expect. Pass a finite theta to enforce a tube.
Submanifold make_flat(int m, int d,
                      double theta = std::numeric_limits<double>::infinity());
Submanifold make_circle(double r,
                        double theta = std::numeric_limits<double>::infinity());
Submanifold make_sphere(double r, int d,
                        double theta = std::numeric_limits<double>::infinity());
Submanifold make_torus(double R, double r,
                       double theta = std::numeric_limits<double>::infinity());

// Chart-only circle, for exercising the parametric code paths.
Submanifold make_circle_parametric(double r,
                                   double theta = std::numeric_limits<double>::infinity());

// Ambient charts for coordinate-change experiments.
Chart make_identity_chart(int d);
Chart make_rotation_chart(double angle);  // rigid rotation of R^2

// Built-in Hamiltonians.
HamiltonianField make_free(int d);                      // |p|^2 / 2
HamiltonianField make_rotation();                       // <p, J q> on R^2
HamiltonianField make_transport(Vec c);                 // <c, p>
HamiltonianField make_abs(int d);                       // |p|
HamiltonianField make_tangent_kinetic(std::shared_ptr<const Submanifold> M);

}  // namespace hjm
