#pragma once

#include "hjm/common.hpp"

#include <cstdint>
#include <vector>

namespace hjm {

// Halton radical-inverse in the given base for index i >= 1.
double halton(std::uint64_t i, unsigned base);

// Low-discrepancy point set in a box. The seed offsets the start index of the
// sequence, so equal seeds reproduce equal point sets and different seeds give
// disjoint windows into the sequence.
std::vector<Vec> halton_box(int count, const Vec& lo, const Vec& hi, std::uint64_t seed);

// Low-discrepancy points in the closed ball of the given radius, produced by
// rejection from the bounding cube. Deterministic for fixed (count, dim, seed).
std::vector<Vec> halton_ball(int count, int dim, double radius, std::uint64_t seed);

// Deterministic unit directions in R^dim: Box-Muller applied to consecutive
// Halton coordinates, then normalized.
std::vector<Vec> halton_sphere_dirs(int count, int dim, std::uint64_t seed);

}  // namespace hjm
