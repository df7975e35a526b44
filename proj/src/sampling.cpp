#include "hjm/sampling.hpp"

#include <cmath>

namespace hjm {

namespace {

const unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                            31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

std::uint64_t start_index(std::uint64_t seed) {
    // Keep index 0 out of the sequence (radical inverse of 0 is 0 in every
    // base, which would duplicate the box corner across dimensions).
    return 1 + seed * 7919;
}

}  // namespace

double halton(std::uint64_t i, unsigned base) {
    double f = 1.0;
    double r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

std::vector<Vec> halton_box(int count, const Vec& lo, const Vec& hi, std::uint64_t seed) {
    const int dim = static_cast<int>(lo.size());
    std::vector<Vec> out;
    out.reserve(count);
    const std::uint64_t i0 = start_index(seed);
    for (int k = 0; k < count; ++k) {
        Vec x(dim);
        for (int j = 0; j < dim; ++j) {
            x[j] = lo[j] + (hi[j] - lo[j]) * halton(i0 + k, kPrimes[j % 20]);
        }
        out.push_back(std::move(x));
    }
    return out;
}

std::vector<Vec> halton_ball(int count, int dim, double radius, std::uint64_t seed) {
    std::vector<Vec> out;
    out.reserve(count);
    std::uint64_t i = start_index(seed);
    while (static_cast<int>(out.size()) < count) {
        Vec x(dim);
        for (int j = 0; j < dim; ++j) {
            x[j] = 2.0 * halton(i, kPrimes[j % 20]) - 1.0;
        }
        ++i;
        if (x.norm() <= 1.0) out.push_back(radius * x);
    }
    return out;
}

std::vector<Vec> halton_sphere_dirs(int count, int dim, std::uint64_t seed) {
    std::vector<Vec> out;
    out.reserve(count);
    std::uint64_t i = start_index(seed);
    const int pairs = (dim + 1) / 2;
    while (static_cast<int>(out.size()) < count) {
        Vec x(dim);
        for (int k = 0; k < pairs; ++k) {
            double u1 = halton(i, kPrimes[(2 * k) % 20]);
            double u2 = halton(i, kPrimes[(2 * k + 1) % 20]);
            u1 = std::max(u1, 1e-12);
            const double rho = std::sqrt(-2.0 * std::log(u1));
            const double g1 = rho * std::cos(2.0 * M_PI * u2);
            const double g2 = rho * std::sin(2.0 * M_PI * u2);
            x[2 * k] = g1;
            if (2 * k + 1 < dim) x[2 * k + 1] = g2;
        }
        ++i;
        const double n = x.norm();
        if (n > 1e-8) out.push_back(x / n);
    }
    return out;
}

}  // namespace hjm
