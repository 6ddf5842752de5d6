#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "lamelab/grid.hpp"

namespace testing {

inline double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; }

inline lamelab::ScalarField random_scalar(const lamelab::GridSpec& g, std::mt19937_64& rng) {
    lamelab::ScalarField f(g);
    for (double& v : f.values()) v = uniform(rng);
    return f;
}

inline lamelab::VectorField random_vector(const lamelab::GridSpec& g, std::mt19937_64& rng) {
    lamelab::VectorField f(g);
    for (int i = 0; i < g.dim(); ++i) f[i] = random_scalar(g, rng);
    return f;
}

inline lamelab::State random_state(const lamelab::GridSpec& g, std::mt19937_64& rng, double t = 0.0) {
    lamelab::State s = lamelab::State::zero(g, t);
    s.u = random_vector(g, rng);
    s.v = random_vector(g, rng);
    s.theta = random_scalar(g, rng);
    return s;
}

inline double rel_diff(double a, double b) {
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

/// Least-squares slope of log2(err) against level: the observed order under halving.
inline double observed_order(const std::vector<double>& err) {
    const std::size_t n = err.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i), y = std::log2(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace testing
