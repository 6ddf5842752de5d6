#pragma once

#include <cstddef>

#include "lamelab/grid.hpp"

namespace lamelab::detail {

template <class Fn>
void for_each_line(const GridSpec& g, int axis, Fn&& fn) {
    // Iterate all multi-indices with index[axis] == 0, in storage order.
    const int d = g.dim();
    const std::size_t st = g.stride(axis);
    std::array<int, GridSpec::max_dim> idx{};
    const std::size_t lines = g.size() / static_cast<std::size_t>(g.count(axis));
    for (std::size_t l = 0; l < lines; ++l) {
        std::size_t off = 0;
        for (int a = 0; a < d; ++a) off += static_cast<std::size_t>(idx[a]) * g.stride(a);
        fn(off, st);
        for (int a = d - 1; a >= 0; --a) {
            if (a == axis) continue;
            if (++idx[a] < g.count(a)) break;
            idx[a] = 0;
        }
    }
}

/// (f[k+1] - f[k-1]) / (2h) along an axis, zero outside.
inline ScalarField central_diff(const ScalarField& f, int axis) {
    const GridSpec& g = f.grid();
    ScalarField out(g);
    const auto in = f.values();
    auto o = out.values();
    const int n = g.count(axis);
    const double s = 0.5 / g.spacing(axis);
    for_each_line(g, axis, [&](std::size_t off, std::size_t st) {
        for (int k = 0; k < n; ++k) {
            const double lo = k > 0 ? in[off + (k - 1) * st] : 0.0;
            const double hi = k + 1 < n ? in[off + (k + 1) * st] : 0.0;
            o[off + k * st] = (hi - lo) * s;
        }
    });
    return out;
}

/// (f[k+1] - 2f[k] + f[k-1]) / h^2 along an axis, zero outside; accumulates scale * result into out.
inline void add_second_diff(const ScalarField& f, int axis, double scale, ScalarField& out) {
    const GridSpec& g = f.grid();
    const auto in = f.values();
    auto o = out.values();
    const int n = g.count(axis);
    const double s = scale / (g.spacing(axis) * g.spacing(axis));
    for_each_line(g, axis, [&](std::size_t off, std::size_t st) {
        for (int k = 0; k < n; ++k) {
            const double lo = k > 0 ? in[off + (k - 1) * st] : 0.0;
            const double hi = k + 1 < n ? in[off + (k + 1) * st] : 0.0;
            o[off + k * st] += (hi - 2.0 * in[off + k * st] + lo) * s;
        }
    });
}

} // namespace lamelab::detail
