#pragma once

#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "lamelab/errors.hpp"

namespace lamelab::detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", x);
    return buf;
}

struct CgResult {
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Preconditioned CG for a symmetric positive (semi)definite operator.
/// apply(in, out) writes A*in; precond(in, out) writes M^{-1}*in.
/// x holds the initial guess on entry. Throws NumericalError on non-convergence.
template <class Apply, class Precond>
CgResult conjugate_gradient(Apply&& apply, Precond&& precond, std::span<const double> b,
                            std::vector<double>& x, double tol, int max_iter,
                            const char* what = "conjugate gradient") {
    const std::size_t n = b.size();
    x.resize(n, 0.0);
    std::vector<double> r(n), z(n), p(n), ap(n);
    apply(std::span<const double>(x), std::span<double>(ap));
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    const double bnorm = std::sqrt(dot(b, b));
    CgResult res;
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return res;
    }
    double rnorm = std::sqrt(dot(r, r));
    if (rnorm <= tol * bnorm) {
        res.relative_residual = rnorm / bnorm;
        return res;
    }
    precond(std::span<const double>(r), std::span<double>(z));
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iter; ++it) {
        apply(std::span<const double>(p), std::span<double>(ap));
        const double pap = dot(p, ap);
        if (!(pap > 0.0) || !std::isfinite(pap))
            throw NumericalError(std::string(what) + ": breakdown at iteration " +
                                 std::to_string(it) + ", relative residual " +
                                 sci(rnorm / bnorm));
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = std::sqrt(dot(r, r));
        res.iterations = it;
        res.relative_residual = rnorm / bnorm;
        if (rnorm <= tol * bnorm) return res;
        precond(std::span<const double>(r), std::span<double>(z));
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw NumericalError(std::string(what) + ": no convergence in " + std::to_string(max_iter) +
                         " iterations, final relative residual " +
                         sci(res.relative_residual));
}

} // namespace lamelab::detail
