#include "lamelab/operator_constants.hpp"

#include <cmath>
#include <functional>
#include <random>

#include "krylov.hpp"
#include "lamelab/operators.hpp"
#include "stencil.hpp"

namespace lamelab {

namespace {

using Op = std::function<ScalarField(const ScalarField&)>;

ScalarField start_vector(const GridSpec& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ScalarField x(g);
    for (double& v : x.values()) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    return x;
}

void normalize(ScalarField& x) {
    const double n = std::sqrt(detail::dot(x.values(), x.values()));
    if (!(n > 0.0)) throw NumericalError("power iteration: iterate collapsed to zero");
    x *= 1.0 / n;
}

ScalarField cg_apply_inverse(const Op& op, const ScalarField& rhs, const ScalarField& guess,
                             const char* what) {
    const GridSpec& g = rhs.grid();
    ScalarField work(g);
    auto apply = [&](std::span<const double> in, std::span<double> out) {
        std::copy(in.begin(), in.end(), work.values().begin());
        const ScalarField r = op(work);
        std::copy(r.values().begin(), r.values().end(), out.begin());
    };
    auto identity = [](std::span<const double> in, std::span<double> out) {
        std::copy(in.begin(), in.end(), out.begin());
    };
    std::vector<double> x(guess.values().begin(), guess.values().end());
    detail::conjugate_gradient(apply, identity, rhs.values(), x, 1e-12,
                               static_cast<int>(20 * g.size() + 200), what);
    ScalarField out(g);
    std::copy(x.begin(), x.end(), out.values().begin());
    return out;
}

// Largest value of <N x, x> / <D x, x> by inverse iteration x <- D^+ N x.
ConstantEstimate generalized_power(const GridSpec& g, const Op& num, const Op& den,
                                   const std::function<ScalarField(const ScalarField&,
                                                                   const ScalarField&)>& den_solve,
                                   const PowerIterationSpec& ps, const char* name,
                                   std::uint64_t seed) {
    ScalarField x = start_vector(g, seed);
    normalize(x);
    double q = 0.0;
    for (int it = 1; it <= ps.max_iterations; ++it) {
        // At convergence D^+ N x = q x, so the scaled iterate is a good initial guess.
        ScalarField guess = x;
        guess *= q;
        ScalarField y = den_solve(num(x), guess);
        const double nn = detail::dot(num(y).values(), y.values());
        const double dd = detail::dot(den(y).values(), y.values());
        if (!(dd > 0.0) || !std::isfinite(nn))
            throw NumericalError(std::string(name) + ": degenerate Rayleigh quotient");
        const double prev = q;
        q = nn / dd;
        x = std::move(y);
        normalize(x);
        const double change = std::abs(q - prev) / std::abs(q);
        if (it >= ps.min_iterations && change <= ps.tolerance) return {q, it, change};
        if (it == ps.max_iterations) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "%s: power iteration did not converge (last iterates %.12e, %.12e)",
                          name, prev, q);
            throw NumericalError(buf);
        }
    }
    return {q, ps.max_iterations, 0.0};
}

// Sum over faces of (w_adjacent / h)^2 weighted by face area, as an operator
// on interior nodes with respect to the h^d-weighted inner product.
ScalarField boundary_mass(const ScalarField& w) {
    const GridSpec& g = w.grid();
    ScalarField out(g);
    const auto in = w.values();
    auto o = out.values();
    for (int a = 0; a < g.dim(); ++a) {
        const int n = g.count(a);
        const double h = g.spacing(a);
        const double s = 1.0 / (h * h * h);
        detail::for_each_line(g, a, [&](std::size_t off, std::size_t st) {
            o[off] += s * in[off];
            o[off + (n - 1) * st] += s * in[off + (n - 1) * st];
        });
    }
    return out;
}

} // namespace

OperatorConstants estimate_operator_constants(const GridSpec& g, const PoissonSolverSpec& spec,
                                              const PowerIterationSpec& ps) {
    spec.validate(g);
    if (ps.min_iterations < 1 || ps.max_iterations < ps.min_iterations || !(ps.tolerance > 0.0))
        throw ValidationError("power iteration budget is inconsistent");

    const Op A = [](const ScalarField& s) { return -1.0 * laplacian(s); };
    const auto A_inv = [&](const ScalarField& s) { return poisson_solve(s, spec); };
    // B = G^T G, C = G^T (-grad div) G, E = G^T (-laplacian) G, with G^T = -divergence.
    const Op B = [](const ScalarField& s) { return -1.0 * divergence(gradient(s)); };
    const Op C = [](const ScalarField& s) { return divergence(grad_div(gradient(s))); };
    const Op E = [](const ScalarField& s) { return divergence(laplacian(gradient(s))); };
    const Op BAB = [&](const ScalarField& s) { return B(A_inv(B(s))); };

    OperatorConstants out;
    out.k = generalized_power(
        g, B, BAB,
        [&](const ScalarField& r, const ScalarField& x0) { return cg_apply_inverse(BAB, r, x0, "k"); },
        ps, "k", 0x6b);

    out.k_c = generalized_power(
        g, B, C,
        [&](const ScalarField& r, const ScalarField& x0) { return cg_apply_inverse(C, r, x0, "k_c"); },
        ps, "k_c", 0x6b63);
    out.k_c.value = std::sqrt(out.k_c.value);

    if (g.dim() == 1) {
        out.k_g = {1.0, 0, 0.0};
    } else {
        out.k_g = generalized_power(
            g, E, C,
            [&](const ScalarField& r, const ScalarField& x0) {
                return cg_apply_inverse(C, r, x0, "k_g");
            },
            ps, "k_g", 0x6b67);
        out.k_g.value = std::sqrt(out.k_g.value);
    }

    const Op N = [&](const ScalarField& s) { return A_inv(boundary_mass(A_inv(s))); };
    out.C_tr = generalized_power(
        g, N, A, [&](const ScalarField& r, const ScalarField&) { return A_inv(r); }, ps, "C_tr",
        0x7472);
    out.C_tr.value = std::sqrt(out.C_tr.value);
    return out;
}

double multiplier_ratio(const VectorField& w, const PoissonSolverSpec& spec) {
    const ScalarField phi = poisson_solve(divergence(w), spec);
    const double denom = grad_norm_sq(phi);
    if (!(denom > 0.0)) throw NumericalError("multiplier_ratio: field has no divergence");
    return l2_norm_sq(w) / denom;
}

} // namespace lamelab
