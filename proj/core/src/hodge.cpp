#include "lamelab/hodge.hpp"

#include "lamelab/operators.hpp"

namespace lamelab {

HelmholtzParts helmholtz_decompose(const VectorField& u, const PoissonSolverSpec& spec) {
    const GridSpec& g = u.grid();
    if (g.dim() == 1) return {u, VectorField(g)};
    ScalarField psi = poisson_solve(divergence(u), spec);
    psi *= -1.0;
    VectorField uc = gradient(psi);
    VectorField ud = u - uc;
    return {std::move(uc), std::move(ud)};
}

} // namespace lamelab
