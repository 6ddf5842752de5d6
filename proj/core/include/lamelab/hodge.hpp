#pragma once

#include "lamelab/grid.hpp"
#include "lamelab/poisson.hpp"

namespace lamelab {

struct HelmholtzParts {
    VectorField curl_free;  ///< gradient of a Dirichlet potential
    VectorField div_free;   ///< remainder u - curl_free
};

/// Splits u into gradient(psi) and a remainder, where laplacian(psi) = divergence(u).
/// In 1-D every Dirichlet field is curl-free and u is returned unchanged as the first part.
HelmholtzParts helmholtz_decompose(const VectorField& u, const PoissonSolverSpec& spec = {});

} // namespace lamelab
