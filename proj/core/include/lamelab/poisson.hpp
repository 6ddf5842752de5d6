#pragma once

#include "lamelab/grid.hpp"

namespace lamelab {

struct PoissonSolverSpec {
    enum class Method { sine_transform, conjugate_gradient };

    Method method = Method::sine_transform;
    double tolerance = 1e-12;   ///< CG relative residual
    int max_iterations = 0;     ///< 0 selects 4 * node count

    /// Throws ValidationError when tolerance or the iteration budget are out of range.
    void validate(const GridSpec& grid) const;
    int iteration_budget(const GridSpec& grid) const;
};

/// Solves -laplacian(phi) = rhs with zero Dirichlet data.
ScalarField poisson_solve(const ScalarField& rhs, const PoissonSolverSpec& spec = {});

/// Solves (c0 I - c1 laplacian) x = rhs, c0 >= 0, c1 > 0.
ScalarField shifted_solve(const ScalarField& rhs, double c0, double c1,
                          const PoissonSolverSpec& spec = {});

} // namespace lamelab
