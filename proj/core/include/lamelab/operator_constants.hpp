#pragma once

#include "lamelab/grid.hpp"
#include "lamelab/poisson.hpp"

namespace lamelab {

struct PowerIterationSpec {
    int min_iterations = 200;
    int max_iterations = 20000;
    double tolerance = 1e-8;   ///< relative change of the Rayleigh quotient
};

struct ConstantEstimate {
    double value = 0.0;
    int iterations = 0;
    double relative_change = 0.0;
};

/// Discrete constants on the curl-free subspace (gradients of Dirichlet scalars).
struct OperatorConstants {
    /// |w|^2 <= k |grad phi|^2 with -laplacian(phi) = div w.
    ConstantEstimate k;
    /// |w| <= k_c |div w|.
    ConstantEstimate k_c;
    /// |grad w| <= k_g |div w|; equals 1 in 1-D.
    ConstantEstimate k_g;
    /// boundary |dw/dn|_{L2(boundary)} <= C_tr |grad theta| with -laplacian(w) = theta.
    ConstantEstimate C_tr;
};

OperatorConstants estimate_operator_constants(const GridSpec& grid,
                                              const PoissonSolverSpec& spec = {},
                                              const PowerIterationSpec& power = {});

/// |w|^2 / |grad phi|^2 for one field w; the quantity bounded by k.
double multiplier_ratio(const VectorField& w, const PoissonSolverSpec& spec = {});

} // namespace lamelab
