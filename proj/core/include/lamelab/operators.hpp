#pragma once

#include <vector>

#include "lamelab/grid.hpp"

namespace lamelab {

/// Central-difference gradient with zero ghost values.
VectorField gradient(const ScalarField& s);

/// Central-difference divergence with zero ghost values; the negative adjoint of gradient.
ScalarField divergence(const VectorField& u);

/// Central-difference curl. One zero component in 1-D, the scalar
/// d_x u_y - d_y u_x in 2-D, three components in 3-D.
std::vector<ScalarField> curl(const VectorField& u);

/// Compact (2d+1)-point Dirichlet Laplacian.
ScalarField laplacian(const ScalarField& s);
VectorField laplacian(const VectorField& u);

/// Discrete grad div: compact second differences on the diagonal terms,
/// products of central differences off the diagonal. Symmetric, negative semidefinite.
VectorField grad_div(const VectorField& u);

/// mu * laplacian(u) + (lambda + mu) * grad_div(u).
VectorField lame_apply(const VectorField& u, double mu, double lambda);

/// Outward normal derivative of a Dirichlet scalar on each boundary node,
/// one-sided: -s_adjacent / h. Returns the face-weighted sum of squares,
/// i.e. an approximation of the boundary integral of (ds/dn)^2.
double boundary_normal_sq(const ScalarField& s);

/// Boundary integral of |div u|^2 approximated by the one-sided normal
/// derivative of the normal component on every face.
double boundary_div_sq(const VectorField& u);

} // namespace lamelab
