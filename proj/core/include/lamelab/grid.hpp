#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lamelab/errors.hpp"

namespace lamelab {

/// Uniform box grid [0,L_1]x...x[0,L_d] with n_i interior nodes per axis.
///
/// Boundary nodes are never stored; every field is implicitly zero there.
/// Storage is row-major over interior nodes, the last axis varying fastest.
class GridSpec {
public:
    static constexpr int max_dim = 3;

    GridSpec() = default;
    GridSpec(std::span<const double> lengths, std::span<const int> interior_counts);

    /// Convenience for the common 1-D case.
    static GridSpec line(double length, int n);
    static GridSpec square(double length, int n); ///< 2-D, equal axes
    static GridSpec cube(double length, int n);   ///< 3-D, equal axes

    int dim() const noexcept { return dim_; }
    double length(int axis) const { return lengths_.at(axis); }
    int count(int axis) const { return counts_.at(axis); }
    double spacing(int axis) const { return lengths_.at(axis) / (counts_.at(axis) + 1); }
    double min_spacing() const;

    std::size_t size() const noexcept { return size_; }
    std::size_t stride(int axis) const { return strides_.at(axis); }

    /// Quadrature weight of one interior node, h_1*...*h_d.
    double cell_volume() const noexcept { return cell_volume_; }
    /// |Omega|.
    double volume() const noexcept;

    /// Coordinate of interior node k along an axis, (k+1)*h.
    double coordinate(int axis, int k) const { return (k + 1) * spacing(axis); }

    /// Multi-index of a flat node index.
    std::array<int, max_dim> unflatten(std::size_t idx) const;

    bool operator==(const GridSpec& other) const;

private:
    int dim_ = 0;
    std::array<double, max_dim> lengths_{};
    std::array<int, max_dim> counts_{};
    std::array<std::size_t, max_dim> strides_{};
    std::size_t size_ = 0;
    double cell_volume_ = 0.0;
};

/// Throws ValidationError naming `what` when the grids differ.
void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

/// Visit every grid line parallel to `axis`: fn(offset, stride), nodes are offset + k*stride.
void for_each_line(const GridSpec& grid, int axis,
                   const std::function<void(std::size_t, std::size_t)>& fn);

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const GridSpec& grid);
    /// Takes ownership of interior values; rejects wrong size or non-finite entries.
    ScalarField(const GridSpec& grid, std::vector<double> values);

    /// Samples fn(x) at interior nodes; x has grid.dim() meaningful entries.
    static ScalarField sample(const GridSpec& grid,
                              const std::function<double(const std::array<double, 3>&)>& fn);
    static ScalarField constant(const GridSpec& grid, double value);

    const GridSpec& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool all_finite() const;
    double max_abs() const;

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s);
    /// this += s * o
    ScalarField& axpy(double s, const ScalarField& o);

private:
    GridSpec grid_;
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// d scalar components on one grid.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(const GridSpec& grid);
    explicit VectorField(std::vector<ScalarField> components);

    const GridSpec& grid() const noexcept { return grid_; }
    int dim() const noexcept { return static_cast<int>(components_.size()); }

    ScalarField& operator[](int i) { return components_.at(i); }
    const ScalarField& operator[](int i) const { return components_.at(i); }

    bool all_finite() const;
    double max_abs() const;

    VectorField& operator+=(const VectorField& o);
    VectorField& operator-=(const VectorField& o);
    VectorField& operator*=(double s);
    VectorField& axpy(double s, const VectorField& o);

private:
    GridSpec grid_;
    std::vector<ScalarField> components_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

/// Point of the phase space: U = (u, u_t, theta) at time t.
struct State {
    double t = 0.0;
    VectorField u;
    VectorField v;
    ScalarField theta;

    static State zero(const GridSpec& grid, double t = 0.0);
    const GridSpec& grid() const { return theta.grid(); }
    bool all_finite() const;
};

/// Componentwise difference of the field triple; time is taken from `a`.
State difference(const State& a, const State& b);
/// Scales all fields; time is unchanged.
State scaled(double s, State a);

// --- inner products -------------------------------------------------------

/// h^d-weighted dot product of interior values (zero-boundary quadrature).
double l2_inner(const ScalarField& a, const ScalarField& b);
double l2_inner(const VectorField& a, const VectorField& b);
double l2_norm_sq(const ScalarField& a);
double l2_norm_sq(const VectorField& a);

/// Dirichlet form (grad a, grad b) with forward differences over all edges,
/// boundary edges included. Equals -(laplacian(a), b) exactly.
double grad_inner(const ScalarField& a, const ScalarField& b);
double grad_inner(const VectorField& a, const VectorField& b);
double grad_norm_sq(const ScalarField& a);
double grad_norm_sq(const VectorField& a);

/// Discrete (div a, div b) consistent with the grad-div part of the Lame operator:
/// compact second differences on the diagonal, central-central cross terms.
/// In 1-D it coincides with grad_inner.
double div_inner(const VectorField& a, const VectorField& b);
double div_norm_sq(const VectorField& a);

/// mu (grad u1, grad u2) + (lambda + mu) (div u1, div u2).
double h01_inner(const VectorField& u1, const VectorField& u2, double mu, double lambda);

/// |u|_{H_0^1}^2 + |v|^2 + |theta|^2 with the Lame-weighted H_0^1 norm.
double hc_norm_sq(const State& s, double mu, double lambda);

/// Discrete first Dirichlet eigenvalue of -Laplacian: sum_i 4/h_i^2 sin^2(pi h_i / (2 L_i)).
double first_eigenvalue(const GridSpec& grid);

/// Grid samples of prod_i sin(pi x_i / L_i), the matching discrete eigenfunction.
ScalarField first_eigenfunction(const GridSpec& grid);

} // namespace lamelab
