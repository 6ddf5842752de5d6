#include "lamelab/operators.hpp"

#include "stencil.hpp"

namespace lamelab {

namespace {

// Sum over both faces normal to `axis` of (s_adjacent / h)^2, weighted by the face cell area.
double face_normal_sq(const ScalarField& s, int axis) {
    const GridSpec& g = s.grid();
    const auto v = s.values();
    const int n = g.count(axis);
    const double h = g.spacing(axis);
    double sum = 0.0;
    detail::for_each_line(g, axis, [&](std::size_t off, std::size_t st) {
        const double lo = v[off];
        const double hi = v[off + (n - 1) * st];
        sum += lo * lo + hi * hi;
    });
    return sum / (h * h) * (g.cell_volume() / h);
}

} // namespace

VectorField gradient(const ScalarField& s) {
    std::vector<ScalarField> comps;
    comps.reserve(s.grid().dim());
    for (int a = 0; a < s.grid().dim(); ++a) comps.push_back(detail::central_diff(s, a));
    return VectorField(std::move(comps));
}

ScalarField divergence(const VectorField& u) {
    ScalarField out(u.grid());
    for (int a = 0; a < u.dim(); ++a) out += detail::central_diff(u[a], a);
    return out;
}

std::vector<ScalarField> curl(const VectorField& u) {
    const GridSpec& g = u.grid();
    std::vector<ScalarField> out;
    switch (g.dim()) {
    case 1:
        out.emplace_back(g);
        break;
    case 2:
        out.push_back(detail::central_diff(u[1], 0) - detail::central_diff(u[0], 1));
        break;
    default:
        out.push_back(detail::central_diff(u[2], 1) - detail::central_diff(u[1], 2));
        out.push_back(detail::central_diff(u[0], 2) - detail::central_diff(u[2], 0));
        out.push_back(detail::central_diff(u[1], 0) - detail::central_diff(u[0], 1));
        break;
    }
    return out;
}

ScalarField laplacian(const ScalarField& s) {
    ScalarField out(s.grid());
    for (int a = 0; a < s.grid().dim(); ++a) detail::add_second_diff(s, a, 1.0, out);
    return out;
}

VectorField laplacian(const VectorField& u) {
    std::vector<ScalarField> comps;
    comps.reserve(u.dim());
    for (int i = 0; i < u.dim(); ++i) comps.push_back(laplacian(u[i]));
    return VectorField(std::move(comps));
}

VectorField grad_div(const VectorField& u) {
    const GridSpec& g = u.grid();
    const int d = g.dim();
    std::vector<ScalarField> du;
    if (d > 1) {
        du.reserve(d);
        for (int j = 0; j < d; ++j) du.push_back(detail::central_diff(u[j], j));
    }
    VectorField out(g);
    for (int i = 0; i < d; ++i) {
        detail::add_second_diff(u[i], i, 1.0, out[i]);
        if (d > 1) {
            ScalarField cross(g);
            for (int j = 0; j < d; ++j)
                if (j != i) cross += du[j];
            out[i] += detail::central_diff(cross, i);
        }
    }
    return out;
}

VectorField lame_apply(const VectorField& u, double mu, double lambda) {
    VectorField out = laplacian(u);
    out *= mu;
    out.axpy(lambda + mu, grad_div(u));
    return out;
}

double boundary_normal_sq(const ScalarField& s) {
    double sum = 0.0;
    for (int a = 0; a < s.grid().dim(); ++a) sum += face_normal_sq(s, a);
    return sum;
}

double boundary_div_sq(const VectorField& u) {
    // On a face normal to axis a the tangential derivatives vanish, so div u = d u_a / d x_a.
    double sum = 0.0;
    for (int a = 0; a < u.dim(); ++a) sum += face_normal_sq(u[a], a);
    return sum;
}

} // namespace lamelab
