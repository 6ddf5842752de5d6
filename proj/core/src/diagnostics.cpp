#include "lamelab/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "lamelab/operators.hpp"
#include "stencil.hpp"

namespace lamelab {

QField build_q(const GridSpec& g) {
    QField out;
    const int d = g.dim();
    std::vector<ScalarField> comps;
    double div_q = 0.0, frob = 0.0, diag_max = 0.0;
    for (int a = 0; a < d; ++a) {
        const double L = g.length(a);
        comps.push_back(ScalarField::sample(g, [&](const std::array<double, 3>& x) { return 2.0 * x[a] / L - 1.0; }));
        out.slope.push_back(2.0 / L);
        div_q += 2.0 / L;
        frob += 4.0 / (L * L);
        diag_max = std::max(diag_max, 2.0 / L);
    }
    out.q = VectorField(std::move(comps));
    out.Mq = std::max({diag_max, div_q, std::sqrt(frob)});
    out.Mq_attained_by = out.Mq == div_q ? "div q" : out.Mq == diag_max ? "|Dq|" : "|grad q|";
    out.q_max = std::sqrt(static_cast<double>(d));
    return out;
}

Energies energy(const State& s, const ModelSpec& m) {
    const double kin = 0.5 * l2_norm_sq(s.v);
    const double th = 0.5 * l2_norm_sq(s.theta);
    const double pot = fhat_integral(m.f, s.u);
    const double g2 = grad_norm_sq(s.u);
    const double q = div_norm_sq(s.u);
    Energies e;
    e.E = kin + 0.5 * (m.mu * g2 + (m.lambda + m.mu) * q) + th + pot;
    e.E_c = kin + 0.5 * m.wave_modulus() * q + th + pot;
    return e;
}

Multipliers multiplier_solve(const State& s, const PoissonSolverSpec& spec) {
    return {poisson_solve(divergence(s.u), spec), poisson_solve(divergence(s.v), spec),
            poisson_solve(s.theta, spec)};
}

Functionals functionals(const State& s, const Multipliers& m, const QField& q) {
    const GridSpec& g = s.grid();
    const int d = g.dim();
    Functionals F;
    F.F1 = l2_inner(s.u, s.v);
    F.F2 = l2_inner(s.theta, m.phi_t);
    double f3 = 0.0;
    for (int j = 0; j < d; ++j) {
        // sum_i q_i d_j u_i, pointwise
        ScalarField acc(g);
        for (int i = 0; i < d; ++i) {
            const ScalarField du = detail::central_diff(s.u[i], j);
            auto a = acc.values();
            const auto qv = q.q[i].values();
            const auto dv = du.values();
            for (std::size_t n = 0; n < a.size(); ++n) a[n] += qv[n] * dv[n];
        }
        f3 -= l2_inner(s.v[j], acc);
        f3 -= q.slope[j] * l2_inner(s.v[j], s.u[j]);
    }
    F.F3 = f3;
    return F;
}

DiagnosticRow diagnose(const State& s, double g_norm_sq, const ModelSpec& model, const QField& q,
                       const PoissonSolverSpec& spec) {
    DiagnosticRow r;
    r.time = s.t;
    const Energies e = energy(s, model);
    r.E = e.E;
    r.E_c = e.E_c;
    const Functionals F = functionals(s, multiplier_solve(s, spec), q);
    r.F1 = F.F1;
    r.F2 = F.F2;
    r.F3 = F.F3;
    r.v_sq = l2_norm_sq(s.v);
    r.div_sq = div_norm_sq(s.u);
    r.grad_theta_sq = grad_norm_sq(s.theta);
    r.theta_sq = l2_norm_sq(s.theta);
    r.boundary_div_sq = boundary_div_sq(s.u);
    r.fhat = fhat_integral(model.f, s.u);
    r.g_norm_sq = g_norm_sq;
    r.hc_norm_sq = hc_norm_sq(s, model.mu, model.lambda);
    return r;
}

std::vector<DiagnosticRow> diagnose_trajectory(const TrajectoryRecord& rec, const ForcingSymbol& symbol,
                                               const ModelSpec& model, const SchemeConfig& scheme) {
    if (rec.states.size() != rec.times.size())
        throw ValidationError("diagnose_trajectory: record was produced without kept states");
    const Stepper st(model, symbol, scheme);
    std::vector<DiagnosticRow> rows;
    rows.reserve(rec.states.size());
    if (rec.states.empty()) return rows;
    const QField q = build_q(rec.states.front().grid());
    for (const State& s : rec.states) {
        const double a = st.forcing_factor_at(st.tick_of(s.t, "record time"));
        rows.push_back(diagnose(s, a * a * l2_norm_sq(symbol.profile()), model, q, scheme.heat_solver));
    }
    return rows;
}

std::vector<double> energy_identity_residuals(const State& U_tau, double tau, double T,
                                              const ForcingSymbol& symbol, const ModelSpec& model,
                                              const SchemeConfig& scheme) {
    const Stepper st(model, symbol, scheme);
    const long k0 = st.tick_of(tau, "tau"), k1 = st.tick_of(T, "T");
    State s = U_tau;
    s.t = st.time_of(k0);
    double E0 = energy(s, model).E;
    std::vector<double> r;
    for (long tick = k0; tick < k1; tick += 2) {
        const ScalarField th0 = s.theta;
        st.advance(s, tick);
        const double E1 = energy(s, model).E;
        ScalarField mid = th0 + s.theta;
        mid *= 0.5;
        const double forcing = st.forcing_factor_at(tick + 1) * l2_inner(symbol.profile(), mid);
        r.push_back((E1 - E0) / scheme.dt + st.kappa_at(tick + 1) * grad_norm_sq(mid) - forcing);
        E0 = E1;
    }
    return r;
}

std::vector<double> time_derivative(const std::vector<double>& t, const std::vector<double>& y) {
    const std::size_t n = t.size();
    std::vector<double> d(n, std::numeric_limits<double>::quiet_NaN());
    if (n < 3 || y.size() != n) return d;
    // three-point Lagrange derivative at x0 using nodes x0, x1, x2 (any order)
    auto lagrange = [](double x, double x0, double x1, double x2, double y0, double y1, double y2) {
        return y0 * ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2)) +
               y1 * ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2)) +
               y2 * ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    };
    d[0] = lagrange(t[0], t[0], t[1], t[2], y[0], y[1], y[2]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        d[i] = lagrange(t[i], t[i - 1], t[i], t[i + 1], y[i - 1], y[i], y[i + 1]);
    d[n - 1] = lagrange(t[n - 1], t[n - 3], t[n - 2], t[n - 1], y[n - 3], y[n - 2], y[n - 1]);
    return d;
}

} // namespace lamelab
