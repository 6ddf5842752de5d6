#include "lamelab/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "lamelab/poisson.hpp"
#include "stencil.hpp"

namespace lamelab {

namespace {

void require_positive(double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw NumericalError(std::string("ledger: derived constant ") + name +
                             " is not a finite positive number");
}

double rel(double residual, std::initializer_list<double> terms) {
    double scale = 1.0;
    for (double t : terms) scale = std::max(scale, std::abs(t));
    return residual / scale;
}

} // namespace

double solve_P(double A, double B, double D, double w, int* iterations) {
    double P = A;
    for (int it = 1; it <= 200; ++it) {
        const double next = A + 3.0 * D / (w * (B + P));
        const double change = std::abs(next - P);
        P = next;
        if (change <= 1e-14 * std::max(1.0, std::abs(P))) {
            if (iterations) *iterations = it;
            return P;
        }
    }
    throw NumericalError("ledger: fixed point for P did not converge in 200 iterations");
}

double sup_norm_constant(const GridSpec& g) {
    // u(x_i) = (grad u, grad G_i) with -lap G_i = e_i / h^d, so |u(x_i)|^2 <= G_i(x_i) |grad u|^2.
    std::vector<std::size_t> nodes;
    if (g.size() <= 4096) {
        for (std::size_t i = 0; i < g.size(); ++i) nodes.push_back(i);
    } else {
        // The diagonal peaks at the centre of the box; probe the central block.
        std::array<int, 3> lo{}, hi{};
        for (int a = 0; a < g.dim(); ++a) {
            lo[a] = std::max(0, (g.count(a) - 1) / 2 - 1);
            hi[a] = std::min(g.count(a) - 1, g.count(a) / 2 + 1);
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto idx = g.unflatten(i);
            bool inside = true;
            for (int a = 0; a < g.dim(); ++a) inside = inside && idx[a] >= lo[a] && idx[a] <= hi[a];
            if (inside) nodes.push_back(i);
        }
    }
    double best = 0.0;
    ScalarField e(g);
    for (std::size_t i : nodes) {
        e[i] = 1.0 / g.cell_volume();
        const ScalarField G = poisson_solve(e);
        best = std::max(best, G[i]);
        e[i] = 0.0;
    }
    return best;
}

std::vector<double> ConstantLedger::identity_residuals() const {
    const double w = 2.0 * mu + lambda;
    const double t1 = alpha0 * N2 / (2.0 * k);
    const double t2 = N1 * w / 2.0;
    const double t3 = N3 * w / 2.0;
    return {rel(t1 - N1 - 1.5 * Mq * N3 - Mq / 2.0, {t1, N1, Mq}),
            rel(t2 - N2 * epsilon - P * N3 - 1.0, {t2, N2 * epsilon, P}),
            rel(t3 - N2 * delta - w / 6.0, {t3, N2 * delta})};
}

std::vector<double> ConstantLedger::coefficient_margins() const {
    const double w = 2.0 * mu + lambda;
    return {kappa0 * N0 / 2.0 - young.C33 * N1 - N2 * young.C_eps_delta - N3 * young.C_eps_tprime,
            alpha0 * N2 / (2.0 * k) - N1 - 1.5 * Mq * N3,
            N1 * w / 2.0 - N2 * epsilon - P * N3,
            N3 * w / 2.0 - N2 * delta};
}

double ConstantLedger::temperature_margin(double N0_trial) const {
    const double w = 2.0 * mu + lambda;
    const double need = std::max({Mq / 2.0, 1.0, w / 6.0});
    return lambda1 * (kappa0 * N0_trial / 2.0 - young.C33 * N1 - N2 * young.C_eps_delta -
                      N3 * young.C_eps_tprime) - need;
}

ConstantLedger complete_ledger(ConstantLedger L) {
    const double w = 2.0 * L.mu + L.lambda;
    if (!(L.mu > 0.0) || !(w > 0.0)) throw ValidationError("ledger: need mu > 0 and 2mu+lambda > 0");
    if (!(L.alpha0 > 0.0 && L.alpha0 <= L.alpha1)) throw ValidationError("ledger: need 0 < alpha0 <= alpha1");
    if (!(L.kappa0 > 0.0 && L.kappa0 <= L.kappa1)) throw ValidationError("ledger: need 0 < kappa0 <= kappa1");
    if (!(L.lambda1 > 0.0)) throw ValidationError("ledger: lambda1 must be positive");
    const double eta_max = std::min(L.lambda1 * w / 2.0, L.lambda1);
    if (!(L.eta > 0.0 && L.eta < eta_max))
        throw ValidationError("ledger: eta must lie in (0, min{lambda1(2mu+lambda)/2, lambda1})");
    require_positive(L.k, "k");
    require_positive(L.Mq, "Mq");

    L.A = 5.0 * w * L.Mq / 2.0 +
          (2.0 * L.Mbar1 + L.Mq * L.Mq + L.lambda1 * L.Mq * L.Mq) / (2.0 * L.lambda1);
    L.B = w * L.Mq + 2.0;
    L.D = w * w * L.alpha0 / (12.0 * L.k);
    L.P = solve_P(L.A, L.B, L.D, w, &L.P_iterations);

    L.delta = L.D / (L.B + L.P);
    L.epsilon = 3.0 * L.delta / w;
    L.N3 = 1.0;
    L.N2 = w / (3.0 * L.delta);
    L.N1 = (4.0 + 2.0 * L.P) / w;

    YoungConstants& Y = L.young;
    Y.C_eps_prime = w * w / (2.0 * L.epsilon * L.lambda1);
    Y.C_delta = w * w * L.C_tr * L.C_tr / (4.0 * L.delta);
    const double kg2 = L.k_g * L.k_g;
    Y.C_eps_dprime = L.Mbar1 > 0.0 ? L.Mbar1 * kg2 / (2.0 * L.epsilon * std::pow(L.lambda1, 3)) : 0.0;
    Y.M2_carry = L.Mbar1 > 0.0 ? L.epsilon * L.M2 * L.lambda1 / (2.0 * L.Mbar1 * kg2) : 0.0;
    const double qterm = L.Mq * L.k_c + L.q_max * L.k_g;
    Y.C_eps_tprime = L.alpha1 * L.alpha1 * qterm * qterm / (4.0 * L.epsilon);
    Y.C_eps_delta = L.kappa1 * L.kappa1 / L.alpha0 + Y.C_delta + Y.C_eps_prime +
                    L.alpha1 / L.lambda1 + Y.C_eps_dprime;
    Y.C33 = 2.0 * L.lambda1 * L.alpha1 * L.alpha1 / (4.0 * L.eta);

    const double need = std::max({L.Mq / 2.0, 1.0, w / 6.0});
    L.xi = std::min({L.Mq / 2.0, 1.0, w / 6.0});
    L.N0_min = (2.0 / L.kappa0) *
               (need / L.lambda1 + Y.C33 * L.N1 + L.N2 * Y.C_eps_delta + L.N3 * Y.C_eps_tprime);

    L.beta0 = 0.5 * (1.0 - L.eta / (std::min(L.mu, 1.0) * L.lambda1));
    require_positive(L.beta0, "beta0");
    L.a1 = 1.0 / (2.0 * std::sqrt(L.mu * L.lambda1));
    L.a2 = 1.0 / (2.0 * std::sqrt(L.lambda1));
    L.a3 = 0.5 * (L.q_max / std::sqrt(L.mu) + L.Mq / std::sqrt(L.mu * L.lambda1));
    L.S = L.N1 * L.a1 + L.N2 * L.a2 + L.N3 * L.a3;
    L.N0_equivalence = 2.0 * L.S / L.beta0;
    L.N0 = 1.01 * std::max(L.N0_min, L.N0_equivalence);

    L.c1 = L.N0 - L.S / L.beta0;
    L.c2 = L.N0 + L.S / L.beta0;
    L.C_tilde = L.N0 / (2.0 * L.kappa0 * L.lambda1) + L.N2 / (L.alpha0 * L.lambda1);
    L.M_tilde = L.N3 * L.M2 + L.N2 * Y.M2_carry;
    L.xi1 = L.xi / L.c2;
    L.C_tilde1 = L.C_tilde / L.c1;
    L.M_tilde1 = L.M_tilde / L.c1;
    L.rho0 = 2.0 * (1.0 + 1.0 / L.xi1) * (L.M_tilde1 + L.g0_lb2_sq);

    const std::pair<double, const char*> checks[] = {
        {L.P, "P"},   {L.delta, "delta"}, {L.epsilon, "epsilon"}, {L.N0, "N0"},
        {L.N1, "N1"}, {L.N2, "N2"},       {L.xi, "xi"},           {L.c1, "c1"},
        {L.xi1, "xi1"}};
    for (const auto& [v, n] : checks) require_positive(v, n);
    if (!(L.rho0 >= 0.0) || !std::isfinite(L.rho0)) throw NumericalError("ledger: rho0 is not finite");
    return L;
}

ConstantLedger compute_constants(const LedgerInputs& in) {
    const ModelSpec& m = in.model;
    m.alpha.validate("model.alpha");
    m.kappa.validate("model.kappa");

    ConstantLedger L;
    L.dim = in.grid.dim();
    L.mu = m.mu;
    L.lambda = m.lambda;
    L.alpha0 = m.alpha.lo();
    L.alpha1 = m.alpha.hi();
    L.kappa0 = m.kappa.lo();
    L.kappa1 = m.kappa.hi();
    L.lambda1 = first_eigenvalue(in.grid);
    L.eta = m.f.eta;
    L.C_f = m.f.C_f;
    L.Mq = in.q.Mq;
    L.q_max = in.q.q_max;
    L.k_imposed = in.imposed_k > 0.0;
    L.k = L.k_imposed ? in.imposed_k : in.operators.k.value;
    L.k_c = in.operators.k_c.value;
    L.k_g = in.operators.k_g.value;
    L.C_tr = in.operators.C_tr.value;
    L.g0_lb2_sq = in.g0_lb2_sq;
    L.r = in.r;

    const bool nonlinear = !m.f.is_zero();
    if (nonlinear) L.C_inf = sup_norm_constant(in.grid);
    auto fit = [&](ConstantLedger& X) {
        // |f(u)|^2 <= c^2 |u|_inf^{2(rho-1)} |u|^2 and |u|_inf^2 <= C_inf |grad u|^2 <= C_inf r^2
        X.Mbar1 = nonlinear ? m.f.c * m.f.c * std::pow(X.C_inf * X.r * X.r, m.f.rho - 1.0) : 0.0;
        X.M1 = X.Mbar1;
        X.M2 = 0.0;
    };
    fit(L);
    ConstantLedger out = complete_ledger(L);
    if (nonlinear && in.refit_radius) {
        L.r = 2.0 * out.rho0;
        fit(L);
        out = complete_ledger(L);
    }
    return out;
}

std::string ledger_json(const ConstantLedger& L) {
    nlohmann::ordered_json j;
    auto put = [&](const char* name, double v, const char* formula) {
        j["constants"][name] = {{"value", v}, {"formula", formula}};
    };
    j["dim"] = L.dim;
    j["approximate_q"] = L.dim > 1;
    put("mu", L.mu, "input");
    put("lambda", L.lambda, "input");
    put("alpha0", L.alpha0, "lower bound of alpha(t)");
    put("alpha1", L.alpha1, "upper bound of alpha(t)");
    put("kappa0", L.kappa0, "lower bound of kappa(t)");
    put("kappa1", L.kappa1, "upper bound of kappa(t)");
    put("lambda1", L.lambda1, "sum_i 4/h_i^2 sin^2(pi h_i / (2 L_i))");
    put("eta", L.eta, "input, in (0, min{lambda1(2mu+lambda)/2, lambda1})");
    put("C_f", L.C_f, "lower-bound constant of the potential");
    put("Mq", L.Mq, "max{|Dq|, div q, |grad q|} = sum_i 2/L_i");
    put("q_max", L.q_max, "sup|q| = sqrt(d)");
    put("k", L.k, L.k_imposed ? "imposed by the scenario" : "sup |w|^2/|grad phi|^2 over discrete gradients, -lap phi = div w");
    put("k_c", L.k_c, "sup |w|/|div w| over discrete gradients");
    put("k_g", L.k_g, "sup |grad w|/|div w| over discrete gradients");
    put("C_tr", L.C_tr, "sup |dw/dn|_boundary / |grad theta|, -lap w = theta");
    put("r", L.r, "radius of the nonlinearity fit (refit: 2 rho0)");
    put("C_inf", L.C_inf, "max diagonal of the discrete Green's function");
    put("M1", L.M1, "|f(u)|^2 <= M1 |u|^2 on the ball of radius r");
    put("Mbar1", L.Mbar1, "c^2 (C_inf r^2)^(rho-1)");
    put("M2", L.M2, "additive constant of the fit (0 for the certified bound)");
    put("g0_lb2_sq", L.g0_lb2_sq, "windowed sup of int_t^{t+1} |g0|^2");
    put("A", L.A, "5(2mu+lambda)Mq/2 + (2Mbar1 + Mq^2 + lambda1 Mq^2)/(2 lambda1)");
    put("B", L.B, "(2mu+lambda)Mq + 2");
    put("D", L.D, "(2mu+lambda)^2 alpha0/(12k)");
    put("P", L.P, "fixed point of P = A + 3D/((2mu+lambda)(B+P)) from P0 = A");
    put("P_iterations", L.P_iterations, "fixed-point iterations");
    put("delta", L.delta, "(2mu+lambda)^2 alpha0/(12k(B+P))");
    put("epsilon", L.epsilon, "3 delta/(2mu+lambda)");
    put("N0", L.N0, "1.01 max{N0_min, N0_equivalence}");
    put("N0_min", L.N0_min, "(2/kappa0)(max{Mq/2,1,(2mu+lambda)/6}/lambda1 + C33 N1 + N2 C_eps_delta + N3 C_eps_tprime)");
    put("N0_equivalence", L.N0_equivalence, "2S/beta0");
    put("N1", L.N1, "(4+2P)/(2mu+lambda)");
    put("N2", L.N2, "(2mu+lambda)/(3 delta)");
    put("N3", L.N3, "1");
    put("C_delta", L.young.C_delta, "(2mu+lambda)^2 C_tr^2/(4 delta)");
    put("C_eps_prime", L.young.C_eps_prime, "(2mu+lambda)^2/(2 epsilon lambda1)");
    put("C_eps_dprime", L.young.C_eps_dprime, "Mbar1 k_g^2/(2 epsilon lambda1^3)");
    put("C_eps_tprime", L.young.C_eps_tprime, "alpha1^2 (Mq k_c + q_max k_g)^2/(4 epsilon)");
    put("C_eps_delta", L.young.C_eps_delta, "kappa1^2/alpha0 + C_delta + C_eps_prime + alpha1/lambda1 + C_eps_dprime");
    put("C33", L.young.C33, "2 lambda1 alpha1^2/(4 eta) (upper coefficient bound)");
    put("M2_carry", L.young.M2_carry, "epsilon M2 lambda1/(2 Mbar1 k_g^2)");
    put("xi", L.xi, "min{Mq/2, 1, (2mu+lambda)/6}");
    put("C_tilde", L.C_tilde, "N0/(2 kappa0 lambda1) + N2/(alpha0 lambda1)");
    put("M_tilde", L.M_tilde, "N3 M2 + N2 M2_carry");
    put("beta0", L.beta0, "(1 - eta/(min{mu,1} lambda1))/2");
    put("a1", L.a1, "1/(2 sqrt(mu lambda1)): |F1| <= a1 |U|^2");
    put("a2", L.a2, "1/(2 sqrt(lambda1)): |F2| <= a2 |U|^2");
    put("a3", L.a3, "(q_max/sqrt(mu) + Mq/sqrt(mu lambda1))/2: |F3| <= a3 |U|^2");
    put("S", L.S, "N1 a1 + N2 a2 + N3 a3");
    put("c1", L.c1, "N0 - S/beta0");
    put("c2", L.c2, "N0 + S/beta0");
    put("xi1", L.xi1, "xi/c2");
    put("C_tilde1", L.C_tilde1, "C_tilde/c1");
    put("M_tilde1", L.M_tilde1, "M_tilde/c1");
    put("rho0", L.rho0, "2(1 + 1/xi1)(M_tilde1 + g0_lb2_sq)");
    j["identity_residuals"] = L.identity_residuals();
    j["coefficient_margins"] = L.coefficient_margins();
    j["temperature_margin"] = L.temperature_margin(L.N0);
    j["repairs"] = {
        "alpha1^2 used for the temperature coefficient of the F1 estimate",
        "F1 estimate read with dF1/dt on the left",
        "F3 definition read with a single equality",
        "C_delta carries the (2mu+lambda)^2 factor of the boundary pairing",
        "M2 carried explicitly in the F2 estimate",
    };
    return j.dump(2);
}

// --- inequality ledger ------------------------------------------------------

MarginsReport inequality_ledger(const std::vector<DiagnosticRow>& rows, const ConstantLedger& L) {
    MarginsReport rep;
    const std::size_t n = rows.size();
    std::vector<double> t(n), E(n), F1(n), F2(n), F3(n), Lv(n);
    for (std::size_t i = 0; i < n; ++i) {
        const DiagnosticRow& r = rows[i];
        t[i] = r.time;
        E[i] = r.E;
        F1[i] = r.F1;
        F2[i] = r.F2;
        F3[i] = r.F3;
        Lv[i] = L.N0 * r.E + L.N1 * r.F1 + L.N2 * r.F2 + L.N3 * r.F3;
    }
    const auto dE = time_derivative(t, E), dF1 = time_derivative(t, F1), dF2 = time_derivative(t, F2),
               dF3 = time_derivative(t, F3), dL = time_derivative(t, Lv);
    const double w = 2.0 * L.mu + L.lambda;
    const YoungConstants& Y = L.young;
    const double floor_term = (1.0 + 1.0 / L.xi1) * (L.M_tilde1 + L.g0_lb2_sq);

    for (std::size_t i = 0; i < n; ++i) {
        const DiagnosticRow& r = rows[i];
        MarginRow m;
        m.time = r.time;
        m.L = Lv[i];
        m.lhs[0] = dE[i];
        m.rhs[0] = -L.kappa0 / 2.0 * r.grad_theta_sq + r.g_norm_sq / (2.0 * L.kappa0 * L.lambda1);
        m.lhs[1] = dF1[i];
        m.rhs[1] = r.v_sq - w / 2.0 * r.div_sq + Y.C33 * r.grad_theta_sq - r.fhat;
        m.lhs[2] = dF2[i];
        m.rhs[2] = -L.alpha0 / (2.0 * L.k) * r.v_sq + Y.C_eps_delta * r.grad_theta_sq +
                   L.epsilon * r.div_sq + L.delta * r.boundary_div_sq +
                   r.g_norm_sq / (L.alpha0 * L.lambda1) + Y.M2_carry;
        m.lhs[3] = dF3[i];
        m.rhs[3] = 1.5 * L.Mq * r.v_sq + L.P * r.div_sq + Y.C_eps_tprime * r.grad_theta_sq -
                   w / 2.0 * r.boundary_div_sq + L.M2;
        m.lhs[4] = dL[i];
        m.rhs[4] = -L.xi * r.E + L.C_tilde * r.g_norm_sq + L.M_tilde;
        m.envelope_rhs = E.front() * std::exp(-L.xi1 * (r.time - t.front())) + floor_term;
        m.envelope_margin = m.envelope_rhs - r.E;
        rep.rows.push_back(m);
    }

    for (int k = 0; k < 6; ++k) {
        InequalitySummary s;
        s.id = k < 5 ? inequality_ids[k] : "3.37";
        double mn = std::numeric_limits<double>::infinity();
        for (const MarginRow& m : rep.rows) {
            const double v = k < 5 ? m.margin(k) : m.envelope_margin;
            if (std::isfinite(v)) mn = std::min(mn, v);
        }
        s.min_margin = std::isfinite(mn) ? mn : std::numeric_limits<double>::quiet_NaN();
        s.violation = std::isfinite(mn) ? std::max(0.0, -mn) : std::numeric_limits<double>::quiet_NaN();
        rep.summary.push_back(s);
    }
    rep.approximate_q = L.dim > 1;
    return rep;
}

} // namespace lamelab
