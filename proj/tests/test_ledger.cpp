#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "lamelab/errors.hpp"
#include "lamelab/ledger.hpp"
#include "support.hpp"

using namespace lamelab;
using std::numbers::pi;

namespace {

/// Unit interval, mu = 1, lambda = 0, unit coefficients, f = 0, k imposed to 1.
ConstantLedger oracle_inputs() {
    ConstantLedger L;
    L.dim = 1;
    L.mu = 1.0;
    L.lambda = 0.0;
    L.alpha0 = L.alpha1 = 1.0;
    L.kappa0 = L.kappa1 = 1.0;
    L.lambda1 = pi * pi;
    L.eta = 1.0;
    L.Mq = 2.0;
    L.q_max = 1.0;
    L.k = 1.0;
    L.k_c = 1.0 / pi;
    L.k_g = 1.0;
    L.C_tr = 1.0;
    L.g0_lb2_sq = 0.25;
    return L;
}

/// Independent fixed-point oracle: 64 plain iterations of the closed form.
double hand_P(double A, double B, double D, double w) {
    double P = A;
    for (int i = 0; i < 64; ++i) P = A + 3.0 * D / (w * (B + P));
    return P;
}

ConstantLedger benchmark_ledger(bool nonlinear) {
    const GridSpec g = GridSpec::line(1.0, 31);
    LedgerInputs in;
    in.grid = g;
    in.model.f = nonlinear ? Nonlinearity::power(1.0, 2.0, 1.0) : Nonlinearity::zero(1.0);
    in.operators = estimate_operator_constants(g);
    in.q = build_q(g);
    in.g0_lb2_sq = 0.25;
    in.refit_radius = false;
    return compute_constants(in);
}

} // namespace

TEST_CASE("fixed point P matches the hand oracle") {
    const ConstantLedger L = complete_ledger(oracle_inputs());
    const double A = 12.0 + 2.0 / (pi * pi);
    CHECK(L.A == doctest::Approx(A).epsilon(1e-14));
    CHECK(L.B == 6.0);
    CHECK(L.D == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const double P = hand_P(A, 6.0, 1.0 / 3.0, 2.0);
    CHECK(std::abs(L.P - P) <= 1e-12 * P);
    CHECK(L.P == doctest::Approx(12.230070).epsilon(1e-7));
    CHECK(L.P_iterations <= 200);
}

TEST_CASE("oracle ledger: derived constants in closed form") {
    const ConstantLedger L = complete_ledger(oracle_inputs());
    const double delta = 1.0 / (3.0 * (6.0 + L.P));
    CHECK(L.delta == doctest::Approx(delta).epsilon(1e-14));
    CHECK(L.delta == doctest::Approx(0.018285).epsilon(1e-4));
    CHECK(L.epsilon == doctest::Approx(1.5 * delta).epsilon(1e-14));
    CHECK(L.N1 == doctest::Approx(2.0 + L.P).epsilon(1e-14));
    CHECK(L.N2 == doctest::Approx(2.0 / (3.0 * delta)).epsilon(1e-14));
    CHECK(L.N3 == 1.0);
    CHECK(L.xi == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(L.beta0 == doctest::Approx(0.44934).epsilon(1e-5));
    CHECK(L.beta0 == doctest::Approx(0.5 * (1.0 - 1.0 / (pi * pi))).epsilon(1e-15));
    // N1 (2mu+lambda)/2 - N2 eps - P = (2 + P) - 1 - P = 1
    CHECK(L.N1 - L.N2 * L.epsilon - L.P == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("closed-form identities hold for random admissible parameters") {
    std::mt19937_64 rng(2024);
    auto in = [&](double lo, double hi) { return lo + (hi - lo) * 0.5 * (testing::uniform(rng) + 1.0); };
    for (int draw = 0; draw < 20; ++draw) {
        ConstantLedger X;
        X.dim = 1 + draw % 3;
        X.mu = in(0.5, 4.0);
        X.lambda = in(-X.mu / 2, 4.0);
        X.alpha0 = in(0.1, 2.0);
        X.alpha1 = X.alpha0 * in(1.0, 2.0);
        X.kappa0 = in(0.1, 2.0);
        X.kappa1 = X.kappa0 * in(1.0, 2.0);
        X.lambda1 = in(1.0, 50.0);
        X.eta = in(0.05, 0.95) * std::min(X.lambda1 * (2 * X.mu + X.lambda) / 2, X.lambda1) * std::min(X.mu, 1.0);
        X.Mq = in(1.0, 6.0);
        X.q_max = std::sqrt(static_cast<double>(X.dim));
        X.k = in(0.5, 1000.0);
        X.k_c = in(0.1, 2.0);
        X.k_g = X.dim == 1 ? 1.0 : in(1.0, 2.0);
        X.C_tr = in(0.5, 3.0);
        X.Mbar1 = draw % 2 ? in(0.0, 10.0) : 0.0;
        X.M1 = X.Mbar1;
        X.M2 = in(0.0, 1.0);
        X.g0_lb2_sq = in(0.0, 2.0);
        CAPTURE(draw);

        const ConstantLedger L = complete_ledger(X);
        for (double r : L.identity_residuals()) CHECK(std::abs(r) <= 1e-12);
        for (double m : L.coefficient_margins()) CHECK(m >= 0.0);
        for (double v : {L.P, L.delta, L.epsilon, L.N0, L.N1, L.N2, L.N3, L.xi, L.c1, L.c2, L.xi1, L.rho0})
            CHECK(v > 0.0);
        CHECK(std::abs(L.P - hand_P(L.A, L.B, L.D, 2 * L.mu + L.lambda)) <= 1e-12 * L.P);

        // N0 minimality: the temperature inequality is tight at N0_min and fails 2% below it
        CHECK(std::abs(L.temperature_margin(L.N0_min)) <= 1e-9 * L.lambda1 * L.N0_min);
        CHECK(L.temperature_margin(0.98 * L.N0_min) < 0.0);
        CHECK(L.temperature_margin(L.N0) > 0.0);
        if (L.N0_min >= L.N0_equivalence) CHECK(L.temperature_margin(0.98 * L.N0) < 0.0);
    }
}

TEST_CASE("ledger rejects inadmissible inputs") {
    ConstantLedger bad = oracle_inputs();
    bad.eta = 20.0;
    CHECK_THROWS_AS(complete_ledger(bad), ValidationError);
    bad = oracle_inputs();
    bad.alpha0 = 0.0;
    CHECK_THROWS_AS(complete_ledger(bad), ValidationError);
    bad = oracle_inputs();
    bad.k = 0.0;
    CHECK_THROWS_AS(complete_ledger(bad), NumericalError);
}

TEST_CASE("sup-norm constant equals the Green's function peak") {
    // continuum and discrete 1-D Green's functions agree at nodes: G(x, x) = x (1 - x)
    CHECK(sup_norm_constant(GridSpec::line(1.0, 31)) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(sup_norm_constant(GridSpec::line(2.0, 15)) == doctest::Approx(0.5).epsilon(1e-12));
    std::mt19937_64 rng(3);
    const GridSpec g = GridSpec::square(1.0, 9);
    const double C = sup_norm_constant(g);
    for (int s = 0; s < 20; ++s) {
        const ScalarField u = testing::random_scalar(g, rng);
        CHECK(u.max_abs() * u.max_abs() <= C * grad_norm_sq(u) * (1 + 1e-12));
    }
}

TEST_CASE("benchmark ledger is self-consistent") {
    const ConstantLedger L = benchmark_ledger(false);
    CHECK(L.lambda1 == doctest::Approx(first_eigenvalue(GridSpec::line(1.0, 31))));
    CHECK(L.Mq == 2.0);
    CHECK(L.M_tilde == 0.0);
    for (double r : L.identity_residuals()) CHECK(std::abs(r) <= 1e-12);
    CHECK(L.rho0 == doctest::Approx(2.0 * (1.0 + 1.0 / L.xi1) * 0.25));

    const ConstantLedger N = benchmark_ledger(true);
    CHECK(N.Mbar1 > 0.0);
    CHECK(N.C_inf == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(N.rho0 > L.rho0);
}

TEST_CASE("Lyapunov functional is equivalent to the energy") {
    std::mt19937_64 rng(17);
    const GridSpec g = GridSpec::line(1.0, 31);
    const ConstantLedger L = benchmark_ledger(true);
    ModelSpec m;
    m.f = Nonlinearity::power(1.0, 2.0, 1.0);
    const QField q = build_q(g);
    for (int s = 0; s < 20; ++s) {
        const State st = scaled(0.05 * (s + 1), testing::random_state(g, rng));
        const DiagnosticRow r = diagnose(st, 0.0, m, q);
        const double Lv = L.N0 * r.E + L.N1 * r.F1 + L.N2 * r.F2 + L.N3 * r.F3;
        CHECK(r.E >= 1e-12);
        CHECK(L.c1 * r.E <= Lv);
        CHECK(Lv <= L.c2 * r.E);
    }
}

TEST_CASE("inequality ledger: zero trajectory has nonnegative margins") {
    const GridSpec g = GridSpec::line(1.0, 31);
    const ConstantLedger L = benchmark_ledger(false);
    ModelSpec m;
    m.f = Nonlinearity::zero(1.0);
    SchemeConfig sc;
    const auto rec = run(State::zero(g), 0.0, 0.5, ForcingSymbol::zero(g), m, sc);
    const auto rep = inequality_ledger(diagnose_trajectory(rec, ForcingSymbol::zero(g), m, sc), L);
    REQUIRE(rep.summary.size() == 6);
    for (const auto& s : rep.summary) CHECK(s.min_margin >= 0.0);
    CHECK_FALSE(rep.approximate_q);
}

TEST_CASE("inequality ledger: heat-only regime keeps the energy margin") {
    const GridSpec g = GridSpec::line(1.0, 31);
    const ConstantLedger L = benchmark_ledger(false);
    ModelSpec m;
    m.f = Nonlinearity::zero(1.0);
    State s0 = State::zero(g);
    s0.theta = first_eigenfunction(g);
    SchemeConfig sc;
    sc.dt = 0.001;
    const auto rec = run(s0, 0.0, 0.2, ForcingSymbol::zero(g), m, sc);
    const auto rows = diagnose_trajectory(rec, ForcingSymbol::zero(g), m, sc);
    const auto rep = inequality_ledger(rows, L);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        // margin = -dE/dt - kappa0/2 |grad theta|^2, and dE/dt ~ -|grad theta|^2
        CHECK(rep.rows[i].margin(0) >= 0.45 * rows[i].grad_theta_sq);
    }
}
