#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "lamelab/errors.hpp"
#include "lamelab/integrator.hpp"
#include "support.hpp"

using namespace lamelab;
using std::numbers::pi;

namespace {

/// Decoupled model: alpha = 0 switches off the thermal coupling.
ModelSpec decoupled(double mu = 1.0, double lambda = 0.0, double kappa = 1.0) {
    ModelSpec m;
    m.mu = mu;
    m.lambda = lambda;
    m.alpha = TimeCoefficient::constant(0.0);
    m.kappa = TimeCoefficient::constant(kappa);
    return m;
}

SchemeConfig scheme_with(double dt) {
    SchemeConfig s;
    s.dt = dt;
    return s;
}

double sup_diff(const ScalarField& a, const ScalarField& b) { return (a - b).max_abs(); }

bool bitwise_equal(const State& a, const State& b) {
    auto same = [](const ScalarField& x, const ScalarField& y) {
        for (std::size_t i = 0; i < x.size(); ++i)
            if (std::bit_cast<std::uint64_t>(x[i]) != std::bit_cast<std::uint64_t>(y[i])) return false;
        return true;
    };
    for (int i = 0; i < a.u.dim(); ++i)
        if (!same(a.u[i], b.u[i]) || !same(a.v[i], b.v[i])) return false;
    return same(a.theta, b.theta) && a.t == b.t;
}

State benchmark_state(const GridSpec& g) {
    State s = State::zero(g);
    s.u[0] = first_eigenfunction(g);
    s.theta = ScalarField::sample(g, [](const auto& x) { return 0.5 * std::sin(2 * pi * x[0]); });
    return s;
}

ModelSpec coupled() {
    ModelSpec m;
    m.alpha = TimeCoefficient::sinusoidal(1.0, 0.2, 1.0);
    m.f = Nonlinearity::power(1.0, 2.0, 1.0);
    return m;
}

} // namespace

TEST_CASE("zero state is a fixed point without forcing") {
    const GridSpec g = GridSpec::square(1.0, 7);
    const ModelSpec m = coupled();
    const State z = State::zero(g);
    const State s = evolve(z, 0.0, 0.5, ForcingSymbol::zero(g), m, scheme_with(0.01));
    CHECK(s.u.max_abs() == 0.0);
    CHECK(s.v.max_abs() == 0.0);
    CHECK(s.theta.max_abs() == 0.0);
    CHECK(s.t == doctest::Approx(0.5));
}

TEST_CASE("wave eigenmode converges at second order") {
    const GridSpec g = GridSpec::line(1.0, 31);
    const ModelSpec m = decoupled(1.0, 0.5);
    const double omega = std::sqrt(m.wave_modulus() * first_eigenvalue(g));
    const ScalarField e1 = first_eigenfunction(g);
    std::vector<double> err;
    for (double dt : {0.01, 0.005, 0.0025, 0.00125}) {
        State s = State::zero(g);
        s.u[0] = e1;
        const State out = evolve(s, 0.0, 1.0, ForcingSymbol::zero(g), m, scheme_with(dt));
        err.push_back(sup_diff(out.u[0], std::cos(omega) * e1));
    }
    CHECK(testing::observed_order(err) >= 1.9);
}

TEST_CASE("heat eigenmode converges at second order") {
    const GridSpec g = GridSpec::line(1.0, 31);
    const ModelSpec m = decoupled(1.0, 0.0, 0.7);
    const ScalarField e1 = first_eigenfunction(g);
    const double decay = std::exp(-0.7 * first_eigenvalue(g) * 1.0);
    std::vector<double> err;
    for (double dt : {0.02, 0.01, 0.005, 0.0025}) {
        State s = State::zero(g);
        s.theta = e1;
        SchemeConfig sc = scheme_with(dt);
        sc.cfl_safety = 1.0;
        const State out = evolve(s, 0.0, 1.0, ForcingSymbol::zero(g), m, sc);
        err.push_back(sup_diff(out.theta, decay * e1));
    }
    CHECK(testing::observed_order(err) >= 1.9);
}

TEST_CASE("forced heat mode converges at second order") {
    const GridSpec g = GridSpec::line(1.0, 31);
    const ModelSpec m = decoupled();
    const ScalarField e1 = first_eigenfunction(g);
    const ForcingSymbol forcing(ForcingSymbol::Kind::time_periodic, e1, {1.0});
    const double k = first_eigenvalue(g), w = 2 * pi, T = 1.25;
    // a' = -k a + sin(w t), a(0) = 0
    const double a = (k * std::sin(w * T) - w * std::cos(w * T) + w * std::exp(-k * T)) / (k * k + w * w);
    std::vector<double> err;
    for (double dt : {0.01, 0.005, 0.0025, 0.00125}) {
        const State out = evolve(State::zero(g), 0.0, T, forcing, m, scheme_with(dt));
        err.push_back(sup_diff(out.theta, a * e1));
    }
    CHECK(testing::observed_order(err) >= 1.9);
}

TEST_CASE("run with T equal to tau records a single unchanged state") {
    const GridSpec g = GridSpec::line(1.0, 31);
    const State s0 = benchmark_state(g);
    const auto rec = run(s0, 0.3, 0.3, ForcingSymbol::zero(g), coupled(), scheme_with(0.01));
    REQUIRE(rec.times.size() == 1);
    CHECK(rec.steps == 0);
    CHECK(bitwise_equal(rec.final_state, State{0.3, s0.u, s0.v, s0.theta}));
}

TEST_CASE("record stride and final time") {
    const GridSpec g = GridSpec::line(1.0, 15);
    SchemeConfig sc = scheme_with(0.01);
    sc.record_stride = 7;
    const auto rec = run(benchmark_state(g), 0.0, 0.5, ForcingSymbol::zero(g), coupled(), sc);
    CHECK(rec.steps == 50);
    REQUIRE(rec.times.size() == 9);   // 0, 7, ..., 49, 50
    CHECK(rec.times.back() == doctest::Approx(0.5));
    for (std::size_t i = 1; i < rec.times.size(); ++i) CHECK(rec.times[i] > rec.times[i - 1]);
}

TEST_CASE("process composition is bitwise") {
    const GridSpec g = GridSpec::line(1.0, 31);
    const ModelSpec m = coupled();
    const ForcingSymbol gsym(ForcingSymbol::Kind::time_periodic, first_eigenfunction(g), {1.0});
    const SchemeConfig sc = scheme_with(0.01);
    const State s0 = benchmark_state(g);
    const State direct = evolve(s0, 0.0, 1.0, gsym, m, sc);
    const State mid = evolve(s0, 0.0, 0.37, gsym, m, sc);
    const State composed = evolve(mid, 0.37, 1.0, gsym, m, sc);
    CHECK(bitwise_equal(direct, composed));
}

TEST_CASE("repeated runs are bitwise identical") {
    const GridSpec g = GridSpec::square(1.0, 9);
    const ModelSpec m = coupled();
    const ForcingSymbol gsym(ForcingSymbol::Kind::quasi_periodic, first_eigenfunction(g), {1.0});
    std::mt19937_64 rng(1);
    const State s0 = testing::random_state(g, rng);
    CHECK(bitwise_equal(evolve(s0, 0.0, 0.2, gsym, m, scheme_with(0.005)),
                        evolve(s0, 0.0, 0.2, gsym, m, scheme_with(0.005))));
}

TEST_CASE("translation identity") {
    const GridSpec g = GridSpec::line(1.0, 31);
    const ModelSpec m = coupled();
    const SchemeConfig sc = scheme_with(0.01);
    const State s0 = benchmark_state(g);
    const ForcingSymbol stat(ForcingSymbol::Kind::static_, first_eigenfunction(g));
    const ForcingSymbol per(ForcingSymbol::Kind::time_periodic, first_eigenfunction(g), {1.0});

    CHECK(check_translation_identity(s0, 0.0, 1.0, 0.0, per, m, sc) == 0.0);
    for (double s : {0.01, 1.0}) {
        CHECK(check_translation_identity(s0, 0.0, 1.0, s, stat, m, sc) <= 1e-12);
        CHECK(check_translation_identity(s0, 0.0, 1.0, s, per, m, sc) <= 1e-12);
    }
    CHECK_THROWS_AS(check_translation_identity(s0, 0.0, 1.0, 0.005, per, m, sc), ValidationError);
}

TEST_CASE("scheme validation rejects CFL violations and misaligned times") {
    const GridSpec g = GridSpec::line(1.0, 31);
    const ModelSpec m;
    const SchemeConfig ok = scheme_with(0.01);
    CHECK(ok.max_stable_dt(g, m) == doctest::Approx(0.5 / 32 / std::sqrt(2.0)));
    CHECK_NOTHROW(ok.validate(g, m));
    CHECK_THROWS_AS(scheme_with(0.02).validate(g, m), ValidationError);
    CHECK_THROWS_AS(evolve(benchmark_state(g), 0.0, 0.015, ForcingSymbol::zero(g), m, ok), ValidationError);
    CHECK_THROWS_AS(evolve(benchmark_state(g), 1.0, 0.5, ForcingSymbol::zero(g), m, ok), ValidationError);
}

TEST_CASE("blow-up raises StepFailure with the last finite state") {
    const GridSpec g = GridSpec::line(1.0, 15);
    ModelSpec m;
    m.f = Nonlinearity::power(1.0, 2.0, 1.0);
    State s = State::zero(g);
    s.u[0] = 1e60 * first_eigenfunction(g);
    try {
        (void)evolve(s, 0.0, 1.0, ForcingSymbol::zero(g), m, scheme_with(0.01));
        FAIL("expected StepFailure");
    } catch (const StepFailure& e) {
        CHECK(e.last_good().all_finite());
        CHECK(std::string(e.what()).find("t=") != std::string::npos);
    }
}

TEST_CASE("difference run: identical inputs and a temperature perturbation") {
    const GridSpec g = GridSpec::line(1.0, 31);
    const ModelSpec m = coupled();
    const SchemeConfig sc = scheme_with(0.01);
    const ForcingSymbol per(ForcingSymbol::Kind::time_periodic, first_eigenfunction(g), {1.0});
    const State s0 = benchmark_state(g);

    const auto same = difference_run(s0, s0, 0.0, 1.0, per, per, m, sc);
    for (double e : same.energy) CHECK(e == 0.0);
    CHECK(same.phi(3.0) == 0.0);

    const double eps = 1e-3;
    State s1 = s0;
    s1.theta.axpy(eps, first_eigenfunction(g));
    const auto pert = difference_run(s1, s0, 0.0, 1.0, per, per, m, sc);
    CHECK(pert.energy.front() ==
          doctest::Approx(eps * eps / 2 * l2_norm_sq(first_eigenfunction(g))).epsilon(1e-10));
    CHECK(pert.horizon == doctest::Approx(1.0));
}

TEST_CASE("difference run matches superposition in the linear regime") {
    const GridSpec g = GridSpec::line(1.0, 31);
    ModelSpec m;
    m.alpha = TimeCoefficient::sinusoidal(1.0, 0.3, 2.0);
    const SchemeConfig sc = scheme_with(0.01);
    std::mt19937_64 rng(9);
    const State a = testing::random_state(g, rng), b = testing::random_state(g, rng);
    const ForcingSymbol g1(ForcingSymbol::Kind::static_, first_eigenfunction(g));
    const ForcingSymbol g2 = ForcingSymbol::zero(g);

    const auto rec = difference_run(a, b, 0.0, 2.0, g1, g2, m, sc);
    // g1 - g2 = g1, so Z solves the same linear system with forcing g1
    const State z = evolve(difference(a, b), 0.0, 2.0, g1, m, sc);
    CHECK(testing::rel_diff(rec.final_energy(), difference_energy(z, m)) <= 1e-10);
}
