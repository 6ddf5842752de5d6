#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "lamelab/errors.hpp"
#include "lamelab/model.hpp"
#include "support.hpp"

using namespace lamelab;
using std::numbers::pi;

namespace {

ScalarField sine_profile(const GridSpec& g) {
    return ScalarField::sample(g, [](const auto& x) { return std::sin(pi * x[0]); });
}

const AssumptionCheck& find(const AssumptionReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return c;
    FAIL("missing check " << name);
    return r.checks.front();
}

} // namespace

TEST_CASE("time coefficients stay inside their bounds and Lipschitz constants") {
    const TimeCoefficient cs[] = {
        TimeCoefficient::constant(2.0),
        TimeCoefficient::sinusoidal(1.0, 0.3, 2.5, 0.7),
        TimeCoefficient::ramp_clamped(0.5, 0.2, 0.5, 1.5),
    };
    for (const auto& c : cs) {
        CHECK(c.lo() > 0.0);
        for (int j = 0; j < 1000; ++j) {
            const double t0 = 0.01 * j, t1 = t0 + 0.01;
            CHECK(c(t0) >= c.lo());
            CHECK(c(t0) <= c.hi());
            CHECK(std::abs(c(t1) - c(t0)) <= c.lipschitz() * 0.01 * (1 + 1e-12) + 1e-15);
        }
    }
    CHECK(cs[1].lo() == doctest::Approx(0.7));
    CHECK(cs[1].hi() == doctest::Approx(1.3));
    CHECK(cs[1].lipschitz() == doctest::Approx(0.75));
    CHECK(cs[2](100.0) == 1.5);
}

TEST_CASE("coefficients with a nonpositive lower bound are rejected") {
    CHECK_THROWS_AS(TimeCoefficient::constant(0.0).validate("alpha"), ValidationError);
    CHECK_THROWS_AS(TimeCoefficient::sinusoidal(1.0, 1.5, 1.0).validate("kappa"), ValidationError);
    CHECK_NOTHROW(TimeCoefficient::sinusoidal(1.0, 0.5, 1.0).validate("kappa"));
}

TEST_CASE("power nonlinearity matches its closed forms") {
    const Nonlinearity f = Nonlinearity::power(1.5, 2.0);
    const double xi[2] = {0.6, -0.8};   // |xi| = 1
    double out[2];
    f.value(xi, 2, out);
    CHECK(out[0] == doctest::Approx(1.5 * 0.6));
    CHECK(out[1] == doctest::Approx(1.5 * -0.8));
    CHECK(f.potential(xi, 2) == doctest::Approx(1.5 / 3.0));

    const double big[1] = {3.0};
    f.value(big, 1, out);
    CHECK(out[0] == doctest::Approx(13.5));
    CHECK(f.potential(big, 1) == doctest::Approx(13.5));
}

TEST_CASE("power nonlinearity is the gradient of its potential") {
    std::mt19937_64 rng(42);
    for (double rho : {1.5, 2.0, 2.5}) {
        const Nonlinearity f = Nonlinearity::power(1.0, rho);
        for (int s = 0; s < 200; ++s) {
            std::array<double, 3> x{3 * testing::uniform(rng), 3 * testing::uniform(rng), 3 * testing::uniform(rng)};
            double fv[3];
            f.value(x.data(), 3, fv);
            for (int i = 0; i < 3; ++i) {
                const double h = 1e-6;
                auto xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                const double fd = (f.potential(xp.data(), 3) - f.potential(xm.data(), 3)) / (2 * h);
                CHECK(std::abs(fd - fv[i]) <= 1e-6 * std::max(1.0, std::abs(fv[i])));
            }
        }
    }
}

TEST_CASE("second derivative and Jacobian norm agree with finite differences") {
    const Nonlinearity f = Nonlinearity::power(1.0, 2.0);
    std::mt19937_64 rng(5);
    for (int s = 0; s < 50; ++s) {
        std::array<double, 2> x{2 * testing::uniform(rng), 2 * testing::uniform(rng)};
        const double h = 1e-4;
        for (int i = 0; i < 2; ++i) {
            auto xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            double fp[2], f0[2], fm[2];
            f.value(xp.data(), 2, fp);
            f.value(x.data(), 2, f0);
            f.value(xm.data(), 2, fm);
            const double fd2 = (fp[i] - 2 * f0[i] + fm[i]) / (h * h);
            CHECK(fd2 == doctest::Approx(f.second_derivative(x.data(), 2, i)).epsilon(1e-4));
        }
        // radial power with rho = 2: Jacobian c (|x| I + x x^T/|x|), largest eigenvalue 2c|x|
        CHECK(f.jacobian_norm(x.data(), 2) == doctest::Approx(2 * std::hypot(x[0], x[1])));
    }
}

TEST_CASE("fhat_integral on a constant field and on zero") {
    const GridSpec g = GridSpec::line(1.0, 3);   // h = 0.25, volume 0.75
    VectorField u(g);
    u[0] = ScalarField::constant(g, 2.0);
    CHECK(fhat_integral(Nonlinearity::power(1.0, 2.0), u) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fhat_integral(Nonlinearity::zero(), u) == 0.0);
    const VectorField fu = f_apply(Nonlinearity::zero(), u);
    CHECK(fu.max_abs() == 0.0);
}

TEST_CASE("fhat_integral derivative matches the pairing with f_apply") {
    const GridSpec g = GridSpec::square(1.0, 9);
    std::mt19937_64 rng(7);
    const Nonlinearity f = Nonlinearity::power(1.0, 2.0);
    for (int s = 0; s < 10; ++s) {
        const VectorField u = testing::random_vector(g, rng);
        const VectorField du = testing::random_vector(g, rng);
        const double eps = 1e-6;
        const double fd = (fhat_integral(f, u + eps * du) - fhat_integral(f, u - eps * du)) / (2 * eps);
        CHECK(testing::rel_diff(fd, l2_inner(f_apply(f, u), du)) <= 1e-6);
    }
}

TEST_CASE("fhat_integral respects its lower bound") {
    const GridSpec g = GridSpec::line(1.0, 15);
    std::mt19937_64 rng(3);
    Nonlinearity f = Nonlinearity::power(0.5, 2.0, 1.0);
    for (int s = 0; s < 20; ++s) {
        const VectorField u = 10.0 * testing::random_vector(g, rng);
        CHECK(fhat_integral(f, u) >= -f.C_f * g.volume() - 0.5 * f.eta * l2_norm_sq(u));
    }
}

TEST_CASE("f_apply reports the overflowing node") {
    const GridSpec g = GridSpec::line(1.0, 5);
    VectorField u(g);
    u[0][3] = 1e200;
    try {
        (void)f_apply(Nonlinearity::power(1.0, 2.0), u);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("node 3") != std::string::npos);
    }
}

TEST_CASE("assumption validator: zero nonlinearity passes") {
    ModelSpec m;
    m.f = Nonlinearity::zero(1.0);
    const auto rep = validate_assumptions(m, GridSpec::line(1.0, 31));
    CHECK(rep.passed());
    CHECK(m.f.C_f == 0.0);
    for (const auto& c : rep.checks) CHECK(c.max_violation >= 0.0);
}

TEST_CASE("assumption validator: power rho = 2 in 1-D passes over |xi| up to 1e3") {
    ModelSpec m;
    m.f = Nonlinearity::power(1.0, 2.0, 1.0);
    m.alpha = TimeCoefficient::sinusoidal(1.0, 0.2, 1.0);
    const auto rep = validate_assumptions(m, GridSpec::line(1.0, 31));
    CHECK(rep.passed());
    CHECK(find(rep, "potential_chain").max_violation <= 1e-9);
    CHECK(find(rep, "conservative").passed);
    CHECK(rep.fitted_second_derivative > 0.0);
}

TEST_CASE("assumption validator: rho = 4 in 3-D is a hard failure") {
    ModelSpec m;
    m.f = Nonlinearity::power(1.0, 4.0, 1.0);
    const auto rep = validate_assumptions(m, GridSpec::cube(1.0, 3));
    CHECK_FALSE(rep.passed());
    const auto& growth = find(rep, "gradient_growth");
    CHECK_FALSE(growth.passed);
    CHECK(growth.hard);
}

TEST_CASE("assumption validator: eta outside its range fails") {
    ModelSpec m;
    m.f = Nonlinearity::zero(20.0);   // lambda1 ~ 9.86
    const auto rep = validate_assumptions(m, GridSpec::line(1.0, 31));
    CHECK_FALSE(find(rep, "eta_range").passed);
    CHECK_THROWS_AS(validate_assumptions(m, GridSpec::line(1.0, 31), 999), ValidationError);
}

TEST_CASE("lb2 estimate: static, zero and periodic forcing") {
    const GridSpec g = GridSpec::line(1.0, 31);
    const ScalarField p = sine_profile(g);
    const double p2 = l2_norm_sq(p);

    const ForcingSymbol stat(ForcingSymbol::Kind::static_, p);
    CHECK(lb2_norm_estimate(stat, 4.0, 0.01) == doctest::Approx(p2).epsilon(1e-14));
    CHECK(lb2_norm_estimate(ForcingSymbol::zero(g), 4.0, 0.01) == 0.0);

    const ForcingSymbol per(ForcingSymbol::Kind::time_periodic, p, {1.0});
    CHECK(std::abs(lb2_norm_estimate(per, 4.0, 1e-3) - p2 / 2) <= 1e-3);
}

TEST_CASE("lb2 estimate is nondecreasing in the horizon and shift invariant") {
    const GridSpec g = GridSpec::line(1.0, 15);
    const ScalarField p = sine_profile(g);
    const ForcingSymbol quasi(ForcingSymbol::Kind::quasi_periodic, p, {1.0});
    double prev = 0.0;
    for (double H : {2.0, 4.0, 8.0, 16.0}) {
        const double v = lb2_norm_estimate(quasi, H, 0.01);
        CHECK(v >= prev);
        prev = v;
    }
    const ForcingSymbol stat(ForcingSymbol::Kind::static_, p);
    const ForcingSymbol per(ForcingSymbol::Kind::time_periodic, p, {1.0});
    for (double s : {0.25, 0.5, 3.0}) {
        CHECK(lb2_norm_estimate(stat.translated(s), 4.0, 0.01) == lb2_norm_estimate(stat, 4.0, 0.01));
        CHECK(lb2_norm_estimate(per.translated(s), 4.0, 0.01) ==
              doctest::Approx(lb2_norm_estimate(per, 4.0, 0.01)).epsilon(1e-9));
    }
}

TEST_CASE("hull net: zero shift, periodicity, composition, rejection") {
    const GridSpec g = GridSpec::line(1.0, 15);
    const ForcingSymbol base(ForcingSymbol::Kind::time_periodic, sine_profile(g), {1.0});
    const auto net = hull_net(base, {0.0, 1.0, 0.3});
    REQUIRE(net.size() == 3);
    for (int j = 0; j < 50; ++j) {
        const double t = 0.137 * j;
        CHECK(net[0].factor(t) == base.factor(t));
        CHECK(std::abs(net[1].factor(t) - base.factor(t)) <= 1e-12);
        CHECK(std::abs(net[2].translated(0.4).factor(t) - base.translated(0.7).factor(t)) <= 1e-14);
    }
    CHECK((net[2].evaluate(0.5) - base.evaluate(0.8)).max_abs() <= 1e-14);
    CHECK_THROWS_AS(hull_net(base, {0.0, -0.5}), ValidationError);
}

TEST_CASE("pulse train duty cycle") {
    const GridSpec g = GridSpec::line(1.0, 3);
    const ForcingSymbol pulse(ForcingSymbol::Kind::pulse_train, ScalarField::constant(g, 1.0), {2.0, 0.25});
    CHECK(pulse.factor(0.1) == 1.0);
    CHECK(pulse.factor(0.6) == 0.0);
    CHECK(pulse.factor(4.2) == 1.0);
    CHECK(lb2_norm_estimate(pulse, 6.0, 0.01) == doctest::Approx(0.5 * 0.75).epsilon(0.03));
}
