#include "lamelab/integrator.hpp"

#include <cmath>
#include <sstream>

#include "lamelab/operators.hpp"

namespace lamelab {

namespace {

std::string at_time(const char* what, double t) {
    std::ostringstream os;
    os.precision(17);
    os << what << " at t=" << t;
    return os.str();
}

// f(u) subtracted from the Lame force, plus -a grad(theta).
VectorField acceleration(const VectorField& u, const ScalarField& theta, double a, const ModelSpec& m) {
    VectorField acc = lame_apply(u, m.mu, m.lambda);
    acc.axpy(-a, gradient(theta));
    if (!m.f.is_zero()) acc -= f_apply(m.f, u);
    return acc;
}

} // namespace

double SchemeConfig::max_stable_dt(const GridSpec& grid, const ModelSpec& model) const {
    return cfl_safety * grid.min_spacing() / std::sqrt(model.wave_modulus());
}

void SchemeConfig::validate(const GridSpec& grid, const ModelSpec& model) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("scheme.dt must be positive");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
        throw ValidationError("scheme.cfl_safety must lie in (0, 1]");
    if (record_stride < 1) throw ValidationError("scheme.record_stride must be >= 1");
    if (!(model.wave_modulus() > 0.0)) throw ValidationError("model: 2mu+lambda must be positive");
    const double limit = max_stable_dt(grid, model);
    if (dt > limit * (1.0 + 1e-12)) {
        std::ostringstream os;
        os.precision(6);
        os << "scheme.dt=" << dt << " violates the wave CFL limit " << limit
           << " (cfl_safety * h_min / sqrt(2mu+lambda))";
        throw ValidationError(os.str());
    }
    heat_solver.validate(grid);
}

Stepper::Stepper(const ModelSpec& model, const ForcingSymbol& symbol, const SchemeConfig& scheme)
    : model_(model), symbol_(symbol), scheme_(scheme), half_dt_(0.5 * scheme.dt), shift_ticks_(0) {
    if (!(scheme.dt > 0.0)) throw ValidationError("scheme.dt must be positive");
    shift_ticks_ = tick_of(symbol.shift(), "forcing shift");
}

long Stepper::tick_of(double t, const char* what) const {
    const double q = t / half_dt_;
    const long tick = std::lround(q);
    if (std::abs(q - static_cast<double>(tick)) > 1e-6 || tick % 2 != 0) {
        std::ostringstream os;
        os.precision(17);
        os << what << "=" << t << " is not a multiple of dt=" << scheme_.dt;
        throw ValidationError(os.str());
    }
    return tick;
}

ScalarField Stepper::forcing_at(long tick) const {
    ScalarField g = symbol_.profile();
    g *= forcing_factor_at(tick);
    return g;
}

void Stepper::advance(State& s, long tick) const {
    const double dt = scheme_.dt;
    const double a0 = alpha_at(tick), ah = alpha_at(tick + 1), a1 = alpha_at(tick + 2);
    const double kh = kappa_at(tick + 1);

    VectorField vh = s.v;
    try {
        vh.axpy(0.5 * dt, acceleration(s.u, s.theta, a0, model_));
    } catch (const NumericalError& e) {
        throw StepFailure(at_time("step failed", s.t) + ": " + e.what(), s);
    }
    VectorField u1 = s.u;
    u1.axpy(dt, vh);

    ScalarField rhs = s.theta;
    rhs.axpy(0.5 * dt * kh, laplacian(s.theta));
    rhs.axpy(-dt * ah, divergence(vh));
    const double gf = forcing_factor_at(tick + 1);
    if (gf != 0.0) rhs.axpy(dt * gf, symbol_.profile());
    ScalarField th1;
    try {
        th1 = shifted_solve(rhs, 1.0, 0.5 * dt * kh, scheme_.heat_solver);
    } catch (const NumericalError& e) {
        throw StepFailure(at_time("heat solve failed", s.t) + ": " + e.what(), s);
    }

    ScalarField th_mid = s.theta + th1;
    th_mid *= 0.5;
    VectorField v1 = vh;
    try {
        v1.axpy(0.5 * dt, acceleration(u1, th_mid, a1, model_));
    } catch (const NumericalError& e) {
        throw StepFailure(at_time("step failed", time_of(tick + 2)) + ": " + e.what(), s);
    }
    if (!(u1.all_finite() && v1.all_finite() && th1.all_finite()))
        throw StepFailure(at_time("non-finite state", time_of(tick + 2)), s);
    s.u = std::move(u1);
    s.v = std::move(v1);
    s.theta = std::move(th1);
    s.t = time_of(tick + 2);
}

State step(const State& s, const ModelSpec& model, const ForcingSymbol& symbol, const SchemeConfig& scheme) {
    Stepper st(model, symbol, scheme);
    State out = s;
    st.advance(out, st.tick_of(s.t, "state time"));
    return out;
}

TrajectoryRecord run(const State& U_tau, double tau, double T, const ForcingSymbol& symbol,
                     const ModelSpec& model, const SchemeConfig& scheme, const RunOptions& opts) {
    if (!(T >= tau)) throw ValidationError("run: T must be >= tau");
    require_same_grid(U_tau.grid(), symbol.profile().grid(), "run: forcing profile");
    Stepper st(model, symbol, scheme);
    const long k0 = st.tick_of(tau, "tau");
    const long k1 = st.tick_of(T, "T");
    std::vector<long> snap_ticks;
    for (double ts : opts.snapshot_times) {
        const long k = st.tick_of(ts, "snapshot time");
        if (k < k0 || k > k1) throw ValidationError("run: snapshot time outside [tau, T]");
        snap_ticks.push_back(k);
    }

    TrajectoryRecord rec;
    State s = U_tau;
    s.t = st.time_of(k0);
    auto record = [&](long tick) {
        rec.times.push_back(s.t);
        if (opts.keep_states) rec.states.push_back(s);
        if (opts.observer) opts.observer(s, tick);
    };
    auto maybe_snapshot = [&](long tick) {
        for (long k : snap_ticks)
            if (k == tick) {
                rec.snapshot_times.push_back(s.t);
                rec.snapshots.push_back(s);
                break;
            }
    };
    record(k0);
    maybe_snapshot(k0);
    const long nsteps = (k1 - k0) / 2;
    for (long n = 0; n < nsteps; ++n) {
        const long tick = k0 + 2 * n;
        st.advance(s, tick);
        const long done = n + 1;
        if (done % scheme.record_stride == 0 || done == nsteps) record(tick + 2);
        maybe_snapshot(tick + 2);
    }
    rec.steps = nsteps;
    rec.final_state = std::move(s);
    return rec;
}

State evolve(const State& U_tau, double tau, double T, const ForcingSymbol& symbol,
             const ModelSpec& model, const SchemeConfig& scheme) {
    if (!(T >= tau)) throw ValidationError("evolve: T must be >= tau");
    Stepper st(model, symbol, scheme);
    const long k0 = st.tick_of(tau, "tau");
    const long k1 = st.tick_of(T, "T");
    State s = U_tau;
    s.t = st.time_of(k0);
    for (long tick = k0; tick < k1; tick += 2) st.advance(s, tick);
    return s;
}

double check_translation_identity(const State& U_tau, double tau, double t, double s,
                                  const ForcingSymbol& g0, const ModelSpec& model,
                                  const SchemeConfig& scheme) {
    if (!(s >= 0.0)) throw ValidationError("translation shift s must be >= 0");
    const Stepper probe(model, g0, scheme);
    const long ks = probe.tick_of(s, "translation shift s");
    const long kt = probe.tick_of(tau, "tau");
    const long kT = probe.tick_of(t, "t");
    // Both start times are formed from integer ticks so they round identically.
    const State a = evolve(U_tau, probe.time_of(kt + ks), probe.time_of(kT + ks), g0, model, scheme);
    const ForcingSymbol shifted = g0.translated(probe.time_of(ks));
    const State b = evolve(U_tau, tau, t, shifted, model, scheme);
    return std::sqrt(hc_norm_sq(difference(a, b), model.mu, model.lambda));
}

double difference_energy(const State& z, const ModelSpec& model) {
    return 0.5 * (l2_norm_sq(z.v) + model.wave_modulus() * grad_norm_sq(z.u) + l2_norm_sq(z.theta));
}

DifferenceRecord difference_run(const State& U1, const State& U2, double tau, double T,
                                const ForcingSymbol& g1, const ForcingSymbol& g2,
                                const ModelSpec& model, const SchemeConfig& scheme) {
    if (!(T >= tau)) throw ValidationError("difference_run: T must be >= tau");
    require_same_grid(U1.grid(), U2.grid(), "difference_run");
    Stepper s1(model, g1, scheme), s2(model, g2, scheme);
    const long k0 = s1.tick_of(tau, "tau");
    const long k1 = s1.tick_of(T, "T");

    DifferenceRecord rec;
    rec.norm_exponent = model.f.is_zero() ? 2.0 : 2.0 * model.f.rho;
    rec.horizon = s1.time_of(k1) - s1.time_of(k0);
    State a = U1, b = U2;
    a.t = b.t = s1.time_of(k0);

    std::vector<double> zn, gn;
    auto sample = [&](long tick) {
        const State z = difference(a, b);
        rec.times.push_back(a.t);
        rec.energy.push_back(difference_energy(z, model));
        const double p = rec.norm_exponent;
        rec.pair_norm_sum.push_back(lp_norm(a.u, p) + lp_norm(b.u, p));
        const double zp = lp_norm(z.u, p);
        zn.push_back(zp * zp);
        gn.push_back(l2_norm_sq(s1.forcing_at(tick) - s2.forcing_at(tick)));
    };
    sample(k0);
    for (long tick = k0; tick < k1; tick += 2) {
        s1.advance(a, tick);
        s2.advance(b, tick);
        sample(tick + 2);
    }
    // int_0^T int_sigma^T a(s) ds dsigma = int_0^T s a(s) ds, while the E_Z term integrates
    // E_Z(sigma) over the inner variable: int_0^T (T - sigma) E_Z(sigma) dsigma. Trapezoid rule.
    for (std::size_t i = 1; i < rec.times.size(); ++i) {
        const double h = rec.times[i] - rec.times[i - 1];
        const double w0 = rec.times[i - 1] - rec.times[0], w1 = rec.times[i] - rec.times[0];
        rec.displacement_double_integral += 0.5 * h * (w0 * zn[i - 1] + w1 * zn[i]);
        rec.forcing_double_integral += 0.5 * h * (w0 * gn[i - 1] + w1 * gn[i]);
        rec.energy_double_integral +=
            0.5 * h * ((rec.horizon - w0) * rec.energy[i - 1] + (rec.horizon - w1) * rec.energy[i]);
        rec.energy_integral += 0.5 * h * (rec.energy[i - 1] + rec.energy[i]);
    }
    return rec;
}

} // namespace lamelab
