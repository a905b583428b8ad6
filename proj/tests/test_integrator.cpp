#include <doctest.h>

#include "plate/integrator.hpp"

#include <cmath>

using namespace plate;

namespace {

PlateConfig conservative() {
    PlateConfig c;
    c.damping = {0.0, 0.0};
    c.allow_undamped = true;
    return c;
}

PlateConfig nonlinear() {
    PlateConfig c;
    c.alpha = 1.0;
    c.delta = 1.0;
    c.beta = 1.0;
    c.kappa = 2.0;
    c.damping = {0.5, 0.0, 1.0};
    c.source = SourceFunction::cubic_minus_load(1.0);
    return c;
}

SimPlan plan(double dt, double T, int every = 1) {
    SimPlan p;
    p.dt = dt;
    p.T = T;
    p.snapshot_every = every;
    p.fp_tol = 1e-14;
    return p;
}

Trajectory go(const PlateConfig& c, const DiscreteOperators& ops, const SimPlan& p, const State& s0) {
    return run(c, ops, p, s0, split_constants(c, validate_assumption_f(c)));
}

Vector predictor_shift(const DiscreteOperators& ops, double dt) {
    return (2.0 / dt + 0.5 * dt * ops.modal_eigs.array()).matrix();
}

}  // namespace

TEST_CASE("plan validation") {
    CHECK(SimPlan{}.violations().empty());
    SimPlan p;
    p.dt = 0.0;
    CHECK_FALSE(p.violations().empty());
    p = SimPlan{};
    p.snapshot_every = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("zero state is an equilibrium and T = 0 is a single snapshot") {
    const DiscreteOperators ops = assemble_operators(3, 3, {});
    PlateConfig c;
    c.delta = 1.0;
    c.beta = 2.0;
    c.damping = {1.0, 1.0};
    const State z{Vector::Zero(ops.size()), Vector::Zero(ops.size()), 0.0};
    const Trajectory tr = go(c, ops, plan(0.01, 1.0, 10), z);
    for (const State& s : tr.snapshots) CHECK(s.u.norm() + s.v.norm() == 0.0);
    const Trajectory one = go(c, ops, plan(0.01, 0.0), mode_state(ops, 1, 0, 0.3));
    REQUIRE(one.snapshots.size() == 1);
    CHECK(one.snapshots[0].u == mode_state(ops, 1, 0, 0.3).u);
}

TEST_CASE("single-mode oscillator against the discrete cosine") {
    const DiscreteOperators ops = assemble_operators(1, 1, {});
    const PlateConfig c = conservative();
    const double omega = std::sqrt(ops.K(0, 0) / ops.M(0, 0));
    const double dt = 0.01;
    const Trajectory tr = go(c, ops, plan(dt, 200.0 * kPi / omega, 50), mode_state(ops, 1, 0, 1.0));
    const double wd = 2.0 / dt * std::atan(omega * dt / 2.0);
    double err = 0.0, drift = 0.0;
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        err = std::max(err, std::abs(tr.snapshots[i].u[0] - std::cos(wd * tr.snapshots[i].t)));
        drift = std::max(drift, std::abs(tr.ledger[i].e.Etot / tr.ledger[0].e.Etot - 1.0));
    }
    CHECK(err < 1e-9);
    CHECK(drift < 1e-10);
    // the discrete frequency is omega (1 + O(dt^2))
    CHECK(std::abs(wd / omega - 1.0) < omega * omega * dt * dt);
}

TEST_CASE("damping magnitude solver") {
    const DiscreteOperators ops = assemble_operators(3, 3, {});
    const double dt = 0.01;
    Vector w(ops.size());
    for (int i = 0; i < ops.size(); ++i) w[i] = std::sin(1.0 + i);
    const Vector shift = predictor_shift(ops, dt);

    PlateConfig lin;
    lin.damping = {2.0, 0.0};
    const double closed = (w.array() / (shift.array() + 2.0)).matrix().norm();
    CHECK(std::abs(Stepper(ops, lin, plan(dt, 1.0)).solve_damping_magnitude(w) - closed) <= 1e-14 * closed);

    const PlateConfig und = conservative();
    CHECK(Stepper(ops, und, plan(dt, 1.0)).solve_damping_magnitude(w) ==
          doctest::Approx((w.array() / shift.array()).matrix().norm()).epsilon(1e-15));

    PlateConfig nl;
    nl.damping = {0.1, 0.0, 0.0, 1e4};
    const double rho = Stepper(ops, nl, plan(dt, 1.0)).solve_damping_magnitude(w);
    const double h = (w.array() / (shift.array() + g_eval(rho, nl))).matrix().norm();
    CHECK(std::abs(rho - h) <= 1e-13 * h);
    CHECK(rho < (w.array() / shift.array()).matrix().norm());
}

TEST_CASE("second-order convergence on a nonlinear configuration") {
    const DiscreteOperators ops = assemble_operators(3, 3, {});
    const PlateConfig c = nonlinear();
    const State s0 = random_state(ops, 1.0, 3);
    const double T = 0.5;
    const auto final_state = [&](double dt) { return go(c, ops, plan(dt, T, 1000000), s0).snapshots.back(); };
    const State ref = final_state(0.01 / 16);
    std::vector<double> err;
    for (double dt : {0.01, 0.005, 0.0025}) {
        const State s = final_state(dt);
        err.push_back(std::sqrt(ops.h_norm_sq(s.u - ref.u, s.v - ref.v)));
    }
    for (std::size_t i = 1; i < err.size(); ++i) {
        const double ratio = err[i - 1] / err[i];
        CHECK(ratio > 3.0);
        CHECK(ratio < 5.0);
    }
}

TEST_CASE("energy identity residual is second order") {
    const DiscreteOperators ops = assemble_operators(3, 3, {});
    const PlateConfig c = nonlinear();
    const State s0 = random_state(ops, 1.0, 5);
    double prev = 0.0;
    for (double dt : {2e-3, 1e-3}) {
        const Trajectory tr = go(c, ops, plan(dt, 1.0, 10), s0);
        double worst = 0.0;
        for (const auto& r : tr.ledger) worst = std::max(worst, std::abs(r.identity_residual));
        if (prev > 0.0) {
            CHECK(prev / worst > 3.2);
            CHECK(prev / worst < 4.8);
        }
        prev = worst;
    }
}

TEST_CASE("runs are bit-reproducible") {
    const DiscreteOperators ops = assemble_operators(3, 3, {});
    const PlateConfig c = nonlinear();
    const Trajectory a = go(c, ops, plan(0.01, 2.0, 5), random_state(ops, 2.0, 17));
    const Trajectory b = go(c, ops, plan(0.01, 2.0, 5), random_state(ops, 2.0, 17));
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
        CHECK(a.snapshots[i].u == b.snapshots[i].u);
        CHECK(a.snapshots[i].v == b.snapshots[i].v);
        CHECK(a.ledger[i].identity_residual == b.ledger[i].identity_residual);
    }
    CHECK(random_state(ops, 1.0, 1).u != random_state(ops, 1.0, 2).u);
    const State r = random_state(ops, 2.5, 4);
    CHECK(std::sqrt(ops.h_norm_sq(r.u, r.v)) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("gradient case dissipates the total energy") {
    const DiscreteOperators ops = assemble_operators(4, 3, {});
    PlateConfig c;
    c.alpha = 3.0;
    c.delta = 1.0;
    c.damping = {1.0, 0.5};
    const Trajectory tr = go(c, ops, plan(0.01, 20.0, 10), random_state(ops, 1.0, 9));
    for (std::size_t i = 1; i < tr.ledger.size(); ++i)
        CHECK(tr.ledger[i].e.Etot <= tr.ledger[i - 1].e.Etot + 1e-12 * (1.0 + std::abs(tr.ledger[i - 1].e.Etot)));
}

TEST_CASE("eigenmode initial state") {
    const DiscreteOperators ops = assemble_operators(3, 3, {});
    const State s = eigen_state(ops, 0, 2.0);
    CHECK(ops.l2_sq(s.u) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(eigen_state(ops, ops.size(), 1.0), ConfigError);
    CHECK_THROWS_AS(mode_state(ops, 0, 0, 1.0), ConfigError);
}

TEST_CASE("a failed step aborts with a partial trajectory") {
    const DiscreteOperators ops = assemble_operators(3, 3, {});
    SimPlan p = plan(0.01, 1.0, 1);
    p.fp_maxiter = 1;
    const Trajectory tr = go(nonlinear(), ops, p, random_state(ops, 1.0, 1));
    CHECK(tr.aborted);
    CHECK(tr.abort_reason.find("did not converge") != std::string::npos);
    CHECK(tr.snapshots.size() == 1);
}
