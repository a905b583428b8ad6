#include <doctest.h>

#include "plate/barrier.hpp"

#include <cmath>
#include <random>

using namespace plate;

namespace {

// Plain bisection on sigma^2 - sigma^{3/2} = 2 + E, the toy sigma equation.
double toy_root(double E) {
    double lo = 1.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid * mid - std::pow(mid, 1.5) - 2.0 - E < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

PlateConfig general() {
    PlateConfig c;
    c.alpha = 1.0;
    c.delta = 1.0;
    c.beta = 1.0;
    c.kappa = 2.0;
    c.damping = {0.5, 0.0, 1.0};
    c.source = SourceFunction::cubic_minus_load(1.0);
    return c;
}

}  // namespace

TEST_CASE("gamma of q") {
    CHECK(gamma_of_q(1) == 0.25);
    CHECK(gamma_of_q(2) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    for (int q = 1; q <= 10; ++q) CHECK(gamma_of_q(q) == doctest::Approx(q / (2.0 * (q + 1))).epsilon(1e-15));
    CHECK(gamma_of_q(1000000) < 0.5);
}

TEST_CASE("balancing exponent") {
    CHECK(b_exponent(1) == doctest::Approx(9.0 / 7.0).epsilon(1e-15));
    for (int q = 1; q <= 10; ++q) {
        CHECK(b_growth(1.0, q, 2.5) == 2.5);
        CHECK(b_growth(10.0, q, 1.0) > b_growth(2.0, q, 1.0));
    }
}

TEST_CASE("balancing check") {
    for (int q = 1; q <= 10; ++q) {
        const BalancingReport r = balancing_check(gamma_of_q(q), [q](double x) { return b_growth(x, q, 1.0); });
        CHECK(r.pass);
        CHECK_FALSE(r.skipped);
    }
    CHECK_FALSE(balancing_check(0.25, [](double x) { return x * x * x; }).pass);
    const BalancingReport skipped = balancing_check(0.0, [](double x) { return x * x * x; });
    CHECK(skipped.skipped);
    CHECK(skipped.pass);
    const BalancingReport zero = balancing_check(0.25, [](double) { return 0.0; });
    CHECK(zero.trivial);
    CHECK(zero.pass);
}

TEST_CASE("toy sigma equation") {
    const BarrierConstants bc = toy_constants();
    CHECK(bc.violations().empty());
    CHECK(std::abs(solve_sigma(1.0, bc) - toy_root(1.0)) < 1e-6);
    CHECK(std::abs(solve_sigma(1.0, bc) - 2.750) < 1e-3);
    CHECK(std::abs(solve_sigma(0.0, bc) - toy_root(0.0)) < 1e-6);
    CHECK(epsilon_of_E(1.0, bc) == doctest::Approx(0.3636).epsilon(1e-3));
    double prev_sigma = 0.0, prev_eps = 1e300;
    for (double E = 0.0; E <= 1e4; E = E * 3 + 0.5) {
        const double s = solve_sigma(E, bc), e = epsilon_of_E(E, bc);
        CHECK(s > prev_sigma);
        CHECK(e <= prev_eps);
        CHECK(e > 0.0);
        prev_sigma = s;
        prev_eps = e;
    }
}

TEST_CASE("sigma root is unique on a fine scan") {
    const BarrierConstants bc = toy_constants();
    const double root = solve_sigma(1.0, bc);
    int changes = 0;
    double prev = 0.0;
    for (int i = 1; i <= 20000; ++i) {
        const double s = 1e-3 * i;
        const double inner = 1.0 + 1.0 + 1.0 * (1.0 + s * std::sqrt(s));
        const double f = std::sqrt(inner) - s;
        if (i > 1 && (f > 0) != (prev > 0)) ++changes;
        prev = f;
    }
    CHECK(changes == 1);
    CHECK(root > 0.0);
}

TEST_CASE("vstar is independent of R") {
    const BarrierConstants bc = toy_constants();
    const VStarResult a = vstar_bound(bc, 1.0), b = vstar_bound(bc, 10.0), c = vstar_bound(bc, 100.0);
    CHECK(a.converged);
    CHECK(std::abs(a.vstar - b.vstar) < 1e-8);
    CHECK(std::abs(a.vstar - c.vstar) < 1e-8);
    CHECK(std::isfinite(vstar_bound(bc, 0.0).K_R));
    BarrierConstants strong = bc;
    strong.d3 = 4.0;
    CHECK(vstar_bound(strong, 1.0).vstar < a.vstar);
}

TEST_CASE("lyapunov function and its sandwich") {
    const DiscreteOperators ops = assemble_operators(4, 3, {});
    const PlateConfig cfg = general();
    SplitConstants split = split_constants(cfg, validate_assumption_f(cfg));
    SimPlan plan;
    plan.dt = 5e-3;
    plan.T = 5.0;
    plan.snapshot_every = 10;
    const Trajectory tr = run(cfg, ops, plan, random_state(ops, 2.0, 1), split);
    const BarrierConstants bc = derive_constants(cfg, ops, split, {&tr});
    CHECK(bc.violations().empty());
    CHECK(bc.gamma == doctest::Approx(1.0 / 3.0));
    CHECK(bc.d3 > 0.0);

    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        const State s = random_state(ops, std::pow(10.0, -1.0 + 3.0 * (i % 50) / 49.0), rng());
        const EnergyValues e = total_energy(s, ops, cfg, split);
        CHECK(lyapunov_V(s, 0.0, ops, cfg, split) == e.Etot);
        State flip = s;
        flip.v = -s.v;
        const double eps = bc.eps_max;
        CHECK(lyapunov_V(s, eps, ops, cfg, split) + lyapunov_V(flip, eps, ops, cfg, split) ==
              doctest::Approx(2.0 * e.Etot).scale(1.0 + std::abs(e.Etot)));
        const double V = lyapunov_V(s, eps, ops, cfg, split);
        CHECK(bc.C1 * e.E - bc.c <= V + 1e-12 * (1 + e.E));
        CHECK(V <= bc.C2 * e.E + bc.c + 1e-12 * (1 + e.E));
    }
}

TEST_CASE("decay audit flags an oversized epsilon") {
    const DiscreteOperators ops = assemble_operators(4, 3, {});
    const PlateConfig cfg = general();
    SplitConstants split = split_constants(cfg, validate_assumption_f(cfg));
    SimPlan plan;
    plan.dt = 5e-3;
    plan.T = 5.0;
    plan.snapshot_every = 10;
    const Trajectory tr = run(cfg, ops, plan, random_state(ops, 2.0, 1), split);
    const BarrierConstants bc = derive_constants(cfg, ops, split, {&tr});
    const double eps = epsilon_of_E(tr.ledger.front().e.E, bc);
    const AuditReport ok = decay_audit(tr, bc, eps, ops);
    CHECK(ok.bracket_violations == 0);
    CHECK(ok.rows.size() == tr.snapshots.size());
    const AuditReport bad = decay_audit(tr, bc, 10.0 * bc.d3, ops);
    CHECK(bad.bracket_violations > 0);
    CHECK(bad.max_bracket > 0.0);

    // a resting trajectory: dV/dt = 0 and the left side is eps V(0)
    PlateConfig lin;
    lin.damping = {1.0, 0.0};
    SplitConstants ls = split_constants(lin, validate_assumption_f(lin));
    const Trajectory rest = run(lin, ops, plan, State{Vector::Zero(ops.size()), Vector::Zero(ops.size()), 0.0}, ls);
    const AuditReport r = decay_audit(rest, toy_constants(), 0.1, ops);
    for (const auto& row : r.rows) CHECK(row.lhs == doctest::Approx(0.1 * row.V));
}
