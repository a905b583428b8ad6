#include <doctest.h>

#include "plate/attractor_lab.hpp"

#include <atomic>
#include <cmath>
#include <limits>

using namespace plate;

namespace {

// States on the ellipse traced by the slowest mode, sampled at irrational phases.
std::vector<State> circle_tail(const DiscreteOperators& ops, int count) {
    std::vector<State> out;
    const Vector phi = ops.modal_vecs.col(0);
    const double w = std::sqrt(ops.modal_eigs[0]);
    for (int i = 0; i < count; ++i) {
        const double th = 0.1 * std::sqrt(2.0) * i;
        out.push_back({std::cos(th) * phi / w, std::sin(th) * phi, 0.1 * i});
    }
    return out;
}

}  // namespace

TEST_CASE("parallel_for covers every index once and rethrows") {
    std::vector<std::atomic<int>> hits(97);
    parallel_for(97, 4, [&](int i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(8, 3, [](int i) {
                        if (i == 5) throw NumericalError("boom");
                    }),
                    NumericalError);
}

TEST_CASE("absorbing time") {
    const std::vector<double> t{0, 1, 2, 3, 4};
    CHECK(absorbing_time(t, {0.5, 0.4, 0.3, 0.2, 0.1}, 1.0) == 0.0);
    CHECK(absorbing_time(t, {5, 3, 0.9, 1.1, 0.5}, 1.0) == 4.0);
    CHECK(absorbing_time(t, {5, 3, 2, 2, 2}, 1.0) == std::numeric_limits<double>::infinity());
}

TEST_CASE("quasi-stability fit") {
    std::vector<double> t, sep, low;
    for (int i = 0; i <= 200; ++i) {
        t.push_back(0.1 * i);
        sep.push_back(1e-4 * std::exp(-0.8 * t.back()) * (1.0 + 0.1 * std::sin(t.back())));
        low.push_back(1e-8);
    }
    const PairStats p = fit_quasistability(t, sep, low, true);
    CHECK(p.certified);
    CHECK(p.omega > 0.5);
    CHECK(p.violations == 0);

    const PairStats zero = fit_quasistability(t, std::vector<double>(t.size(), 0.0), low, true);
    CHECK(zero.violations == 0);

    const PairStats undamped = fit_quasistability(t, sep, low, false);
    CHECK_FALSE(undamped.certified);
}

TEST_CASE("correlation dimension of reference sets") {
    const DiscreteOperators ops = assemble_operators(3, 2, {});
    const std::vector<State> circle = circle_tail(ops, 2500);
    const DimensionReport c = correlation_dimension(circle, ops, {1, 2, 4});
    for (double e : c.estimates) CHECK(std::abs(e - 1.0) < 0.2);
    CHECK(c.saturated);

    std::vector<State> point(2500, State{Vector::Constant(ops.size(), 0.3), Vector::Zero(ops.size()), 0.0});
    const DimensionReport p = correlation_dimension(point, ops, {2, 4});
    for (double e : p.estimates) CHECK(e < 0.1);

    CHECK_THROWS_AS(correlation_dimension(std::vector<State>(100, point[0]), ops, {2}), ConfigError);
}

TEST_CASE("regularity probe") {
    const DiscreteOperators ops = assemble_operators(3, 2, {});
    PlateConfig cfg;
    cfg.damping = {1.0, 0.0};
    SimPlan plan;
    plan.dt = 0.01;
    plan.T = 4.0;
    plan.snapshot_every = 5;
    const SplitConstants split = split_constants(cfg, validate_assumption_f(cfg));
    const Trajectory rest =
        run(cfg, ops, plan, State{Vector::Zero(ops.size()), Vector::Zero(ops.size()), 0.0}, split);
    const RegularityReport r0 = regularity_probe(rest, ops);
    CHECK(r0.sup_ut == 0.0);
    CHECK(r0.sup_utt == 0.0);

    cfg.delta = 1.0;
    plan.T = 20.0;
    const Trajectory tr = run(cfg, ops, plan, random_state(ops, 1.0, 3), split);
    const RegularityReport r = regularity_probe(tr, ops);
    CHECK(r.sup_ut_late <= r.sup_ut_mid);
    CHECK(r.pass);
    // refining the stride does not change the sup by more than 5%
    plan.snapshot_every = 1;
    const RegularityReport fine = regularity_probe(run(cfg, ops, plan, random_state(ops, 1.0, 3), split), ops);
    CHECK(std::abs(fine.sup_ut - r.sup_ut) <= 0.05 * fine.sup_ut);
}

TEST_CASE("stationary convergence guards and trivial case") {
    const DiscreteOperators ops = assemble_operators(3, 2, {});
    PlateConfig cfg;
    cfg.delta = 1.0;
    cfg.damping = {1.0, 0.0};
    SimPlan plan;
    plan.dt = 0.02;
    plan.T = 40.0;
    plan.snapshot_every = 50;
    const SplitConstants split = split_constants(cfg, validate_assumption_f(cfg));
    const StationaryReport triv = stationary_convergence(cfg, ops, split, plan, 3, 1.0, 2);
    CHECK(triv.pass);
    REQUIRE(triv.equilibria.size() == 1);
    CHECK(triv.equilibria[0].norm() < 1e-8);

    cfg.beta = 0.5;
    const StationaryReport skip = stationary_convergence(cfg, ops, split, plan, 3, 1.0);
    CHECK(skip.skipped);
    CHECK_FALSE(skip.note.empty());
}

TEST_CASE("undamped flow fails the dissipativity sweep") {
    const DiscreteOperators ops = assemble_operators(3, 2, {});
    PlateConfig cfg;
    cfg.beta = 40.0;
    cfg.damping = {0.0, 0.0};
    cfg.allow_undamped = true;
    SweepPlan plan;
    plan.radii = {1.0, 5.0};
    plan.samples_per_radius = 1;
    plan.T = 30.0;
    plan.dt = 0.01;
    plan.threads = 2;
    const SweepReport rep = dissipativity_sweep(cfg, ops, split_constants(cfg, validate_assumption_f(cfg)), plan);
    CHECK_FALSE(rep.pass);
}
