#include "plate/attractor_lab.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace plate {

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    const int workers = std::min(threads, count);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<std::string> SweepPlan::violations() const {
    std::vector<std::string> out;
    if (radii.empty()) out.push_back("sweep.radii must not be empty");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) out.push_back("sweep.radii must be positive");
        if (i > 0 && !(radii[i] > radii[i - 1])) out.push_back("sweep.radii must be increasing");
    }
    if (samples_per_radius < 1) out.push_back("sweep.samples must be >= 1");
    if (!(T > 0.0)) out.push_back("sweep.T must be > 0");
    if (!(tail_fraction > 0.0 && tail_fraction < 1.0)) out.push_back("sweep.tail_fraction must lie in (0, 1)");
    if (!(dt > 0.0)) out.push_back("sweep.dt must be > 0");
    if (snapshot_every < 1) out.push_back("sweep.snapshot_every must be >= 1");
    return out;
}

double absorbing_time(const std::vector<double>& times, const std::vector<double>& hnorm, double R0) {
    if (times.empty()) return std::numeric_limits<double>::infinity();
    if (hnorm.back() > R0) return std::numeric_limits<double>::infinity();
    std::size_t i = hnorm.size();
    while (i > 0 && hnorm[i - 1] <= R0) --i;
    return times[i == hnorm.size() ? hnorm.size() - 1 : i];
}

SweepReport dissipativity_sweep(const PlateConfig& cfg, const DiscreteOperators& ops, const SplitConstants& split,
                                const SweepPlan& plan) {
    if (auto v = plan.violations(); !v.empty()) throw ConfigError(std::move(v));
    SweepReport rep;
    const int per = plan.samples_per_radius;
    const int count = static_cast<int>(plan.radii.size()) * per;
    rep.samples.resize(count);
    SimPlan sim;
    sim.dt = plan.dt;
    sim.T = plan.T;
    sim.snapshot_every = plan.snapshot_every;

    parallel_for(count, plan.threads, [&](int idx) {
        SweepSample& out = rep.samples[idx];
        out.radius = plan.radii[idx / per];
        out.seed = plan.seed * 1000003ull + static_cast<std::uint64_t>(idx);
        const State y = random_state(ops, out.radius, out.seed);
        const Trajectory tr = run(cfg, ops, sim, y, split);
        for (const State& s : tr.snapshots) {
            out.times.push_back(s.t);
            out.hnorm.push_back(std::sqrt(ops.h_norm_sq(s.u, s.v)));
        }
        out.blew_up = tr.aborted;
        out.note = tr.abort_reason;
        const double t_tail = (1.0 - plan.tail_fraction) * plan.T;
        for (std::size_t i = 0; i < out.times.size(); ++i) {
            if (!std::isfinite(out.hnorm[i])) out.blew_up = true;
            if (out.times[i] >= t_tail - 1e-12) out.tail_sup = std::max(out.tail_sup, out.hnorm[i]);
        }
        if (out.blew_up) out.tail_sup = std::numeric_limits<double>::infinity();
    });

    for (std::size_t r = 0; r < plan.radii.size(); ++r) {
        double sup = 0.0;
        for (int s = 0; s < per; ++s) {
            const SweepSample& x = rep.samples[r * per + s];
            if (x.blew_up) ++rep.blowups;
            sup = std::max(sup, x.tail_sup);
        }
        rep.radius_sup.push_back(sup);
    }
    const double hi = *std::max_element(rep.radius_sup.begin(), rep.radius_sup.end());
    const double lo = *std::min_element(rep.radius_sup.begin(), rep.radius_sup.end());
    rep.R0 = hi;
    rep.spread = hi > 0.0 ? (hi - lo) / hi : 0.0;
    for (SweepSample& x : rep.samples) x.absorbing_time = absorbing_time(x.times, x.hnorm, rep.R0);
    rep.pass = rep.blowups == 0 && std::isfinite(hi) && rep.spread <= 0.25;
    return rep;
}

PairStats fit_quasistability(std::vector<double> times, std::vector<double> separation,
                             std::vector<double> lower_order, bool damping_at_rest) {
    PairStats ps;
    ps.times = std::move(times);
    ps.separation = std::move(separation);
    ps.lower_order = std::move(lower_order);
    const std::size_t n = ps.times.size();
    if (n == 0) {
        ps.note = "empty record";
        return ps;
    }
    const double sep0 = ps.separation[0];
    if (sep0 == 0.0) {
        // Identical data stay identical; any rate fits.
        bool zero = std::all_of(ps.separation.begin(), ps.separation.end(), [](double s) { return s == 0.0; });
        ps.omega = 1.0;
        ps.violations = zero ? 0 : 1;
        ps.certified = zero && damping_at_rest;
        ps.note = "identical initial data";
        return ps;
    }

    // Upper envelope: running maximum from the end.
    std::vector<double> env(n);
    double run = 0.0;
    for (std::size_t i = n; i-- > 0;) env[i] = run = std::max(run, ps.separation[i]);
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    int m = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(env[i] > 0.0)) continue;
        const double y = std::log(env[i] / sep0);
        st += ps.times[i];
        sy += y;
        stt += ps.times[i] * ps.times[i];
        sty += ps.times[i] * y;
        ++m;
    }
    const double den = m * stt - st * st;
    if (m >= 2 && den > 0.0) {
        const double slope = (m * sty - st * sy) / den;
        ps.omega = -slope;
        ps.C = std::max(1.0, std::exp((sy - slope * st) / m));
    }
    auto bound0 = [&](std::size_t i) { return ps.C * std::exp(-ps.omega * (ps.times[i] - ps.times[0])) * sep0; };
    ps.d = 0.0;
    for (std::size_t i = 0; i < (n + 1) / 2; ++i)
        if (ps.lower_order[i] > 0.0)
            ps.d = std::max(ps.d, (ps.separation[i] - bound0(i)) / ps.lower_order[i]);
    for (std::size_t i = 0; i < n; ++i) {
        const double rhs = bound0(i) + ps.d * ps.lower_order[i];
        if (ps.separation[i] > rhs * (1.0 + 1e-12)) ++ps.violations;
    }
    ps.certified = damping_at_rest && ps.omega > 0.0 && ps.violations == 0;
    if (!damping_at_rest) ps.note = "quasi-stability not certified: g(0) = 0";
    else if (!(ps.omega > 0.0)) ps.note = "no exponential decay of the envelope";
    else if (ps.violations > 0) ps.note = "fitted inequality violated in the second half";
    return ps;
}

PairStats pair_quasistability(const PlateConfig& cfg, const DiscreteOperators& ops, const SplitConstants& split,
                              const State& y1, const State& y2, const SimPlan& plan) {
    const Trajectory a = run(cfg, ops, plan, y1, split);
    const Trajectory b = run(cfg, ops, plan, y2, split);
    const std::size_t n = std::min(a.snapshots.size(), b.snapshots.size());
    std::vector<double> times(n), sep(n), low(n);
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vector du = a.snapshots[i].u - b.snapshots[i].u;
        const Vector dv = a.snapshots[i].v - b.snapshots[i].v;
        times[i] = a.snapshots[i].t;
        sep[i] = ops.h_norm_sq(du, dv);
        sup = std::max(sup, ops.l2_sq(du));
        low[i] = sup;
    }
    PairStats ps = fit_quasistability(std::move(times), std::move(sep), std::move(low), cfg.b0() > 0.0);
    if (a.aborted || b.aborted) {
        ps.certified = false;
        ps.note = "trajectory aborted: " + a.abort_reason + b.abort_reason;
    }
    return ps;
}

DimensionReport correlation_dimension(const std::vector<State>& tail, const DiscreteOperators& ops,
                                      const std::vector<int>& embed_dims, int theiler) {
    if (tail.size() < 2000)
        throw ConfigError({"dimension: at least 2000 tail snapshots required, got " + std::to_string(tail.size())});
    DimensionReport rep;
    rep.embed_dims = embed_dims;
    rep.snapshots = static_cast<int>(tail.size());
    const int n = ops.size();
    const int N = static_cast<int>(tail.size());
    Matrix X(N, 2 * n);   // row i: [sqrt(mu) w_u, w_v]
    const Vector sq = ops.modal_eigs.cwiseSqrt();
    for (int i = 0; i < N; ++i) {
        X.row(i).head(n) = sq.cwiseProduct(ops.to_modal(tail[i].u)).transpose();
        X.row(i).tail(n) = ops.to_modal(tail[i].v).transpose();
    }
    const Eigen::RowVectorXd center = X.colwise().mean();
    double radius = 0.0;
    for (int i = 0; i < N; ++i) radius = std::max(radius, (X.row(i) - center).norm());
    rep.diameter = 2.0 * radius;
    if (rep.diameter < 1e-9 * (1.0 + center.norm())) {
        rep.estimates.assign(embed_dims.size(), 0.0);
        rep.saturated = true;
        return rep;
    }

    // Cap the pair count; the stride keeps the sample deterministic.
    const int stride = std::max(1, N / 3000);
    for (int m : embed_dims) {
        const int k = std::clamp(m, 1, n);
        std::vector<int> cols;
        for (int j = 0; j < k; ++j) cols.push_back(j), cols.push_back(n + j);
        std::vector<double> dist;
        for (int i = 0; i < N; i += stride)
            for (int j = i + theiler + 1; j < N; j += stride) {
                double acc = 0.0;
                for (int c : cols) {
                    const double d = X(i, c) - X(j, c);
                    acc += d * d;
                }
                dist.push_back(std::sqrt(acc));
            }
        std::sort(dist.begin(), dist.end());
        const double r_lo = dist[static_cast<std::size_t>(0.005 * (dist.size() - 1))];
        const double r_hi = dist[static_cast<std::size_t>(0.05 * (dist.size() - 1))];
        double estimate = 0.0;
        if (r_lo > 0.0 && r_hi > r_lo) {
            const int pts = 10;
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (int p = 0; p < pts; ++p) {
                const double r = r_lo * std::pow(r_hi / r_lo, p / (pts - 1.0));
                const double count = std::lower_bound(dist.begin(), dist.end(), r) - dist.begin();
                const double x = std::log(r), y = std::log(std::max(count, 1.0) / dist.size());
                sx += x, sy += y, sxx += x * x, sxy += x * y;
            }
            estimate = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
        }
        rep.estimates.push_back(estimate);
    }
    rep.saturated = true;
    for (std::size_t i = 1; i < rep.estimates.size(); ++i)
        rep.saturated = rep.saturated && std::abs(rep.estimates[i] - rep.estimates[i - 1]) < 0.5;
    return rep;
}

RegularityReport regularity_probe(const Trajectory& tr, const DiscreteOperators& ops) {
    RegularityReport rep;
    if (tr.snapshots.empty()) return rep;
    const double t0 = tr.snapshots.front().t, T = tr.snapshots.back().t - t0;
    const Eigen::LLT<Matrix> Mchol(ops.M);
    for (const State& s : tr.snapshots) {
        const double rel = s.t - t0;
        if (rel < 0.5 * T - 1e-12) continue;
        const double ut = ops.energy_sq(s.v);
        const Vector utt = Mchol.solve(apply_F(s.u, ops, tr.cfg) - ops.K * s.u - apply_damping(s.v, ops, tr.cfg));
        const double a = ops.l2_sq(utt);
        const bool late = rel >= 0.75 * T - 1e-12;
        double& sut = late ? rep.sup_ut_late : rep.sup_ut_mid;
        double& sutt = late ? rep.sup_utt_late : rep.sup_utt_mid;
        sut = std::max(sut, ut);
        sutt = std::max(sutt, a);
    }
    rep.sup_ut = std::max(rep.sup_ut_mid, rep.sup_ut_late);
    rep.sup_utt = std::max(rep.sup_utt_mid, rep.sup_utt_late);
    rep.pass = std::isfinite(rep.sup_ut) && std::isfinite(rep.sup_utt) && rep.sup_ut_late <= 1.2 * rep.sup_ut_mid &&
               rep.sup_utt_late <= 1.2 * rep.sup_utt_mid;
    return rep;
}

StationaryReport stationary_convergence(const PlateConfig& cfg, const DiscreteOperators& ops,
                                        const SplitConstants& split, const SimPlan& plan, int samples,
                                        double radius, int threads) {
    StationaryReport rep;
    if (cfg.beta != 0.0) {
        rep.skipped = true;
        rep.note = "beta != 0: no gradient structure, stationary convergence is not expected";
        return rep;
    }
    if (!(cfg.b0() > 0.0)) {
        rep.skipped = true;
        rep.note = "b_0 = 0: the test needs damping at rest";
        return rep;
    }
    rep.cases.resize(samples);
    std::vector<Vector> finals(samples);
    parallel_for(samples, threads, [&](int i) {
        StationaryCase& c = rep.cases[i];
        c.seed = plan.seed * 7919ull + static_cast<std::uint64_t>(i);
        const Trajectory tr = run(cfg, ops, plan, random_state(ops, radius, c.seed), split);
        const State& end = tr.snapshots.back();
        c.final_speed = std::sqrt(ops.l2_sq(end.v));
        const StationaryResult eq = stationary_solve(cfg, ops, end.u);
        finals[i] = eq.u;
        c.residual = eq.residual;
        const Vector du = end.u - eq.u;
        c.distance = std::sqrt(ops.energy_sq(du));
        c.pass = !tr.aborted && eq.converged && c.final_speed <= 1e-4 && c.distance <= 1e-3;
    });
    rep.pass = samples > 0;
    for (int i = 0; i < samples; ++i) {
        StationaryCase& c = rep.cases[i];
        for (std::size_t k = 0; k < rep.equilibria.size() && c.equilibrium < 0; ++k)
            if (std::sqrt(ops.energy_sq(finals[i] - rep.equilibria[k])) <= 1e-6) c.equilibrium = static_cast<int>(k);
        if (c.equilibrium < 0) {
            c.equilibrium = static_cast<int>(rep.equilibria.size());
            rep.equilibria.push_back(finals[i]);
        }
        rep.pass = rep.pass && c.pass;
    }
    return rep;
}

}  // namespace plate
