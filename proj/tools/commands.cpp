#include "commands.hpp"

#include "plate/barrier.hpp"
#include "plate/config.hpp"
#include "plate/io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

namespace plate::cli {

namespace {

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

// Everything a data-producing subcommand shares: parsed config, operators,
// the Pi split and the output directory.
struct Session {
    const Options& opt;
    std::string name;
    RunConfig rc;
    DiscreteOperators ops;
    SplitConstants split;
    std::string hash;
    std::string started;

    Session(const Options& o, std::string n) : opt(o), name(std::move(n)) {
        if (opt.config.empty()) throw ConfigError({"--config is required for " + name});
        rc = parse_config(opt.config);
        if (opt.seed) rc.sim.seed = rc.sweep.seed = *opt.seed;
        hash = hex64(rc.file_hash);
        prepare_output_dir(opt.out, opt.overwrite);
        started = utc_now();
        ops = assemble_operators(rc.basis.mx, rc.basis.ny, rc.plate.dom, rc.basis.oversample);
        split = split_constants(rc.plate, rc.assumption_f);
    }

    std::string path(const std::string& file) const { return opt.out + "/" + file; }

    Json header() const {
        Json j;
        j["config_hash"] = hash;
        j["subcommand"] = name;
        j["seed"] = rc.sim.seed;
        j["basis"] = {{"mx", rc.basis.mx}, {"ny", rc.basis.ny}, {"oversample", rc.basis.oversample}};
        j["embedding_constant"] = ops.embedding();
        j["assumption_f"] = {{"accepted", rc.assumption_f.accepted},
                             {"c", rc.assumption_f.c},
                             {"b", rc.assumption_f.b},
                             {"range", {rc.assumption_f.range_lo, rc.assumption_f.range_hi}},
                             {"detail", rc.assumption_f.detail}};
        j["assumption_g"] = {{"damping", rc.plate.damping}, {"allow_undamped", rc.plate.allow_undamped}};
        return j;
    }

    Json split_json() const {
        return {{"c", split.c},
                {"b", split.b},
                {"additive", split.additive},
                {"additive_rule", split.additive_rule},
                {"warnings", split.warnings}};
    }

    // Timestamps live only here so that CSV/JSON outputs stay reproducible.
    void finish(const std::string& verdict) const {
        std::ostringstream os;
        os << "config = " << opt.config << "\n"
           << "config_hash = " << hash << "\n"
           << "subcommand = " << name << "\n"
           << "output = " << opt.out << "\n"
           << "threads = " << opt.threads << "\n"
           << "started = " << started << "\n"
           << "finished = " << utc_now() << "\n"
           << "verdict = " << verdict << "\n"
           << "assumption_f = " << (rc.assumption_f.accepted ? "accepted" : "rejected") << " c=" << fmt17(rc.assumption_f.c)
           << " b=" << fmt17(rc.assumption_f.b) << " (" << rc.assumption_f.detail << ")\n"
           << "assumption_g = damping";
        for (double b : rc.plate.damping) os << ' ' << fmt17(b);
        os << (rc.plate.allow_undamped ? " (undamped allowed)" : "") << "\n"
           << "version = plate 1.0.0, " << __VERSION__ << "\n";
        write_text(path("manifest.txt"), os.str());
    }

    State initial() const {
        const InitialSpec& in = rc.initial;
        if (in.kind == "mode") return mode_state(ops, in.m, in.k, in.amplitude);
        if (in.kind == "eigenmode") return eigen_state(ops, in.m - 1, in.amplitude);
        if (in.kind == "random") return random_state(ops, in.radius, rc.sim.seed);
        return stationary_plus_kick(rc.plate, ops, in.kick, rc.sim.seed);
    }
};

std::vector<double> column(const EnergyLedger& l, double EnergyValues::*f) {
    std::vector<double> out;
    for (const auto& r : l) out.push_back(r.e.*f);
    return out;
}

Json regularity_json(const RegularityReport& r) {
    return {{"sup_ut_sq_mid", r.sup_ut_mid}, {"sup_ut_sq_late", r.sup_ut_late}, {"sup_utt_sq_mid", r.sup_utt_mid},
            {"sup_utt_sq_late", r.sup_utt_late}, {"pass", r.pass}};
}

int cmd_simulate(const Options& opt, std::ostream& log) {
    Session s(opt, "simulate");
    const Trajectory tr = run(s.rc.plate, s.ops, s.rc.sim, s.initial(), s.split);
    write_ledger_csv(s.path("ledger.csv"), tr.ledger, s.hash);
    write_snapshots(s.path("snapshots.bin"), tr, s.rc.file_hash);

    double max_res = 0.0;
    for (const auto& r : tr.ledger) max_res = std::max(max_res, std::abs(r.identity_residual));
    const double span = tr.ledger.back().t - tr.ledger.front().t;
    Json rep = s.header();
    rep["dt"] = s.rc.sim.dt;
    rep["T"] = s.rc.sim.T;
    rep["snapshots"] = tr.snapshots.size();
    rep["aborted"] = tr.aborted;
    rep["abort_reason"] = tr.abort_reason;
    rep["split"] = Json{{"c", tr.split.c}, {"b", tr.split.b}, {"additive", tr.split.additive},
                        {"additive_rule", tr.split.additive_rule}, {"warnings", tr.split.warnings}};
    rep["initial_Etot"] = tr.ledger.front().e.Etot;
    rep["final_Etot"] = tr.ledger.back().e.Etot;
    rep["max_abs_identity_residual"] = max_res;
    rep["identity_residual_per_unit_time"] = span > 0.0 ? max_res / span : 0.0;
    rep["regularity"] = regularity_json(regularity_probe(tr, s.ops));
    write_json(s.path("report.json"), rep);
    if (opt.plots) {
        std::vector<double> t;
        for (const auto& r : tr.ledger) t.push_back(r.t);
        write_svg(s.path("energy.svg"), "energy", t,
                  {{"Etot", column(tr.ledger, &EnergyValues::Etot)}, {"E", column(tr.ledger, &EnergyValues::E)}});
    }
    log << "simulate: " << tr.snapshots.size() << " snapshots, max |identity residual| " << max_res << "\n";
    s.finish(tr.aborted ? "ABORTED" : "OK");
    if (tr.aborted) {
        log << "simulate: " << tr.abort_reason << "\n";
        return kNumerical;
    }
    return kOk;
}

int cmd_sweep(const Options& opt, std::ostream& log) {
    Session s(opt, "sweep");
    SweepPlan plan = s.rc.sweep;
    plan.threads = opt.threads;
    const SweepReport rep = dissipativity_sweep(s.rc.plate, s.ops, s.split, plan);

    std::ostringstream csv;
    csv << "# config_hash=" << s.hash << "\nradius,seed,tail_sup,absorbing_time,blew_up\n";
    Json samples = Json::array();
    for (const auto& x : rep.samples) {
        csv << fmt17(x.radius) << ',' << x.seed << ',' << fmt17(x.tail_sup) << ',' << fmt17(x.absorbing_time) << ','
            << x.blew_up << '\n';
        samples.push_back({{"radius", x.radius}, {"seed", x.seed}, {"tail_sup", x.tail_sup},
                           {"absorbing_time", x.absorbing_time}, {"blew_up", x.blew_up}, {"note", x.note}});
    }
    write_text(s.path("sweep.csv"), csv.str());
    Json j = s.header();
    j["radii"] = plan.radii;
    j["radius_sup"] = rep.radius_sup;
    j["R0"] = rep.R0;
    j["spread"] = rep.spread;
    j["blowups"] = rep.blowups;
    j["samples"] = samples;
    j["verdict"] = rep.pass ? "PASS" : "FAIL";
    write_json(s.path("report.json"), j);
    if (opt.plots && !rep.samples.empty()) {
        std::vector<SvgSeries> series;
        for (const auto& x : rep.samples) series.push_back({"r=" + fmt17(x.radius), x.hnorm});
        write_svg(s.path("sweep.svg"), "|S_t y|_H", rep.samples.front().times, series, true);
    }
    log << "sweep: R0 = " << rep.R0 << ", spread " << rep.spread << ", blowups " << rep.blowups << " -> "
        << (rep.pass ? "PASS" : "FAIL") << "\n";
    s.finish(rep.pass ? "PASS" : "FAIL");
    return rep.pass ? kOk : kVerdictFail;
}

Json constants_json(const BarrierConstants& bc) {
    return {{"mode", bc.mode}, {"c0", bc.c0}, {"c1", bc.c1}, {"eta", bc.eta}, {"c2", bc.c2}, {"c3", bc.c3},
            {"c4", bc.c4}, {"gamma", bc.gamma}, {"kappa_damp", bc.kappa_damp}, {"d0", bc.d0}, {"d1", bc.d1},
            {"d2", bc.d2}, {"d3", bc.d3}, {"c_eta", bc.c_eta}, {"b_exponent", bc.b_exponent}, {"C1", bc.C1},
            {"C2", bc.C2}, {"c", bc.c}, {"lambda", bc.lambda}, {"eps_max", bc.eps_max}};
}

Json vstar_json(const BarrierConstants& bc) {
    Json arr = Json::array();
    for (double R : {1.0, 10.0, 100.0}) {
        const VStarResult v = vstar_bound(bc, R);
        arr.push_back({{"R", R}, {"K_R", v.K_R}, {"vstar", v.vstar}, {"iterations", v.iterations},
                       {"converged", v.converged}});
    }
    return arr;
}

int cmd_barrier_toy(const Options& opt, std::ostream& log) {
    const BarrierConstants bc = toy_constants();
    const double s1 = solve_sigma(1.0, bc), s0 = solve_sigma(0.0, bc);
    log.precision(12);
    log << "toy constants: C2/C1 = 1, c = 0, d0 = d1 = 1, d3 = 2, gamma = 1/2, b(x) = sqrt(x)\n";
    log << "sigma(E=1) = " << s1 << "   (sigma^2 - sigma^1.5 = 3)\n";
    log << "sigma(E=0) = " << s0 << "   (sigma^2 - sigma^1.5 = 2)\n";
    log << "epsilon(E=1) = " << 1.0 / s1 << "\n";
    if (!opt.out.empty()) {
        prepare_output_dir(opt.out, opt.overwrite);
        Json j;
        j["subcommand"] = "barrier --toy";
        j["constants"] = constants_json(bc);
        j["sigma_E1"] = s1;
        j["sigma_E0"] = s0;
        j["epsilon_E1"] = 1.0 / s1;
        j["vstar"] = vstar_json(bc);
        write_json(opt.out + "/report.json", j);
    }
    return kOk;
}

int cmd_barrier(const Options& opt, std::ostream& log) {
    if (opt.toy) return cmd_barrier_toy(opt, log);
    Session s(opt, "barrier");
    const Trajectory tr = run(s.rc.plate, s.ops, s.rc.sim, s.initial(), s.split);
    if (tr.aborted) throw NumericalError(tr.abort_reason);
    const BarrierConstants bc = derive_constants(s.rc.plate, s.ops, tr.split, {&tr}, s.rc.barrier.eta_tilde);
    const BalancingReport bal = balancing_check(bc.gamma, [&](double x) { return bc.b(x); });
    const double E0 = tr.ledger.front().e.E;
    const double eps = bc.gamma > 0.0 ? epsilon_of_E(E0, bc) : std::min(bc.eps_max, 0.5 * bc.d3);
    const AuditReport audit = decay_audit(tr, bc, eps, s.ops);

    std::ostringstream csv;
    csv << "# config_hash=" << s.hash << "\nt,V,E,lhs,rhs,allowance,bracket\n";
    for (const auto& r : audit.rows)
        csv << fmt17(r.t) << ',' << fmt17(r.V) << ',' << fmt17(r.E) << ',' << fmt17(r.lhs) << ',' << fmt17(r.rhs)
            << ',' << fmt17(r.allowance) << ',' << fmt17(r.bracket) << '\n';
    write_text(s.path("audit.csv"), csv.str());

    const auto bad = bc.violations();
    const bool pass = bad.empty() && bal.pass && audit.bracket_violations == 0;
    Json j = s.header();
    j["constants"] = constants_json(bc);
    j["constant_violations"] = bad;
    j["balancing"] = {{"skipped", bal.skipped}, {"trivial", bal.trivial}, {"pass", bal.pass}};
    j["E0"] = E0;
    j["epsilon"] = eps;
    if (bc.gamma > 0.0) j["sigma"] = 1.0 / eps;
    j["audit"] = {{"snapshots", audit.rows.size()}, {"violations", audit.violations},
                  {"bracket_violations", audit.bracket_violations}, {"worst_margin", audit.worst_margin},
                  {"max_bracket", audit.max_bracket}};
    if (bc.gamma > 0.0 && bal.pass) j["vstar"] = vstar_json(bc);
    j["verdict"] = pass ? "PASS" : "FAIL";
    write_json(s.path("report.json"), j);
    if (opt.plots) {
        std::vector<double> t, br;
        for (const auto& r : audit.rows) t.push_back(r.t), br.push_back(r.bracket);
        write_svg(s.path("bracket.svg"), "eps[1+E]^gamma - d3", t, {{"bracket", br}});
    }
    log << "barrier: eps = " << eps << ", max bracket " << audit.max_bracket << " -> " << (pass ? "PASS" : "FAIL")
        << "\n";
    s.finish(pass ? "PASS" : "FAIL");
    return pass ? kOk : kVerdictFail;
}

int cmd_pairs(const Options& opt, std::ostream& log) {
    Session s(opt, "pairs");
    const PairsSpec& ps = s.rc.pairs;
    SimPlan plan = s.rc.sim;
    plan.dt = ps.dt;
    plan.T = ps.T;
    plan.snapshot_every = ps.snapshot_every;
    std::vector<PairStats> stats(ps.count);
    std::vector<double> sep0(ps.count);
    parallel_for(ps.count, opt.threads, [&](int i) {
        const std::uint64_t seed = s.rc.sim.seed * 31ull + static_cast<std::uint64_t>(i);
        const State y1 = random_state(s.ops, ps.radius, seed);
        const State kick = random_state(s.ops, ps.distance, seed + 1000000ull);
        State y2 = y1;
        y2.u += kick.u;
        y2.v += kick.v;
        sep0[i] = s.ops.h_norm_sq(y1.u - y2.u, y1.v - y2.v);
        stats[i] = pair_quasistability(s.rc.plate, s.ops, s.split, y1, y2, plan);
    });

    std::ostringstream csv;
    csv << "# config_hash=" << s.hash << "\npair,t,separation,lower_order\n";
    Json arr = Json::array();
    bool pass = true;
    for (int i = 0; i < ps.count; ++i) {
        const PairStats& p = stats[i];
        for (std::size_t k = 0; k < p.times.size(); ++k)
            csv << i << ',' << fmt17(p.times[k]) << ',' << fmt17(p.separation[k]) << ',' << fmt17(p.lower_order[k])
                << '\n';
        const bool exact = !p.separation.empty() && p.separation.front() == sep0[i];
        pass = pass && p.certified && exact;
        arr.push_back({{"C", p.C}, {"omega", p.omega}, {"d", p.d}, {"violations", p.violations},
                       {"initial_separation_sq", sep0[i]}, {"initial_separation_exact", exact},
                       {"certified", p.certified}, {"note", p.note}});
    }
    write_text(s.path("pairs.csv"), csv.str());
    Json j = s.header();
    j["pairs"] = arr;
    j["verdict"] = pass ? "PASS" : "FAIL";
    write_json(s.path("report.json"), j);
    if (opt.plots && !stats.empty()) {
        std::vector<SvgSeries> series;
        for (int i = 0; i < ps.count; ++i) series.push_back({"pair " + std::to_string(i), stats[i].separation});
        write_svg(s.path("separation.svg"), "pair separation", stats.front().times, series, true);
    }
    log << "pairs: " << ps.count << " pairs -> " << (pass ? "PASS" : "FAIL") << "\n";
    s.finish(pass ? "PASS" : "FAIL");
    return pass ? kOk : kVerdictFail;
}

int cmd_dimension(const Options& opt, std::ostream& log) {
    Session s(opt, "dimension");
    const Trajectory tr = run(s.rc.plate, s.ops, s.rc.sim, s.initial(), s.split);
    if (tr.aborted) throw NumericalError(tr.abort_reason);
    const std::size_t n = tr.snapshots.size();
    const auto first = static_cast<std::size_t>((1.0 - s.rc.dimension.tail_fraction) * n);
    const std::vector<State> tail(tr.snapshots.begin() + first, tr.snapshots.end());
    const DimensionReport d = correlation_dimension(tail, s.ops, s.rc.dimension.embed_dims, s.rc.dimension.theiler);
    const RegularityReport reg = regularity_probe(tr, s.ops);
    Json j = s.header();
    j["tail_snapshots"] = d.snapshots;
    j["tail_diameter"] = d.diameter;
    j["embed_dims"] = d.embed_dims;
    j["estimates"] = d.estimates;
    j["saturated"] = d.saturated;
    j["regularity"] = regularity_json(reg);
    j["verdict"] = d.saturated ? "PASS" : "FAIL";
    write_json(s.path("report.json"), j);
    log << "dimension:";
    for (std::size_t i = 0; i < d.estimates.size(); ++i) log << " m=" << d.embed_dims[i] << ":" << d.estimates[i];
    log << " -> " << (d.saturated ? "PASS" : "FAIL") << "\n";
    s.finish(d.saturated ? "PASS" : "FAIL");
    return d.saturated ? kOk : kVerdictFail;
}

int cmd_stationary(const Options& opt, std::ostream& log) {
    Session s(opt, "stationary");
    SimPlan plan = s.rc.sim;
    plan.dt = s.rc.stationary.dt;
    plan.T = s.rc.stationary.T;
    plan.snapshot_every = std::max(1, static_cast<int>(std::lround(plan.T / plan.dt)));
    const StationaryReport rep = stationary_convergence(s.rc.plate, s.ops, s.split, plan, s.rc.stationary.samples,
                                                        s.rc.stationary.radius, opt.threads);
    Json cases = Json::array();
    for (const auto& c : rep.cases)
        cases.push_back({{"seed", c.seed}, {"final_speed", c.final_speed}, {"distance", c.distance},
                         {"newton_residual", c.residual}, {"equilibrium", c.equilibrium}, {"pass", c.pass}});
    Json eq = Json::array();
    for (const auto& u : rep.equilibria) eq.push_back({{"energy_norm", std::sqrt(s.ops.energy_sq(u))}});
    Json j = s.header();
    j["skipped"] = rep.skipped;
    j["note"] = rep.note;
    j["cases"] = cases;
    j["equilibria"] = eq;
    const bool pass = rep.skipped || rep.pass;
    j["verdict"] = rep.skipped ? "SKIPPED" : (rep.pass ? "PASS" : "FAIL");
    write_json(s.path("report.json"), j);
    log << "stationary: " << (rep.skipped ? rep.note : (rep.pass ? "PASS" : "FAIL")) << "\n";
    s.finish(rep.skipped ? "SKIPPED" : (rep.pass ? "PASS" : "FAIL"));
    return pass ? kOk : kVerdictFail;
}

int cmd_selftest(const Options&, std::ostream& log) {
    int failures = 0;
    auto check = [&](const std::string& name, bool ok, double value) {
        log << (ok ? "PASS " : "FAIL ") << name << "  (" << value << ")\n";
        if (!ok) ++failures;
    };
    const DomainSpec dom{1.0, 0.3};
    {
        const DiscreteOperators ops = assemble_operators(1, 1, dom);
        check("a(sin x, sin x) = pi l", std::abs(ops.K(0, 0) - kPi) <= 1e-12, ops.K(0, 0));
        check("(sin x, sin x) = pi l", std::abs(ops.M(0, 0) - kPi) <= 1e-12, ops.M(0, 0));
        check("grid weights sum to 2 pi l", std::abs(ops.grid.weight_sum() - 2 * kPi) <= 1e-12 * 2 * kPi,
              ops.grid.weight_sum());
        check("embedding constant of {sin x} is 1", std::abs(ops.embedding() - 1.0) <= 1e-10, ops.embedding());
    }
    {
        const DiscreteOperators ops = assemble_operators(3, 4, DomainSpec{0.5, 0.3});
        Matrix off = ops.M;
        off.diagonal().setZero();
        check("mass matrix diagonal", off.cwiseAbs().maxCoeff() <= 1e-12, off.cwiseAbs().maxCoeff());
        const double expect = 0.5 * kPi * (2 * 0.5 / 3.0);
        check("(sin x P1, sin x P1) = (pi/2)(2l/3)", std::abs(ops.M(1, 1) - expect) <= 1e-12, ops.M(1, 1));
    }
    {
        // Single-mode oscillator: midpoint has discrete frequency (2/dt) atan(omega dt / 2).
        PlateConfig cfg;
        cfg.damping = {0.0, 0.0};
        cfg.allow_undamped = true;
        const DiscreteOperators ops = assemble_operators(2, 2, dom);
        const double omega = std::sqrt(ops.K(0, 0) / ops.M(0, 0));
        SimPlan plan;
        plan.dt = 0.01;
        plan.T = 20.0 * kPi;
        plan.snapshot_every = 100;
        const Trajectory tr = run(cfg, ops, plan, mode_state(ops, 1, 0, 1.0), split_constants(cfg, {}));
        const double wd = 2.0 / plan.dt * std::atan(omega * plan.dt / 2.0);
        double err = 0.0, drift = 0.0;
        for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
            err = std::max(err, std::abs(tr.snapshots[i].u[0] - std::cos(wd * tr.snapshots[i].t)));
            drift = std::max(drift, std::abs(tr.ledger[i].e.Etot / tr.ledger[0].e.Etot - 1.0));
        }
        check("1-DOF oscillator matches discrete cosine", err <= 1e-9, err);
        check("1-DOF oscillator conserves energy", drift <= 1e-10, drift);
    }
    {
        const BarrierConstants bc = toy_constants();
        auto oracle = [](double rhs) {
            double lo = 1.0, hi = 10.0;
            for (int i = 0; i < 200; ++i) {
                const double m = 0.5 * (lo + hi);
                (m * m - std::pow(m, 1.5) < rhs ? lo : hi) = m;
            }
            return 0.5 * (lo + hi);
        };
        const double s1 = solve_sigma(1.0, bc), s0 = solve_sigma(0.0, bc);
        check("toy sigma(E=1)", std::abs(s1 - oracle(3.0)) <= 1e-9, s1);
        check("toy sigma(E=0)", std::abs(s0 - oracle(2.0)) <= 1e-9, s0);
        check("gamma(1) = 1/4", gamma_of_q(1) == 0.25, gamma_of_q(1));
        check("b exponent at q = 1 is 9/7", std::abs(b_exponent(1) - 9.0 / 7.0) <= 1e-15, b_exponent(1));
    }
    log << (failures == 0 ? "selftest: all checks passed\n" : "selftest: failures present\n");
    return failures == 0 ? kOk : kVerdictFail;
}

}  // namespace

int run_command(const std::string& name, const Options& opt, std::ostream& log) {
    static const std::map<std::string, std::function<int(const Options&, std::ostream&)>> table{
        {"simulate", cmd_simulate}, {"sweep", cmd_sweep},           {"barrier", cmd_barrier},
        {"pairs", cmd_pairs},       {"dimension", cmd_dimension}, {"stationary", cmd_stationary},
        {"selftest", cmd_selftest}};
    const auto it = table.find(name);
    if (it == table.end()) throw ConfigError({"unknown subcommand " + name});
    return it->second(opt, log);
}

}  // namespace plate::cli
