#include "plate/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace plate {

std::vector<std::string> BarrierConstants::violations() const {
    std::vector<std::string> out;
    if (!(gamma >= 0.0 && gamma < 1.0)) out.push_back("barrier: gamma must lie in [0, 1)");
    if (!(d3 > 0.0)) out.push_back("barrier: d3 must be > 0");
    if (!(eta >= 0.0 && eta < 1.0)) out.push_back("barrier: eta must lie in [0, 1)");
    if (!(C1 > 0.0 && C2 > 0.0)) out.push_back("barrier: C1 and C2 must be > 0");
    if (c0 < 0.0 || c1 <= 0.0) out.push_back("barrier: need c0 >= 0 and c1 > 0");
    if (c_eta < 0.0) out.push_back("barrier: c_eta must be >= 0");
    return out;
}

double gamma_of_q(int q) {
    if (q < 1) throw std::domain_error("gamma_of_q: q must be >= 1");
    return q / (2.0 * (q + 1.0));
}

double b_exponent(int q) {
    if (q < 1) throw std::domain_error("b_exponent: q must be >= 1");
    return (q + 2.0) / (7.0 * q + 6.0) * (1.0 + 16.0 * (q + 1.0) / (5.0 * q + 2.0));
}

double b_growth(double s, int q, double c_eta) {
    if (!(s > 0.0)) throw std::domain_error("b_growth: s must be > 0");
    return c_eta * std::pow(s, b_exponent(q));
}

BalancingReport balancing_check(double gamma, const std::function<double(double)>& b, int decades) {
    BalancingReport rep;
    if (gamma == 0.0) {
        rep.skipped = true;
        rep.pass = true;
        return rep;
    }
    if (!(gamma > 0.0)) throw std::domain_error("balancing_check: gamma must be >= 0");
    const int per_decade = 8;
    for (int i = 0; i <= decades * per_decade; ++i) {
        const double x = std::pow(10.0, static_cast<double>(i) / per_decade);
        rep.x.push_back(x);
        rep.value.push_back(std::pow(x, 1.0 - 1.0 / gamma) * b(x));
    }
    // b identically zero: the limit is trivially zero.
    if (std::all_of(rep.value.begin(), rep.value.end(), [](double v) { return v == 0.0; })) {
        rep.trivial = true;
        rep.pass = true;
        return rep;
    }
    // Eventually strictly decreasing: the second half of the samples.
    bool decreasing = true;
    for (std::size_t i = rep.value.size() / 2 + 1; i < rep.value.size(); ++i)
        decreasing = decreasing && rep.value[i] < rep.value[i - 1];
    rep.pass = decreasing && rep.value.back() < 1e-6 * rep.value.front();
    return rep;
}

namespace {

double sigma_gap(double sigma, double E, const BarrierConstants& bc) {
    const double inner = 1.0 + (bc.C2 / bc.C1) * E + 2.0 * bc.c / bc.C1 + bc.d0 * (1.0 + sigma * bc.b(bc.d1 * sigma));
    return std::pow(inner, bc.gamma) - 0.5 * bc.d3 * sigma;
}

}  // namespace

double solve_sigma(double E, const BarrierConstants& bc, double tol) {
    if (!(bc.gamma > 0.0 && bc.gamma < 1.0)) throw std::domain_error("solve_sigma: gamma must lie in (0, 1)");
    double lo = 1e-8, hi = 1.0;
    if (sigma_gap(lo, E, bc) <= 0.0) throw NumericalError("solve_sigma: no sign change at the lower bracket end");
    int doublings = 0;
    while (sigma_gap(hi, E, bc) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 1000 || !std::isfinite(hi))
            throw NumericalError("solve_sigma: bracket expansion failed; constants violate the balancing condition");
    }
    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (sigma_gap(mid, E, bc) > 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double epsilon_of_E(double E, const BarrierConstants& bc) { return 1.0 / solve_sigma(E, bc); }

BarrierConstants toy_constants() {
    BarrierConstants bc;
    bc.C1 = bc.C2 = 1.0;
    bc.c = 0.0;
    bc.d0 = bc.d1 = 1.0;
    bc.d2 = 1.0;
    bc.d3 = 2.0;
    bc.gamma = 0.5;
    bc.c_eta = 1.0;
    bc.b_exponent = 0.5;
    bc.mode = "toy";
    return bc;
}

double lyapunov_V(const State& s, double eps, const DiscreteOperators& ops, const PlateConfig& cfg,
                  SplitConstants& split) {
    const EnergyValues e = total_energy(s, ops, cfg, split);
    return e.Etot + eps * s.v.dot(ops.M * s.u);
}

EnergySandwich energy_sandwich(const PlateConfig& cfg, const DiscreteOperators& ops, const SplitConstants& split) {
    EnergySandwich out;
    const double base = split.b * ops.basis.dom.area() + split.additive;
    const double excess = split.c - 0.25 * ops.lambda_min;
    double quad = 0.0;
    if (excess > 0.0)
        quad = cfg.delta > 0.0 ? 4.0 * std::pow(kPi, 4) * excess * excess / cfg.delta
                               : std::numeric_limits<double>::infinity();
    out.C1 = base + quad;
    out.C2 = 0.0;
    return out;
}

BarrierConstants derive_constants(const PlateConfig& cfg, const DiscreteOperators& ops, const SplitConstants& split,
                                  const std::vector<const Trajectory*>& data, double eta_tilde) {
    BarrierConstants bc;
    bc.mode = "fitted";
    bc.eta = eta_tilde;
    bc.kappa_damp = 1.0;
    bool nonlinear = false;
    for (std::size_t j = 1; j < cfg.damping.size(); ++j) nonlinear = nonlinear || cfg.damping[j] > 0.0;
    bc.gamma = nonlinear ? gamma_of_q(cfg.q()) : 0.0;
    bc.b_exponent = b_exponent(cfg.q());
    if (cfg.b0() > 0.0) {
        bc.c0 = 0.0;
        bc.c1 = 1.0 / cfg.b0();
    } else {
        bc.c0 = 1.0;
        bc.c1 = 1.0 / std::max(cfg.bq(), std::numeric_limits<double>::min());
    }
    bc.lambda = ops.embedding();
    bc.eps_max = std::min(0.25 / std::max(1.0, bc.lambda), bc.kappa_damp * (1.0 - bc.eta) / (4.0 * bc.c1));
    const EnergySandwich sw = energy_sandwich(cfg, ops, split);
    bc.C1 = 0.25;
    bc.C2 = 2.25;
    bc.c = std::max(sw.C1, sw.C2);

    // Snapshot samples for the fitted inequalities.
    struct Sample {
        double L;     // left side of (A2) minus the fixed terms
        double damp;  // [1 + E]^gamma (D u_t, u_t)
        double flux;  // (N(u), u_t)
        double Dvv;   // (D u_t, u_t)
        double E;
    };
    std::vector<Sample> samples;
    for (const Trajectory* tr : data) {
        for (std::size_t i = 0; i < tr->snapshots.size(); ++i) {
            const State& s = tr->snapshots[i];
            const LedgerRow& row = tr->ledger[i];
            const Vector Dv = apply_damping(s.v, ops, cfg);
            const Vector N = nonconservative_load(s.u, ops, cfg);
            const double pi_prime_u = -conservative_load(s.u, ops, cfg).dot(s.u);
            Sample x;
            x.Dvv = Dv.dot(s.v);
            x.E = row.e.E;
            x.L = -Dv.dot(s.u) + N.dot(s.u) - pi_prime_u - bc.eta * ops.energy_sq(s.u) + bc.c2 * row.e.Pi0;
            x.damp = std::pow(1.0 + x.E, bc.gamma) * x.Dvv;
            x.flux = N.dot(s.v);
            samples.push_back(x);
        }
    }

    // (A2): c3 = max(L - c4 damp); pick c4 on a grid minimizing c3 + c4.
    double best = std::numeric_limits<double>::infinity();
    for (double c4 : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        double c3 = 0.0;
        for (const Sample& x : samples) c3 = std::max(c3, x.L - c4 * x.damp);
        if (c3 + c4 < best) {
            best = c3 + c4;
            bc.c3 = c3;
            bc.c4 = c4;
        }
    }
    // (A3b): c_eta >= [(N, u_t) - eta k (D u_t, u_t) - delta E] delta^p over delta in (0, 1].
    double ceta = 0.0;
    for (const Sample& x : samples)
        for (int j = 0; j <= 40; ++j) {
            const double dl = std::ldexp(1.0, -j);
            ceta = std::max(ceta, (x.flux - bc.eta * bc.kappa_damp * x.Dvv - dl * x.E) * std::pow(dl, bc.b_exponent));
        }
    bc.c_eta = ceta;

    const double dprime = std::min(1.0 - bc.eta, bc.c2);
    bc.d0 = std::max(1.0, bc.c + 2.0 * bc.c0 + bc.c3);
    bc.d1 = 2.0 / dprime;
    bc.d2 = bc.c4;
    bc.d3 = (bc.kappa_damp * (1.0 - bc.eta) - 2.0 * bc.eps_max * bc.c1) / bc.c4;
    return bc;
}

AuditReport decay_audit(const Trajectory& tr, const BarrierConstants& bc, double eps, const DiscreteOperators& ops) {
    AuditReport rep;
    rep.eps = eps;
    const std::size_t n = tr.snapshots.size();
    SplitConstants split = tr.split;
    std::vector<double> V(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
        V[i] = lyapunov_V(tr.snapshots[i], eps, ops, tr.cfg, split);
        t[i] = tr.snapshots[i].t;
    }
    rep.worst_margin = std::numeric_limits<double>::infinity();
    rep.max_bracket = -std::numeric_limits<double>::infinity();
    const double forcing = bc.d0 * (eps + bc.b(bc.d1 / eps));
    for (std::size_t i = 0; i < n; ++i) {
        AuditRow row;
        row.t = t[i];
        row.V = V[i];
        row.E = tr.ledger[i].e.E;
        double dV = 0.0;
        if (n >= 3) {
            if (i == 0) dV = (-3.0 * V[0] + 4.0 * V[1] - V[2]) / (t[2] - t[0]);
            else if (i == n - 1) dV = (3.0 * V[n - 1] - 4.0 * V[n - 2] + V[n - 3]) / (t[n - 1] - t[n - 3]);
            else dV = (V[i + 1] - V[i - 1]) / (t[i + 1] - t[i - 1]);
            const std::size_t c = std::clamp<std::size_t>(i, 1, n - 2);
            const double h = 0.5 * (t[c + 1] - t[c - 1]);
            row.allowance = std::abs(V[c + 1] - 2.0 * V[c] + V[c - 1]) / h;
        } else if (n == 2) {
            dV = (V[1] - V[0]) / (t[1] - t[0]);
        }
        const State& s = tr.snapshots[i];
        const double Dvv = apply_damping(s.v, ops, tr.cfg).dot(s.v);
        row.bracket = eps * std::pow(1.0 + row.E, bc.gamma) - bc.d3;
        row.lhs = dV + eps * V[i];
        row.rhs = forcing + bc.d2 * row.bracket * Dvv;
        const double margin = row.rhs + row.allowance - row.lhs;
        if (margin < 0.0) ++rep.violations;
        if (row.bracket > 0.0) ++rep.bracket_violations;
        rep.worst_margin = std::min(rep.worst_margin, margin);
        rep.max_bracket = std::max(rep.max_bracket, row.bracket);
        rep.rows.push_back(row);
    }
    return rep;
}

VStarResult vstar_bound(const BarrierConstants& bc, double R, int max_iter) {
    auto level = [&](double s) {
        const double sigma = solve_sigma(s, bc);
        return bc.d0 * (1.0 + sigma * bc.b(bc.d1 * sigma));
    };
    VStarResult out;
    out.K_R = R + level(R);
    double s = out.K_R;
    for (int it = 1; it <= max_iter; ++it) {
        const double next = level(s);
        out.iterations = it;
        if (!std::isfinite(next)) break;
        const bool done = std::abs(next - s) <= 1e-13 * std::max(1.0, std::abs(next));
        s = next;
        if (done) {
            out.converged = true;
            break;
        }
    }
    out.vstar = s;
    return out;
}

}  // namespace plate
