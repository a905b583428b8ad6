#include "plate/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace plate {

std::vector<std::string> SimPlan::violations() const {
    std::vector<std::string> out;
    if (!(dt > 0.0)) out.push_back("sim.dt must be > 0");
    if (!(T >= 0.0)) out.push_back("sim.T must be >= 0");
    if (snapshot_every < 1) out.push_back("sim.snapshot_every must be >= 1");
    if (!(fp_tol > 0.0)) out.push_back("sim.fp_tol must be > 0");
    if (fp_maxiter < 1) out.push_back("sim.fp_maxiter must be >= 1");
    return out;
}

void SimPlan::validate() const {
    if (auto v = violations(); !v.empty()) throw ConfigError(std::move(v));
}

Stepper::Stepper(const DiscreteOperators& ops, const PlateConfig& cfg, const SimPlan& plan)
    : ops_(ops), cfg_(cfg), plan_(plan) {
    plan_.validate();
    const double dt = plan_.dt;
    shift_ = (2.0 / dt + 0.5 * dt * ops_.modal_eigs.array()).matrix();
    hnorm_ = (dt * dt * ops_.modal_eigs.array() + 4.0).matrix();
}

double Stepper::solve_damping_magnitude(const Vector& w, double tol) const {
    auto h = [&](double rho) { return (w.array() / (shift_.array() + g_eval(rho, cfg_))).matrix().norm(); };
    const double h0 = h(0.0);
    if (cfg_.undamped() || h0 == 0.0) return h0;
    bool constant_g = true;
    for (std::size_t j = 1; j < cfg_.damping.size(); ++j) constant_g = constant_g && cfg_.damping[j] == 0.0;
    if (constant_g) return h0;

    // phi(rho) = rho - h(rho) is increasing; its root lies in [0, h(0)].
    double lo = 0.0, hi = h0, rho = h(h0);
    for (int it = 0; it < 200 && hi - lo > tol * h0; ++it) {
        const double g = g_eval(rho, cfg_);
        double dg = 0.0;
        for (std::size_t j = cfg_.damping.size() - 1; j >= 1; --j) dg = dg * rho + j * cfg_.damping[j];
        const Eigen::ArrayXd denom = shift_.array() + g;
        const double hv = (w.array() / denom).matrix().norm();
        const double phi = rho - hv;
        if (phi == 0.0) return rho;
        if (phi < 0.0) lo = rho; else hi = rho;
        const double dh = hv > 0.0 ? -dg * (w.array().square() / denom.cube()).sum() / hv : 0.0;
        double next = rho - phi / (1.0 - dh);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - rho) <= tol * h0) return next;
        rho = next;
    }
    return 0.5 * (lo + hi);
}

State Stepper::step(const State& s, StepStats* stats) const {
    const double dt = plan_.dt;
    const Matrix& Phi = ops_.modal_vecs;
    const Vector base = (2.0 / dt) * (ops_.M * s.v) - ops_.K * s.u;

    Vector z = ops_.to_modal(s.v);
    Vector vm = s.v;
    double g_prev = g_eval(z.norm(), cfg_);
    double prev_change = std::numeric_limits<double>::infinity();
    double relax = 1.0;
    double change = 0.0;
    int it = 0;
    for (;;) {
        ++it;
        const Vector um = s.u + 0.5 * dt * vm;
        // Defect correction: the modal right-hand side is rebuilt from the
        // nodal residual, so the converged vm solves the nodal equations
        // exactly even though Phi is M-orthonormal only to roundoff.
        const Vector resid = base + apply_F(um, ops_, cfg_) - (2.0 / dt + g_prev) * (ops_.M * vm) -
                             (0.5 * dt) * (ops_.K * vm);
        const Vector w = Phi.transpose() * resid + ((shift_.array() + g_prev) * z.array()).matrix();
        const double rho = solve_damping_magnitude(w);
        g_prev = g_eval(rho, cfg_);
        Vector znew = (w.array() / (shift_.array() + g_prev)).matrix();
        if (relax < 1.0) znew = relax * znew + (1.0 - relax) * z;
        change = std::sqrt((hnorm_.array() * (znew - z).array().square()).sum());
        z = znew;
        vm = Phi * z;
        if (!vm.allFinite()) {
            std::ostringstream os;
            os << "non-finite velocity at t=" << s.t << " after " << it << " fixed-point iterations";
            throw NumericalError(os.str());
        }
        const double scale = std::max(1.0, std::sqrt(ops_.h_norm_sq(s.u, s.v)));
        if (change <= plan_.fp_tol * scale) break;
        if (it >= plan_.fp_maxiter) {
            std::ostringstream os;
            os << "fixed-point iteration did not converge at t=" << s.t << ": " << it
               << " iterations, last change " << change << "; reduce sim.dt";
            throw NumericalError(os.str());
        }
        if (it >= 2 && change > prev_change) relax = 0.8;
        prev_change = change;
    }

    State out;
    out.u = s.u + dt * vm;
    out.v = 2.0 * vm - s.v;
    out.t = s.t + dt;
    if (stats) {
        const Vector um = s.u + 0.5 * dt * vm;
        stats->iterations = it;
        stats->last_change = change;
        stats->rho = z.norm();
        stats->damping_power = g_eval(stats->rho, cfg_) * z.squaredNorm();
        stats->flux_power = cfg_.beta == 0.0 ? 0.0 : -cfg_.beta * um.dot(ops_.Dy * vm);
    }
    return out;
}

State mode_state(const DiscreteOperators& ops, int m, int k, double amplitude) {
    if (m < 1 || m > ops.basis.Mx || k < 0 || k >= ops.basis.Ny)
        throw ConfigError({"initial mode (m, k) outside the basis"});
    State s;
    s.u = Vector::Zero(ops.size());
    s.v = Vector::Zero(ops.size());
    s.u[ops.basis.index(m, k)] = amplitude;
    return s;
}

State eigen_state(const DiscreteOperators& ops, int index, double amplitude) {
    if (index < 0 || index >= ops.size()) throw ConfigError({"eigenmode index outside the basis"});
    State s;
    s.u = amplitude * ops.modal_vecs.col(index);
    s.v = Vector::Zero(ops.size());
    return s;
}

State random_state(const DiscreteOperators& ops, double radius, std::uint64_t seed) {
    const int n = ops.size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector a(n), b(n);
    for (int i = 0; i < n; ++i) {
        const double decay = 1.0 / (1.0 + 0.25 * i);
        a[i] = normal(rng) * decay / std::sqrt(ops.modal_eigs[i]);
        b[i] = normal(rng) * decay;
    }
    const double h = std::sqrt((ops.modal_eigs.array() * a.array().square()).sum() + b.squaredNorm());
    State s;
    s.u = ops.modal_vecs * a;
    s.v = ops.modal_vecs * b;
    if (h > 0.0) {
        s.u *= radius / h;
        s.v *= radius / h;
    }
    return s;
}

State stationary_plus_kick(const PlateConfig& cfg, const DiscreteOperators& ops, double kick, std::uint64_t seed) {
    const State guess = mode_state(ops, 1, 0, 1.0);
    const StationaryResult eq = stationary_solve(cfg, ops, guess.u);
    if (!eq.converged) {
        std::ostringstream os;
        os << "stationary solve did not converge (residual " << eq.residual << ")";
        throw NumericalError(os.str());
    }
    State s = random_state(ops, kick, seed);
    s.u += eq.u;
    return s;
}

Trajectory run(const PlateConfig& cfg, const DiscreteOperators& ops, const SimPlan& plan, const State& initial,
               const SplitConstants& split, const SnapshotHook& hook) {
    Trajectory tr;
    tr.cfg = cfg;
    tr.plan = plan;
    tr.Mx = ops.basis.Mx;
    tr.Ny = ops.basis.Ny;
    tr.split = split;
    const Stepper stepper(ops, cfg, plan);

    State s = initial;
    LedgerRow row;
    row.t = s.t;
    row.e = total_energy(s, ops, cfg, tr.split);
    const double E0 = row.e.Etot;
    const double t0 = s.t;
    tr.snapshots.push_back(s);
    tr.ledger.push_back(row);
    if (hook && !hook(s, row)) return tr;

    const long steps = std::lround(plan.T / plan.dt);
    double damping = 0.0, flux = 0.0;
    for (long k = 1; k <= steps; ++k) {
        StepStats st;
        try {
            s = stepper.step(s, &st);
        } catch (const NumericalError& e) {
            tr.aborted = true;
            tr.abort_reason = e.what();
            break;
        }
        s.t = t0 + k * plan.dt;
        damping += plan.dt * st.damping_power;
        flux += plan.dt * st.flux_power;
        if (k % plan.snapshot_every != 0 && k != steps) continue;
        row.t = s.t;
        row.e = total_energy(s, ops, cfg, tr.split);
        row.damping_integral = damping;
        row.flux_integral = flux;
        row.identity_residual = row.e.Etot + damping - E0 - flux;
        tr.snapshots.push_back(s);
        tr.ledger.push_back(row);
        if (hook && !hook(s, row)) break;
    }
    return tr;
}

}  // namespace plate
