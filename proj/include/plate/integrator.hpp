#pragma once

#include "plate/energy.hpp"

#include <cstdint>
#include <functional>

namespace plate {

struct SimPlan {
    double dt = 1e-3;
    double T = 1.0;
    int snapshot_every = 1;
    double fp_tol = 1e-11;
    int fp_maxiter = 60;
    std::uint64_t seed = 1;

    std::vector<std::string> violations() const;
    void validate() const;
};

struct StepStats {
    int iterations = 0;
    double last_change = 0.0;
    double rho = 0.0;             // |v_m|_0
    double damping_power = 0.0;   // g(rho) rho^2
    double flux_power = 0.0;      // -beta (u_m,y, v_m)
};

// Implicit midpoint in the (K, M) eigenbasis. The operator
// 2M/dt + dt/2 K is diagonal there, so the damping enters as one scalar
// shift and each fixed-point sweep costs a few matrix-vector products.
class Stepper {
public:
    Stepper(const DiscreteOperators& ops, const PlateConfig& cfg, const SimPlan& plan);

    State step(const State& s, StepStats* stats = nullptr) const;

    // rho = sqrt(sum w_i^2 / (c_i + g(rho))^2) for a modal right-hand side w.
    double solve_damping_magnitude(const Vector& w, double tol = 1e-15) const;

private:
    const DiscreteOperators& ops_;
    const PlateConfig& cfg_;
    SimPlan plan_;
    Vector shift_;   // 2/dt + dt mu_i / 2
    Vector hnorm_;   // dt^2 mu_i + 4: H-norm weight of a change in v_m
};

struct Trajectory {
    std::vector<State> snapshots;
    EnergyLedger ledger;
    PlateConfig cfg;
    SimPlan plan;
    int Mx = 0, Ny = 0;
    SplitConstants split;
    bool aborted = false;
    std::string abort_reason;
};

// Initial-condition generators.
State mode_state(const DiscreteOperators& ops, int m, int k, double amplitude);
// Generalized eigenvector `index` (0-based, ascending) of (K, M), M-normalized and scaled.
State eigen_state(const DiscreteOperators& ops, int index, double amplitude);
// Random smooth state with |(u, v)|_H = radius; deterministic in seed.
State random_state(const DiscreteOperators& ops, double radius, std::uint64_t seed);
// A Newton-refined equilibrium plus a random kick of the given H-norm.
State stationary_plus_kick(const PlateConfig& cfg, const DiscreteOperators& ops, double kick, std::uint64_t seed);

// Invoked after each recorded snapshot; return false to stop early.
using SnapshotHook = std::function<bool(const State&, const LedgerRow&)>;

// Advances to plan.T. A step failure stops the run with `aborted` set; the
// partial trajectory is still returned.
Trajectory run(const PlateConfig& cfg, const DiscreteOperators& ops, const SimPlan& plan, const State& initial,
               const SplitConstants& split, const SnapshotHook& hook = {});

}  // namespace plate
