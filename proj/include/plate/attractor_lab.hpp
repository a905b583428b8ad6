#pragma once

#include "plate/integrator.hpp"

#include <limits>

namespace plate {

// Runs body(i) for i in [0, count) on up to `threads` workers. Results must
// be written to per-index slots so the outcome is independent of scheduling.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

struct SweepPlan {
    std::vector<double> radii{1.0, 5.0, 25.0};
    int samples_per_radius = 2;
    double T = 100.0;
    double tail_fraction = 0.5;
    double dt = 5e-3;
    int snapshot_every = 20;
    std::uint64_t seed = 1;
    int threads = 1;

    std::vector<std::string> violations() const;
};

struct SweepSample {
    double radius = 0.0;
    std::uint64_t seed = 0;
    double tail_sup = 0.0;   // sup of |S_t y|_H over the tail window
    double absorbing_time = 0.0;
    bool blew_up = false;
    std::string note;
    std::vector<double> times, hnorm;
};

struct SweepReport {
    std::vector<SweepSample> samples;
    std::vector<double> radius_sup;   // per radius: max tail_sup over its samples
    double R0 = 0.0;                  // max of radius_sup
    double spread = 0.0;              // (max - min) / max over radius_sup
    int blowups = 0;
    bool pass = false;
};

SweepReport dissipativity_sweep(const PlateConfig& cfg, const DiscreteOperators& ops, const SplitConstants& split,
                                const SweepPlan& plan);

// First recorded time after which |S_t y|_H <= R0 for every later snapshot;
// +inf if the ball is never entered for good.
double absorbing_time(const std::vector<double>& times, const std::vector<double>& hnorm, double R0);

struct PairStats {
    std::vector<double> times;
    std::vector<double> separation;   // |S_t y1 - S_t y2|_H^2
    std::vector<double> lower_order;  // sup_{s <= t} |z(s)|_0^2
    double C = 1.0;
    double omega = 0.0;
    double d = 0.0;
    int violations = 0;
    bool certified = false;
    std::string note;
};

// Fits sep(t) <= C e^{-omega t} sep(0) + d sup_{s<=t} |z(s)|_0^2: (C, omega)
// from a log-linear fit of the upper envelope, d from the first half of the
// record; the whole record is then checked.
PairStats pair_quasistability(const PlateConfig& cfg, const DiscreteOperators& ops, const SplitConstants& split,
                              const State& y1, const State& y2, const SimPlan& plan);
PairStats fit_quasistability(std::vector<double> times, std::vector<double> separation,
                             std::vector<double> lower_order, bool damping_at_rest);

struct DimensionReport {
    std::vector<int> embed_dims;
    std::vector<double> estimates;
    int snapshots = 0;
    double diameter = 0.0;
    bool saturated = false;   // consecutive estimates differ by < 0.5
};

// Grassberger-Procaccia estimate on the leading modal coordinates (u scaled
// by sqrt(mu_i), and v): embed_dim m uses 2m coordinates.
DimensionReport correlation_dimension(const std::vector<State>& tail, const DiscreteOperators& ops,
                                      const std::vector<int>& embed_dims, int theiler = 20);

struct RegularityReport {
    double sup_ut_mid = 0.0, sup_ut_late = 0.0;     // |u_t|_{2,*}^2 over [T/2, 3T/4] and [3T/4, T]
    double sup_utt_mid = 0.0, sup_utt_late = 0.0;   // |u_tt|_0^2 likewise
    double sup_ut = 0.0, sup_utt = 0.0;             // over [T/2, T]
    bool pass = false;
};

RegularityReport regularity_probe(const Trajectory& tr, const DiscreteOperators& ops);

struct StationaryCase {
    std::uint64_t seed = 0;
    double final_speed = 0.0;
    double distance = 0.0;     // |u(T) - u*|_{2,*}
    double residual = 0.0;     // Newton residual at u*
    int equilibrium = -1;      // index into StationaryReport::equilibria
    bool pass = false;
};

struct StationaryReport {
    bool skipped = false;
    std::string note;
    std::vector<StationaryCase> cases;
    std::vector<Vector> equilibria;
    bool pass = false;
};

StationaryReport stationary_convergence(const PlateConfig& cfg, const DiscreteOperators& ops,
                                        const SplitConstants& split, const SimPlan& plan, int samples,
                                        double radius, int threads = 1);

}  // namespace plate
