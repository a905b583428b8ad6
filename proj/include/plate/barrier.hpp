#pragma once

#include "plate/integrator.hpp"

#include <functional>
#include <string>

namespace plate {

struct BarrierConstants {
    double c0 = 0.0, c1 = 1.0;             // |u_t|^2 <= c0 + c1 (D u_t, u_t)
    double eta = 0.5;                      // equipartition slack (also the b-function's eta~)
    double c2 = 0.5, c3 = 0.0, c4 = 1.0;   // equipartition constants
    double gamma = 0.0;
    double kappa_damp = 1.0;
    double d0 = 1.0, d1 = 1.0, d2 = 1.0, d3 = 1.0;
    double c_eta = 1.0;                    // b(s) = c_eta s^p
    double b_exponent = 1.0;
    double C1 = 1.0, C2 = 1.0, c = 0.0;    // C1 E - c <= V_eps <= C2 E + c
    double lambda = 1.0;                   // embedding constant
    double eps_max = 1.0;                  // largest eps the sandwich and d3 allow
    std::string mode = "hand";

    double b(double s) const { return c_eta * std::pow(s, b_exponent); }
    std::vector<std::string> violations() const;
};

double gamma_of_q(int q);
double b_exponent(int q);
double b_growth(double s, int q, double c_eta);

struct BalancingReport {
    std::vector<double> x, value;
    bool skipped = false;
    bool trivial = false;   // b == 0 at every sample
    bool pass = false;
};

// Samples x^{1 - 1/gamma} b(x) at 8 points per decade from x = 1.
BalancingReport balancing_check(double gamma, const std::function<double(double)>& b, int decades = 16);

// Root of [1 + (C2/C1) E + 2c/C1 + d0 (1 + sigma b(d1 sigma))]^gamma = d3 sigma / 2.
double solve_sigma(double E, const BarrierConstants& bc, double tol = 1e-12);
double epsilon_of_E(double E, const BarrierConstants& bc);

// Constants with sigma^2 - sigma^{3/2} = 3 + ... used as a documented example.
BarrierConstants toy_constants();

double lyapunov_V(const State& s, double eps, const DiscreteOperators& ops, const PlateConfig& cfg,
                  SplitConstants& split);

// Sandwich constants for 1/2 E - C1 <= Etot <= 2 E + C2, derived from the
// certified split (no sampling): Etot <= E since Pi_1 <= 0, and
// E >= mu/2 |u|^2 + delta/(8 pi^4) |u|^4 bounds the -c |u|^2 part.
struct EnergySandwich {
    double C1 = 0.0;
    double C2 = 0.0;
};
EnergySandwich energy_sandwich(const PlateConfig& cfg, const DiscreteOperators& ops, const SplitConstants& split);

// Fits c3, c4 and c_eta from trajectory data (least max-violation over a
// small grid) and derives everything else from cfg, ops and the split.
BarrierConstants derive_constants(const PlateConfig& cfg, const DiscreteOperators& ops, const SplitConstants& split,
                                  const std::vector<const Trajectory*>& data, double eta_tilde = 0.5);

struct AuditRow {
    double t = 0.0;
    double V = 0.0;
    double E = 0.0;
    double lhs = 0.0;        // dV/dt + eps V
    double rhs = 0.0;        // d0{eps + b(d1/eps)} + d2{eps[1+E]^gamma - d3}(Du_t, u_t)
    double allowance = 0.0;  // finite-difference error estimate
    double bracket = 0.0;    // eps[1+E]^gamma - d3
};

struct AuditReport {
    double eps = 0.0;
    std::vector<AuditRow> rows;
    int violations = 0;           // lhs > rhs + allowance
    int bracket_violations = 0;   // bracket > 0
    double worst_margin = 0.0;    // min of rhs + allowance - lhs
    double max_bracket = 0.0;
};

AuditReport decay_audit(const Trajectory& tr, const BarrierConstants& bc, double eps, const DiscreteOperators& ops);

struct VStarResult {
    double K_R = 0.0;
    double vstar = 0.0;
    int iterations = 0;
    bool converged = false;
};

VStarResult vstar_bound(const BarrierConstants& bc, double R, int max_iter = 100);

}  // namespace plate
