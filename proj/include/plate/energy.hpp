#pragma once

#include "plate/model.hpp"

#include <string>

namespace plate {

// Pi_1(u) = -c |u|_0^2 - (b |Omega| + additive), Pi_0 = Pi - Pi_1.
struct SplitConstants {
    double c = 0.0;
    double b = 0.0;
    double additive = 0.0;
    std::string additive_rule;          // which bound produced `additive`
    std::vector<std::string> warnings;  // refits triggered by a negative Pi_0
};

// Builds the split from a certified (c, b). The additive constant absorbs
// -alpha/2 X + delta/4 X^2 >= delta/8 X^2 - additive, X = |u_x|^2, which
// holds for alpha^2/delta always and for alpha^2/4 once delta >= 2.
SplitConstants split_constants(const PlateConfig& cfg, const AssumptionFCertificate& cert);

double potential_Pi(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg);

struct PiSplit {
    double Pi = 0.0;
    double Pi0 = 0.0;
    double Pi1 = 0.0;
};

// Pi_0 is accumulated node by node (each integrand is nonnegative), so it
// never depends on cancellation against Pi. A negative value means the
// constants are too small: they are enlarged in place and a warning is kept.
PiSplit split_Pi(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg, SplitConstants& sc);

struct EnergyValues {
    double kinetic = 0.0;
    double bending = 0.0;
    double Pi = 0.0;
    double Pi0 = 0.0;
    double Pi1 = 0.0;
    double E = 0.0;
    double Etot = 0.0;
};

EnergyValues total_energy(const State& s, const DiscreteOperators& ops, const PlateConfig& cfg, SplitConstants& sc);

struct LedgerRow {
    double t = 0.0;
    EnergyValues e;
    double damping_integral = 0.0;
    double flux_integral = 0.0;   // -beta int int u_y u_t
    double identity_residual = 0.0;
};

using EnergyLedger = std::vector<LedgerRow>;

// E(t) + int_s^t g |u_t|^2 - E(s) - (flux over [s, t]).
double energy_identity_residual(const EnergyLedger& ledger, std::size_t s_index, std::size_t t_index);

// |u|_0^2 / |u_x|_0^2.
double poincare_ratio(const Vector& u, const DiscreteOperators& ops);

// sum_i mu_i^{r/2} w_i^2 in the (K, M) eigenbasis: r = 0 is L^2, r = 2 is a(u, u).
double spectral_norm_sq(const Vector& u, const DiscreteOperators& ops, double r);

// |u|_{2-s}^2 - eta [a(u, u) + |u_x|^4].
double interpolation_gap(const Vector& u, const DiscreteOperators& ops, double s, double eta);

// Direct quadrature of a(u, u) from nodal second derivatives.
double bending_by_quadrature(const Vector& u, const DiscreteOperators& ops);

}  // namespace plate
