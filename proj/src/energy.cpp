#include "plate/energy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace plate {

SplitConstants split_constants(const PlateConfig& cfg, const AssumptionFCertificate& cert) {
    SplitConstants sc;
    sc.c = cert.c;
    sc.b = cert.b;
    const double a2 = cfg.alpha * cfg.alpha;
    if (a2 == 0.0) {
        sc.additive = 0.0;
        sc.additive_rule = "none (alpha = 0)";
    } else if (cfg.delta >= 2.0) {
        sc.additive = 0.25 * a2;
        sc.additive_rule = "alpha^2/4";
    } else if (cfg.delta > 0.0) {
        sc.additive = a2 / cfg.delta;
        sc.additive_rule = "alpha^2/delta";
    } else {
        sc.additive = 0.25 * a2;
        sc.additive_rule = "alpha^2/4 (uncertified: delta = 0)";
        sc.warnings.push_back("delta = 0 with alpha != 0: -alpha/2 |u_x|^2 is unbounded below; split is refitted on demand");
    }
    return sc;
}

double potential_Pi(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg) {
    const double X = u.dot(ops.Gx * u);
    double pi = -0.5 * cfg.alpha * X + 0.25 * cfg.delta * X * X;
    if (cfg.kappa != 0.0 || cfg.source.kind() != SourceKind::zero) {
        Matrix un = ops.grid.nodal(ops.basis, u);
        for (Eigen::Index j = 0; j < un.cols(); ++j)
            for (Eigen::Index i = 0; i < un.rows(); ++i) {
                const double s = un(i, j), p = std::max(s, 0.0);
                un(i, j) = 0.5 * cfg.kappa * p * p + cfg.source.antiderivative(s);
            }
        pi += ops.grid.integrate(un);
    }
    return pi;
}

PiSplit split_Pi(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg, SplitConstants& sc) {
    const double X = u.dot(ops.Gx * u);
    Matrix un = ops.grid.nodal(ops.basis, u);
    Matrix body(un.rows(), un.cols());
    for (Eigen::Index j = 0; j < un.cols(); ++j)
        for (Eigen::Index i = 0; i < un.rows(); ++i) {
            const double s = un(i, j), p = std::max(s, 0.0);
            body(i, j) = 0.5 * cfg.kappa * p * p + cfg.source.antiderivative(s) + sc.c * s * s + sc.b;
        }
    PiSplit out;
    const double l2 = ops.l2_sq(u);
    const double quad = -0.5 * cfg.alpha * X + 0.25 * cfg.delta * X * X;
    out.Pi0 = ops.grid.integrate(body) + quad + sc.additive;
    if (out.Pi0 < 0.0) {
        const double bump = -out.Pi0 * (1.0 + 1e-9) + 1e-12;
        std::ostringstream os;
        os << "Pi_0 = " << out.Pi0 << " < 0; additive constant raised by " << bump;
        sc.warnings.push_back(os.str());
        sc.additive += bump;
        out.Pi0 += bump;
    }
    out.Pi1 = -sc.c * l2 - (sc.b * ops.basis.dom.area() + sc.additive);
    out.Pi = potential_Pi(u, ops, cfg);
    return out;
}

EnergyValues total_energy(const State& s, const DiscreteOperators& ops, const PlateConfig& cfg, SplitConstants& sc) {
    EnergyValues e;
    e.kinetic = 0.5 * ops.l2_sq(s.v);
    e.bending = 0.5 * ops.energy_sq(s.u);
    const PiSplit p = split_Pi(s.u, ops, cfg, sc);
    e.Pi = p.Pi;
    e.Pi0 = p.Pi0;
    e.Pi1 = p.Pi1;
    e.E = e.kinetic + e.bending + e.Pi0;
    e.Etot = e.kinetic + e.bending + e.Pi;
    return e;
}

double energy_identity_residual(const EnergyLedger& ledger, std::size_t s_index, std::size_t t_index) {
    if (s_index == t_index) return 0.0;
    const LedgerRow& a = ledger.at(s_index);
    const LedgerRow& b = ledger.at(t_index);
    return (b.e.Etot - a.e.Etot) + (b.damping_integral - a.damping_integral) - (b.flux_integral - a.flux_integral);
}

double poincare_ratio(const Vector& u, const DiscreteOperators& ops) {
    const double X = u.dot(ops.Gx * u);
    if (!(X > 0.0)) throw std::domain_error("poincare_ratio: |u_x| = 0");
    return ops.l2_sq(u) / X;
}

double spectral_norm_sq(const Vector& u, const DiscreteOperators& ops, double r) {
    const Vector w = ops.to_modal(u);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) acc += std::pow(ops.modal_eigs[i], 0.5 * r) * w[i] * w[i];
    return acc;
}

double interpolation_gap(const Vector& u, const DiscreteOperators& ops, double s, double eta) {
    const double X = u.dot(ops.Gx * u);
    return spectral_norm_sq(u, ops, 2.0 - s) - eta * (ops.energy_sq(u) + X * X);
}

double bending_by_quadrature(const Vector& u, const DiscreteOperators& ops) {
    const auto& g = ops.grid;
    const auto& basis = ops.basis;
    const double sig = basis.dom.sigma;
    double acc = 0.0;
    for (int ix = 0; ix < g.nx(); ++ix) {
        for (int iy = 0; iy < g.ny(); ++iy) {
            double uxx = 0.0, uyy = 0.0, uxy = 0.0;
            for (int i = 0; i < basis.size(); ++i) {
                const BasisValue b = g.basis_at(basis, i, ix, iy);
                uxx += u[i] * b.xx;
                uyy += u[i] * b.yy;
                uxy += u[i] * b.xy;
            }
            const double lap = uxx + uyy;
            const double dens = lap * lap - (1.0 - sig) * (2.0 * uxx * uyy - 2.0 * uxy * uxy);
            acc += g.wx[ix] * g.wy[iy] * dens;
        }
    }
    return acc;
}

}  // namespace plate
