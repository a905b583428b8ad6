#pragma once

#include "plate/discretization.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <cstdint>
#include <memory>

namespace plate {

enum class SourceKind { zero, cubic_minus_load, custom_table };

// The nonlinear source f0 together with its antiderivative (zero at s = 0)
// and derivative. A custom table is interpolated by a cubic B-spline on a
// uniform grid and continued linearly outside it.
class SourceFunction {
public:
    static SourceFunction zero();
    static SourceFunction cubic_minus_load(double load);
    static SourceFunction custom_table(double s_min, double s_max, std::vector<double> values);

    SourceKind kind() const { return kind_; }
    double load() const { return load_; }
    const std::vector<double>& table() const { return table_; }
    double table_min() const { return s_min_; }
    double table_max() const { return s_max_; }

    double value(double s) const;
    double antiderivative(double s) const;
    double derivative(double s) const;

private:
    double interpolate(double s, int order) const;

    SourceKind kind_ = SourceKind::zero;
    double load_ = 0.0;
    double s_min_ = 0.0, s_max_ = 0.0, h_ = 0.0;
    std::vector<double> table_;
    std::shared_ptr<const boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
    std::vector<double> cumulative_; // antiderivative at grid points, from s = 0
};

struct PlateConfig {
    double alpha = 0.0;   // axial prestress
    double delta = 0.0;   // stretching stiffness
    double beta = 0.0;    // flow parameter
    double kappa = 0.0;   // stay restoring coefficient
    std::vector<double> damping{0.0, 0.0};  // b_0 .. b_q
    // Permits all-zero damping for conservative-limit experiments.
    bool allow_undamped = false;
    SourceFunction source = SourceFunction::zero();
    DomainSpec dom;

    int q() const { return static_cast<int>(damping.size()) - 1; }
    double b0() const { return damping.front(); }
    double bq() const { return damping.back(); }
    bool undamped() const;
    std::vector<std::string> violations() const;
    void validate() const;
    // Stable fingerprint of every parameter (FNV-1a over a canonical dump).
    std::uint64_t hash() const;
};

struct State {
    Vector u;
    Vector v;
    double t = 0.0;
};

// Nonlocal damping multiplier g(s) = sum_j b_j s^j.
double g_eval(double s, const PlateConfig& cfg);

// D(v) = g(|v|_0) M v.
Vector apply_damping(const Vector& v, const DiscreteOperators& ops, const PlateConfig& cfg);

// alpha - delta |u_x|_0^2.
double berger_coefficient(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg);

// Pointwise kappa u^+ + f0(u) at the quadrature nodes. Throws NumericalError on
// non-finite values, naming the offending node.
Matrix restoring_force_nodal(const Matrix& u_nodal, const QuadGrid& grid, const PlateConfig& cfg);

// Galerkin load of F(u) = -[(alpha - delta |u_x|^2) u_xx + kappa u^+ + f0(u) + beta u_y].
Vector apply_F(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg);
// -Pi'(u) alone (beta dropped).
Vector conservative_load(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg);
// N(u) = -beta u_y.
Vector nonconservative_load(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg);
// Jacobian of apply_F; the kink of u^+ contributes its a.e. derivative.
Matrix F_jacobian(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg);

struct AssumptionFCertificate {
    bool accepted = false;
    double c = 0.0;
    double b = 0.0;
    double range_lo = 0.0;
    double range_hi = 0.0;
    double witness = 0.0;        // counterexample location when rejected
    double liminf_ratio = 0.0;   // sampled lower bound of f0(s)/s in the outer band
    std::string detail;
};

// Certifies int_0^s f0 >= -c s^2 - b on the sampled range. The constants are
// fitted on the inner half of the range and must then hold on all of it;
// a source whose required constants keep growing is rejected with a witness.
AssumptionFCertificate validate_assumption_f(const PlateConfig& cfg, double lo = -100.0, double hi = 100.0,
                                             int samples = 20001);

struct StationaryOptions {
    double tol = 1e-10;
    int max_iter = 100;
};

struct StationaryResult {
    Vector u;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// K u - F(u) in load form.
Vector stationary_residual(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg);

// Damped semismooth Newton for K u = F(u).
StationaryResult stationary_solve(const PlateConfig& cfg, const DiscreteOperators& ops, const Vector& initial_guess,
                                  const StationaryOptions& opts = {});

}  // namespace plate
