#include "plate/model.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace plate {

namespace {

// 5-point Gauss-Legendre on [0, 1], used to integrate the spline piecewise.
constexpr std::array<double, 5> kGx{0.046910077030668, 0.230765344947158, 0.5, 0.769234655052842,
                                    0.953089922969332};
constexpr std::array<double, 5> kGw{0.118463442528095, 0.239314335249683, 0.284444444444444, 0.239314335249683,
                                    0.118463442528095};

}  // namespace

SourceFunction SourceFunction::zero() { return SourceFunction{}; }

SourceFunction SourceFunction::cubic_minus_load(double load) {
    SourceFunction f;
    f.kind_ = SourceKind::cubic_minus_load;
    f.load_ = load;
    return f;
}

SourceFunction SourceFunction::custom_table(double s_min, double s_max, std::vector<double> values) {
    std::vector<std::string> errors;
    if (!(s_max > s_min)) errors.push_back("source.table_max must exceed source.table_min");
    if (values.size() < 4) errors.push_back("source.values needs at least 4 samples");
    for (double v : values)
        if (!std::isfinite(v)) {
            errors.push_back("source.values contains a non-finite entry");
            break;
        }
    if (!errors.empty()) throw ConfigError(std::move(errors));

    SourceFunction f;
    f.kind_ = SourceKind::custom_table;
    f.s_min_ = s_min;
    f.s_max_ = s_max;
    f.h_ = (s_max - s_min) / static_cast<double>(values.size() - 1);
    f.table_ = std::move(values);
    f.spline_ = std::make_shared<const boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        f.table_.data(), f.table_.size(), s_min, f.h_);

    // Integral from s_min to every grid point.
    const std::size_t n = f.table_.size();
    f.cumulative_.assign(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        const double a = s_min + (j - 1) * f.h_;
        double acc = 0.0;
        for (int q = 0; q < 5; ++q) acc += kGw[q] * (*f.spline_)(a + kGx[q] * f.h_);
        f.cumulative_[j] = f.cumulative_[j - 1] + acc * f.h_;
    }
    return f;
}

double SourceFunction::interpolate(double s, int order) const {
    // Linear continuation beyond the table.
    const double edge = s < s_min_ ? s_min_ : (s > s_max_ ? s_max_ : s);
    const double f = (*spline_)(edge), df = spline_->prime(edge);
    const double d = s - edge;
    if (d == 0.0) {
        if (order == 0) return f;
        if (order == 1) return df;
        // order -1: integral from s_min.
        const double pos = (s - s_min_) / h_;
        const auto j = std::min<std::size_t>(static_cast<std::size_t>(std::max(0.0, std::floor(pos))),
                                             table_.size() - 2);
        const double a = s_min_ + j * h_;
        const double len = s - a;
        double acc = 0.0;
        for (int q = 0; q < 5; ++q) acc += kGw[q] * (*spline_)(a + kGx[q] * len);
        return cumulative_[j] + acc * len;
    }
    if (order == 0) return f + df * d;
    if (order == 1) return df;
    const double base = s < s_min_ ? 0.0 : cumulative_.back();
    return base + f * d + 0.5 * df * d * d;
}

double SourceFunction::value(double s) const {
    switch (kind_) {
        case SourceKind::zero: return 0.0;
        case SourceKind::cubic_minus_load: return s * s * s - load_;
        case SourceKind::custom_table: return interpolate(s, 0);
    }
    return 0.0;
}

double SourceFunction::antiderivative(double s) const {
    switch (kind_) {
        case SourceKind::zero: return 0.0;
        case SourceKind::cubic_minus_load: return 0.25 * s * s * s * s - load_ * s;
        case SourceKind::custom_table: return interpolate(s, -1) - interpolate(0.0, -1);
    }
    return 0.0;
}

double SourceFunction::derivative(double s) const {
    switch (kind_) {
        case SourceKind::zero: return 0.0;
        case SourceKind::cubic_minus_load: return 3.0 * s * s;
        case SourceKind::custom_table: return interpolate(s, 1);
    }
    return 0.0;
}

bool PlateConfig::undamped() const {
    return std::all_of(damping.begin(), damping.end(), [](double b) { return b == 0.0; });
}

std::vector<std::string> PlateConfig::violations() const {
    std::vector<std::string> out;
    auto finite = [&](double v, const char* name) {
        if (!std::isfinite(v)) out.push_back(std::string(name) + " must be finite");
    };
    finite(alpha, "alpha");
    finite(delta, "delta");
    finite(beta, "beta");
    finite(kappa, "kappa");
    if (delta < 0.0) out.push_back("delta must be >= 0");
    if (kappa < 0.0) out.push_back("kappa must be >= 0");
    if (damping.size() < 2) out.push_back("damping needs coefficients b_0..b_q with q >= 1");
    for (std::size_t j = 0; j < damping.size(); ++j)
        if (!(damping[j] >= 0.0) || !std::isfinite(damping[j]))
            out.push_back("damping b_" + std::to_string(j) + " must be finite and >= 0");
    if (!damping.empty() && undamped() && !allow_undamped)
        out.push_back("Assumption (g): damping coefficients are all zero (b_0 + b_q must be > 0)");
    auto dv = dom.violations();
    out.insert(out.end(), dv.begin(), dv.end());
    return out;
}

void PlateConfig::validate() const {
    if (auto v = violations(); !v.empty()) throw ConfigError(std::move(v));
}

std::uint64_t PlateConfig::hash() const {
    std::ostringstream os;
    char buf[64];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << key << '=' << buf << ';';
    };
    put("alpha", alpha);
    put("delta", delta);
    put("beta", beta);
    put("kappa", kappa);
    for (double b : damping) put("b", b);
    os << "allow_undamped=" << allow_undamped << ';';
    os << "source=" << static_cast<int>(source.kind()) << ';';
    put("load", source.load());
    put("tmin", source.table_min());
    put("tmax", source.table_max());
    for (double v : source.table()) put("tv", v);
    put("l", dom.l);
    put("sigma", dom.sigma);

    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

double g_eval(double s, const PlateConfig& cfg) {
    if (s < 0.0) throw std::domain_error("g_eval: negative speed norm");
    double acc = 0.0;
    for (auto it = cfg.damping.rbegin(); it != cfg.damping.rend(); ++it) acc = acc * s + *it;
    return acc;
}

Vector apply_damping(const Vector& v, const DiscreteOperators& ops, const PlateConfig& cfg) {
    const Vector Mv = ops.M * v;
    const double rho = std::sqrt(std::max(0.0, v.dot(Mv)));
    return g_eval(rho, cfg) * Mv;
}

double berger_coefficient(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg) {
    if (cfg.delta == 0.0) return cfg.alpha;
    return cfg.alpha - cfg.delta * u.dot(ops.Gx * u);
}

Matrix restoring_force_nodal(const Matrix& u_nodal, const QuadGrid& grid, const PlateConfig& cfg) {
    Matrix out(u_nodal.rows(), u_nodal.cols());
    for (Eigen::Index j = 0; j < u_nodal.cols(); ++j) {
        for (Eigen::Index i = 0; i < u_nodal.rows(); ++i) {
            const double s = u_nodal(i, j);
            const double f = cfg.kappa * std::max(s, 0.0) + cfg.source.value(s);
            if (!std::isfinite(f)) {
                std::ostringstream os;
                os << "non-finite restoring force at node (x=" << grid.x[i] << ", y=" << grid.y[j] << "), u=" << s;
                throw NumericalError(os.str());
            }
            out(i, j) = f;
        }
    }
    return out;
}

Vector conservative_load(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg) {
    Vector out = berger_coefficient(u, ops, cfg) * (ops.Gx * u);
    if (cfg.kappa != 0.0 || cfg.source.kind() != SourceKind::zero) {
        const Matrix un = ops.grid.nodal(ops.basis, u);
        out -= ops.grid.project(ops.basis, restoring_force_nodal(un, ops.grid, cfg));
    }
    return out;
}

Vector nonconservative_load(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg) {
    if (cfg.beta == 0.0) return Vector::Zero(u.size());
    return -cfg.beta * (ops.Dy.transpose() * u);
}

Vector apply_F(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg) {
    return conservative_load(u, ops, cfg) + nonconservative_load(u, ops, cfg);
}

Matrix F_jacobian(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg) {
    const Vector Gu = ops.Gx * u;
    Matrix J = berger_coefficient(u, ops, cfg) * ops.Gx - 2.0 * cfg.delta * Gu * Gu.transpose();
    if (cfg.kappa != 0.0 || cfg.source.kind() != SourceKind::zero) {
        const Matrix un = ops.grid.nodal(ops.basis, u);
        Matrix w(un.rows(), un.cols());
        for (Eigen::Index j = 0; j < un.cols(); ++j)
            for (Eigen::Index i = 0; i < un.rows(); ++i)
                w(i, j) = (un(i, j) > 0.0 ? cfg.kappa : 0.0) + cfg.source.derivative(un(i, j));
        J -= ops.grid.weighted_mass(ops.basis, w);
    }
    if (cfg.beta != 0.0) J -= cfg.beta * ops.Dy.transpose();
    return J;
}

namespace {

struct Fit {
    double c = 0.0, b = 0.0, liminf = 0.0;
};

// Smallest (c, b) for which F0(s) + c s^2 + b >= 0 on the samples, with c
// read off the outer band of the range.
Fit fit_constants(const SourceFunction& f, const std::vector<double>& s) {
    double smax = 0.0;
    for (double x : s) smax = std::max(smax, std::abs(x));
    Fit fit;
    fit.liminf = std::numeric_limits<double>::infinity();
    for (double x : s)
        if (std::abs(x) >= 0.5 * smax && x != 0.0) fit.liminf = std::min(fit.liminf, f.value(x) / x);
    fit.c = std::max(0.0, -0.5 * fit.liminf);

    auto deficit = [&](double x) { return -f.antiderivative(x) - fit.c * x * x; };
    std::size_t arg = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double d = deficit(s[i]);
        if (d > worst) worst = d, arg = i;
    }
    // Golden-section refinement between the neighbours of the sampled maximum.
    double a = s[arg > 0 ? arg - 1 : arg], bb = s[arg + 1 < s.size() ? arg + 1 : arg];
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100 && bb - a > 1e-14 * (1.0 + std::abs(a)); ++it) {
        const double x1 = bb - phi * (bb - a), x2 = a + phi * (bb - a);
        if (deficit(x1) > deficit(x2)) bb = x2; else a = x1;
    }
    worst = std::max(worst, deficit(0.5 * (a + bb)));
    fit.b = std::max(0.0, worst);
    fit.b += 1e-9 * (1.0 + fit.b);
    return fit;
}

}  // namespace

AssumptionFCertificate validate_assumption_f(const PlateConfig& cfg, double lo, double hi, int samples) {
    AssumptionFCertificate cert;
    cert.range_lo = lo;
    cert.range_hi = hi;
    if (!(hi > lo) || samples < 3) {
        cert.detail = "empty sample range";
        return cert;
    }
    const SourceFunction& f = cfg.source;
    if (f.kind() == SourceKind::zero) {
        cert.accepted = true;
        cert.detail = "f0 = 0: (c, b) = (0, 0)";
        return cert;
    }
    std::vector<double> all(samples), inner;
    for (int i = 0; i < samples; ++i) {
        all[i] = lo + (hi - lo) * i / (samples - 1.0);
        if (2.0 * all[i] >= lo && 2.0 * all[i] <= hi) inner.push_back(all[i]);
    }
    if (inner.size() < 3) inner = all;

    const Fit trial = fit_constants(f, inner);
    double worst = 0.0;
    for (double x : all) {
        const double slack = f.antiderivative(x) + trial.c * x * x + trial.b;
        if (slack < worst) worst = slack, cert.witness = x;
    }
    const Fit full = fit_constants(f, all);
    cert.c = full.c;
    cert.b = full.b;
    cert.liminf_ratio = full.liminf;
    std::ostringstream os;
    if (worst < 0.0) {
        os << "constants fitted on the inner half (c=" << trial.c << ", b=" << trial.b
           << ") fail at s=" << cert.witness << " by " << -worst << "; the required constants keep growing";
        cert.detail = os.str();
        return cert;
    }
    cert.accepted = true;
    os << "int_0^s f0 >= -" << cert.c << " s^2 - " << cert.b << " on [" << lo << ", " << hi << "]";
    cert.detail = os.str();
    return cert;
}

Vector stationary_residual(const Vector& u, const DiscreteOperators& ops, const PlateConfig& cfg) {
    return ops.K * u - apply_F(u, ops, cfg);
}

StationaryResult stationary_solve(const PlateConfig& cfg, const DiscreteOperators& ops, const Vector& initial_guess,
                                  const StationaryOptions& opts) {
    StationaryResult res;
    res.u = initial_guess;
    Vector r = stationary_residual(res.u, ops, cfg);
    res.residual = r.norm();
    for (int it = 0; it < opts.max_iter && res.residual > opts.tol; ++it) {
        const Matrix J = ops.K - F_jacobian(res.u, ops, cfg);
        const Vector step = J.partialPivLu().solve(-r);
        if (!step.allFinite()) break;
        // Armijo backtracking on |R|^2 / 2.
        double t = 1.0;
        Vector trial, rt;
        for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
            trial = res.u + t * step;
            rt = stationary_residual(trial, ops, cfg);
            if (rt.squaredNorm() <= (1.0 - 1e-4 * t) * r.squaredNorm()) break;
        }
        res.u = trial;
        r = rt;
        res.residual = r.norm();
        res.iterations = it + 1;
    }
    res.converged = res.residual <= opts.tol;
    return res;
}

}  // namespace plate
