#include "plate/discretization.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace plate {

namespace {

std::string join_violations(const std::vector<std::string>& v) {
    std::ostringstream os;
    os << "invalid configuration:";
    for (const auto& s : v) os << "\n  - " << s;
    return os.str();
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

std::vector<std::string> DomainSpec::violations() const {
    std::vector<std::string> out;
    if (!(l > 0.0)) out.push_back("domain.l must be > 0");
    if (!(sigma > 0.0 && sigma < 0.5)) out.push_back("domain.sigma (Poisson ratio) must lie in (0, 1/2)");
    return out;
}

void DomainSpec::validate() const {
    if (auto v = violations(); !v.empty()) throw ConfigError(std::move(v));
}

LegendreTable legendre(int kmax, double xi) {
    LegendreTable t;
    t.p.assign(kmax + 1, 0.0);
    t.dp.assign(kmax + 1, 0.0);
    t.d2p.assign(kmax + 1, 0.0);
    t.p[0] = 1.0;
    if (kmax >= 1) {
        t.p[1] = xi;
        t.dp[1] = 1.0;
    }
    for (int k = 1; k < kmax; ++k) {
        t.p[k + 1] = ((2.0 * k + 1.0) * xi * t.p[k] - k * t.p[k - 1]) / (k + 1.0);
        t.dp[k + 1] = t.dp[k - 1] + (2.0 * k + 1.0) * t.p[k];
        t.d2p[k + 1] = t.d2p[k - 1] + (2.0 * k + 1.0) * t.dp[k];
    }
    return t;
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int count) {
    std::vector<double> nodes(count), weights(count);
    const int half = (count + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (count + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < count; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
            }
            dp = count * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        nodes[i] = -z;
        nodes[count - 1 - i] = z;
        weights[i] = weights[count - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {nodes, weights};
}

BasisValue Basis::evaluate(int i, double x, double y) const {
    const auto [m, k] = mode(i);
    const auto t = legendre(k, y / dom.l);
    const double s = std::sin(m * x), c = std::cos(m * x);
    const double L = t.p[k], Ly = t.dp[k] / dom.l, Lyy = t.d2p[k] / (dom.l * dom.l);
    BasisValue v;
    v.phi = s * L;
    v.x = m * c * L;
    v.y = s * Ly;
    v.xx = -m * m * s * L;
    v.yy = s * Lyy;
    v.xy = m * c * Ly;
    return v;
}

Basis build_basis(int Mx, int Ny, const DomainSpec& dom) {
    std::vector<std::string> errors;
    if (Mx < 1) errors.push_back("basis.mx must be >= 1");
    if (Ny < 1) errors.push_back("basis.ny must be >= 1");
    auto dv = dom.violations();
    errors.insert(errors.end(), dv.begin(), dv.end());
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return Basis{Mx, Ny, dom};
}

double QuadGrid::weight_sum() const {
    double sx = 0.0, sy = 0.0;
    for (double w : wx) sx += w;
    for (double w : wy) sy += w;
    return sx * sy;
}

BasisValue QuadGrid::basis_at(const Basis& basis, int i, int ix, int iy) const {
    const auto [m, k] = basis.mode(i);
    const double s = sin_x(ix, m - 1), c = cos_x(ix, m - 1);
    const double L = leg(iy, k), Ly = dleg(iy, k), Lyy = d2leg(iy, k);
    BasisValue v;
    v.phi = s * L;
    v.x = c * L;
    v.y = s * Ly;
    v.xx = -double(m * m) * s * L;
    v.yy = s * Lyy;
    v.xy = c * Ly;
    return v;
}

Matrix QuadGrid::nodal(const Basis& basis, const Vector& c) const {
    Eigen::Map<const RowMajor> C(c.data(), basis.Mx, basis.Ny);
    return sin_x * C * leg.transpose();
}

Matrix QuadGrid::nodal_dy(const Basis& basis, const Vector& c) const {
    Eigen::Map<const RowMajor> C(c.data(), basis.Mx, basis.Ny);
    return sin_x * C * dleg.transpose();
}

Vector QuadGrid::project(const Basis& basis, const Matrix& values) const {
    Eigen::Map<const Vector> Wx(wx.data(), nx());
    Eigen::Map<const Vector> Wy(wy.data(), ny());
    const Matrix weighted = Wx.asDiagonal() * values * Wy.asDiagonal();
    RowMajor L = sin_x.transpose() * weighted * leg;
    Vector out(basis.size());
    Eigen::Map<RowMajor>(out.data(), basis.Mx, basis.Ny) = L;
    return out;
}

double QuadGrid::integrate(const Matrix& values) const {
    Eigen::Map<const Vector> Wx(wx.data(), nx());
    Eigen::Map<const Vector> Wy(wy.data(), ny());
    return Wx.dot(values * Wy);
}

Matrix QuadGrid::weighted_mass(const Basis& basis, const Matrix& w) const {
    const int n = basis.size();
    Matrix out = Matrix::Zero(n, n);
    // A(m, m', iy) = sum_ix wx w sin sin, then contract over y.
    for (int m = 0; m < basis.Mx; ++m) {
        for (int mp = m; mp < basis.Mx; ++mp) {
            Vector colw = Vector::Zero(ny());
            for (int ix = 0; ix < nx(); ++ix) {
                const double f = wx[ix] * sin_x(ix, m) * sin_x(ix, mp);
                if (f != 0.0) colw += f * w.row(ix).transpose();
            }
            for (int iy = 0; iy < ny(); ++iy) colw[iy] *= wy[iy];
            const Matrix block = leg.transpose() * colw.asDiagonal() * leg;
            out.block(m * basis.Ny, mp * basis.Ny, basis.Ny, basis.Ny) = block;
            if (mp != m) out.block(mp * basis.Ny, m * basis.Ny, basis.Ny, basis.Ny) = block.transpose();
        }
    }
    return out;
}

QuadGrid quadrature_grid(const Basis& basis, const DomainSpec& dom, int oversample) {
    if (oversample < 2) throw ConfigError({"basis.oversample must be >= 2"});
    QuadGrid g;
    const int intervals = std::max(4, oversample + 1) * basis.Mx;
    const double h = kPi / intervals;
    for (int i = 0; i <= intervals; ++i) {
        g.x.push_back(i * h);
        g.wx.push_back((i == 0 || i == intervals) ? 0.5 * h : h);
    }
    const int ny = std::max(2 * (basis.Ny + 2), oversample * basis.Ny);
    auto [xi, w] = gauss_legendre(ny);
    for (int j = 0; j < ny; ++j) {
        g.y.push_back(dom.l * xi[j]);
        g.wy.push_back(dom.l * w[j]);
    }
    g.sin_x.resize(g.nx(), basis.Mx);
    g.cos_x.resize(g.nx(), basis.Mx);
    for (int i = 0; i < g.nx(); ++i) {
        for (int m = 1; m <= basis.Mx; ++m) {
            // sin(m pi) is not exactly zero in floating point; pin the endpoints.
            const bool edge = (i == 0 || i == intervals);
            g.sin_x(i, m - 1) = edge ? 0.0 : std::sin(m * g.x[i]);
            g.cos_x(i, m - 1) = m * std::cos(m * g.x[i]);
        }
    }
    g.leg.resize(ny, basis.Ny);
    g.dleg.resize(ny, basis.Ny);
    g.d2leg.resize(ny, basis.Ny);
    for (int j = 0; j < ny; ++j) {
        const auto t = legendre(basis.Ny - 1, xi[j]);
        for (int k = 0; k < basis.Ny; ++k) {
            g.leg(j, k) = t.p[k];
            g.dleg(j, k) = t.dp[k] / dom.l;
            g.d2leg(j, k) = t.d2p[k] / (dom.l * dom.l);
        }
    }
    return g;
}

namespace {

// 1-D Gram of two factor tables under the given weights.
Matrix gram(const Matrix& A, const Matrix& B, const std::vector<double>& w) {
    Eigen::Map<const Vector> W(w.data(), static_cast<Eigen::Index>(w.size()));
    return A.transpose() * W.asDiagonal() * B;
}

Matrix symmetrized(const Matrix& A) { return 0.5 * (A + A.transpose()); }

}  // namespace

Matrix assemble_mass(const Basis& basis, const QuadGrid& grid) {
    (void)basis;
    const Matrix Sx = gram(grid.sin_x, grid.sin_x, grid.wx);
    const Matrix Ly = gram(grid.leg, grid.leg, grid.wy);
    return symmetrized(Eigen::kroneckerProduct(Sx, Ly).eval());
}

Matrix assemble_stiffness(const Basis& basis, const QuadGrid& grid, const DomainSpec& dom) {
    const int n = basis.size();
    const Matrix Sss = gram(grid.sin_x, grid.sin_x, grid.wx);
    const Matrix Scc = gram(grid.cos_x, grid.cos_x, grid.wx);  // includes m m'
    const Matrix A = gram(grid.leg, grid.leg, grid.wy);         // P P
    const Matrix B = gram(grid.leg, grid.d2leg, grid.wy);       // P_k P''_k'
    const Matrix C = gram(grid.d2leg, grid.d2leg, grid.wy);     // P'' P''
    const Matrix D = gram(grid.dleg, grid.dleg, grid.wy);       // P' P'
    const double one_minus_sigma = 1.0 - dom.sigma;

    Matrix K(n, n);
    for (int i = 0; i < n; ++i) {
        const auto [m, k] = basis.mode(i);
        const double m2 = double(m) * m;
        for (int j = 0; j < n; ++j) {
            const auto [mp, kp] = basis.mode(j);
            const double mp2 = double(mp) * mp;
            const double ss = Sss(m - 1, mp - 1);
            const double cc = Scc(m - 1, mp - 1);
            // Laplacian product: (-m^2 P + P'')(-m'^2 P' + P''')
            const double lap = ss * (m2 * mp2 * A(k, kp) - m2 * B(k, kp) - mp2 * B(kp, k) + C(k, kp));
            // phi_xx psi_yy + phi_yy psi_xx - 2 phi_xy psi_xy
            const double twist = ss * (-m2 * B(k, kp) - mp2 * B(kp, k)) - 2.0 * cc * D(k, kp);
            K(i, j) = lap - one_minus_sigma * twist;
        }
    }
    K = symmetrized(K);
    if (Eigen::LLT<Matrix>(K).info() != Eigen::Success)
        throw NumericalError("stiffness matrix is not positive definite; check domain.sigma and basis sizes");
    return K;
}

std::pair<Matrix, Matrix> assemble_derivative_grams(const Basis& basis, const QuadGrid& grid) {
    const Matrix Scc = gram(grid.cos_x, grid.cos_x, grid.wx);
    const Matrix Sss = gram(grid.sin_x, grid.sin_x, grid.wx);
    const Matrix A = gram(grid.leg, grid.leg, grid.wy);
    const Matrix Ady = gram(grid.dleg, grid.leg, grid.wy);  // P'_k P_k'
    (void)basis;
    Matrix Gx = symmetrized(Eigen::kroneckerProduct(Scc, A).eval());
    Matrix Dy = Eigen::kroneckerProduct(Sss, Ady).eval();
    return {Gx, Dy};
}

EmbeddingConstant embedding_constant(const Matrix& K, const Matrix& M, double tol, int max_iter) {
    const Eigen::LLT<Matrix> chol(K);
    if (chol.info() != Eigen::Success) throw NumericalError("embedding_constant: K is not positive definite");
    if (Eigen::LLT<Matrix>(M).info() != Eigen::Success)
        throw NumericalError("embedding_constant: M is not positive definite");

    const Eigen::Index n = K.rows();
    // Deterministic start with weight on every mode.
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 / (1.0 + i);
    x /= std::sqrt(x.dot(M * x));
    double mu = x.dot(K * x);
    for (int it = 1; it <= max_iter; ++it) {
        Vector y = chol.solve(M * x);
        y /= std::sqrt(y.dot(M * y));
        const double mu_new = y.dot(K * y);
        const double resid = (K * y - mu_new * (M * y)).norm() / std::max(1.0, (K * y).norm());
        x = y;
        const double change = std::abs(mu_new - mu);
        mu = mu_new;
        if (change <= tol * mu && resid <= std::sqrt(tol)) return {1.0 / mu, x, it};
    }
    throw NumericalError("embedding_constant: inverse iteration did not converge");
}

DiscreteOperators assemble_operators(int Mx, int Ny, const DomainSpec& dom, int oversample) {
    DiscreteOperators ops;
    ops.basis = build_basis(Mx, Ny, dom);
    ops.grid = quadrature_grid(ops.basis, dom, oversample);
    ops.M = assemble_mass(ops.basis, ops.grid);
    ops.K = assemble_stiffness(ops.basis, ops.grid, dom);
    std::tie(ops.Gx, ops.Dy) = assemble_derivative_grams(ops.basis, ops.grid);
    ops.lambda_min = 1.0 / embedding_constant(ops.K, ops.M).lambda;

    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(ops.K, ops.M);
    if (ges.info() != Eigen::Success) throw NumericalError("generalized eigensolve of (K, M) failed");
    ops.modal_eigs = ges.eigenvalues();
    ops.modal_vecs = ges.eigenvectors();
    return ops;
}

double asymmetry(const Matrix& A) { return (A - A.transpose()).cwiseAbs().maxCoeff(); }

}  // namespace plate
