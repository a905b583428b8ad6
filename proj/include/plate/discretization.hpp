#pragma once

#include "plate/common.hpp"

#include <array>
#include <utility>

namespace plate {

// Rectangle (0, pi) x (-l, l) with the Poisson ratio of the free edges.
struct DomainSpec {
    double l = 1.0;
    double sigma = 0.3;

    double area() const { return 2.0 * kPi * l; }
    std::vector<std::string> violations() const;
    void validate() const;
};

// Values and derivatives of one basis function at a point.
struct BasisValue {
    double phi = 0.0;
    double x = 0.0;
    double y = 0.0;
    double xx = 0.0;
    double yy = 0.0;
    double xy = 0.0;
};

// Legendre polynomials P_0..P_kmax and their first two derivatives at xi.
struct LegendreTable {
    std::vector<double> p, dp, d2p;
};
LegendreTable legendre(int kmax, double xi);

// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int count);

// Tensor basis phi_{m,k}(x, y) = sin(m x) P_k(y / l), m = 1..Mx, k = 0..Ny-1.
// Flat index i = (m - 1) * Ny + k, so a coefficient vector reshapes row-major
// into an Mx x Ny matrix.
struct Basis {
    int Mx = 1;
    int Ny = 1;
    DomainSpec dom;

    int size() const { return Mx * Ny; }
    int index(int m, int k) const { return (m - 1) * Ny + k; }
    std::pair<int, int> mode(int i) const { return {i / Ny + 1, i % Ny}; }
    BasisValue evaluate(int i, double x, double y) const;
};

Basis build_basis(int Mx, int Ny, const DomainSpec& dom);

// Tensor quadrature: composite trapezoid in x (endpoints included, exact for
// trigonometric products below degree 2 * intervals) and Gauss-Legendre in y.
// Basis tables are stored as 1-D factors; the 2-D value of any basis function
// or derivative at node (ix, iy) is a product of one x and one y entry.
struct QuadGrid {
    std::vector<double> x, wx;
    std::vector<double> y, wy;
    Matrix sin_x;   // nx x Mx, sin(m x)
    Matrix cos_x;   // nx x Mx, m cos(m x)
    Matrix leg;     // ny x Ny, P_k(y / l)
    Matrix dleg;    // ny x Ny, d/dy P_k(y / l)
    Matrix d2leg;   // ny x Ny, d2/dy2 P_k(y / l)

    int nx() const { return static_cast<int>(x.size()); }
    int ny() const { return static_cast<int>(y.size()); }
    double weight_sum() const;
    BasisValue basis_at(const Basis& basis, int i, int ix, int iy) const;

    // Nodal values (nx x ny) of the field with coefficients c.
    Matrix nodal(const Basis& basis, const Vector& c) const;
    Matrix nodal_dy(const Basis& basis, const Vector& c) const;
    // Galerkin load: entry i is the quadrature of values * phi_i.
    Vector project(const Basis& basis, const Matrix& values) const;
    // Quadrature of a nodal field over the domain.
    double integrate(const Matrix& values) const;
    // Entry (i, j) is the quadrature of w * phi_i * phi_j.
    Matrix weighted_mass(const Basis& basis, const Matrix& w) const;
};

QuadGrid quadrature_grid(const Basis& basis, const DomainSpec& dom, int oversample = 3);

Matrix assemble_mass(const Basis& basis, const QuadGrid& grid);
Matrix assemble_stiffness(const Basis& basis, const QuadGrid& grid, const DomainSpec& dom);
// Gx(i, j) = (d_x phi_i, d_x phi_j); Dy(i, j) = (d_y phi_i, phi_j).
std::pair<Matrix, Matrix> assemble_derivative_grams(const Basis& basis, const QuadGrid& grid);

struct EmbeddingConstant {
    double lambda = 0.0;     // sup |u|_0^2 / a(u, u)
    Vector eigenvector;      // maximizer, M-normalized
    int iterations = 0;
};

// Shifted inverse iteration on (K, M) for the smallest generalized eigenvalue.
EmbeddingConstant embedding_constant(const Matrix& K, const Matrix& M, double tol = 1e-10,
                                     int max_iter = 10000);

struct DiscreteOperators {
    Basis basis;
    QuadGrid grid;
    Matrix M, K, Gx, Dy;
    double lambda_min = 0.0;
    // Generalized eigenpairs K phi = mu M phi, ascending, M-orthonormal.
    Vector modal_eigs;
    Matrix modal_vecs;

    int size() const { return basis.size(); }
    double embedding() const { return 1.0 / lambda_min; }
    // Modal coordinates w = Phi^T M u.
    Vector to_modal(const Vector& u) const { return modal_vecs.transpose() * (M * u); }
    double l2_sq(const Vector& u) const { return u.dot(M * u); }
    double energy_sq(const Vector& u) const { return u.dot(K * u); }
    double h_norm_sq(const Vector& u, const Vector& v) const { return energy_sq(u) + l2_sq(v); }
};

DiscreteOperators assemble_operators(int Mx, int Ny, const DomainSpec& dom, int oversample = 3);

// Max-norm asymmetry |A - A^T|_max.
double asymmetry(const Matrix& A);

}  // namespace plate
