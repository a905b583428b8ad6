#include <doctest.h>

#include "plate/discretization.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace plate;

namespace {

DomainSpec dom(double l, double sigma = 0.3) {
    DomainSpec d;
    d.l = l;
    d.sigma = sigma;
    return d;
}

double min_gen_eig(const Matrix& K, const Matrix& M) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(K, M);
    return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("domain invariants") {
    CHECK(dom(1.0).violations().empty());
    CHECK_FALSE(dom(0.0).violations().empty());
    CHECK_FALSE(dom(1.0, 0.7).violations().empty());
    CHECK_FALSE(dom(1.0, 0.0).violations().empty());
    CHECK_THROWS_AS(dom(-1.0).validate(), ConfigError);
}

TEST_CASE("basis functions vanish on the short edges") {
    const Basis b = build_basis(2, 1, dom(1.0));
    CHECK(b.size() == 2);
    for (int i = 0; i < b.size(); ++i) {
        CHECK(std::abs(b.evaluate(i, 0.0, 0.3).phi) < 1e-15);
        CHECK(std::abs(b.evaluate(i, kPi, -0.7).phi) < 1e-15);
    }
    const auto [m, k] = b.mode(1);
    CHECK(m == 2);
    CHECK(k == 0);
}

TEST_CASE("legendre recursion against closed forms") {
    const double xi = 0.37;
    const LegendreTable t = legendre(3, xi);
    CHECK(t.p[2] == doctest::Approx(0.5 * (3 * xi * xi - 1)).epsilon(1e-15));
    CHECK(t.p[3] == doctest::Approx(0.5 * (5 * xi * xi * xi - 3 * xi)).epsilon(1e-15));
    CHECK(t.dp[3] == doctest::Approx(0.5 * (15 * xi * xi - 3)).epsilon(1e-15));
    CHECK(t.d2p[3] == doctest::Approx(15 * xi).epsilon(1e-15));
}

TEST_CASE("quadrature integrates the reference integrals") {
    for (double l : {1.0, 0.5}) {
        const Basis b = build_basis(3, 4, dom(l));
        const QuadGrid g = quadrature_grid(b, dom(l));
        CHECK(std::abs(g.weight_sum() - 2.0 * kPi * l) < 1e-12);
        Matrix s2(g.nx(), g.ny()), p1(g.nx(), g.ny());
        for (int i = 0; i < g.nx(); ++i)
            for (int j = 0; j < g.ny(); ++j) {
                const double sx = std::sin(g.x[i]), yl = g.y[j] / l;
                s2(i, j) = sx * sx;
                p1(i, j) = sx * sx * yl * yl;
            }
        CHECK(std::abs(g.integrate(s2) - kPi * l) < 1e-12);
        CHECK(std::abs(g.integrate(p1) - (kPi / 2) * (2 * l / 3)) < 1e-12);
    }
}

TEST_CASE("mass matrix is diagonal and positive definite") {
    const DiscreteOperators ops = assemble_operators(3, 4, dom(0.5));
    CHECK(ops.M.rows() == 12);
    const Matrix off = ops.M - Matrix(ops.M.diagonal().asDiagonal());
    CHECK(off.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(ops.M.determinant() > 0.0);
    for (int m = 1; m <= 3; ++m)
        for (int k = 0; k < 4; ++k)
            CHECK(std::abs(ops.M(ops.basis.index(m, k), ops.basis.index(m, k)) - (kPi / 2) * (2 * 0.5 / (2 * k + 1))) <
                  1e-12);
}

TEST_CASE("stiffness of sin x and symmetry") {
    const DiscreteOperators one = assemble_operators(1, 1, dom(1.0));
    CHECK(std::abs(one.K(0, 0) - kPi) < 1e-12);
    CHECK(std::abs(one.M(0, 0) - kPi) < 1e-12);
    CHECK(std::abs(one.Gx(0, 0) - kPi) < 1e-12);
    CHECK(std::abs(one.embedding() - 1.0) < 1e-10);

    const DiscreteOperators ops = assemble_operators(4, 4, dom(1.0, 0.3));
    CHECK(asymmetry(ops.K) < 1e-12);
    CHECK(asymmetry(ops.M) < 1e-12);
    CHECK(min_gen_eig(ops.K, ops.M) > 0.0);
    CHECK(std::abs(ops.lambda_min - min_gen_eig(ops.K, ops.M)) < 1e-8 * ops.lambda_min);
}

TEST_CASE("derivative grams") {
    const DiscreteOperators ops = assemble_operators(3, 3, dom(1.0));
    // u constant in y pairs to zero against Dy
    Vector u = Vector::Zero(ops.size());
    u[ops.basis.index(1, 0)] = 1.0;
    u[ops.basis.index(3, 0)] = -0.4;
    CHECK((ops.Dy.transpose() * u).cwiseAbs().maxCoeff() < 1e-14);
    // (u_y, v) + (u, v_y) equals the boundary term int u v |_{y=-l}^{l} dx
    const Basis& b = ops.basis;
    for (int i = 0; i < ops.size(); ++i)
        for (int j = 0; j < ops.size(); ++j) {
            const auto [mi, ki] = b.mode(i);
            const auto [mj, kj] = b.mode(j);
            const double sx = mi == mj ? kPi / 2 : 0.0;
            const double boundary = sx * (1.0 - ((ki + kj) % 2 ? -1.0 : 1.0));   // P_k(1) = 1, P_k(-1) = (-1)^k
            CHECK(std::abs(ops.Dy(i, j) + ops.Dy(j, i) - boundary) < 1e-12);
        }
}

TEST_CASE("embedding constant is nondecreasing with the basis") {
    double prev = 0.0;
    for (int ny = 1; ny <= 3; ++ny) {
        const DiscreteOperators ops = assemble_operators(3, ny, dom(1.0));
        CHECK(ops.embedding() >= prev - 1e-9);
        prev = ops.embedding();
    }
}

TEST_CASE("modal basis is M-orthonormal") {
    const DiscreteOperators ops = assemble_operators(4, 3, dom(1.0));
    const Matrix I = ops.modal_vecs.transpose() * ops.M * ops.modal_vecs;
    CHECK((I - Matrix::Identity(ops.size(), ops.size())).cwiseAbs().maxCoeff() < 1e-12);
    const Matrix D = ops.modal_vecs.transpose() * ops.K * ops.modal_vecs;
    CHECK((D - Matrix(ops.modal_eigs.asDiagonal())).cwiseAbs().maxCoeff() < 1e-9 * ops.modal_eigs.maxCoeff());
}
