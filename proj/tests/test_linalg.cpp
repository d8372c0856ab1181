#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bogolyubov/errors.hpp"
#include "bogolyubov/linalg.hpp"

using namespace bogolyubov;

namespace {

// Taylor series in long double with scaling and squaring.
Matrix taylor_exp(const Matrix& a, double t) {
    using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    LMat m = (a * t).cast<long double>();
    int squarings = 0;
    long double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.5L) {
        m /= 2.0L;
        norm /= 2.0L;
        ++squarings;
    }
    LMat sum = LMat::Identity(a.rows(), a.cols());
    LMat term = sum;
    for (int k = 1; k < 40; ++k) {
        term = term * m / static_cast<long double>(k);
        sum += term;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum.cast<double>();
}

Matrix random_matrix(int n, std::mt19937_64& gen, double scale) {
    std::normal_distribution<double> normal(0.0, scale);
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = normal(gen);
    return m;
}

}  // namespace

// =============================================================================
// Matrix exponential
// =============================================================================

TEST(MatExp, MatchesTaylorOracle) {
    std::mt19937_64 gen(42);
    for (int n : {1, 2, 3, 5, 8}) {
        for (double scale : {0.1, 1.0, 3.0}) {
            const Matrix a = random_matrix(n, gen, scale);
            const Matrix e = mat_exp(a, 0.7);
            const Matrix ref = taylor_exp(a, 0.7);
            EXPECT_LE((e - ref).norm(), 1e-11 * std::max(1.0, ref.norm())) << "n=" << n << " scale=" << scale;
        }
    }
}

TEST(MatExp, ScalarAndDiagonal) {
    Matrix a(1, 1);
    a << -1.5;
    EXPECT_NEAR(mat_exp(a, 2.0)(0, 0), std::exp(-3.0), 1e-15);
    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << -1.0, 0.5, 2.0;
    const Matrix e = mat_exp(d, 1.0);
    EXPECT_NEAR(e(0, 0), std::exp(-1.0), 1e-14);
    EXPECT_NEAR(e(1, 1), std::exp(0.5), 1e-14);
    EXPECT_NEAR(e(2, 2), std::exp(2.0), 1e-13);
    EXPECT_NEAR(e(0, 1), 0.0, 1e-15);
}

TEST(MatExp, GroupProperty) {
    std::mt19937_64 gen(5);
    const Matrix a = random_matrix(4, gen, 1.0);
    const Matrix lhs = mat_exp(a, 0.3) * mat_exp(a, 0.9);
    EXPECT_LE((lhs - mat_exp(a, 1.2)).norm(), 1e-12 * lhs.norm());
    EXPECT_LE((mat_exp(a, 0.0) - Matrix::Identity(4, 4)).norm(), 1e-15);
}

TEST(MatExp, RejectsNonFinite) {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 1) = NAN;
    EXPECT_THROW(mat_exp(a, 1.0), InvalidArgument);
    EXPECT_THROW(mat_exp(Matrix::Zero(2, 3), 1.0), InvalidArgument);
}

// =============================================================================
// Norms and spectra
// =============================================================================

TEST(OperatorNorm, MatchesPowerIteration) {
    std::mt19937_64 gen(9);
    for (int n : {1, 2, 4, 6}) {
        const Matrix a = random_matrix(n, gen, 1.0);
        const Matrix ata = a.transpose() * a;
        Vector v = Vector::Ones(n);
        for (int it = 0; it < 2000; ++it) v = (ata * v).normalized();
        EXPECT_NEAR(operator_norm(a), std::sqrt(v.dot(ata * v)), 1e-9);
    }
}

TEST(Hurwitz, Classification) {
    Matrix a(2, 2);
    a << -1.0, 0.2, 0.0, -1.5;
    auto r = hurwitz_check(a);
    EXPECT_TRUE(r.is_hurwitz);
    EXPECT_NEAR(r.spectral_abscissa, -1.0, 1e-12);

    a << 0.0, 1.0, -1.0, 0.0;  // rotation, purely imaginary spectrum
    r = hurwitz_check(a);
    EXPECT_FALSE(r.is_hurwitz);
    EXPECT_NEAR(r.spectral_abscissa, 0.0, 1e-12);

    a << -1.0, 5.0, 0.0, 0.1;
    EXPECT_FALSE(hurwitz_check(a).is_hurwitz);
}

// =============================================================================
// Lyapunov equation
// =============================================================================

TEST(Lyapunov, ScalarClosedForm) {
    Matrix a(1, 1), g(1, 1);
    a << -1.0;
    g << 1.0;
    EXPECT_NEAR(lyapunov_stationary_cov(a, g)(0, 0), 0.5, 1e-14);
    a << -2.5;
    g << 0.3;
    EXPECT_NEAR(lyapunov_stationary_cov(a, g)(0, 0), 0.09 / 5.0, 1e-15);
}

TEST(Lyapunov, ResidualAndSymmetry) {
    std::mt19937_64 gen(3);
    for (int n : {2, 3, 5}) {
        Matrix a = random_matrix(n, gen, 0.5) - 2.0 * Matrix::Identity(n, n);
        ASSERT_TRUE(hurwitz_check(a).is_hurwitz);
        const Matrix g = random_matrix(n, gen, 1.0).leftCols(1);
        const Matrix p = lyapunov_stationary_cov(a, g);
        EXPECT_LE(lyapunov_residual(a, p, g), 1e-12);
        EXPECT_LE((p - p.transpose()).norm(), 1e-13);
        Eigen::SelfAdjointEigenSolver<Matrix> es(p);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
        // Oracle: integral of e^{As} g g^T e^{A^T s} by the trapezoid rule.
        Matrix q = Matrix::Zero(n, n);
        const double h = 1e-3;
        for (int k = 0; k <= 30000; ++k) {
            const Matrix e = mat_exp(a, k * h);
            const double w = (k == 0 || k == 30000) ? 0.5 : 1.0;
            q += w * h * e * g * g.transpose() * e.transpose();
        }
        // Euler-Maclaurin end correction; the integrand is negligible at s = 30.
        const Matrix gg = g * g.transpose();
        q += h * h / 12.0 * (a * gg + gg * a.transpose());
        EXPECT_LE((p - q).norm(), 1e-9 * p.norm());
    }
}

TEST(Lyapunov, RejectsNonHurwitz) {
    Matrix a(1, 1), g(1, 1);
    a << 0.1;
    g << 1.0;
    EXPECT_THROW(lyapunov_stationary_cov(a, g), PreconditionError);
}

TEST(PsdFactor, ReconstructsAndHandlesSingular) {
    Matrix p(3, 3);
    p << 2.0, 0.5, 0.0, 0.5, 1.0, 0.2, 0.0, 0.2, 0.7;
    const Matrix s = psd_factor(p);
    EXPECT_LE((s * s.transpose() - p).norm(), 1e-13);
    Matrix rank1 = Vector::Ones(3) * Vector::Ones(3).transpose();
    const Matrix s1 = psd_factor(rank1);
    EXPECT_LE((s1 * s1.transpose() - rank1).norm(), 1e-12);
}

TEST(RequireFinite, Throws) {
    Vector v = Vector::Zero(2);
    EXPECT_NO_THROW(require_finite(v, "v"));
    v(1) = INFINITY;
    EXPECT_THROW(require_finite(v, "v"), InvalidArgument);
}
