#include "bogolyubov/linalg.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "bogolyubov/errors.hpp"

namespace bogolyubov {

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw InvalidArgument(std::string(what) + ": non-finite matrix entry");
    }
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) {
        throw InvalidArgument(std::string(what) + ": non-finite vector entry");
    }
}

double operator_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

Matrix mat_exp(const Matrix& a, double t) {
    require_finite(a, "mat_exp");
    if (!std::isfinite(t)) throw InvalidArgument("mat_exp: non-finite time");
    if (a.rows() != a.cols()) throw InvalidArgument("mat_exp: matrix is not square");
    if (t == 0.0) return Matrix::Identity(a.rows(), a.cols());
    Matrix scaled = a * t;
    return scaled.exp();
}

SpectralReport hurwitz_check(const Matrix& a) {
    require_finite(a, "hurwitz_check");
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw InvalidArgument("hurwitz_check: matrix is not square");
    }
    Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        std::ostringstream os;
        os << "hurwitz_check: eigensolver did not converge (d=" << a.rows()
           << ", norm=" << operator_norm(a) << ")";
        throw NumericError(os.str());
    }
    const double abscissa = solver.eigenvalues().real().maxCoeff();
    return {abscissa < 0.0, abscissa};
}

Matrix lyapunov_stationary_cov(const Matrix& a_bar, const Matrix& g_bar) {
    require_finite(a_bar, "lyapunov_stationary_cov");
    require_finite(g_bar, "lyapunov_stationary_cov");
    const Eigen::Index d = a_bar.rows();
    if (g_bar.rows() != d) throw InvalidArgument("lyapunov_stationary_cov: dimension mismatch");
    const auto spectrum = hurwitz_check(a_bar);
    if (!spectrum.is_hurwitz) {
        std::ostringstream os;
        os << "lyapunov_stationary_cov: averaged operator is not Hurwitz (spectral abscissa "
           << spectrum.spectral_abscissa << ")";
        throw PreconditionError(os.str());
    }
    // vec(A P + P A^T) = (I (x) A + A (x) I) vec(P), column-major vec.
    const Matrix id = Matrix::Identity(d, d);
    Matrix kron(d * d, d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            kron.block(i * d, j * d, d, d) = id(i, j) * a_bar + a_bar(i, j) * id;
        }
    }
    const Matrix q = g_bar * g_bar.transpose();
    const Vector rhs = -Eigen::Map<const Vector>(q.data(), d * d);
    const Vector sol = kron.fullPivLu().solve(rhs);
    Matrix p = Eigen::Map<const Matrix>(sol.data(), d, d);
    return 0.5 * (p + p.transpose());
}

double lyapunov_residual(const Matrix& a, const Matrix& p, const Matrix& g) {
    return (a * p + p * a.transpose() + g * g.transpose()).norm();
}

Matrix psd_factor(const Matrix& p) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (p + p.transpose()));
    Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace bogolyubov
