// Dense linear algebra for small state spaces (d <= 16).
#pragma once

#include <Eigen/Dense>

namespace bogolyubov {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr int kMaxDimension = 16;

/// Throws InvalidArgument when any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);

/// Largest singular value.
double operator_norm(const Matrix& m);

/// exp(A t) by scaling and squaring with a Pade approximant.
Matrix mat_exp(const Matrix& a, double t);

struct SpectralReport {
    bool is_hurwitz = false;
    double spectral_abscissa = 0.0;  // max Re(lambda)
};

SpectralReport hurwitz_check(const Matrix& a);

/// Stationary covariance P of dX = A X dt + g dW, i.e. the solution of
/// A P + P A^T + g g^T = 0. `g` is d x m (a column vector for scalar noise).
/// Requires A Hurwitz; solved through the Kronecker form of the equation.
Matrix lyapunov_stationary_cov(const Matrix& a_bar, const Matrix& g_bar);

/// Frobenius norm of A P + P A^T + g g^T.
double lyapunov_residual(const Matrix& a, const Matrix& p, const Matrix& g);

/// Factor S with S S^T = P for a PSD matrix P
/// (eigenvalues clipped at zero).
Matrix psd_factor(const Matrix& p);

}  // namespace bogolyubov
