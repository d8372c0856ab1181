#include <gtest/gtest.h>

#include <cmath>

#include "bogolyubov/errors.hpp"
#include "bogolyubov/linear_flow.hpp"

using namespace bogolyubov;

namespace {

Matrix mat1(double v) {
    Matrix m(1, 1);
    m << v;
    return m;
}

TimeVaryingOperator benchmark_operator() {
    return TimeVaryingOperator(mat1(-1.0), {Harmonic{1.0, mat1(0.5), mat1(0.0)}});
}

}  // namespace

// =============================================================================
// Propagators
// =============================================================================

TEST(CauchyOperator, ConstantMatchesExponential) {
    Matrix a(2, 2);
    a << -1.0, 3.0, -0.5, -2.0;
    const TimeVaryingOperator op(a);
    EXPECT_LE((cauchy_operator(op, 2.3, 0.4, 1e-2) - mat_exp(a, 1.9)).norm(), 1e-9);
    EXPECT_LE((cauchy_operator(op, 1.0, 1.0, 1e-2) - Matrix::Identity(2, 2)).norm(), 0.0);
}

TEST(CauchyOperator, ScalarClosedForm) {
    // G(t, tau) = exp(-(t - tau) + 0.5 (sin t - sin tau)).
    const auto op = benchmark_operator();
    for (auto [t, tau] : {std::pair{3.0, 0.0}, std::pair{-1.0, -6.5}, std::pair{10.0, 2.2}}) {
        const double ref = std::exp(-(t - tau) + 0.5 * (std::sin(t) - std::sin(tau)));
        EXPECT_NEAR(cauchy_operator(op, t, tau, 1e-2)(0, 0), ref, 1e-8 * ref);
    }
    // Fourth order: halving the step divides the error by about 16.
    const double ref = std::exp(-10.0 + 0.5 * std::sin(10.0));
    const double coarse = std::abs(cauchy_operator(op, 10.0, 0.0, 0.04)(0, 0) - ref);
    const double fine = std::abs(cauchy_operator(op, 10.0, 0.0, 0.02)(0, 0) - ref);
    EXPECT_GT(coarse / fine, 12.0);
    EXPECT_LT(coarse / fine, 20.0);
    // Rescaled: A(t / eps) gives exp(-(t - tau) + 0.5 eps (sin(t/eps) - sin(tau/eps))).
    const double eps = 0.1;
    const double ref_eps = std::exp(-2.0 + 0.5 * eps * (std::sin(2.5 / eps) - std::sin(0.5 / eps)));
    EXPECT_NEAR(cauchy_operator(op.rescaled(eps), 2.5, 0.5, default_flow_step(eps))(0, 0), ref_eps, 1e-8);
}

TEST(CauchyOperator, CocycleProperty) {
    Matrix base(2, 2), c(2, 2);
    base << -1.0, 0.2, 0.0, -1.5;
    c << 0.2, 0.0, 0.3, 0.1;
    const TimeVaryingOperator op(base, {Harmonic{1.0, c, c.transpose()}});
    const Matrix direct = cauchy_operator(op, 4.0, 0.0, 1e-2);
    const Matrix composed = cauchy_operator(op, 4.0, 1.5, 1e-2) * cauchy_operator(op, 1.5, 0.0, 1e-2);
    EXPECT_LE((direct - composed).norm(), 1e-10);
}

TEST(CauchyOperator, RejectsCoarseSteps) {
    EXPECT_THROW(check_flow_step(benchmark_operator().rescaled(0.01), 1.0), StepSizeError);
    EXPECT_NO_THROW(check_flow_step(benchmark_operator().rescaled(0.01), default_flow_step(0.01)));
    EXPECT_DOUBLE_EQ(default_flow_step(1.0), 1e-2);
    EXPECT_DOUBLE_EQ(default_flow_step(0.02), 2e-3);
}

// =============================================================================
// Exponential stability fit
// =============================================================================

TEST(Dichotomy, NormalMatrixHasUnitConstant) {
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << -1.0, -2.0;
    const TimeVaryingOperator op(a);
    const auto cert = fit_dichotomy(op, make_sampling_plan(op, 20.0, 8, 1e-2));
    EXPECT_NEAR(cert.N, 1.0, 1e-9);
    EXPECT_NEAR(cert.nu, 1.0, 1e-6);
    EXPECT_LE(cert.residual, 1e-12);
}

TEST(Dichotomy, EnvelopeDominatesNonNormalFlow) {
    Matrix a(2, 2);
    a << -1.0, 5.0, 0.0, -1.2;
    const TimeVaryingOperator op(a);
    const auto cert = fit_dichotomy(op, make_sampling_plan(op, 20.0, 4, 1e-2));
    EXPECT_GT(cert.N, 1.0);
    EXPECT_GT(cert.nu, 0.0);
    EXPECT_LE(cert.nu, 1.0 + 1e-9);
    for (int k = 0; k <= 2000; ++k) {
        const double d = k * 1e-2;
        EXPECT_LE(operator_norm(mat_exp(a, d)), cert.N * std::exp(-cert.nu * d) * (1.0 + 1e-9));
    }
}

TEST(Dichotomy, ScalarBenchmarkEnvelope) {
    // log G <= -(t - tau) + 1, so N <= e at nu = 1.
    const auto op = benchmark_operator();
    const auto cert = fit_dichotomy(op, make_sampling_plan(op, 20.0, 64, 1e-2));
    EXPECT_NEAR(cert.nu, 1.0, 1e-3);
    EXPECT_LE(cert.N, std::exp(1.0) * (1.0 + 1e-6));
    EXPECT_GT(cert.N, 2.0);
    for (double eps : {0.2, 0.05}) {
        const auto a_eps = op.rescaled(eps);
        const auto c = fit_dichotomy(a_eps, make_sampling_plan(a_eps, 20.0, 64, default_flow_step(eps)));
        EXPECT_GE(c.nu, 0.9);
        EXPECT_LE(c.N, std::exp(eps) * (1.0 + 1e-6));
    }
}

TEST(Dichotomy, UnstableOperatorIsRejected) {
    const TimeVaryingOperator op(mat1(0.2));
    EXPECT_THROW(fit_dichotomy(op, make_sampling_plan(op, 10.0, 4, 1e-2)), NotUniformlyStable);
}

TEST(Dichotomy, EnvelopeFitOnSyntheticData) {
    // y = log 3 - 2 Delta exactly: the fit recovers N = 3, nu = 2.
    std::vector<double> y;
    for (int k = 0; k <= 1000; ++k) y.push_back(std::log(3.0) - 2.0 * k * 0.01);
    const auto cert = fit_dichotomy_envelope(y, 0.01);
    EXPECT_NEAR(cert.N, 3.0, 1e-6);
    EXPECT_NEAR(cert.nu, 2.0, 1e-6);
    EXPECT_THROW(fit_dichotomy_envelope(std::vector<double>(100, 0.5), 0.01), NotUniformlyStable);
}

// =============================================================================
// Rescaled gap
// =============================================================================

TEST(RescaledGap, RowsDecreaseWithEps) {
    const auto op = benchmark_operator();
    GapOptions opts;
    opts.n_base = 16;
    opts.t_max = 10.0;
    const auto table = rescaled_gap(op, mat1(-1.0), {0.05, 0.2, 0.1}, 0.5, 1.0, opts);
    ASSERT_EQ(table.rows.size(), 3u);
    EXPECT_DOUBLE_EQ(table.gamma0, 0.5);
    EXPECT_DOUBLE_EQ(table.rows[0].eps, 0.2);
    EXPECT_DOUBLE_EQ(table.rows[2].eps, 0.05);
    EXPECT_GT(table.rows[0].N_eps, table.rows[1].N_eps);
    EXPECT_GT(table.rows[1].N_eps, table.rows[2].N_eps);
    for (const auto& r : table.rows) {
        EXPECT_GE(r.witness_t, r.witness_tau);
        // Derived envelope: |e^{-s}(e^{0.5 eps (sin - sin)} - 1)| e^{0.5 s} <= e^{0.5} (e^{eps} - 1).
        EXPECT_LE(r.N_eps, std::exp(0.5) * (std::exp(r.eps) - 1.0) * (1.0 + 1e-3));
    }
}

TEST(RescaledGap, RejectsGammaAboveRate) {
    EXPECT_THROW(rescaled_gap(benchmark_operator(), mat1(-1.0), {0.1}, 1.0, 1.0), InvalidArgument);
    EXPECT_THROW(rescaled_gap(benchmark_operator(), mat1(-1.0), {0.1}, 1.5, 1.0), InvalidArgument);
}

// =============================================================================
// Damped convolution
// =============================================================================

TEST(DampedConvolution, CosineMatchesClosedForm) {
    for (double eps : {1.0, 0.1, 0.01}) {
        for (double nu : {0.5, 1.0, 3.0}) {
            const auto r = damped_convolution_sup(TimeFactor::cosine(1.0), nu, eps);
            EXPECT_NEAR(r.sup, 1.0 / std::sqrt(nu * nu + 1.0 / (eps * eps)), 1e-6) << eps << " " << nu;
            EXPECT_LE(r.tail_bound, 1e-10);
        }
    }
}

TEST(DampedConvolution, SineAndFrequency) {
    const auto r = damped_convolution_sup(TimeFactor::sine(2.0), 1.0, 0.1);
    EXPECT_NEAR(r.sup, 1.0 / std::sqrt(1.0 + 400.0), 1e-6);
}
