#include <gtest/gtest.h>

#include <cmath>

#include "bogolyubov/errors.hpp"
#include "bogolyubov/rng.hpp"
#include "bogolyubov/sde.hpp"

using namespace bogolyubov;

namespace {

Matrix mat1(double v) {
    Matrix m(1, 1);
    m << v;
    return m;
}

Vector vec1(double v) {
    Vector x(1);
    x << v;
    return x;
}

StateField constant_field(double v, double M) {
    return StateField(1, {FieldTerm{TimeFactor::constant(), TermKind::constant, vec1(v), {}, {}}}, {M, 0.0});
}

CoefficientSystem scalar_benchmark() {
    CoefficientSystem s;
    s.a = TimeVaryingOperator(mat1(-1.0), {Harmonic{1.0, mat1(0.5), mat1(0.0)}});
    s.drift = StateField(1, {FieldTerm{TimeFactor::cosine(std::sqrt(2.0)), TermKind::constant, vec1(1.0), {}, {}}},
                         {1.0, 0.0});
    s.diffusion = constant_field(1.0, 1.0);
    return s;
}

CoefficientSystem ou_system(double a) {
    CoefficientSystem s;
    s.a = TimeVaryingOperator(mat1(a));
    s.drift = StateField::zero(1);
    s.diffusion = constant_field(1.0, 1.0);
    return s;
}

Model ou_model(double a = -1.0) {
    const auto sys = ou_system(a);
    return Model{sys, AveragedSystem{mat1(a), sys.drift, sys.diffusion, {}, {}, {}}};
}

}  // namespace

// =============================================================================
// Euler-Maruyama
// =============================================================================

TEST(SimulateEm, ReproducesHandRolledRecursion) {
    const auto model = ou_model(-1.0);
    const double dt = 0.01;
    const auto e = simulate_em(model, EquationTag::averaged(), vec1(1.0), 0.0, 0.5, dt, 5, 77);
    ASSERT_EQ(e.n_times(), 51u);
    for (std::size_t p = 0; p < 5; ++p) {
        double x = 1.0;
        for (int n = 0; n < 50; ++n) {
            x += -x * dt + std::sqrt(dt) * standard_normal(77, p, n);
            EXPECT_NEAR(e.at(p, static_cast<std::size_t>(n + 1)), x, 1e-14);
        }
    }
}

TEST(SimulateEm, ThreadCountDoesNotChangeResults) {
    const auto model = make_model(scalar_benchmark());
    SimulationOptions one, many;
    many.threads = 3;
    many.block_size = 7;
    const auto a = simulate_em(model, EquationTag::rescaled(0.1), vec1(0.0), 0.0, 1.0, 0.005, 50, 3, 10, one);
    const auto b = simulate_em(model, EquationTag::rescaled(0.1), vec1(0.0), 0.0, 1.0, 0.005, 50, 3, 10, many);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.times, b.times);
}

TEST(SimulateEm, OverlappingRangesShareIncrements) {
    const auto model = ou_model();
    const auto shortrun = simulate_em(model, EquationTag::averaged(), vec1(0.3), 0.0, 1.0, 0.01, 20, 9);
    const auto longrun = simulate_em(model, EquationTag::averaged(), vec1(0.3), 0.0, 2.0, 0.01, 20, 9);
    for (std::size_t p = 0; p < 20; ++p)
        for (std::size_t k = 0; k < shortrun.n_times(); ++k) EXPECT_EQ(shortrun.at(p, k), longrun.at(p, k));
}

TEST(SimulateEm, OriginalAndRescaledAgreePathwise) {
    // With dt_original = dt / eps both recursions are the same arithmetic.
    const auto model = make_model(scalar_benchmark());
    const double eps = 0.1;
    const double dt = 0.005;
    const auto rescaled = simulate_em(model, EquationTag::rescaled(eps), vec1(0.2), 0.0, 1.0, dt, 10, 4);
    const auto original = simulate_em(model, EquationTag::original(eps), vec1(0.2), 0.0, 1.0 / eps, dt / eps, 10, 4);
    const auto mapped = inverse_rescale_time(original);
    ASSERT_EQ(mapped.n_times(), rescaled.n_times());
    for (std::size_t k = 0; k < rescaled.n_times(); ++k) {
        EXPECT_NEAR(mapped.times[k], rescaled.times[k], 1e-12);
        for (std::size_t p = 0; p < 10; ++p) EXPECT_NEAR(mapped.at(p, k), rescaled.at(p, k), 1e-10);
    }
}

TEST(SimulateEm, OuMomentsMatchDiscreteRecursion) {
    const auto model = ou_model(-1.0);
    const double dt = 0.02;
    const int n = 50;
    const auto e = simulate_em(model, EquationTag::averaged(), vec1(1.0), 0.0, n * dt, dt, 20000, 5, n);
    const auto stats = summarize(e);
    const double rho = 1.0 - dt;
    const double mean = std::pow(rho, n);
    const double var = dt * (1.0 - std::pow(rho, 2 * n)) / (1.0 - rho * rho);
    const double se = std::sqrt(var / 20000.0);
    EXPECT_NEAR(stats.mean.back()(0), mean, 4.0 * se);
    EXPECT_NEAR(stats.second_moment.back(), var + mean * mean, 4.0 * stats.second_moment_se.back());
}

TEST(SimulateEm, Errors) {
    const auto model = make_model(scalar_benchmark());
    EXPECT_THROW(simulate_em(model, EquationTag::rescaled(0.1), vec1(0.0), 0.0, 1.0, 0.02, 5, 1), StepSizeError);
    EXPECT_THROW(simulate_em(model, EquationTag::averaged(), vec1(0.0), 0.005, 1.0, 0.01, 5, 1), InvalidArgument);
    EXPECT_THROW(simulate_em(model, EquationTag::averaged(), Vector::Zero(2), 0.0, 1.0, 0.01, 5, 1), InvalidArgument);
    try {
        simulate_em(ou_model(50.0), EquationTag::averaged(), vec1(1.0), 0.0, 10.0, 0.01, 3, 1);
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_GT(e.time(), 0.0);
        EXPECT_LT(e.path(), 3u);
    }
}

TEST(SimulateEm, LatticeOriginMovesTheGrid) {
    const auto model = ou_model();
    SimulationOptions opts;
    opts.lattice_origin = 0.005;
    EXPECT_NO_THROW(simulate_em(model, EquationTag::averaged(), vec1(0.0), 0.005, 1.005, 0.01, 2, 1, 1, opts));
}

// =============================================================================
// Bounded solutions
// =============================================================================

TEST(BoundedSolution, BurnInForgetsTheStart) {
    // Two burn-in lengths differ by N e^{-nu T} |X| pathwise on the shared increments.
    const auto model = ou_model();
    const TimeGrid grid{0.0, 0.5, 5};
    const auto a = burn_in_solution(model, EquationTag::averaged(), grid, 10.0, 0.01, 200, 6);
    const auto b = burn_in_solution(model, EquationTag::averaged(), grid, 20.0, 0.01, 200, 6);
    double worst = 0.0;
    for (std::size_t p = 0; p < 200; ++p) worst = std::max(worst, std::abs(a.at(p, 0) - b.at(p, 0)));
    EXPECT_LT(worst, 5.0 * std::exp(-10.0));
}

TEST(BoundedSolution, ContractionGate) {
    const auto model = ou_model();
    const TimeGrid grid{0.0, 0.5, 3};
    const auto good = verify_contraction(1.0, 1.0, 1.0, 0.0);
    const auto e = bounded_solution(model, EquationTag::averaged(), grid, 10.0, 0.01, 10, 1, good);
    EXPECT_NEAR(e.bias_bound, std::exp(-10.0) * std::sqrt(3.0), 1e-15);
    EXPECT_THROW(bounded_solution(model, EquationTag::averaged(), grid, 1.0, 0.01, 10, 1, good), PreconditionError);
    const auto bad = verify_contraction(1.0, 1.0, 1.0, 0.9);
    try {
        bounded_solution(model, EquationTag::averaged(), grid, 10.0, 0.01, 10, 1, bad);
        FAIL() << "expected ContractionRefused";
    } catch (const ContractionRefused& ex) {
        EXPECT_NE(std::string(ex.what()).find("existence inequality"), std::string::npos);
    }
}

TEST(BoundedSolution, ConvolutionFormAgreesWithSimulation) {
    const auto sys = scalar_benchmark();
    const auto model = make_model(sys);
    const double eps = 0.2;
    const double dt = 0.002;
    const TimeGrid grid{0.0, 0.5, 5};
    const auto em = burn_in_solution(model, EquationTag::rescaled(eps), grid, 8.0, dt, 500, 12);
    const auto conv = stochastic_convolution_linear(sys.a.rescaled(eps), sys.drift.rescaled(eps),
                                                    sys.diffusion.rescaled(eps), grid, 8.0, dt, 500, 12);
    const auto dev = coupled_deviation(em, conv);
    EXPECT_LT(dev.sup_deviation, 1e-3);
    Matrix k(1, 1);
    k << 0.1;
    const StateField nonlinear(1, {FieldTerm{TimeFactor::constant(), TermKind::nonlinear, {}, k, Saturation::tanh}},
                               {0.0, 0.1});
    EXPECT_THROW(stochastic_convolution_linear(sys.a, nonlinear, sys.diffusion, grid, 8.0, dt, 5, 1), InvalidArgument);
}

// =============================================================================
// Stationary sampling and statistics
// =============================================================================

TEST(Stationary, ExactGaussianMoments) {
    const auto model = ou_model(-1.0);
    const TimeGrid grid{0.0, 0.5, 3};
    const auto e = sample_averaged_stationary(model.averaged, grid, 20000, 8, StationaryMode::exact_gaussian);
    const auto s = summarize(e);
    for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(s.second_moment[k], 0.5, 4.0 * s.second_moment_se[k]);
    // Lag-one autocovariance 0.5 e^{-0.5}.
    std::vector<double> prod(e.n_paths);
    for (std::size_t p = 0; p < e.n_paths; ++p) prod[p] = e.at(p, 0) * e.at(p, 1);
    const double mean = pairwise_sum(prod.data(), prod.size()) / static_cast<double>(prod.size());
    double ss = 0.0;
    for (double v : prod) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / (prod.size() - 1.0) / prod.size());
    EXPECT_NEAR(mean, 0.5 * std::exp(-0.5), 4.0 * se);
}

TEST(Stationary, LongRunAgreesWithExact) {
    const auto model = ou_model(-2.0);
    const TimeGrid grid{0.0, 1.0, 2};
    StationaryOptions opts;
    opts.dt = 1e-3;
    opts.burn_in = 8.0;
    const auto e = sample_averaged_stationary(model.averaged, grid, 4000, 2, StationaryMode::long_run, opts);
    const auto s = summarize(e);
    EXPECT_NEAR(s.second_moment[1], 0.25, 4.0 * s.second_moment_se[1] + 1e-3);
}

TEST(Stationary, NonlinearRequiresLongRun) {
    auto avg = ou_model().averaged;
    Matrix k(1, 1);
    k << 0.1;
    avg.f_bar = StateField(1, {FieldTerm{TimeFactor::constant(), TermKind::nonlinear, {}, k, Saturation::tanh}},
                           {0.0, 0.1});
    EXPECT_THROW(sample_averaged_stationary(avg, TimeGrid{0.0, 1.0, 2}, 10, 1, StationaryMode::exact_gaussian),
                 InvalidArgument);
}

TEST(Statistics, PairwiseSumIsExactOnIntegers) {
    std::vector<double> v(1001);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    EXPECT_DOUBLE_EQ(pairwise_sum(v.data(), v.size()), 500500.0);
    EXPECT_DOUBLE_EQ(pairwise_sum(v.data(), 0), 0.0);
}

TEST(Statistics, CoupledDeviationConsistency) {
    const auto model = ou_model();
    const TimeGrid grid{0.0, 0.5, 3};
    const auto a = burn_in_solution(model, EquationTag::averaged(), grid, 5.0, 0.01, 10, 1);
    const auto b = burn_in_solution(model, EquationTag::averaged(), grid, 5.0, 0.01, 10, 2);
    EXPECT_THROW(coupled_deviation(a, b), NumericError);
    const auto self = coupled_deviation(a, a);
    EXPECT_DOUBLE_EQ(self.sup_deviation, 0.0);
}

TEST(Statistics, RescaleTimeRoundTrip) {
    const auto model = make_model(scalar_benchmark());
    const auto e = simulate_em(model, EquationTag::rescaled(0.25), vec1(0.0), 0.0, 1.0, 0.025, 3, 1);
    const auto orig = rescale_time(e);
    EXPECT_EQ(orig.equation.kind, EquationKind::original);
    EXPECT_DOUBLE_EQ(orig.times.back(), 4.0);
    const auto back = inverse_rescale_time(orig);
    EXPECT_EQ(back.equation.kind, EquationKind::rescaled);
    for (std::size_t k = 0; k < e.n_times(); ++k) EXPECT_NEAR(back.times[k], e.times[k], 1e-15);
    EXPECT_EQ(back.values, e.values);
    EXPECT_THROW(rescale_time(orig), InvalidArgument);
    EXPECT_THROW(inverse_rescale_time(e), InvalidArgument);
}

TEST(Statistics, ContinuityModulusOfStationaryOu) {
    // E|X(t+h) - X(t)|^2 = 1 - e^{-h} for the unit OU process.
    const auto model = ou_model();
    const TimeGrid grid{0.0, 0.01, 41};
    const auto e = sample_averaged_stationary(model.averaged, grid, 4000, 3, StationaryMode::exact_gaussian);
    const auto m = continuity_modulus(e, 10);
    ASSERT_EQ(m.rows.size(), 10u);
    for (const auto& row : m.rows) EXPECT_NEAR(row.value, 1.0 - std::exp(-row.h), 5.0 * row.se);
    EXPECT_GE(m.r_squared, 0.95);
    EXPECT_NEAR(m.slope, 1.0, 0.1);
    EXPECT_THROW(continuity_modulus(e, 3), InvalidArgument);
}
