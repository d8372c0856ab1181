#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "bogolyubov/errors.hpp"
#include "bogolyubov/metrics.hpp"

using namespace bogolyubov;

namespace {

double two_point(double d) { return 2.0 * d / (2.0 + d); }

std::vector<double> normal_sample(std::size_t n, double mean, double sd, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(mean, sd);
    std::vector<double> x(n);
    for (auto& v : x) v = normal(gen);
    return x;
}

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

}  // namespace

// =============================================================================
// Exact one-dimensional solver
// =============================================================================

TEST(BetaExact, TwoPointFormula) {
    for (double d : {0.01, 0.1, 1.0, 2.0, 10.0, 100.0}) {
        const auto r = beta_exact_1d({0.0}, {d});
        EXPECT_NEAR(r.value, two_point(d), 1e-9) << d;
        EXPECT_EQ(r.method, BetaMethod::exact_1d);
    }
}

TEST(BetaExact, MatchesLinearProgramOracle) {
    // Reference values from a generic LP solver on the joint (f, Lipschitz share) program.
    EXPECT_NEAR(beta_exact_1d({0.0, 1.0, 3.0}, {0.5, 2.0}).value, 0.49999999999999994, 1e-9);
    EXPECT_NEAR(beta_exact_1d({-1.2, 0.3, 0.4, 2.5}, {0.0, 0.1, 5.0}).value, 0.5222222222222223, 1e-9);
    std::vector<double> x, y;
    for (int i = 0; i < 12; ++i) x.push_back(2.0 * std::sin(i));
    for (int j = 0; j < 9; ++j) y.push_back(std::cos(1.7 * j) + 0.3);
    EXPECT_NEAR(beta_exact_1d(x, y).value, 0.33613581091882955, 1e-9);
    x.clear();
    y.clear();
    for (int i = 0; i < 15; ++i) x.push_back(0.1 * i * i);
    for (int j = 0; j < 10; ++j) y.push_back(1.5 + 0.05 * j);
    EXPECT_NEAR(beta_exact_1d(x, y).value, 0.8524173027989823, 1e-9);
}

TEST(BetaExact, IdenticalAndShiftedLaws) {
    const auto x = normal_sample(500, 0.0, 1.0, 1);
    EXPECT_NEAR(beta_exact_1d(x, x).value, 0.0, 1e-12);
    // A small translation delta of the same atoms costs at most delta.
    auto y = x;
    for (auto& v : y) v += 0.01;
    const double b = beta_exact_1d(x, y).value;
    EXPECT_GT(b, 0.0);
    EXPECT_LE(b, 0.01 + 1e-12);
}

TEST(BetaExact, MetricAxiomsOnRandomTriples) {
    std::mt19937_64 gen(2024);
    std::uniform_int_distribution<int> size(1, 30);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(size(gen)), b(size(gen)), c(size(gen));
        const double shift = 2.0 * normal(gen);
        for (auto& v : a) v = normal(gen);
        for (auto& v : b) v = normal(gen) + shift;
        for (auto& v : c) v = 3.0 * normal(gen);
        const double ab = beta_exact_1d(a, b).value;
        const double ba = beta_exact_1d(b, a).value;
        const double bc = beta_exact_1d(b, c).value;
        const double ac = beta_exact_1d(a, c).value;
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(ab, 2.0);
        EXPECT_NEAR(ab, ba, 1e-10);
        EXPECT_LE(ac, ab + bc + 1e-9);
        EXPECT_NEAR(beta_exact_1d(a, a).value, 0.0, 1e-12);
    }
}

// =============================================================================
// Randomized lower bound
// =============================================================================

TEST(BetaLowerBound, NeverExceedsExactInOneDimension) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto x = normal_sample(200, 0.0, 1.0, 10 + s);
        const auto y = normal_sample(150, 0.3 * s, 1.0 + 0.1 * s, 100 + s);
        const double exact = beta_exact_1d(x, y).value;
        const auto lb = beta_lower_bound(EmpiricalLaw::scalar(x), EmpiricalLaw::scalar(y));
        EXPECT_LE(lb.value, exact + 1e-9);
        EXPECT_EQ(lb.method, BetaMethod::randomized_lower_bound);
        EXPECT_GT(lb.family_size, 0u);
    }
}

TEST(BetaLowerBound, TwoPointInHigherDimensionIsExact) {
    // Projection onto the separating axis recovers 2d/(2+d).
    Vector a = Vector::Zero(3), b = Vector::Zero(3);
    b(1) = 1.5;
    const auto r = beta_distance(EmpiricalLaw({a}), EmpiricalLaw({b}));
    EXPECT_NEAR(r.value, two_point(1.5), 1e-9);
}

TEST(BetaLowerBound, DetectsShiftInTwoDimensions) {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> normal;
    std::vector<Vector> p, q;
    for (int i = 0; i < 400; ++i) {
        Vector u(2), v(2);
        u << normal(gen), normal(gen);
        v << normal(gen) + 1.0, normal(gen) + 1.0;
        p.push_back(u);
        q.push_back(v);
    }
    const auto r = beta_distance(EmpiricalLaw(p), EmpiricalLaw(q));
    EXPECT_GT(r.value, 0.2);
    EXPECT_LE(r.value, 2.0);
}

TEST(EmpiricalLaw, Validation) {
    EXPECT_THROW(EmpiricalLaw(std::vector<Vector>{}), InvalidArgument);
    EXPECT_THROW(EmpiricalLaw({Vector::Zero(1), Vector::Zero(2)}), InvalidArgument);
    EXPECT_THROW(EmpiricalLaw::scalar({0.0, NAN}), InvalidArgument);
    EXPECT_EQ(EmpiricalLaw::scalar({1.0, 2.0}).dim(), 1);
}

// =============================================================================
// Noise floor and sweeps
// =============================================================================

TEST(NoiseFloor, ShrinksWithSampleSize) {
    const auto small = noise_floor(EmpiricalLaw::scalar(normal_sample(400, 0.0, 1.0, 1)), 5, 3);
    const auto large = noise_floor(EmpiricalLaw::scalar(normal_sample(6400, 0.0, 1.0, 2)), 5, 3);
    EXPECT_GT(small, 0.0);
    EXPECT_LT(large, small);
    EXPECT_NEAR(large / small, 0.25, 0.15);  // 1/sqrt(n) scaling
}

TEST(EnsembleBeta, IndependentCopiesSitNearTheFloor) {
    CoefficientSystem sys;
    sys.a = TimeVaryingOperator(mat1(-1.0));
    sys.drift = StateField::zero(1);
    sys.diffusion = StateField(1, {FieldTerm{TimeFactor::constant(), TermKind::constant, vec1(1.0), {}, {}}},
                               {1.0, 0.0});
    const auto avg = AveragedSystem{mat1(-1.0), sys.drift, sys.diffusion, {}, {}, {}};
    const TimeGrid grid{0.0, 0.5, 3};
    const auto a = sample_averaged_stationary(avg, grid, 4000, 1, StationaryMode::exact_gaussian);
    const auto b = sample_averaged_stationary(avg, grid, 4000, 2, StationaryMode::exact_gaussian);
    const auto cells = ensemble_beta(a, b);
    ASSERT_EQ(cells.size(), 3u);
    for (const auto& c : cells) {
        EXPECT_LE(c.beta, 2.0 * c.noise_floor);
        EXPECT_EQ(c.n_samples, 4000u);
    }
}

TEST(SplitHalfFloor, SupDominatesPerTimeAverage) {
    CoefficientSystem sys;
    sys.a = TimeVaryingOperator(mat1(-1.0));
    sys.drift = StateField::zero(1);
    sys.diffusion = StateField(1, {FieldTerm{TimeFactor::constant(), TermKind::constant, vec1(1.0), {}, {}}},
                               {1.0, 0.0});
    const auto avg = AveragedSystem{mat1(-1.0), sys.drift, sys.diffusion, {}, {}, {}};
    const auto e = sample_averaged_stationary(avg, TimeGrid{0.0, 0.5, 6}, 2000, 5, StationaryMode::exact_gaussian);
    const auto floor = split_half_floor(e, 5, 1);
    ASSERT_EQ(floor.per_time.size(), 6u);
    const double max_avg = *std::max_element(floor.per_time.begin(), floor.per_time.end());
    EXPECT_GE(floor.sup, max_avg - 1e-15);
    // A single time slice reduces to the per-time floor.
    const auto one = sample_averaged_stationary(avg, TimeGrid{0.0, 0.5, 1}, 2000, 5, StationaryMode::exact_gaussian);
    const auto f1 = split_half_floor(one, 5, 1);
    EXPECT_DOUBLE_EQ(f1.sup, f1.per_time[0]);
    EXPECT_THROW(split_half_floor(one, 0, 1), InvalidArgument);
}

TEST(LawSweep, EmptyListIsRejected) {
    CoefficientSystem sys;
    sys.a = TimeVaryingOperator(mat1(-1.0));
    sys.drift = StateField::zero(1);
    sys.diffusion = StateField::zero(1);
    const auto model = make_model(sys);
    EXPECT_THROW(law_convergence_sweep(model, {}, TimeGrid{0.0, 0.1, 2}, 10, 1), ValidationError);
}

// =============================================================================
// Comparability probe
// =============================================================================

TEST(ComparabilityProbe, PeriodicShiftsPass) {
    CoefficientSystem sys;
    sys.a = TimeVaryingOperator(mat1(-1.0), {Harmonic{1.0, mat1(0.5), mat1(0.0)}});
    sys.drift = StateField(1, {FieldTerm{TimeFactor::cosine(1.0), TermKind::constant, vec1(1.0), {}, {}}}, {1.0, 0.0});
    sys.diffusion = StateField(1, {FieldTerm{TimeFactor::constant(), TermKind::constant, vec1(1.0), {}, {}}},
                               {1.0, 0.0});
    const auto model = make_model(sys);
    const double period = 2.0 * std::numbers::pi;
    EnsembleProvider provider = [&](const TimeGrid& grid, std::uint64_t seed) {
        SimulationOptions opts;
        opts.lattice_origin = grid.start;
        return burn_in_solution(model, EquationTag::rescaled(1.0), grid, 6.0, 0.01, 2000, seed, opts);
    };
    ProbeOptions opts;
    opts.window = 1.0;
    opts.grid_step = 0.25;
    opts.k_max = 6;
    opts.bebutov_step = 0.05;
    const auto report = comparability_probe(sys, provider, {period, 2.0 * period, 0.5 * period}, opts);
    ASSERT_EQ(report.rows.size(), 3u);
    EXPECT_LE(report.rows[0].coefficient_distance, 1e-10);
    EXPECT_TRUE(report.rows[0].in_hypothesis);
    EXPECT_TRUE(report.rows[1].in_hypothesis);
    EXPECT_FALSE(report.rows[2].in_hypothesis);
    EXPECT_GT(report.rows[2].law_distance, report.noise_floor);
    EXPECT_TRUE(report.pass) << report.message;
    EXPECT_DOUBLE_EQ(report.fitted_c, 0.0);
}

TEST(ComparabilityProbe, NoHypothesisRowsFails) {
    CoefficientSystem sys;
    sys.a = TimeVaryingOperator(mat1(-1.0));
    sys.drift = StateField(1, {FieldTerm{TimeFactor::cosine(1.0), TermKind::constant, vec1(1.0), {}, {}}}, {1.0, 0.0});
    sys.diffusion = StateField::zero(1);
    const auto model = make_model(sys);
    EnsembleProvider provider = [&](const TimeGrid& grid, std::uint64_t seed) {
        SimulationOptions opts;
        opts.lattice_origin = grid.start;
        return burn_in_solution(model, EquationTag::rescaled(1.0), grid, 5.0, 0.01, 50, seed, opts);
    };
    ProbeOptions opts;
    opts.window = 0.5;
    opts.grid_step = 0.25;
    const auto report = comparability_probe(sys, provider, {std::numbers::pi}, opts);
    EXPECT_FALSE(report.pass);
    EXPECT_FALSE(report.rows[0].in_hypothesis);
}
