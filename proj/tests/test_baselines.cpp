#include <gtest/gtest.h>

#include <cmath>

#include "ngp/baselines.hpp"
#include "ngp/dataset.hpp"
#include "ngp/rng.hpp"

namespace {

using ngp::Dataset;
using ngp::Matrix;
using ngp::Vector;

Dataset standardized_noise(int j, int p, std::uint64_t seed) {
    ngp::Rng rng(seed);
    Dataset d;
    d.features.resize(j, p);
    d.targets.resize(j, 1);
    for (int r = 0; r < j; ++r)
        for (int c = 0; c < p; ++c) d.features(r, c) = rng.normal();
    d.targets.setZero();
    return std::get<0>(ngp::standardize(d));
}

TEST(CorrelationImportance, PerfectCorrelationDominates) {
    auto d = standardized_noise(200, 6, 1);
    d.targets = d.features.col(3);
    auto imp = ngp::correlation_importance(d);
    int argmax = 0;
    imp.values.maxCoeff(&argmax);
    EXPECT_EQ(argmax, 3);
    EXPECT_NEAR(imp.values.sum(), 1.0, 1e-9);
}

// with an independent target nothing should stand out
TEST(CorrelationImportance, IndependentTargetStaysFlat) {
    ngp::Rng rng(2);
    auto d = standardized_noise(10000, 10, 2);
    for (int r = 0; r < 10000; ++r) d.targets(r, 0) = rng.normal();
    auto imp = ngp::correlation_importance(d);
    EXPECT_LT(imp.values.maxCoeff(), 3.0 / 10.0);
}

TEST(CorrelationImportance, ConstantFeatureScoresZero) {
    auto d = standardized_noise(50, 3, 3);
    d.features.col(1).setConstant(4.0);
    d.targets = d.features.col(0);
    auto imp = ngp::correlation_importance(d);
    EXPECT_DOUBLE_EQ(imp.values(1), 0.0);
}

TEST(CorrelationImportance, ScaleInvariant) {
    auto d = standardized_noise(100, 4, 4);
    d.targets = d.features.col(0) + 0.3 * d.features.col(2);
    auto before = ngp::correlation_importance(d);
    d.features.col(2) *= 250.0;
    auto after = ngp::correlation_importance(d);
    EXPECT_LT((before.values - after.values).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LassoFit, SoftThresholdKillsWeakCoefficient) {
    auto d = standardized_noise(100, 1, 5);
    // scale the target so |x' t / J| lands below lambda
    d.targets = 0.01 * d.features.col(0);
    auto result = ngp::lasso_fit(d, 0.05);
    EXPECT_DOUBLE_EQ(result.coefficients(0), 0.0);
}

// lambda = 0 reduces to least squares; oracle solved via normal equations
TEST(LassoFit, ZeroLambdaMatchesLeastSquares) {
    ngp::Rng rng(6);
    auto d = standardized_noise(80, 3, 6);
    d.targets = 1.2 * d.features.col(0) - 0.4 * d.features.col(1);
    for (int r = 0; r < 80; ++r) d.targets(r, 0) += 0.05 * rng.normal();
    auto result = ngp::lasso_fit(d, 0.0, 1e-10, 100000);

    Vector beta = (d.features.transpose() * d.features)
                      .ldlt()
                      .solve(d.features.transpose() * d.targets.col(0));
    EXPECT_LT((result.coefficients - beta).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(LassoFit, HugeLambdaShrinksEverythingToZero) {
    auto d = standardized_noise(60, 4, 7);
    d.targets = d.features.col(0);
    auto result = ngp::lasso_fit(d, 1e3);
    EXPECT_DOUBLE_EQ(result.coefficients.cwiseAbs().maxCoeff(), 0.0);
}

// KKT conditions at the reported solution
TEST(LassoFit, SatisfiesStationarity) {
    ngp::Rng rng(8);
    auto d = standardized_noise(120, 6, 8);
    d.targets = d.features.col(0) + 0.5 * d.features.col(3);
    for (int r = 0; r < 120; ++r) d.targets(r, 0) += 0.1 * rng.normal();
    const double lambda = 0.1;
    auto result = ngp::lasso_fit(d, lambda);

    const Vector residual = d.targets.col(0) - d.features * result.coefficients;
    const Vector grad = -d.features.transpose() * residual / 120.0;
    for (int i = 0; i < 6; ++i) {
        if (result.coefficients(i) == 0.0) {
            EXPECT_LE(std::abs(grad(i)), lambda + 1e-6) << "coordinate " << i;
        } else {
            const double sign = result.coefficients(i) > 0.0 ? 1.0 : -1.0;
            EXPECT_NEAR(grad(i), -sign * lambda, 1e-6) << "coordinate " << i;
        }
    }
}

// support size can only shrink as the penalty grows
TEST(LassoFit, SolutionPathMonotoneInLambda) {
    ngp::Rng rng(9);
    auto d = standardized_noise(100, 8, 9);
    d.targets = d.features.col(0) + 0.7 * d.features.col(1) + 0.4 * d.features.col(2) +
                0.2 * d.features.col(3);
    for (int r = 0; r < 100; ++r) d.targets(r, 0) += 0.05 * rng.normal();
    int prev = 9;
    for (double lambda : {0.001, 0.01, 0.05, 0.2, 0.5, 1.0}) {
        auto result = ngp::lasso_fit(d, lambda);
        const int nonzero =
            static_cast<int>((result.coefficients.array() != 0.0).count());
        EXPECT_LE(nonzero, prev) << "lambda " << lambda;
        prev = nonzero;
    }
}

TEST(SelectByImportance, ThresholdRule) {
    ngp::ImportanceVector imp;
    imp.values.resize(5);
    imp.values << 0.5, 0.3, 0.2, 0.0, 0.0;
    auto s = ngp::select_by_importance(imp, 0.01);
    EXPECT_EQ(s.indices, (std::vector<int>{0, 1, 2}));
}

TEST(SelectByImportance, AllZeroGivesEmptySet) {
    ngp::ImportanceVector imp;
    imp.values = Vector::Zero(4);
    EXPECT_TRUE(ngp::select_by_importance(imp).empty());
}

TEST(SelectByImportance, BoundaryValueIsExcluded) {
    ngp::ImportanceVector imp;
    imp.values.resize(3);
    imp.values << 0.98, 0.01, 0.01;
    auto s = ngp::select_by_importance(imp, 0.01);
    EXPECT_EQ(s.indices, (std::vector<int>{0}));
}

TEST(SelectByImportance, OrderedByDescendingImportance) {
    ngp::ImportanceVector imp;
    imp.values.resize(4);
    imp.values << 0.1, 0.4, 0.2, 0.3;
    auto s = ngp::select_by_importance(imp, 0.05);
    EXPECT_EQ(s.indices, (std::vector<int>{1, 3, 2, 0}));
}

}  // namespace
