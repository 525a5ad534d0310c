#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngp/dataset.hpp"

namespace ngp {

// P nonnegative scores normalized to sum 1; stays all-zero when every raw
// score is zero.
struct ImportanceVector {
    Vector values;

    static ImportanceVector normalized(Vector raw) {
        const double sum = raw.sum();
        if (sum > 0.0) raw /= sum;
        return {std::move(raw)};
    }
};

// |Pearson correlation| of each feature against the target, max over
// targets when Q > 1. Constant columns score zero.
inline ImportanceVector correlation_importance(const Dataset& data) {
    const Eigen::Index j = data.sample_count();
    if (j < 2) throw std::invalid_argument("correlation_importance needs at least 2 samples");

    const Matrix xc = data.features.rowwise() - data.features.colwise().mean();
    const Matrix tc = data.targets.rowwise() - data.targets.colwise().mean();
    const Vector xsd = xc.colwise().norm();
    const Vector tsd = tc.colwise().norm();

    Vector raw = Vector::Zero(data.feature_count());
    for (Eigen::Index i = 0; i < data.feature_count(); ++i) {
        if (xsd(i) == 0.0) continue;
        for (Eigen::Index q = 0; q < data.target_count(); ++q) {
            if (tsd(q) == 0.0) continue;
            const double corr = xc.col(i).dot(tc.col(q)) / (xsd(i) * tsd(q));
            raw(i) = std::max(raw(i), std::abs(corr));
        }
    }
    return ImportanceVector::normalized(std::move(raw));
}

inline double soft_threshold(double value, double threshold) {
    if (value > threshold) return value - threshold;
    if (value < -threshold) return value + threshold;
    return 0.0;
}

struct LassoResult {
    Vector coefficients;
    ImportanceVector importance;  // normalized |coefficients|
    int sweeps = 0;
    double final_gap = 0.0;       // max coordinate change of the last sweep
};

// Cyclic coordinate descent for (1/2J)||t - X b||^2 + lambda ||b||_1,
// no intercept; callers standardize features (and usually center t).
// Converges when the max coordinate change drops below tol; throws with
// the final gap otherwise.
inline LassoResult lasso_fit(const Dataset& data, double lambda, double tol = 1e-7,
                             int max_sweeps = 10000) {
    if (data.target_count() != 1)
        throw std::invalid_argument("lasso_fit supports a single target");
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");

    const Eigen::Index j = data.sample_count();
    const Eigen::Index p = data.feature_count();
    const Matrix& x = data.features;
    const Vector t = data.targets.col(0);
    const double jd = static_cast<double>(j);

    Vector col_sq(p);
    for (Eigen::Index i = 0; i < p; ++i) col_sq(i) = x.col(i).squaredNorm() / jd;

    LassoResult result;
    result.coefficients = Vector::Zero(p);
    Vector residual = t;

    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) {
            if (col_sq(i) == 0.0) continue;  // constant zero column stays out
            const double rho = x.col(i).dot(residual) / jd + col_sq(i) * result.coefficients(i);
            const double updated = soft_threshold(rho, lambda) / col_sq(i);
            const double change = updated - result.coefficients(i);
            if (change != 0.0) {
                residual -= change * x.col(i);
                result.coefficients(i) = updated;
                max_change = std::max(max_change, std::abs(change));
            }
        }
        result.sweeps = sweep;
        result.final_gap = max_change;
        if (max_change < tol) {
            result.importance =
                ImportanceVector::normalized(result.coefficients.cwiseAbs());
            return result;
        }
    }
    throw std::runtime_error("lasso_fit did not converge in " + std::to_string(max_sweeps) +
                             " sweeps; final max coordinate change " +
                             std::to_string(result.final_gap));
}

// Indices scoring strictly above the threshold, in descending importance
// (ties toward the lower index).
inline FeatureSet select_by_importance(const ImportanceVector& importance,
                                       double threshold = 0.01) {
    std::vector<int> order(static_cast<std::size_t>(importance.values.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return importance.values(a) > importance.values(b);
    });
    FeatureSet out;
    for (int i : order)
        if (importance.values(i) > threshold) out.indices.push_back(i);
    return out;
}

}  // namespace ngp
