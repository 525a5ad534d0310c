#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngp/rng.hpp"

namespace ngp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Ordered set of feature indices. Order is meaningful: earlier means
// more important (selection order).
struct FeatureSet {
    std::vector<int> indices;

    FeatureSet() = default;
    FeatureSet(std::initializer_list<int> init) : indices(init) {}
    explicit FeatureSet(std::vector<int> idx) : indices(std::move(idx)) {}

    int size() const { return static_cast<int>(indices.size()); }
    bool empty() const { return indices.empty(); }

    bool contains(int i) const {
        return std::find(indices.begin(), indices.end(), i) != indices.end();
    }

    FeatureSet with(int i) const {
        FeatureSet out = *this;
        out.indices.push_back(i);
        return out;
    }

    void validate(int feature_count) const {
        std::set<int> seen;
        for (int i : indices) {
            if (i < 0 || i >= feature_count)
                throw std::out_of_range("feature index " + std::to_string(i) +
                                        " out of range [0, " + std::to_string(feature_count) + ")");
            if (!seen.insert(i).second)
                throw std::invalid_argument("duplicate feature index " + std::to_string(i));
        }
    }
};

// J x P feature matrix with J x Q targets. Targets are real-valued for
// regression and one-hot rows for classification. Immutable by
// convention once built; safe to share across threads.
struct Dataset {
    Matrix features;  // J x P
    Matrix targets;   // J x Q
    std::vector<std::string> feature_names;          // empty, or one per column
    std::optional<std::vector<int>> true_support;    // sorted, 0-based

    Eigen::Index sample_count() const { return features.rows(); }
    Eigen::Index feature_count() const { return features.cols(); }
    Eigen::Index target_count() const { return targets.cols(); }

    void validate() const {
        if (features.rows() < 1) throw std::invalid_argument("dataset has no samples");
        if (targets.cols() < 1) throw std::invalid_argument("dataset has no targets");
        if (features.rows() != targets.rows())
            throw std::invalid_argument("feature/target row count mismatch");
        if (!feature_names.empty() &&
            static_cast<Eigen::Index>(feature_names.size()) != features.cols())
            throw std::invalid_argument("feature name count mismatch");
        if (!features.allFinite() || !targets.allFinite())
            throw std::invalid_argument("dataset contains non-finite entries");
        if (true_support) {
            for (int i : *true_support)
                if (i < 0 || i >= features.cols())
                    throw std::invalid_argument("true_support index out of range");
        }
    }
};

struct DataSplit {
    Dataset train;
    Dataset validation;
    std::optional<Dataset> test;
};

// Per-feature standardization statistics, computed on training data and
// reapplied verbatim to held-out data.
struct ScalingParams {
    Vector mean;
    Vector stddev;                // 1.0 where the feature is constant
    std::vector<bool> constant;   // flagged constant columns

    Matrix apply(const Matrix& x) const {
        if (x.cols() != mean.size())
            throw std::invalid_argument("scaling params dimension mismatch");
        return (x.rowwise() - mean.transpose()).array().rowwise() /
               stddev.transpose().array();
    }

    Matrix invert(const Matrix& x) const {
        if (x.cols() != mean.size())
            throw std::invalid_argument("scaling params dimension mismatch");
        return (x.array().rowwise() * stddev.transpose().array()).matrix().rowwise() +
               mean.transpose();
    }
};

// Columns of the result appear in FeatureSet order; targets are shared
// unchanged. An empty set yields a legal J x 0 matrix.
inline Dataset restrict_features(const Dataset& data, const FeatureSet& features) {
    features.validate(static_cast<int>(data.feature_count()));
    Dataset out;
    out.features.resize(data.sample_count(), features.size());
    for (int c = 0; c < features.size(); ++c)
        out.features.col(c) = data.features.col(features.indices[c]);
    out.targets = data.targets;
    if (!data.feature_names.empty())
        for (int i : features.indices) out.feature_names.push_back(data.feature_names[i]);
    out.true_support = data.true_support;
    return out;
}

// Sample statistics with the (J-1) divisor. Constant columns map to zero
// and are flagged rather than errored.
inline std::pair<Dataset, ScalingParams> standardize(const Dataset& data) {
    const Eigen::Index j = data.sample_count();
    const Eigen::Index p = data.feature_count();
    if (j < 2) throw std::invalid_argument("standardize requires at least 2 samples");

    ScalingParams params;
    params.mean = data.features.colwise().mean();
    params.stddev.resize(p);
    params.constant.assign(static_cast<std::size_t>(p), false);
    for (Eigen::Index c = 0; c < p; ++c) {
        const double var =
            (data.features.col(c).array() - params.mean(c)).square().sum() /
            static_cast<double>(j - 1);
        const double sd = std::sqrt(var);
        if (sd > 0.0) {
            params.stddev(c) = sd;
        } else {
            params.stddev(c) = 1.0;
            params.constant[static_cast<std::size_t>(c)] = true;
        }
    }

    Dataset out = data;
    out.features = params.apply(data.features);
    return {std::move(out), std::move(params)};
}

inline Dataset apply_scaling(const Dataset& data, const ScalingParams& params) {
    Dataset out = data;
    out.features = params.apply(data.features);
    return out;
}

struct SplitFractions {
    double train = 0.8;
    double validation = 0.2;
    double test = 0.0;
};

namespace detail {
inline Dataset take_rows(const Dataset& data, const std::vector<int>& rows,
                         std::size_t begin, std::size_t count) {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(count), data.feature_count());
    out.targets.resize(static_cast<Eigen::Index>(count), data.target_count());
    for (std::size_t i = 0; i < count; ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[begin + i]);
        out.targets.row(static_cast<Eigen::Index>(i)) = data.targets.row(rows[begin + i]);
    }
    out.feature_names = data.feature_names;
    out.true_support = data.true_support;
    return out;
}
}  // namespace detail

// Deterministic shuffle under `seed`; part sizes are floor-allocated with
// the remainder going to train.
inline DataSplit split(const Dataset& data, const SplitFractions& fractions,
                       std::uint64_t seed) {
    const double sum = fractions.train + fractions.validation + fractions.test;
    if (fractions.train <= 0.0 || fractions.validation < 0.0 || fractions.test < 0.0 ||
        std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("split fractions must be positive and sum to 1");

    const auto j = static_cast<std::size_t>(data.sample_count());
    std::size_t n_val = static_cast<std::size_t>(fractions.validation * static_cast<double>(j));
    std::size_t n_test = static_cast<std::size_t>(fractions.test * static_cast<double>(j));
    if (n_val + n_test >= j) throw std::invalid_argument("split leaves no training samples");
    std::size_t n_train = j - n_val - n_test;

    if (fractions.validation > 0.0 && n_val == 0)
        throw std::invalid_argument("validation fraction > 0 but split part is empty");
    if (fractions.test > 0.0 && n_test == 0)
        throw std::invalid_argument("test fraction > 0 but split part is empty");

    std::vector<int> order(j);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    DataSplit out;
    out.train = detail::take_rows(data, order, 0, n_train);
    if (n_val > 0) {
        out.validation = detail::take_rows(data, order, n_train, n_val);
    } else {
        out.validation.features.resize(0, data.feature_count());
        out.validation.targets.resize(0, data.target_count());
        out.validation.feature_names = data.feature_names;
        out.validation.true_support = data.true_support;
    }
    if (n_test > 0) out.test = detail::take_rows(data, order, n_train + n_val, n_test);
    return out;
}

}  // namespace ngp
