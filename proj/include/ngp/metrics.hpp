#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ngp/dataset.hpp"

namespace ngp {

// |selected \ truth| / |selected|; undefined (nullopt) for an empty
// selection rather than 0.
inline std::optional<double> fpsr(const FeatureSet& selected, const std::vector<int>& truth) {
    if (selected.empty()) return std::nullopt;
    int false_positives = 0;
    for (int i : selected.indices)
        if (std::find(truth.begin(), truth.end(), i) == truth.end()) ++false_positives;
    return static_cast<double>(false_positives) / static_cast<double>(selected.size());
}

// |truth \ selected| / |truth|; undefined when the truth is empty.
inline std::optional<double> fnsr(const FeatureSet& selected, const std::vector<int>& truth) {
    if (truth.empty()) return std::nullopt;
    int misses = 0;
    for (int i : truth)
        if (!selected.contains(i)) ++misses;
    return static_cast<double>(misses) / static_cast<double>(truth.size());
}

// mean per-sample squared error, summed over target dimensions
inline double mse(const Matrix& predictions, const Matrix& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
        throw std::invalid_argument("mse: shape mismatch");
    return (predictions - targets).squaredNorm() / static_cast<double>(targets.rows());
}

constexpr double kNmeFloorDb = -300.0;

// 10 log10 of the error-to-target-variance ratio, so the constant
// predictor scores 0 dB. Set variance_normalized=false for the raw
// sum-of-squares denominator instead. Exact fits clamp at -300 dB.
inline double nme_db(const Matrix& predictions, const Matrix& targets,
                     bool variance_normalized = true) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
        throw std::invalid_argument("nme_db: shape mismatch");
    const double num = (targets - predictions).squaredNorm();
    double den;
    if (variance_normalized) {
        den = (targets.rowwise() - targets.colwise().mean()).squaredNorm();
        if (den == 0.0) throw std::invalid_argument("nme_db: zero target variance");
    } else {
        den = targets.squaredNorm();
        if (den == 0.0) throw std::invalid_argument("nme_db: all-zero targets");
    }
    if (num == 0.0) return kNmeFloorDb;
    return std::max(10.0 * std::log10(num / den), kNmeFloorDb);
}

// fraction of rows whose argmax matches the label; argmax ties resolve
// to the lowest class index
inline double accuracy(const Matrix& probabilities, const std::vector<int>& labels) {
    if (probabilities.rows() != static_cast<Eigen::Index>(labels.size()))
        throw std::invalid_argument("accuracy: row/label count mismatch");
    int correct = 0;
    for (Eigen::Index r = 0; r < probabilities.rows(); ++r) {
        int arg = 0;
        for (Eigen::Index c = 1; c < probabilities.cols(); ++c)
            if (probabilities(r, c) > probabilities(r, arg)) arg = static_cast<int>(c);
        if (arg == labels[static_cast<std::size_t>(r)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(probabilities.rows());
}

inline std::vector<int> labels_from_one_hot(const Matrix& targets) {
    std::vector<int> labels(static_cast<std::size_t>(targets.rows()));
    for (Eigen::Index r = 0; r < targets.rows(); ++r) {
        int arg = 0;
        for (Eigen::Index c = 1; c < targets.cols(); ++c)
            if (targets(r, c) > targets(r, arg)) arg = static_cast<int>(c);
        labels[static_cast<std::size_t>(r)] = arg;
    }
    return labels;
}

// 1 iff the averaged FNSR clears the perfect-recovery threshold
inline int phase_indicator(double avg_fnsr) {
    if (avg_fnsr < 0.0 || avg_fnsr > 1.0)
        throw std::invalid_argument("phase_indicator: avg_fnsr must be in [0, 1]");
    return avg_fnsr <= 0.005 ? 1 : 0;
}

// One run's worth of measures; absent entries are undefined for the run
// (e.g. fpsr with nothing selected, accuracy for regression).
struct MetricsRecord {
    std::optional<double> fpsr;
    std::optional<double> fnsr;
    std::optional<double> f_mse;
    std::optional<double> p_mse;
    std::optional<double> f_nme_db;
    std::optional<double> p_nme_db;
    std::optional<double> accuracy;
    std::optional<int> phase;

    static const std::vector<const char*>& field_names() {
        static const std::vector<const char*> names{
            "fpsr", "fnsr", "f_mse", "p_mse", "f_nme_db", "p_nme_db", "accuracy"};
        return names;
    }

    std::vector<std::optional<double>> fields() const {
        return {fpsr, fnsr, f_mse, p_mse, f_nme_db, p_nme_db, accuracy};
    }
};

}  // namespace ngp
