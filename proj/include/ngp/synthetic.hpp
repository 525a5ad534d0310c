#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "ngp/dataset.hpp"
#include "ngp/rng.hpp"

namespace ngp {

enum class LawKind { ohm, planck, gravitation };

inline const char* to_string(LawKind k) {
    switch (k) {
        case LawKind::ohm: return "ohm";
        case LawKind::planck: return "planck";
        case LawKind::gravitation: return "gravitation";
    }
    return "?";
}

inline int law_support_size(LawKind kind) {
    return kind == LawKind::gravitation ? 3 : 2;
}

constexpr double kGravitationalConstant = 6.674e-11;

// Target of each law as a function of its leading features. Planck's
// exponent uses x0/x1 exactly as stated, physical constants absorbed.
inline double law_target(LawKind kind, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    switch (kind) {
        case LawKind::ohm:
            return x(0) / x(1);
        case LawKind::planck:
            return 2.0 * x(0) * x(0) * x(0) / (std::exp(x(0) / x(1)) - 1.0);
        case LawKind::gravitation:
            return kGravitationalConstant * x(0) * x(1) / (x(2) * x(2));
    }
    throw std::logic_error("unreachable");
}

struct GenConfig {
    Eigen::Index samples = 1000;
    int features = 10;
    std::uint64_t seed = 0;
    double noise_sigma = 0.0;

    void validate(int min_features) const {
        if (samples < 1) throw std::invalid_argument("samples must be >= 1");
        if (features < min_features)
            throw std::invalid_argument("need at least " + std::to_string(min_features) +
                                        " features");
        if (noise_sigma < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
    }
};

// All P features i.i.d. U(10, 20); only the leading components drive the
// target, so true and irrelevant features share identical statistics.
inline Dataset gen_physical_law(LawKind kind, const GenConfig& config) {
    const int support = law_support_size(kind);
    config.validate(support);

    Rng rng(config.seed);
    Dataset data;
    data.features.resize(config.samples, config.features);
    data.targets.resize(config.samples, 1);
    for (Eigen::Index j = 0; j < config.samples; ++j) {
        for (int i = 0; i < config.features; ++i) data.features(j, i) = rng.uniform(10.0, 20.0);
        data.targets(j, 0) = law_target(kind, data.features.row(j));
    }
    std::vector<int> s(static_cast<std::size_t>(support));
    std::iota(s.begin(), s.end(), 0);
    data.true_support = std::move(s);
    return data;
}

// The "or" between features is read as the pairwise maximum.
inline double correlated_model_target(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    const double m12 = std::max(x(0), x(1));
    const double m345 = std::max(x(2), std::max(x(3), x(4)));
    const double s15 = x(0) + x(4);
    return (10.0 * std::sin(m12) + m345 * m345 * m345) / (1.0 + s15 * s15) +
           std::sin(0.5 * x(2)) * (1.0 + std::exp(x(3) - 0.5 * x(2))) + x(2) * x(2) +
           2.0 * std::sin(x(3)) + 2.0 * x(4);
}

// x_i = (e + z_i) / 2 with e shared per sample, so every pair of features
// has correlation 1/2. The target depends on the first five features plus
// N(0, noise_sigma^2) noise.
inline Dataset gen_correlated_model(const GenConfig& config) {
    config.validate(5);

    Rng rng(config.seed);
    Dataset data;
    data.features.resize(config.samples, config.features);
    data.targets.resize(config.samples, 1);
    for (Eigen::Index j = 0; j < config.samples; ++j) {
        const double e = rng.normal();
        for (int i = 0; i < config.features; ++i)
            data.features(j, i) = 0.5 * (e + rng.normal());
        const double eps = rng.normal();  // drawn regardless of sigma: same features either way
        data.targets(j, 0) = correlated_model_target(data.features.row(j)) +
                             config.noise_sigma * eps;
    }
    data.true_support = std::vector<int>{0, 1, 2, 3, 4};
    return data;
}

// Appends `count` i.i.d. U(low, high) columns. true_support is carried
// over untouched; the original indices keep their positions.
inline Dataset augment_irrelevant(const Dataset& data, int count, double low, double high,
                                  std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    if (low >= high) throw std::invalid_argument("need low < high");

    Rng rng(seed);
    Dataset out = data;
    const Eigen::Index p = data.feature_count();
    out.features.conservativeResize(Eigen::NoChange, p + count);
    for (Eigen::Index j = 0; j < data.sample_count(); ++j)
        for (int c = 0; c < count; ++c) out.features(j, p + c) = rng.uniform(low, high);
    if (!out.feature_names.empty())
        for (int c = 0; c < count; ++c) out.feature_names.push_back("aug" + std::to_string(c + 1));
    return out;
}

}  // namespace ngp
