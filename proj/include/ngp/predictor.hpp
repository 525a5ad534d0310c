#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngp/dataset.hpp"
#include "ngp/rng.hpp"

namespace ngp {

enum class LossKind { mean_square, cross_entropy };
enum class PredictorFamily { mlp, linear };

// Per-fit seeds derive from the selection master seed; the single policy
// hashes (master_seed, iteration, candidate index) so results do not
// depend on execution schedule.
enum class SeedPolicy { hash_iteration_candidate };

inline const char* to_string(LossKind k) {
    return k == LossKind::mean_square ? "mean_square" : "cross_entropy";
}
inline const char* to_string(PredictorFamily f) {
    return f == PredictorFamily::mlp ? "mlp" : "linear";
}

// Family, hyperparameters and loss. The MLP is a single hidden layer of
// ReLU units trained by mini-batch SGD with momentum; the linear family
// is a ridge regressor solved in closed form. A trained predictor also
// works for any other family added behind fit(): the selection loop only
// ever calls fit / predict / evaluate_loss.
struct PredictorSpec {
    PredictorFamily family = PredictorFamily::mlp;
    int hidden_units = 500;
    int epochs = 10;
    double learning_rate = 0.01;
    int batch_size = 32;
    double momentum = 0.9;
    double weight_decay = 1e-4;    // coefficient of the l2 penalty on weights
    LossKind loss = LossKind::mean_square;
    double ridge_lambda = 0.0;     // linear family only
    SeedPolicy seed_policy = SeedPolicy::hash_iteration_candidate;

    void validate() const {
        if (family == PredictorFamily::mlp && hidden_units < 1)
            throw std::invalid_argument("mlp requires hidden_units >= 1");
        if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
        if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (weight_decay < 0.0 || ridge_lambda < 0.0)
            throw std::invalid_argument("regularizer coefficients must be >= 0");
        if (momentum < 0.0 || momentum >= 1.0)
            throw std::invalid_argument("momentum must be in [0, 1)");
    }

    static PredictorSpec linear_spec(double ridge = 0.0) {
        PredictorSpec s;
        s.family = PredictorFamily::linear;
        s.ridge_lambda = ridge;
        s.weight_decay = 0.0;
        return s;
    }
};

namespace detail {

constexpr double kLogClamp = 1e-12;

inline Matrix softmax_rows(const Matrix& logits) {
    Matrix p = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp();
    return p.array().colwise() / p.rowwise().sum().array();
}

// mean per-sample loss; squared error is summed over target dimensions
inline double mean_loss(const Matrix& predictions, const Matrix& targets, LossKind loss) {
    const double j = static_cast<double>(targets.rows());
    if (loss == LossKind::mean_square)
        return (predictions - targets).squaredNorm() / j;
    const auto p = predictions.array().max(kLogClamp);
    return -(targets.array() * p.log()).sum() / j;
}

inline void check_targets(const Matrix& targets, LossKind loss) {
    if (loss != LossKind::cross_entropy) return;
    for (Eigen::Index r = 0; r < targets.rows(); ++r) {
        double sum = 0.0;
        for (Eigen::Index c = 0; c < targets.cols(); ++c) {
            const double v = targets(r, c);
            if (v < -1e-9 || v > 1.0 + 1e-9)
                throw std::invalid_argument("cross_entropy requires one-hot targets");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw std::invalid_argument("cross_entropy requires one-hot targets");
    }
}

}  // namespace detail

// Immutable fitted model. `parameters` is the flat parameter block; the
// layout depends on `kind`:
//   constant: [c_1..c_Q]                     (mean target / class frequencies)
//   linear:   [bias_1..bias_Q | W col-major] (W is d x Q)
//   mlp:      [W1 | b1 | W2 | b2]            (all col-major, ReLU hidden layer)
struct TrainedPredictor {
    enum class Kind { constant, linear, mlp };

    PredictorSpec spec;
    FeatureSet feature_set;
    Kind kind = Kind::constant;
    int input_dim = 0;
    int output_dim = 0;
    Vector parameters;
    double training_loss = 0.0;

    Matrix predict(const Matrix& inputs) const {
        if (inputs.cols() != input_dim)
            throw std::invalid_argument("predict: expected " + std::to_string(input_dim) +
                                        " columns, got " + std::to_string(inputs.cols()));
        const Eigen::Index j = inputs.rows();
        switch (kind) {
            case Kind::constant: {
                Matrix out(j, output_dim);
                out.rowwise() = parameters.transpose();
                return out;
            }
            case Kind::linear: {
                Eigen::Map<const Matrix> w(parameters.data() + output_dim, input_dim, output_dim);
                Matrix out = inputs * w;
                out.rowwise() += parameters.head(output_dim).transpose();
                return out;
            }
            case Kind::mlp: {
                const int h = spec.hidden_units;
                const double* p = parameters.data();
                Eigen::Map<const Matrix> w1(p, input_dim, h);
                Eigen::Map<const Vector> b1(p + input_dim * h, h);
                Eigen::Map<const Matrix> w2(p + input_dim * h + h, h, output_dim);
                Eigen::Map<const Vector> b2(p + input_dim * h + h + h * output_dim, output_dim);
                Matrix hidden = ((inputs * w1).rowwise() + b1.transpose()).cwiseMax(0.0);
                Matrix out = (hidden * w2).rowwise() + b2.transpose();
                if (spec.loss == LossKind::cross_entropy) return detail::softmax_rows(out);
                return out;
            }
        }
        throw std::logic_error("unreachable");
    }
};

namespace detail {

struct MlpLayout {
    int d, h, q;
    int w1_off = 0, b1_off, w2_off, b2_off, total;
    MlpLayout(int d_, int h_, int q_) : d(d_), h(h_), q(q_) {
        b1_off = d * h;
        w2_off = b1_off + h;
        b2_off = w2_off + h * q;
        total = b2_off + q;
    }
};

// l2 penalty on the weight matrices (biases excluded)
inline double mlp_penalty(const Vector& params, const MlpLayout& lay, double weight_decay) {
    const double w1sq = params.segment(lay.w1_off, lay.d * lay.h).squaredNorm();
    const double w2sq = params.segment(lay.w2_off, lay.h * lay.q).squaredNorm();
    return 0.5 * weight_decay * (w1sq + w2sq);
}

// batch-mean loss plus the weight penalty; the quantity SGD descends
inline double mlp_objective(const Vector& params, const MlpLayout& lay, const Matrix& x,
                            const Matrix& t, LossKind loss, double weight_decay) {
    Eigen::Map<const Matrix> w1(params.data() + lay.w1_off, lay.d, lay.h);
    Eigen::Map<const Vector> b1(params.data() + lay.b1_off, lay.h);
    Eigen::Map<const Matrix> w2(params.data() + lay.w2_off, lay.h, lay.q);
    Eigen::Map<const Vector> b2(params.data() + lay.b2_off, lay.q);

    Matrix hidden = ((x * w1).rowwise() + b1.transpose()).cwiseMax(0.0);
    Matrix y = (hidden * w2).rowwise() + b2.transpose();
    if (loss == LossKind::cross_entropy) y = softmax_rows(y);
    return mean_loss(y, t, loss) + mlp_penalty(params, lay, weight_decay);
}

inline void mlp_gradient(const Vector& params, const MlpLayout& lay, const Matrix& x,
                         const Matrix& t, LossKind loss, double weight_decay, Vector& grad) {
    const double b = static_cast<double>(x.rows());
    Eigen::Map<const Matrix> w1(params.data() + lay.w1_off, lay.d, lay.h);
    Eigen::Map<const Vector> b1(params.data() + lay.b1_off, lay.h);
    Eigen::Map<const Matrix> w2(params.data() + lay.w2_off, lay.h, lay.q);
    Eigen::Map<const Vector> b2(params.data() + lay.b2_off, lay.q);

    Matrix pre = (x * w1).rowwise() + b1.transpose();
    Matrix hidden = pre.cwiseMax(0.0);
    Matrix y = (hidden * w2).rowwise() + b2.transpose();

    // dL/dY for both heads; softmax+CE and identity+MSE share the form
    Matrix dy;
    if (loss == LossKind::cross_entropy)
        dy = (softmax_rows(y) - t) / b;
    else
        dy = 2.0 * (y - t) / b;

    grad.resize(lay.total);
    Eigen::Map<Matrix> g_w1(grad.data() + lay.w1_off, lay.d, lay.h);
    Eigen::Map<Vector> g_b1(grad.data() + lay.b1_off, lay.h);
    Eigen::Map<Matrix> g_w2(grad.data() + lay.w2_off, lay.h, lay.q);
    Eigen::Map<Vector> g_b2(grad.data() + lay.b2_off, lay.q);

    g_w2.noalias() = hidden.transpose() * dy;
    g_w2 += weight_decay * w2;
    g_b2 = dy.colwise().sum();

    Matrix dh = dy * w2.transpose();
    dh = (pre.array() > 0.0).select(dh, 0.0);

    g_w1.noalias() = x.transpose() * dh;
    g_w1 += weight_decay * w1;
    g_b1 = dh.colwise().sum();
}

inline TrainedPredictor fit_constant(const PredictorSpec& spec, const Matrix& targets,
                                     const FeatureSet& features) {
    TrainedPredictor model;
    model.spec = spec;
    model.feature_set = features;
    model.kind = TrainedPredictor::Kind::constant;
    model.input_dim = features.size();
    model.output_dim = static_cast<int>(targets.cols());
    if (spec.loss == LossKind::cross_entropy) {
        Vector counts = targets.colwise().sum();
        model.parameters = counts / counts.sum();
    } else {
        model.parameters = targets.colwise().mean();
    }
    return model;
}

inline TrainedPredictor fit_linear(const PredictorSpec& spec, const Matrix& x, const Matrix& t,
                                   const FeatureSet& features) {
    if (spec.loss != LossKind::mean_square)
        throw std::invalid_argument("linear family supports mean_square loss only");
    const Eigen::Index j = x.rows();
    const Eigen::Index d = x.cols();
    const double lambda = spec.ridge_lambda + spec.weight_decay;

    Matrix xa(j, d + 1);  // bias column first
    xa.col(0).setOnes();
    xa.rightCols(d) = x;

    Matrix beta;
    if (lambda > 0.0) {
        // minimize (1/J)||t - Xa b||^2 + lambda * ||b_weights||^2; bias unpenalized
        Matrix a = xa.transpose() * xa / static_cast<double>(j);
        for (Eigen::Index i = 1; i <= d; ++i) a(i, i) += lambda;
        beta = a.ldlt().solve(xa.transpose() * t / static_cast<double>(j));
    } else {
        beta = xa.completeOrthogonalDecomposition().solve(t);
    }

    TrainedPredictor model;
    model.spec = spec;
    model.feature_set = features;
    model.kind = TrainedPredictor::Kind::linear;
    model.input_dim = static_cast<int>(d);
    model.output_dim = static_cast<int>(t.cols());
    model.parameters.resize((d + 1) * t.cols());
    model.parameters.head(t.cols()) = beta.row(0);
    Eigen::Map<Matrix>(model.parameters.data() + t.cols(), d, t.cols()) = beta.bottomRows(d);
    return model;
}

inline TrainedPredictor fit_mlp(const PredictorSpec& spec, const Matrix& x, const Matrix& t,
                                const FeatureSet& features, std::uint64_t seed) {
    const int d = static_cast<int>(x.cols());
    const int h = spec.hidden_units;
    const int q = static_cast<int>(t.cols());
    const Eigen::Index j = x.rows();
    const MlpLayout lay(d, h, q);

    TrainedPredictor model;
    model.spec = spec;
    model.feature_set = features;
    model.kind = TrainedPredictor::Kind::mlp;
    model.input_dim = d;
    model.output_dim = q;
    model.parameters = Vector::Zero(lay.total);

    Rng rng(seed);
    const double bound1 = std::sqrt(6.0 / static_cast<double>(d + h));
    const double bound2 = std::sqrt(6.0 / static_cast<double>(h + q));
    for (int i = 0; i < d * h; ++i)
        model.parameters(lay.w1_off + i) = rng.uniform(-bound1, bound1);
    for (int i = 0; i < h * q; ++i)
        model.parameters(lay.w2_off + i) = rng.uniform(-bound2, bound2);

    Vector velocity = Vector::Zero(lay.total);
    Vector grad(lay.total);
    std::vector<int> order(static_cast<std::size_t>(j));
    std::iota(order.begin(), order.end(), 0);

    Matrix xb, tb;
    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        rng.shuffle(order);
        for (Eigen::Index start = 0; start < j; start += spec.batch_size) {
            const Eigen::Index b = std::min<Eigen::Index>(spec.batch_size, j - start);
            xb.resize(b, d);
            tb.resize(b, q);
            for (Eigen::Index r = 0; r < b; ++r) {
                xb.row(r) = x.row(order[static_cast<std::size_t>(start + r)]);
                tb.row(r) = t.row(order[static_cast<std::size_t>(start + r)]);
            }
            mlp_gradient(model.parameters, lay, xb, tb, spec.loss, spec.weight_decay, grad);
            velocity = spec.momentum * velocity - spec.learning_rate * grad;
            model.parameters += velocity;
        }
        if (!model.parameters.allFinite())
            throw std::runtime_error("non-finite parameters during training at epoch " +
                                     std::to_string(epoch + 1));
    }
    return model;
}

}  // namespace detail

// Trains a predictor of spec.family on restrict(train, features).
// Deterministic for fixed (spec, data, features, seed). An empty feature
// set yields the bias-only model for any family.
inline TrainedPredictor fit(const PredictorSpec& spec, const Dataset& train,
                            const FeatureSet& features, std::uint64_t seed) {
    spec.validate();
    if (train.sample_count() < 1) throw std::invalid_argument("fit: empty training set");
    features.validate(static_cast<int>(train.feature_count()));
    detail::check_targets(train.targets, spec.loss);

    TrainedPredictor model;
    if (features.empty()) {
        model = detail::fit_constant(spec, train.targets, features);
    } else {
        const Dataset sub = restrict_features(train, features);
        if (spec.family == PredictorFamily::linear)
            model = detail::fit_linear(spec, sub.features, sub.targets, features);
        else
            model = detail::fit_mlp(spec, sub.features, sub.targets, features, seed);
        model.training_loss =
            detail::mean_loss(model.predict(sub.features), sub.targets, spec.loss);
        return model;
    }
    const Matrix x(train.sample_count(), 0);
    model.training_loss =
        detail::mean_loss(model.predict(x), train.targets, spec.loss);
    return model;
}

// Mean per-sample validation loss. The caller restricts `data` to the
// model's feature set; no regularizer enters here.
inline double evaluate_loss(const TrainedPredictor& model, const Dataset& data) {
    if (data.feature_count() != model.input_dim)
        throw std::invalid_argument("evaluate_loss: dataset not restricted to model features");
    return detail::mean_loss(model.predict(data.features), data.targets, model.spec.loss);
}

// L for the empty feature set: the loss of the bias-only model, used to
// anchor the relative-improvement stopping rule at the first iteration.
inline double constant_baseline_loss(const Dataset& train, const Dataset& validation,
                                     LossKind loss) {
    if (train.sample_count() < 1 || validation.sample_count() < 1)
        throw std::invalid_argument("constant_baseline_loss: empty dataset");
    if (train.target_count() != validation.target_count())
        throw std::invalid_argument("constant_baseline_loss: target dimension mismatch");
    PredictorSpec spec;
    spec.loss = loss;
    const TrainedPredictor model = fit(spec, train, FeatureSet{}, 0);
    Dataset empty_view = validation;
    empty_view.features.resize(validation.sample_count(), 0);
    return evaluate_loss(model, empty_view);
}

}  // namespace ngp
