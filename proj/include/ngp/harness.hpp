#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ngp/baselines.hpp"
#include "ngp/dataset.hpp"
#include "ngp/io.hpp"
#include "ngp/json_io.hpp"
#include "ngp/metrics.hpp"
#include "ngp/parallel.hpp"
#include "ngp/select.hpp"
#include "ngp/synthetic.hpp"

namespace ngp {

// seed-derivation tags; every random draw of a run traces back to
// (master_seed, run index, one of these)
namespace seed_tag {
constexpr std::uint64_t generate = 1;
constexpr std::uint64_t split = 2;
constexpr std::uint64_t select = 3;
constexpr std::uint64_t augment = 4;
constexpr std::uint64_t random_order = 5;
constexpr std::uint64_t refit = 6;
}  // namespace seed_tag

struct DatasetSpec {
    enum class Kind { generator, csv, idx };
    Kind kind = Kind::generator;

    // generator
    std::string generator = "correlated";  // ohm | planck | gravitation | correlated
    GenConfig gen;

    // csv
    std::string csv_path;
    std::vector<std::string> target_columns;
    bool has_header = true;

    // idx
    std::string images_path, labels_path;
    std::optional<std::size_t> limit;

    // optional irrelevant-feature augmentation (any kind)
    int augment_count = 0;
    double augment_low = -10.0, augment_high = 10.0;
    bool mark_original_support = true;  // csv without support: originals become the truth

    // known support for file-backed datasets (e.g. from a generate sidecar), 0-based
    std::optional<std::vector<int>> true_support_override;

    bool is_law() const {
        return kind == Kind::generator && generator != "correlated";
    }
};

enum class Method { ngp, ngp_group, correlation, lasso };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::ngp: return "ngp";
        case Method::ngp_group: return "ngp_group";
        case Method::correlation: return "correlation";
        case Method::lasso: return "lasso";
    }
    return "?";
}

enum class SweepAxis { none, sample_size, cardinality, eta, rank_order };

inline const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::none: return "none";
        case SweepAxis::sample_size: return "sample_size";
        case SweepAxis::cardinality: return "cardinality";
        case SweepAxis::eta: return "eta";
        case SweepAxis::rank_order: return "rank_order";
    }
    return "?";
}

struct GroupSpec {
    int rows = 0, cols = 0;
    int window_h = 4, window_w = 4;
    int stride = 4;  // no principled default exists; always set explicitly
};

struct ExperimentConfig {
    DatasetSpec dataset;
    Method method = Method::ngp;
    SplitFractions split{0.4, 0.1, 0.5};
    NgpConfig ngp;
    GroupSpec group;
    double lasso_lambda = 0.01;
    double importance_threshold = 0.01;
    int runs = 10;
    std::uint64_t master_seed = 42;
    int threads = 0;  // 0 = hardware concurrency
    SweepAxis axis = SweepAxis::none;
    std::vector<double> axis_values;
    int k_max = 0;  // cardinality sweep
    bool nme_variance_normalized = true;
    std::string out;

    void validate() const {
        if (runs < 1) throw std::invalid_argument("runs: must be >= 1");
        if (axis == SweepAxis::sample_size || axis == SweepAxis::eta) {
            if (axis_values.empty()) throw std::invalid_argument("sweep.values: empty");
        }
        if (axis == SweepAxis::sample_size)
            for (std::size_t i = 1; i < axis_values.size(); ++i)
                if (axis_values[i] <= axis_values[i - 1])
                    throw std::invalid_argument("sweep.values: sample sizes must ascend");
        if (axis == SweepAxis::cardinality && k_max < 1)
            throw std::invalid_argument("sweep.k_max: must be >= 1");
        if (axis == SweepAxis::rank_order && ngp.max_features < 1)
            throw std::invalid_argument("ngp.max_features: rank_order sweep needs a known N");
        if (method == Method::ngp_group && (group.rows < 1 || group.cols < 1))
            throw std::invalid_argument("group.rows/cols: required for ngp_group");
    }
};

// ---------------------------------------------------------------------------
// per-run data pipeline

struct PreparedData {
    DataSplit split;      // feature-standardized; regression targets z-scored
    Dataset fit_portion;  // train + validation combined (the original training data)
    std::vector<int> truth;
    bool classification = false;
};

namespace detail {

inline Dataset concat_rows(const Dataset& a, const Dataset& b) {
    Dataset out;
    out.features.resize(a.sample_count() + b.sample_count(), a.feature_count());
    out.features << a.features, b.features;
    out.targets.resize(a.sample_count() + b.sample_count(), a.target_count());
    out.targets << a.targets, b.targets;
    out.feature_names = a.feature_names;
    out.true_support = a.true_support;
    return out;
}

inline Dataset load_dataset(const DatasetSpec& spec, std::uint64_t run_seed,
                            std::optional<Eigen::Index> samples_override) {
    Dataset data;
    switch (spec.kind) {
        case DatasetSpec::Kind::generator: {
            GenConfig gen = spec.gen;
            gen.seed = seed_combine(run_seed, seed_tag::generate);
            if (samples_override) gen.samples = *samples_override;
            if (spec.generator == "correlated")
                data = gen_correlated_model(gen);
            else if (spec.generator == "ohm")
                data = gen_physical_law(LawKind::ohm, gen);
            else if (spec.generator == "planck")
                data = gen_physical_law(LawKind::planck, gen);
            else if (spec.generator == "gravitation")
                data = gen_physical_law(LawKind::gravitation, gen);
            else
                throw std::invalid_argument("dataset.generator: unknown value '" +
                                            spec.generator + "'");
            break;
        }
        case DatasetSpec::Kind::csv:
            data = load_csv(spec.csv_path, spec.target_columns, spec.has_header);
            break;
        case DatasetSpec::Kind::idx:
            data = load_idx(spec.images_path, spec.labels_path, spec.limit);
            break;
    }
    if (spec.true_support_override) data.true_support = spec.true_support_override;
    if (spec.augment_count > 0) {
        if (!data.true_support && spec.mark_original_support) {
            std::vector<int> all(static_cast<std::size_t>(data.feature_count()));
            std::iota(all.begin(), all.end(), 0);
            data.true_support = std::move(all);
        }
        data = augment_irrelevant(data, spec.augment_count, spec.augment_low,
                                  spec.augment_high, seed_combine(run_seed, seed_tag::augment));
    }
    return data;
}

}  // namespace detail

// Generate/load, split, and standardize one run's data. Feature scaling
// and (for regression) target z-scoring both use train-portion statistics
// and are shared by every method, so losses stay comparable.
inline PreparedData prepare_run_data(const ExperimentConfig& config, std::uint64_t run_seed,
                                     std::optional<Eigen::Index> samples_override = {}) {
    Dataset data = detail::load_dataset(config.dataset, run_seed, samples_override);
    DataSplit split =
        ngp::split(data, config.split, seed_combine(run_seed, seed_tag::split));

    PreparedData out;
    out.classification = config.ngp.predictor.loss == LossKind::cross_entropy;
    if (data.true_support) out.truth = *data.true_support;

    auto [train_scaled, params] = standardize(split.train);
    out.split.train = std::move(train_scaled);
    out.split.validation = split.validation.sample_count() > 0
                               ? apply_scaling(split.validation, params)
                               : split.validation;
    if (split.test) out.split.test = apply_scaling(*split.test, params);

    if (!out.classification) {
        const double t_mean = out.split.train.targets.mean();
        const double t_sd = std::sqrt(
            (out.split.train.targets.array() - t_mean).square().sum() /
            std::max<double>(1.0, static_cast<double>(out.split.train.targets.size() - 1)));
        const double scale = t_sd > 0.0 ? t_sd : 1.0;
        auto rescale = [&](Dataset& d) { d.targets = (d.targets.array() - t_mean) / scale; };
        rescale(out.split.train);
        if (out.split.validation.sample_count() > 0) rescale(out.split.validation);
        if (out.split.test) rescale(*out.split.test);
    }

    out.fit_portion = out.split.validation.sample_count() > 0
                          ? detail::concat_rows(out.split.train, out.split.validation)
                          : out.split.train;
    return out;
}

// ---------------------------------------------------------------------------
// sweep results

struct AxisPoint {
    double axis = 0.0;
    // metric name -> one optional value per run (metric order fixed by SweepResult)
    std::map<std::string, std::vector<std::optional<double>>> values;
    std::vector<Json> raw;  // one record per run
};

struct SweepResult {
    std::string axis_name = "point";
    std::vector<std::string> metric_names;
    std::vector<AxisPoint> points;
    bool include_phase = false;  // append a phase column computed from fnsr means
    Json config_echo;

    static double mean_of(const std::vector<std::optional<double>>& v) {
        double sum = 0.0;
        int n = 0;
        for (const auto& x : v)
            if (x) {
                sum += *x;
                ++n;
            }
        return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
    }

    static double std_of(const std::vector<std::optional<double>>& v) {
        const double m = mean_of(v);
        if (std::isnan(m)) return m;
        double sq = 0.0;
        int n = 0;
        for (const auto& x : v)
            if (x) {
                sq += (*x - m) * (*x - m);
                ++n;
            }
        return n > 1 ? std::sqrt(sq / (n - 1)) : 0.0;
    }
};

namespace detail {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline const std::vector<std::string>& standard_metric_names() {
    static const std::vector<std::string> names{"fpsr",     "fnsr",     "f_mse",   "p_mse",
                                                "f_nme_db", "p_nme_db", "accuracy"};
    return names;
}

}  // namespace detail

inline std::string summary_csv(const SweepResult& result) {
    std::string out = result.axis_name;
    for (const auto& name : result.metric_names) out += "," + name + "_mean," + name + "_std";
    if (result.include_phase) out += ",phase";
    out += ",runs\n";
    for (const auto& point : result.points) {
        out += detail::format_double(point.axis);
        std::size_t runs = 0;
        for (const auto& name : result.metric_names) {
            const auto it = point.values.find(name);
            if (it == point.values.end()) {
                out += ",nan,nan";
                continue;
            }
            runs = std::max(runs, it->second.size());
            out += "," + detail::format_double(SweepResult::mean_of(it->second));
            out += "," + detail::format_double(SweepResult::std_of(it->second));
        }
        if (result.include_phase) {
            const auto it = point.values.find("fnsr");
            const double fnsr_mean =
                it != point.values.end() ? SweepResult::mean_of(it->second)
                                         : std::numeric_limits<double>::quiet_NaN();
            out += "," + (std::isnan(fnsr_mean)
                              ? std::string("nan")
                              : std::to_string(phase_indicator(fnsr_mean)));
        }
        out += "," + std::to_string(runs) + "\n";
    }
    return out;
}

// <out>/{summary.csv, raw.jsonl, config.json}; byte-stable across reruns
inline void persist_results(const SweepResult& result, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::ofstream summary(fs::path(dir) / "summary.csv");
    if (!summary) throw std::runtime_error("cannot write " + dir + "/summary.csv");
    summary << summary_csv(result);

    std::ofstream raw(fs::path(dir) / "raw.jsonl");
    for (const auto& point : result.points)
        for (const auto& record : point.raw) raw << record.dump() << "\n";

    std::ofstream cfg(fs::path(dir) / "config.json");
    cfg << result.config_echo.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// one Monte-Carlo run

struct RunResult {
    MetricsRecord metrics;
    std::vector<int> selected;
    std::string stop_reason = "n/a";
    long trainings = 0;
    SelectionResult selection;   // populated for ngp methods
    bool has_selection = false;
    Vector importance;           // populated for correlation/lasso
};

namespace detail {

using RunOutcome = RunResult;

inline void fill_predictive_metrics(const ExperimentConfig& config, const PreparedData& data,
                                    const TrainedPredictor& model, const FeatureSet& features,
                                    MetricsRecord& metrics) {
    const Dataset fit_view = restrict_features(data.fit_portion, features);
    const Matrix fit_pred = model.predict(fit_view.features);
    metrics.f_mse = mse(fit_pred, fit_view.targets);
    if (!data.classification)
        metrics.f_nme_db =
            nme_db(fit_pred, fit_view.targets, config.nme_variance_normalized);
    if (data.split.test) {
        const Dataset test_view = restrict_features(*data.split.test, features);
        const Matrix test_pred = model.predict(test_view.features);
        metrics.p_mse = mse(test_pred, test_view.targets);
        if (!data.classification)
            metrics.p_nme_db =
                nme_db(test_pred, test_view.targets, config.nme_variance_normalized);
        if (data.classification)
            metrics.accuracy = accuracy(test_pred, labels_from_one_hot(test_view.targets));
    }
}

inline RunOutcome execute_run(const ExperimentConfig& config, int run_index,
                              int inner_threads, std::optional<Eigen::Index> samples_override,
                              std::optional<double> eta_override) {
    const std::uint64_t run_seed = seed_combine(config.master_seed, run_index);
    const PreparedData data = prepare_run_data(config, run_seed, samples_override);

    RunOutcome out;
    switch (config.method) {
        case Method::ngp:
        case Method::ngp_group: {
            NgpConfig ngp_config = config.ngp;
            ngp_config.master_seed = seed_combine(run_seed, seed_tag::select);
            ngp_config.parallel_candidates = inner_threads;
            if (eta_override) ngp_config.eta = *eta_override;
            out.selection =
                config.method == Method::ngp
                    ? ngp_select(data.split, ngp_config)
                    : ngp_group_select(data.split, config.group.rows, config.group.cols,
                                       config.group.window_h, config.group.window_w,
                                       config.group.stride, ngp_config);
            out.has_selection = true;
            out.selected = out.selection.selected.indices;
            out.stop_reason = to_string(out.selection.stop_reason);
            out.trainings = out.selection.trainings_performed;
            if (!out.selection.selected.empty())
                fill_predictive_metrics(config, data, out.selection.final_model,
                                        out.selection.selected, out.metrics);
            break;
        }
        case Method::correlation: {
            const auto importance = correlation_importance(data.fit_portion);
            const auto selected =
                select_by_importance(importance, config.importance_threshold);
            out.selected = selected.indices;
            out.importance = importance.values;
            break;  // selector only: predictive metrics stay undefined
        }
        case Method::lasso: {
            // spec formula carries no intercept; center targets here and add
            // the mean back for predictions
            Dataset fit_data = data.fit_portion;
            const double t_mean = fit_data.targets.col(0).mean();
            fit_data.targets.array() -= t_mean;
            const auto lasso = lasso_fit(fit_data, config.lasso_lambda);
            const auto selected =
                select_by_importance(lasso.importance, config.importance_threshold);
            out.selected = selected.indices;
            out.importance = lasso.importance.values;

            const Matrix fit_pred =
                (data.fit_portion.features * lasso.coefficients).array() + t_mean;
            out.metrics.f_mse = mse(fit_pred, data.fit_portion.targets);
            out.metrics.f_nme_db = nme_db(fit_pred, data.fit_portion.targets,
                                          config.nme_variance_normalized);
            if (data.split.test) {
                const Matrix test_pred =
                    (data.split.test->features * lasso.coefficients).array() + t_mean;
                out.metrics.p_mse = mse(test_pred, data.split.test->targets);
                out.metrics.p_nme_db = nme_db(test_pred, data.split.test->targets,
                                              config.nme_variance_normalized);
            }
            break;
        }
    }

    FeatureSet selected_set{out.selected};
    if (!data.truth.empty()) {
        out.metrics.fpsr = fpsr(selected_set, data.truth);
        out.metrics.fnsr = fnsr(selected_set, data.truth);
    }
    return out;
}

inline Json run_record(const ExperimentConfig& config, double axis, int run,
                       const RunOutcome& outcome) {
    Json j{{"axis", axis},
           {"run", run},
           {"seed", seed_combine(config.master_seed, run)},
           {"method", to_string(config.method)},
           {"metrics", to_json(outcome.metrics)},
           {"selected", to_one_based(outcome.selected)},
           {"stop_reason", outcome.stop_reason},
           {"trainings_performed", outcome.trainings}};
    return j;
}

inline void append_outcome(AxisPoint& point, const MetricsRecord& metrics, int run_index) {
    const auto& names = standard_metric_names();
    const auto values = metrics.fields();
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto& column = point.values[names[i]];
        column.resize(static_cast<std::size_t>(run_index) + 1);
        column[static_cast<std::size_t>(run_index)] = values[i];
    }
}

struct ThreadBudget {
    int outer, inner;
};

inline ThreadBudget split_threads(int total, int runs) {
    const int t = total > 0 ? total : hardware_threads();
    const int outer = std::max(1, std::min(t, runs));
    const int inner = std::max(1, t / outer);
    return {outer, inner};
}

inline Json config_echo(const ExperimentConfig& config);

// shared Monte-Carlo batch: one axis point, `runs` independent seeds,
// optional per-point overrides for the sweep axes
inline AxisPoint monte_carlo_point(const ExperimentConfig& config, double axis,
                                   std::optional<Eigen::Index> samples_override,
                                   std::optional<double> eta_override) {
    const auto budget = split_threads(config.threads, config.runs);
    AxisPoint point;
    point.axis = axis;
    point.raw.resize(static_cast<std::size_t>(config.runs));
    std::vector<RunOutcome> outcomes(static_cast<std::size_t>(config.runs));
    std::string first_error;

    parallel_for(static_cast<std::size_t>(config.runs), budget.outer, [&](std::size_t r) {
        try {
            outcomes[r] = execute_run(config, static_cast<int>(r), budget.inner,
                                      samples_override, eta_override);
        } catch (const std::exception& e) {
            throw std::runtime_error("run " + std::to_string(r) + ": " + e.what());
        }
    });

    for (int r = 0; r < config.runs; ++r) {
        const auto& outcome = outcomes[static_cast<std::size_t>(r)];
        append_outcome(point, outcome.metrics, r);
        point.raw[static_cast<std::size_t>(r)] = run_record(config, axis, r, outcome);
    }
    return point;
}

}  // namespace detail

// One generate/split/select/evaluate cycle under run_index's derived seed;
// what `select` does, and what every Monte-Carlo run repeats.
inline RunResult run_single(const ExperimentConfig& config, int run_index = 0) {
    const auto budget = detail::split_threads(config.threads, 1);
    return detail::execute_run(config, run_index, budget.inner, {}, {});
}

// Monte-Carlo batch without a sweep axis: aggregates `runs` independent
// generate/split/select/evaluate cycles.
inline SweepResult run_monte_carlo(const ExperimentConfig& config) {
    config.validate();
    SweepResult result;
    result.axis_name = "point";
    result.metric_names = detail::standard_metric_names();
    result.include_phase = false;
    result.points.push_back(detail::monte_carlo_point(config, 0.0, {}, {}));
    result.config_echo = detail::config_echo(config);
    return result;
}

// FNSR (and friends) versus the generated sample count; the phase column
// marks axis points whose mean FNSR clears the recovery threshold.
inline SweepResult sweep_sample_size(const ExperimentConfig& config) {
    config.validate();
    if (config.dataset.kind != DatasetSpec::Kind::generator)
        throw std::invalid_argument("sweep.values: sample_size sweep needs a generator dataset");
    SweepResult result;
    result.axis_name = "sample_size";
    result.metric_names = detail::standard_metric_names();
    result.include_phase = true;
    for (double j : config.axis_values)
        result.points.push_back(
            detail::monte_carlo_point(config, j, static_cast<Eigen::Index>(j), {}));
    result.config_echo = detail::config_echo(config);
    return result;
}

// FPSR/FNSR trade-off across the stopping threshold grid
inline SweepResult sweep_eta(const ExperimentConfig& config) {
    config.validate();
    SweepResult result;
    result.axis_name = "eta";
    result.metric_names = detail::standard_metric_names();
    result.include_phase = true;
    for (double eta : config.axis_values)
        result.points.push_back(detail::monte_carlo_point(config, eta, {}, eta));
    result.config_echo = detail::config_echo(config);
    return result;
}

// Loss versus selected-set size. One selection run per Monte-Carlo trial
// suffices: the k-th iteration winner is exactly the model on the k-prefix,
// so every prefix point reuses it.
inline SweepResult sweep_cardinality(const ExperimentConfig& config) {
    config.validate();
    if (config.method != Method::ngp)
        throw std::invalid_argument("method: cardinality sweep requires ngp");

    ExperimentConfig run_config = config;
    run_config.ngp.max_features = config.k_max;
    run_config.ngp.eta.reset();
    run_config.ngp.retain_iteration_models = true;

    const auto budget = detail::split_threads(config.threads, config.runs);
    std::vector<detail::RunOutcome> outcomes(static_cast<std::size_t>(config.runs));
    std::vector<PreparedData> data(static_cast<std::size_t>(config.runs));
    parallel_for(static_cast<std::size_t>(config.runs), budget.outer, [&](std::size_t r) {
        const std::uint64_t run_seed = seed_combine(config.master_seed, r);
        data[r] = prepare_run_data(run_config, run_seed, {});
        outcomes[r] = detail::execute_run(run_config, static_cast<int>(r), budget.inner, {}, {});
    });

    SweepResult result;
    result.axis_name = "cardinality";
    result.metric_names = detail::standard_metric_names();
    result.include_phase = true;
    result.points.resize(static_cast<std::size_t>(config.k_max));
    for (int k = 1; k <= config.k_max; ++k) {
        auto& point = result.points[static_cast<std::size_t>(k - 1)];
        point.axis = k;
        for (int r = 0; r < config.runs; ++r) {
            const auto& outcome = outcomes[static_cast<std::size_t>(r)];
            const auto& models = outcome.selection.iteration_models;
            MetricsRecord prefix_metrics;
            std::vector<int> prefix;
            if (static_cast<int>(models.size()) >= k) {
                prefix.assign(outcome.selected.begin(), outcome.selected.begin() + k);
                detail::fill_predictive_metrics(config, data[static_cast<std::size_t>(r)],
                                                models[static_cast<std::size_t>(k - 1)],
                                                FeatureSet{prefix}, prefix_metrics);
                if (!data[static_cast<std::size_t>(r)].truth.empty()) {
                    prefix_metrics.fpsr =
                        fpsr(FeatureSet{prefix}, data[static_cast<std::size_t>(r)].truth);
                    prefix_metrics.fnsr =
                        fnsr(FeatureSet{prefix}, data[static_cast<std::size_t>(r)].truth);
                }
            }
            detail::append_outcome(point, prefix_metrics, r);
            Json record = detail::run_record(config, point.axis, r, outcomes[r]);
            record["metrics"] = to_json(prefix_metrics);
            record["selected"] =
                to_one_based(std::vector<int>(prefix.begin(), prefix.end()));
            point.raw.push_back(std::move(record));
        }
    }
    result.config_echo = detail::config_echo(config);
    return result;
}

// Test loss of prefix-retrained predictors for the selection order, the
// reversed order, and a fresh random subset per run.
inline SweepResult rank_order_curves(const ExperimentConfig& config) {
    config.validate();
    if (config.method != Method::ngp)
        throw std::invalid_argument("method: rank_order sweep requires ngp");
    const int n = config.ngp.max_features;

    ExperimentConfig run_config = config;
    run_config.ngp.eta.reset();

    const auto budget = detail::split_threads(config.threads, config.runs);
    struct Curves {
        std::vector<double> ngp, reversed, random;
    };
    std::vector<Curves> curves(static_cast<std::size_t>(config.runs));
    std::vector<Json> raw(static_cast<std::size_t>(config.runs));

    parallel_for(static_cast<std::size_t>(config.runs), budget.outer, [&](std::size_t r) {
        const std::uint64_t run_seed = seed_combine(config.master_seed, r);
        const PreparedData data = prepare_run_data(run_config, run_seed, {});
        if (!data.split.test) throw std::runtime_error("rank_order sweep needs a test split");
        auto outcome = detail::execute_run(run_config, static_cast<int>(r), budget.inner, {}, {});
        if (static_cast<int>(outcome.selected.size()) != n)
            throw std::runtime_error("selection returned fewer than max_features features");

        std::vector<int> reversed(outcome.selected.rbegin(), outcome.selected.rend());
        std::vector<int> pool(static_cast<std::size_t>(data.split.train.feature_count()));
        std::iota(pool.begin(), pool.end(), 0);
        Rng rng(seed_combine(run_seed, seed_tag::random_order));
        rng.shuffle(pool);
        std::vector<int> random(pool.begin(), pool.begin() + n);

        auto curve = [&](const std::vector<int>& order, std::uint64_t curve_tag) {
            std::vector<double> nme(static_cast<std::size_t>(n));
            for (int k = 1; k <= n; ++k) {
                FeatureSet prefix{std::vector<int>(order.begin(), order.begin() + k)};
                const auto model =
                    fit(run_config.ngp.predictor, data.split.train, prefix,
                        seed_combine(run_seed, seed_tag::refit, curve_tag, k));
                const Dataset view = restrict_features(*data.split.test, prefix);
                nme[static_cast<std::size_t>(k - 1)] =
                    nme_db(model.predict(view.features), view.targets,
                           config.nme_variance_normalized);
            }
            return nme;
        };
        curves[r].ngp = curve(outcome.selected, 1);
        curves[r].reversed = curve(reversed, 2);
        curves[r].random = curve(random, 3);

        raw[r] = Json{{"run", static_cast<int>(r)},
                      {"seed", run_seed},
                      {"selected", to_one_based(outcome.selected)},
                      {"random_order", to_one_based(random)},
                      {"ngp_p_nme_db", curves[r].ngp},
                      {"reversed_p_nme_db", curves[r].reversed},
                      {"random_p_nme_db", curves[r].random}};
    });

    SweepResult result;
    result.axis_name = "prefix_length";
    result.metric_names = {"ngp_p_nme_db", "reversed_p_nme_db", "random_p_nme_db"};
    result.include_phase = false;
    for (int k = 1; k <= n; ++k) {
        AxisPoint point;
        point.axis = k;
        for (int r = 0; r < config.runs; ++r) {
            point.values["ngp_p_nme_db"].push_back(curves[r].ngp[k - 1]);
            point.values["reversed_p_nme_db"].push_back(curves[r].reversed[k - 1]);
            point.values["random_p_nme_db"].push_back(curves[r].random[k - 1]);
            if (k == 1) point.raw.push_back(raw[r]);
        }
        result.points.push_back(std::move(point));
    }
    result.config_echo = detail::config_echo(config);
    return result;
}

inline SweepResult run_experiment(const ExperimentConfig& config) {
    switch (config.axis) {
        case SweepAxis::none: return run_monte_carlo(config);
        case SweepAxis::sample_size: return sweep_sample_size(config);
        case SweepAxis::cardinality: return sweep_cardinality(config);
        case SweepAxis::eta: return sweep_eta(config);
        case SweepAxis::rank_order: return rank_order_curves(config);
    }
    throw std::logic_error("unreachable");
}

// JSON experiment schema (the `sweep` subcommand input). Validation
// errors name the offending field.
inline ExperimentConfig experiment_config_from_json(const Json& j) {
    ExperimentConfig config;

    if (!j.contains("dataset")) throw std::invalid_argument("dataset: required");
    const Json& d = j.at("dataset");
    if (d.contains("generator")) {
        config.dataset.kind = DatasetSpec::Kind::generator;
        config.dataset.generator = d.at("generator");
        if (d.contains("samples")) config.dataset.gen.samples = d.at("samples");
        if (d.contains("features")) config.dataset.gen.features = d.at("features");
        if (d.contains("noise_sigma")) config.dataset.gen.noise_sigma = d.at("noise_sigma");
    } else if (d.contains("csv")) {
        config.dataset.kind = DatasetSpec::Kind::csv;
        config.dataset.csv_path = d.at("csv");
        if (!d.contains("targets")) throw std::invalid_argument("dataset.targets: required for csv");
        config.dataset.target_columns = d.at("targets").get<std::vector<std::string>>();
        if (d.contains("header")) config.dataset.has_header = d.at("header");
        if (d.contains("true_support")) {  // 1-based, like all user-facing indices
            std::vector<int> support;
            for (int i : d.at("true_support").get<std::vector<int>>()) support.push_back(i - 1);
            config.dataset.true_support_override = std::move(support);
        } else {
            // a sidecar written by `generate` carries the support
            std::filesystem::path side(config.dataset.csv_path);
            side.replace_extension(".json");
            if (std::filesystem::exists(side)) {
                std::ifstream in(side);
                Json meta;
                in >> meta;
                if (meta.contains("true_support")) {
                    std::vector<int> support;
                    for (int i : meta.at("true_support").get<std::vector<int>>())
                        support.push_back(i - 1);
                    config.dataset.true_support_override = std::move(support);
                }
            }
        }
    } else if (d.contains("images")) {
        config.dataset.kind = DatasetSpec::Kind::idx;
        config.dataset.images_path = d.at("images");
        if (!d.contains("labels")) throw std::invalid_argument("dataset.labels: required for idx");
        config.dataset.labels_path = d.at("labels");
        if (d.contains("limit")) config.dataset.limit = d.at("limit").get<std::size_t>();
    } else {
        throw std::invalid_argument("dataset: needs one of generator/csv/images");
    }
    if (d.contains("augment")) {
        const Json& a = d.at("augment");
        config.dataset.augment_count = a.at("count");
        if (a.contains("low")) config.dataset.augment_low = a.at("low");
        if (a.contains("high")) config.dataset.augment_high = a.at("high");
    }

    if (j.contains("method")) {
        const std::string m = j.at("method");
        if (m == "ngp")
            config.method = Method::ngp;
        else if (m == "ngp_group")
            config.method = Method::ngp_group;
        else if (m == "correlation")
            config.method = Method::correlation;
        else if (m == "lasso")
            config.method = Method::lasso;
        else
            throw std::invalid_argument("method: unknown value '" + m + "'");
    }

    if (j.contains("split")) {
        const Json& s = j.at("split");
        config.split.train = s.value("train", config.split.train);
        config.split.validation = s.value("validation", config.split.validation);
        config.split.test = s.value("test", config.split.test);
    }

    // predictor defaults scale with the problem: the small physical-law
    // problems use a downsized hidden layer unless configured otherwise
    PredictorSpec defaults;
    if (config.dataset.is_law()) {
        defaults.hidden_units = 100;
        defaults.epochs = 40;
    }
    if (config.dataset.kind == DatasetSpec::Kind::idx)
        defaults.loss = LossKind::cross_entropy;
    config.ngp.predictor =
        j.contains("predictor") ? predictor_spec_from_json(j.at("predictor"), defaults) : defaults;

    if (j.contains("ngp")) {
        const Json& n = j.at("ngp");
        if (n.contains("max_features")) config.ngp.max_features = n.at("max_features");
        if (n.contains("eta") && !n.at("eta").is_null())
            config.ngp.eta = n.at("eta").get<double>();
        if (n.contains("retain_candidate_losses"))
            config.ngp.retain_candidate_losses = n.at("retain_candidate_losses");
        if (n.contains("skip_failed_candidates"))
            config.ngp.skip_failed_candidates = n.at("skip_failed_candidates");
    }

    if (j.contains("group")) {
        const Json& g = j.at("group");
        config.group.rows = g.value("rows", 0);
        config.group.cols = g.value("cols", 0);
        if (g.contains("window")) {
            config.group.window_h = g.at("window").at(0);
            config.group.window_w = g.at("window").at(1);
        }
        if (!g.contains("stride"))
            throw std::invalid_argument("group.stride: required (no paper default exists)");
        config.group.stride = g.at("stride");
    }

    if (j.contains("lasso") && j.at("lasso").contains("lambda"))
        config.lasso_lambda = j.at("lasso").at("lambda");
    if (j.contains("importance_threshold"))
        config.importance_threshold = j.at("importance_threshold");
    if (j.contains("runs")) config.runs = j.at("runs");
    if (j.contains("master_seed")) config.master_seed = j.at("master_seed");
    if (j.contains("threads")) config.threads = j.at("threads");
    if (j.contains("nme_variance_normalized"))
        config.nme_variance_normalized = j.at("nme_variance_normalized");
    if (j.contains("out")) config.out = j.at("out");

    if (j.contains("sweep")) {
        const Json& s = j.at("sweep");
        const std::string axis = s.value("axis", "none");
        if (axis == "none")
            config.axis = SweepAxis::none;
        else if (axis == "sample_size")
            config.axis = SweepAxis::sample_size;
        else if (axis == "cardinality")
            config.axis = SweepAxis::cardinality;
        else if (axis == "eta")
            config.axis = SweepAxis::eta;
        else if (axis == "rank_order")
            config.axis = SweepAxis::rank_order;
        else
            throw std::invalid_argument("sweep.axis: unknown value '" + axis + "'");
        if (s.contains("values"))
            config.axis_values = s.at("values").get<std::vector<double>>();
        if (s.contains("k_max")) config.k_max = s.at("k_max");
    }

    config.validate();
    return config;
}

namespace detail {

inline Json config_echo(const ExperimentConfig& config) {
    Json dataset;
    switch (config.dataset.kind) {
        case DatasetSpec::Kind::generator:
            dataset = Json{{"generator", config.dataset.generator},
                           {"samples", config.dataset.gen.samples},
                           {"features", config.dataset.gen.features},
                           {"noise_sigma", config.dataset.gen.noise_sigma}};
            break;
        case DatasetSpec::Kind::csv:
            dataset = Json{{"csv", config.dataset.csv_path},
                           {"targets", config.dataset.target_columns},
                           {"header", config.dataset.has_header}};
            break;
        case DatasetSpec::Kind::idx:
            dataset = Json{{"images", config.dataset.images_path},
                           {"labels", config.dataset.labels_path}};
            if (config.dataset.limit) dataset["limit"] = *config.dataset.limit;
            break;
    }
    if (config.dataset.augment_count > 0)
        dataset["augment"] = Json{{"count", config.dataset.augment_count},
                                  {"low", config.dataset.augment_low},
                                  {"high", config.dataset.augment_high}};

    std::vector<std::uint64_t> run_seeds;
    for (int r = 0; r < config.runs; ++r)
        run_seeds.push_back(seed_combine(config.master_seed, r));

    Json j{{"code_version", kCodeVersion},
           {"dataset", dataset},
           {"method", to_string(config.method)},
           {"split", Json{{"train", config.split.train},
                          {"validation", config.split.validation},
                          {"test", config.split.test}}},
           {"ngp", to_json(config.ngp)},
           {"lasso_lambda", config.lasso_lambda},
           {"importance_threshold", config.importance_threshold},
           {"runs", config.runs},
           {"master_seed", config.master_seed},
           {"run_seeds", run_seeds},
           {"threads", config.threads},
           {"sweep", Json{{"axis", to_string(config.axis)},
                          {"values", config.axis_values},
                          {"k_max", config.k_max}}},
           {"nme_variance_normalized", config.nme_variance_normalized}};
    if (config.method == Method::ngp_group)
        j["group"] = Json{{"rows", config.group.rows},
                          {"cols", config.group.cols},
                          {"window", Json::array({config.group.window_h, config.group.window_w})},
                          {"stride", config.group.stride}};
    return j;
}

}  // namespace detail

}  // namespace ngp
