#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "ngp/metrics.hpp"
#include "ngp/predictor.hpp"
#include "ngp/select.hpp"

namespace ngp {

using Json = nlohmann::json;

constexpr const char* kCodeVersion = "0.1.0";

// user-facing indices are 1-based everywhere
inline std::vector<int> to_one_based(const std::vector<int>& indices) {
    std::vector<int> out;
    out.reserve(indices.size());
    for (int i : indices) out.push_back(i + 1);
    return out;
}

inline std::vector<int> to_zero_based(const std::vector<int>& indices) {
    std::vector<int> out;
    out.reserve(indices.size());
    for (int i : indices) out.push_back(i - 1);
    return out;
}

inline Json to_json(const PredictorSpec& spec) {
    return Json{{"family", to_string(spec.family)},
                {"hidden_units", spec.hidden_units},
                {"epochs", spec.epochs},
                {"learning_rate", spec.learning_rate},
                {"batch_size", spec.batch_size},
                {"momentum", spec.momentum},
                {"weight_decay", spec.weight_decay},
                {"loss", to_string(spec.loss)},
                {"ridge_lambda", spec.ridge_lambda},
                {"seed_policy", "hash_iteration_candidate"}};
}

inline PredictorSpec predictor_spec_from_json(const Json& j, PredictorSpec spec = {}) {
    if (j.contains("family")) {
        const std::string f = j.at("family");
        if (f == "mlp")
            spec.family = PredictorFamily::mlp;
        else if (f == "linear")
            spec.family = PredictorFamily::linear;
        else
            throw std::invalid_argument("predictor.family: unknown value '" + f + "'");
    }
    if (j.contains("loss")) {
        const std::string l = j.at("loss");
        if (l == "mean_square")
            spec.loss = LossKind::mean_square;
        else if (l == "cross_entropy")
            spec.loss = LossKind::cross_entropy;
        else
            throw std::invalid_argument("predictor.loss: unknown value '" + l + "'");
    }
    if (j.contains("hidden_units")) spec.hidden_units = j.at("hidden_units");
    if (j.contains("epochs")) spec.epochs = j.at("epochs");
    if (j.contains("learning_rate")) spec.learning_rate = j.at("learning_rate");
    if (j.contains("batch_size")) spec.batch_size = j.at("batch_size");
    if (j.contains("momentum")) spec.momentum = j.at("momentum");
    if (j.contains("weight_decay")) spec.weight_decay = j.at("weight_decay");
    if (j.contains("ridge_lambda")) spec.ridge_lambda = j.at("ridge_lambda");
    spec.validate();
    return spec;
}

inline Json to_json(const NgpConfig& config) {
    Json j{{"max_features", config.max_features},
           {"predictor", to_json(config.predictor)},
           {"master_seed", config.master_seed},
           {"parallel_candidates", config.parallel_candidates},
           {"tie_break", "lowest_index"},
           {"retain_candidate_losses", config.retain_candidate_losses},
           {"skip_failed_candidates", config.skip_failed_candidates}};
    if (config.eta)
        j["eta"] = *config.eta;
    else
        j["eta"] = nullptr;
    return j;
}

inline Json trace_entry_to_json(const TraceEntry& entry, bool group_mode) {
    Json j{{"k", entry.iteration}, {"index", entry.index + 1}, {"loss", entry.loss}};
    if (entry.rolled_back) j["rolled_back"] = true;
    if (!entry.candidate_losses.empty()) {
        Json cands = Json::array();
        for (const auto& c : entry.candidate_losses)
            cands.push_back(Json{{"index", c.index + 1}, {"loss", c.loss}});
        j["candidates"] = cands;
    }
    if (group_mode) {
        j["window"] = Json{{"row", entry.group_row}, {"col", entry.group_col}};
        j["added_features"] = to_one_based(entry.added_features);
    }
    return j;
}

inline Json selection_to_json(const SelectionResult& result, const NgpConfig& config) {
    const bool group_mode =
        !result.trace.entries.empty() && result.trace.entries.front().group_row >= 0;
    Json trace = Json::array();
    for (const auto& entry : result.trace.entries)
        trace.push_back(trace_entry_to_json(entry, group_mode));
    return Json{{"selected", to_one_based(result.selected.indices)},
                {"stop_reason", to_string(result.stop_reason)},
                {"baseline_loss", result.baseline_loss},
                {"trace", trace},
                {"trainings_performed", result.trainings_performed},
                {"config", to_json(config)}};
}

// debugging dump; format is versioned but not stability-guaranteed
inline Json model_dump(const TrainedPredictor& model) {
    const char* kind = model.kind == TrainedPredictor::Kind::constant ? "constant"
                       : model.kind == TrainedPredictor::Kind::linear ? "linear"
                                                                      : "mlp";
    return Json{{"format_version", 1},
                {"kind", kind},
                {"spec", to_json(model.spec)},
                {"feature_set", to_one_based(model.feature_set.indices)},
                {"input_dim", model.input_dim},
                {"output_dim", model.output_dim},
                {"training_loss", model.training_loss},
                {"parameters",
                 std::vector<double>(model.parameters.data(),
                                     model.parameters.data() + model.parameters.size())}};
}

inline Json to_json(const MetricsRecord& record) {
    Json j;
    const auto& names = MetricsRecord::field_names();
    const auto values = record.fields();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (values[i])
            j[names[i]] = *values[i];
        else
            j[names[i]] = nullptr;
    }
    return j;
}

}  // namespace ngp
