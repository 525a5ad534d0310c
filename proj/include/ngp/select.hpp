#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ngp/dataset.hpp"
#include "ngp/parallel.hpp"
#include "ngp/predictor.hpp"
#include "ngp/rng.hpp"

namespace ngp {

enum class TieBreak { lowest_index };
enum class StopReason { reached_max_features, eta_triggered, exhausted_features };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::reached_max_features: return "reached_max_features";
        case StopReason::eta_triggered: return "eta_triggered";
        case StopReason::exhausted_features: return "exhausted_features";
    }
    return "?";
}

struct NgpConfig {
    int max_features = 0;          // 0 = uncapped; then eta must be set
    std::optional<double> eta;     // relative-improvement stopping threshold
    PredictorSpec predictor;
    std::uint64_t master_seed = 0;
    int parallel_candidates = 1;
    TieBreak tie_break = TieBreak::lowest_index;
    bool retain_candidate_losses = false;
    bool retain_iteration_models = false;
    bool skip_failed_candidates = false;  // default: a failed candidate fit aborts the run

    void validate() const {
        if (max_features < 0) throw std::invalid_argument("max_features must be >= 0");
        if (max_features == 0 && !eta)
            throw std::invalid_argument("need max_features >= 1 and/or eta");
        if (eta && (*eta < 0.0 || *eta >= 1.0))
            throw std::invalid_argument("eta must be in [0, 1)");
        predictor.validate();
    }
};

struct CandidateLoss {
    int index;
    double loss;
};

// One pixel window on a feature grid; members are row-major flat indices.
struct FeatureGroup {
    std::vector<int> members;
    int origin_row = -1;
    int origin_col = -1;
};

struct TraceEntry {
    int iteration = 0;   // k, 1-based
    int index = -1;      // chosen feature index, or window placement id
    double loss = 0.0;   // winning validation loss L at this iteration
    bool rolled_back = false;
    std::vector<CandidateLoss> candidate_losses;  // retained on request
    std::vector<int> added_features;              // group mode: new pixels this window added
    int group_row = -1, group_col = -1;           // group mode: window origin
};

struct SelectionTrace {
    std::vector<TraceEntry> entries;
};

struct SelectionResult {
    FeatureSet selected;
    SelectionTrace trace;
    StopReason stop_reason = StopReason::exhausted_features;
    TrainedPredictor final_model;
    long trainings_performed = 0;
    double baseline_loss = 0.0;  // L for the empty feature set
    std::vector<TrainedPredictor> iteration_models;  // winners per iteration, on request
};

// Index of the strictly minimal loss; losses equal within 1e-12 relative
// tolerance resolve to the lowest index.
inline int greedy_choice(const std::vector<CandidateLoss>& candidates, TieBreak tie_break) {
    (void)tie_break;  // lowest_index is the only policy
    if (candidates.empty()) throw std::invalid_argument("greedy_choice: no candidates");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
        if (!std::isfinite(c.loss))
            throw std::runtime_error("greedy_choice: non-finite loss for candidate " +
                                     std::to_string(c.index));
        best = std::min(best, c.loss);
    }
    int chosen = -1;
    for (const auto& c : candidates) {
        const double tol = 1e-12 * std::max(std::abs(c.loss), std::abs(best));
        if (c.loss - best <= tol && (chosen < 0 || c.index < chosen)) chosen = c.index;
    }
    return chosen;
}

struct StopDecision {
    bool stop = false;
    StopReason reason = StopReason::exhausted_features;
    bool rollback = false;  // eta case: the k-th addition is undone
};

// losses holds L for S_0..S_k (baseline first). The eta rule fires on
// relative improvement (L_{k-1} - L_k) / L_{k-1} < eta and takes
// precedence over the max-features rule, since it also rolls the final
// addition back.
inline StopDecision should_stop(int k, const std::vector<double>& losses, int selected_count,
                                const NgpConfig& config) {
    if (k < 1 || static_cast<int>(losses.size()) != k + 1)
        throw std::invalid_argument("should_stop: losses must cover S_0..S_k");
    if (config.eta) {
        const double prev = losses[static_cast<std::size_t>(k - 1)];
        const double cur = losses[static_cast<std::size_t>(k)];
        const double improvement = prev > 0.0 ? (prev - cur) / prev : 0.0;
        if (improvement < *config.eta)
            return {true, StopReason::eta_triggered, true};
    }
    if (config.max_features > 0 && selected_count >= config.max_features)
        return {true, StopReason::reached_max_features, false};
    return {false, StopReason::exhausted_features, false};
}

namespace detail {

struct CandidateEval {
    int id = -1;
    double loss = std::numeric_limits<double>::quiet_NaN();
    bool failed = false;
    std::string error;
    TrainedPredictor model;
};

// One independent fit per candidate on train restricted to
// current + additions, scored on the identically restricted validation
// set. Slot-indexed, so the result is canonical no matter the schedule.
struct PendingCandidate {
    int id;
    std::vector<int> additions;
    std::uint64_t seed;
};

inline std::vector<CandidateEval> evaluate_pending(const FeatureSet& current,
                                                   const std::vector<PendingCandidate>& pending,
                                                   const DataSplit& split,
                                                   const PredictorSpec& spec, int parallel,
                                                   bool capture_errors) {
    std::vector<CandidateEval> evals(pending.size());
    parallel_for(pending.size(), parallel, [&](std::size_t slot) {
        const auto& cand = pending[slot];
        auto& out = evals[slot];
        out.id = cand.id;
        try {
            FeatureSet subset = current;
            for (int f : cand.additions) subset.indices.push_back(f);
            out.model = fit(spec, split.train, subset, cand.seed);
            out.loss = evaluate_loss(out.model, restrict_features(split.validation, subset));
            if (!std::isfinite(out.loss)) throw std::runtime_error("non-finite validation loss");
        } catch (const std::exception& e) {
            if (!capture_errors)
                throw std::runtime_error("candidate " + std::to_string(cand.id) + ": " + e.what());
            out.failed = true;
            out.error = e.what();
        }
    });
    return evals;
}

}  // namespace detail

// Candidate sweep for one iteration: loss of current + {i} for every i in
// `remaining`, each trained independently under its own seed. Results are
// returned in ascending index order.
inline std::vector<CandidateLoss> evaluate_candidates(const FeatureSet& current,
                                                      const std::vector<int>& remaining,
                                                      const DataSplit& split,
                                                      const PredictorSpec& spec,
                                                      const std::vector<std::uint64_t>& seeds,
                                                      int parallel_candidates = 1) {
    if (remaining.empty()) throw std::invalid_argument("evaluate_candidates: empty candidate set");
    if (seeds.size() != remaining.size())
        throw std::invalid_argument("evaluate_candidates: one seed per candidate required");
    for (int i : remaining)
        if (current.contains(i))
            throw std::invalid_argument("candidate " + std::to_string(i) + " already selected");

    std::vector<std::size_t> order(remaining.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return remaining[a] < remaining[b]; });

    std::vector<detail::PendingCandidate> pending;
    pending.reserve(remaining.size());
    for (std::size_t pos : order)
        pending.push_back({remaining[pos], {remaining[pos]}, seeds[pos]});

    auto evals = detail::evaluate_pending(current, pending, split, spec, parallel_candidates,
                                          /*capture_errors=*/false);
    std::vector<CandidateLoss> out;
    out.reserve(evals.size());
    for (const auto& e : evals) out.push_back({e.id, e.loss});
    return out;
}

namespace detail {

struct GroupPool {
    std::vector<FeatureGroup> groups;  // indexed by placement id
    bool group_mode = false;
};

inline void validate_split_for_selection(const DataSplit& split) {
    if (split.train.sample_count() < 1) throw std::invalid_argument("empty training set");
    if (split.validation.sample_count() < 1) throw std::invalid_argument("empty validation set");
    if (split.train.feature_count() != split.validation.feature_count() ||
        split.train.target_count() != split.validation.target_count())
        throw std::invalid_argument("train/validation shape mismatch");
    if (split.train.feature_count() < 1) throw std::invalid_argument("no features");
}

// Shared loop of the single-feature and window variants. Candidates are
// ids over `pool` entries; each contributes the not-yet-selected part of
// its member list. S_k strictly grows until a stopping rule fires.
inline SelectionResult run_greedy(const DataSplit& split, const NgpConfig& config,
                                  const GroupPool& pool) {
    config.validate();
    validate_split_for_selection(split);

    SelectionResult result;
    TrainedPredictor previous_model = fit(config.predictor, split.train, FeatureSet{},
                                          seed_combine(config.master_seed, 0, 0));
    Dataset no_features = split.validation;
    no_features.features.resize(split.validation.sample_count(), 0);
    result.baseline_loss = evaluate_loss(previous_model, no_features);
    result.trainings_performed = 1;

    std::vector<bool> used(pool.groups.size(), false);
    std::vector<double> losses{result.baseline_loss};
    FeatureSet selected;

    for (int k = 1;; ++k) {
        // One shared seed per iteration: every candidate fit starts from the
        // same initialization and batch order, so loss differences reflect
        // the candidate columns alone. Per-candidate seeds inject enough
        // init variance into the argmin to derail selection on correlated
        // designs. Schedule independence is unaffected.
        const std::uint64_t iteration_seed =
            seed_combine(config.master_seed, static_cast<std::uint64_t>(k));
        std::vector<PendingCandidate> pending;
        for (std::size_t id = 0; id < pool.groups.size(); ++id) {
            if (used[id]) continue;
            std::vector<int> additions;
            for (int f : pool.groups[id].members)
                if (!selected.contains(f)) additions.push_back(f);
            if (additions.empty()) continue;  // window fully covered already
            pending.push_back({static_cast<int>(id), std::move(additions), iteration_seed});
        }
        if (pending.empty()) {
            result.stop_reason = StopReason::exhausted_features;
            result.final_model = std::move(previous_model);
            break;
        }

        auto evals = evaluate_pending(selected, pending, split, config.predictor,
                                      config.parallel_candidates, config.skip_failed_candidates);
        result.trainings_performed += static_cast<long>(evals.size());

        std::vector<CandidateLoss> candidate_losses;
        candidate_losses.reserve(evals.size());
        for (const auto& e : evals)
            if (!e.failed) candidate_losses.push_back({e.id, e.loss});
        if (candidate_losses.empty())
            throw std::runtime_error("all candidate fits failed at iteration " +
                                     std::to_string(k) + ": " + evals.front().error);

        const int winner_id = greedy_choice(candidate_losses, config.tie_break);
        auto winner_it = std::find_if(evals.begin(), evals.end(),
                                      [&](const CandidateEval& e) { return e.id == winner_id; });
        auto pending_it =
            std::find_if(pending.begin(), pending.end(),
                         [&](const PendingCandidate& p) { return p.id == winner_id; });

        TraceEntry entry;
        entry.iteration = k;
        entry.index = winner_id;
        entry.loss = winner_it->loss;
        if (config.retain_candidate_losses) entry.candidate_losses = candidate_losses;
        if (pool.group_mode) {
            entry.added_features = pending_it->additions;
            entry.group_row = pool.groups[static_cast<std::size_t>(winner_id)].origin_row;
            entry.group_col = pool.groups[static_cast<std::size_t>(winner_id)].origin_col;
        }

        const FeatureSet before = selected;
        for (int f : pending_it->additions) selected.indices.push_back(f);
        used[static_cast<std::size_t>(winner_id)] = true;
        losses.push_back(winner_it->loss);

        TrainedPredictor winner_model = std::move(winner_it->model);
        if (config.retain_iteration_models) result.iteration_models.push_back(winner_model);

        const StopDecision decision = should_stop(k, losses, selected.size(), config);
        if (decision.stop && decision.rollback) {
            entry.rolled_back = true;
            result.trace.entries.push_back(std::move(entry));
            result.selected = before;
            result.final_model = std::move(previous_model);
            result.stop_reason = decision.reason;
            break;
        }
        result.trace.entries.push_back(std::move(entry));
        if (decision.stop) {
            result.selected = selected;
            result.final_model = std::move(winner_model);
            result.stop_reason = decision.reason;
            break;
        }
        result.selected = selected;
        result.final_model = winner_model;  // in case the pool exhausts next round
        previous_model = std::move(winner_model);
    }
    return result;
}

}  // namespace detail

// Sequential greedy selection: each iteration retrains one predictor per
// remaining feature and keeps the feature whose addition minimizes the
// validation loss. Output order is descending importance. Deterministic
// under master_seed for any parallel_candidates.
inline SelectionResult ngp_select(const DataSplit& split, const NgpConfig& config) {
    detail::validate_split_for_selection(split);
    detail::GroupPool pool;
    pool.group_mode = false;
    const int p = static_cast<int>(split.train.feature_count());
    pool.groups.resize(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) pool.groups[static_cast<std::size_t>(i)].members = {i};
    return detail::run_greedy(split, config, pool);
}

// All placements of an h x w window over a rows x cols grid at the given
// stride, in row-major placement order.
inline std::vector<FeatureGroup> window_groups(int rows, int cols, int window_h, int window_w,
                                               int stride) {
    if (rows < 1 || cols < 1 || window_h < 1 || window_w < 1)
        throw std::invalid_argument("grid and window dimensions must be positive");
    if (window_h > rows || window_w > cols)
        throw std::invalid_argument("window larger than grid");
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");

    std::vector<FeatureGroup> groups;
    for (int r = 0; r + window_h <= rows; r += stride) {
        for (int c = 0; c + window_w <= cols; c += stride) {
            FeatureGroup g;
            g.origin_row = r;
            g.origin_col = c;
            for (int rr = 0; rr < window_h; ++rr)
                for (int cc = 0; cc < window_w; ++cc)
                    g.members.push_back((r + rr) * cols + (c + cc));
            groups.push_back(std::move(g));
        }
    }
    return groups;
}

// Window variant: candidates are window placements and the winning
// window contributes only its not-yet-selected pixels. Stops once the
// selected pixel count reaches max_features (the last window may
// overshoot by less than one window).
inline SelectionResult ngp_group_select(const DataSplit& split, int rows, int cols, int window_h,
                                        int window_w, int stride, const NgpConfig& config) {
    detail::validate_split_for_selection(split);
    if (static_cast<Eigen::Index>(rows) * cols != split.train.feature_count())
        throw std::invalid_argument("grid size does not match feature count");
    detail::GroupPool pool;
    pool.group_mode = true;
    pool.groups = window_groups(rows, cols, window_h, window_w, stride);
    return detail::run_greedy(split, config, pool);
}

}  // namespace ngp
