#pragma once

#include <map>
#include <optional>
#include <vector>

#include "riskball/metrics.hpp"
#include "riskball/model.hpp"

namespace riskball::eval {

// A state is "within h hours of death" when its patient dies and the distance
// to the terminal hour is < h; every other state is a negative.
std::vector<int> horizon_labels(const std::vector<embed::StateRef>& refs, int horizon_hours);

inline const std::vector<int> kDefaultHorizons = {12, 24, 48, 72, 120};

// AUROC of d(x) per horizon over the model-eligible states of the cohort.
std::map<int, RocResult> norm_auroc(const embed::EmbeddingModel& model,
                                    const cohort::Cohort& cohort,
                                    const std::vector<int>& horizons = kDefaultHorizons);

enum class BaselineScore { Sofa, Sofa4 };

int sofa4(const cohort::StateVector& s);

// Same tasks scored by the SOFA column or the 4-system aggregate.
std::map<int, RocResult> baseline_score_auroc(const cohort::Cohort& cohort, BaselineScore score,
                                              const std::vector<int>& horizons = kDefaultHorizons);

struct JumpStats {
    double mean_relative_jump = 0.0;
    std::size_t pairs_counted = 0;
    std::size_t pairs_excluded = 0;  // consecutive pairs with d(s_t) <= epsilon
};

inline constexpr double kJumpEpsilon = 1e-9;

// |d(s_{t+1}) - d(s_t)| / d(s_t) averaged over in-stay consecutive pairs.
JumpStats relative_jumps_from_norms(const std::vector<std::vector<double>>& norms_per_stay);
JumpStats relative_jumps(const embed::EmbeddingModel& model, const cohort::Cohort& cohort);

struct TimeToEventCurve {
    // lag (hours before the terminal event) -> mean d(x); empty bins omitted.
    std::map<int, double> death_mean;
    std::map<int, double> release_mean;
    std::map<int, std::size_t> death_count;
    std::map<int, std::size_t> release_count;
};

TimeToEventCurve time_to_event_curve(const embed::EmbeddingModel& model,
                                     const cohort::Cohort& cohort, int max_hours);

struct SeparationStats {
    double within = 0.0;   // mean cosine over same-organ pairs
    double between = 0.0;  // mean cosine over different-organ pairs
    double gap = 0.0;      // within - between
    std::size_t states = 0;
    std::size_t zero_embeddings_skipped = 0;
};

// Pairwise cosines of embedded near-death non-survivor states grouped by
// worst organ system.
SeparationStats organ_separation(const embed::EmbeddingModel& model,
                                 const cohort::Cohort& cohort, std::size_t t = 24);

// Spearman correlation between hours-to-death and the binned mean d(x) of
// non-survivor states (the directional monotonicity statistic).
std::optional<double> death_monotonicity(const TimeToEventCurve& curve);

}  // namespace riskball::eval
