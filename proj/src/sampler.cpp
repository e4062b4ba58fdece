#include "riskball/sampler.hpp"

#include <algorithm>
#include <stdexcept>

namespace riskball::embed {

using cohort::Outcome;

TripletSampler::TripletSampler(const cohort::Cohort& cohort, const LossConfig& config,
                               std::size_t min_history)
    : cohort_(cohort), config_(config), min_history_(min_history) {
    config_.validate();
    windows_.resize(cohort.size());
    for (std::size_t p = 0; p < cohort.size(); ++p) {
        const auto& traj = cohort[p];
        if (traj.length() <= min_history_) continue;  // no usable state at all
        for (std::size_t i : cohort::near_terminal_indices(traj, config_.near_terminal_t)) {
            if (i >= min_history_) windows_[p].push_back(i);
        }
        if (windows_[p].empty()) continue;
        anchor_pool_.push_back(p);
        (traj.outcome == Outcome::Death ? nonsurvivors_ : survivors_).push_back(p);
    }
    if (survivors_.empty() || nonsurvivors_.empty()) {
        throw std::runtime_error(
            "TripletSampler: cohort must contain both survivors and non-survivors with usable "
            "near-terminal states");
    }
    anchor_cdf_.reserve(anchor_pool_.size());
    double acc = 0.0;
    for (std::size_t p : anchor_pool_) {
        acc += cohort[p].outcome == Outcome::Death ? config_.nonsurvivor_weight : 1.0;
        anchor_cdf_.push_back(acc);
    }
}

double TripletSampler::death_anchor_probability() const {
    const double w = config_.nonsurvivor_weight;
    const double deaths = static_cast<double>(nonsurvivors_.size());
    const double total = w * deaths + static_cast<double>(survivors_.size());
    return w * deaths / total;
}

std::size_t TripletSampler::draw_patient(const std::vector<std::size_t>& pool,
                                         std::size_t exclude, util::Rng& rng) const {
    // Exclude the anchor's patient when the pool allows it.
    if (pool.size() == 1 ||
        std::find(pool.begin(), pool.end(), exclude) == pool.end()) {
        return pool[rng.index(pool.size())];
    }
    for (;;) {
        const std::size_t p = pool[rng.index(pool.size())];
        if (p != exclude) return p;
    }
}

TripletRef TripletSampler::sample(util::Rng& rng) const {
    TripletRef ref;
    // Weighted anchor draw over patients; the anchor is the terminal state.
    const double u = rng.uniform() * anchor_cdf_.back();
    const std::size_t pos = static_cast<std::size_t>(
        std::lower_bound(anchor_cdf_.begin(), anchor_cdf_.end(), u) - anchor_cdf_.begin());
    ref.anchor_patient = anchor_pool_[std::min(pos, anchor_pool_.size() - 1)];
    const auto& anchor_traj = cohort_[ref.anchor_patient];
    ref.anchor_outcome = anchor_traj.outcome;
    ref.anchor_organ = cohort::worst_organ(anchor_traj.states.back());

    const std::size_t ns_patient = draw_patient(nonsurvivors_, ref.anchor_patient, rng);
    const std::size_t sv_patient = draw_patient(survivors_, ref.anchor_patient, rng);
    const auto& ns_window = windows_[ns_patient];
    const auto& sv_window = windows_[sv_patient];
    const std::size_t ns_hour = ns_window[rng.index(ns_window.size())];
    const std::size_t sv_hour = sv_window[rng.index(sv_window.size())];

    // The state sharing the anchor's outcome is the positive.
    if (ref.anchor_outcome == Outcome::Death) {
        ref.positive_patient = ns_patient;
        ref.positive_hour = ns_hour;
        ref.negative_patient = sv_patient;
        ref.negative_hour = sv_hour;
    } else {
        ref.positive_patient = sv_patient;
        ref.positive_hour = sv_hour;
        ref.negative_patient = ns_patient;
        ref.negative_hour = ns_hour;
    }
    ref.positive_organ = cohort::worst_organ(cohort_[ref.positive_patient].states[ref.positive_hour]);
    ref.same_organ =
        ref.anchor_outcome == Outcome::Death && ref.positive_organ == ref.anchor_organ;
    return ref;
}

std::vector<TripletRef> TripletSampler::sample_batch(std::size_t n, util::Rng& rng) const {
    std::vector<TripletRef> refs;
    refs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) refs.push_back(sample(rng));
    return refs;
}

TripletBatch materialize_batch(const cohort::Cohort& cohort, const EmbeddingModel& model,
                               const std::vector<TripletRef>& refs) {
    TripletBatch batch;
    std::vector<StateRef> anchors, positives, negatives;
    anchors.reserve(refs.size());
    positives.reserve(refs.size());
    negatives.reserve(refs.size());
    for (const auto& ref : refs) {
        const auto& anchor_traj = cohort[ref.anchor_patient];
        anchors.push_back({&anchor_traj, anchor_traj.length() - 1});
        positives.push_back({&cohort[ref.positive_patient], ref.positive_hour});
        negatives.push_back({&cohort[ref.negative_patient], ref.negative_hour});
        batch.anchor_outcome.push_back(ref.anchor_outcome);
        batch.same_organ.push_back(ref.same_organ ? 1 : 0);
    }
    batch.anchors = build_input_matrix(model.config, model.scaler, anchors);
    batch.positives = build_input_matrix(model.config, model.scaler, positives);
    batch.negatives = build_input_matrix(model.config, model.scaler, negatives);
    return batch;
}

}  // namespace riskball::embed
