#pragma once

#include <vector>

#include "riskball/losses.hpp"
#include "riskball/model.hpp"
#include "riskball/rng.hpp"

namespace riskball::embed {

// One sampled triplet, by cohort position. The anchor is always the terminal
// state of its patient; positive and negative are near-terminal states of a
// non-survivor and a survivor, labeled by whether they share the anchor's
// outcome.
struct TripletRef {
    std::size_t anchor_patient = 0;
    std::size_t positive_patient = 0;
    std::size_t negative_patient = 0;
    std::size_t positive_hour = 0;
    std::size_t negative_hour = 0;
    cohort::Outcome anchor_outcome = cohort::Outcome::Release;
    bool same_organ = false;  // y_ap; meaningful on death anchors
    cohort::OrganLabel anchor_organ = cohort::OrganLabel::Cardio;
    cohort::OrganLabel positive_organ = cohort::OrganLabel::Cardio;
};

class TripletSampler {
public:
    // min_history: earliest usable hour index (GRU models need a full window).
    TripletSampler(const cohort::Cohort& cohort, const LossConfig& config,
                   std::size_t min_history);

    TripletRef sample(util::Rng& rng) const;
    std::vector<TripletRef> sample_batch(std::size_t n, util::Rng& rng) const;

    // Fraction math behind the weighted anchor draw, for tests.
    double death_anchor_probability() const;

private:
    const cohort::Cohort& cohort_;
    LossConfig config_;
    std::size_t min_history_;
    std::vector<std::size_t> anchor_pool_;           // patients with a usable terminal state
    std::vector<double> anchor_cdf_;                 // weighted, non-survivors upweighted
    std::vector<std::size_t> survivors_;             // patients with usable near-terminal states
    std::vector<std::size_t> nonsurvivors_;
    std::vector<std::vector<std::size_t>> windows_;  // eligible hours per patient

    std::size_t draw_patient(const std::vector<std::size_t>& pool, std::size_t exclude,
                             util::Rng& rng) const;
};

// Build the model-ready input matrices for a batch of sampled triplets.
TripletBatch materialize_batch(const cohort::Cohort& cohort, const EmbeddingModel& model,
                               const std::vector<TripletRef>& refs);

}  // namespace riskball::embed
