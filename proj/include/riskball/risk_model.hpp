#pragma once

#include "riskball/train.hpp"
#include "riskball/transitions.hpp"

namespace riskball::rl {

// Bootstrapped risk ensemble: each member trains the embedding objective on a
// random patient subset (fraction drawn uniformly from [subset_lo, subset_hi],
// patients sampled without replacement) with its own seed; d(s) averages the
// members' squared norms.
struct RiskModelOptions {
    std::size_t members = 10;
    embed::EncoderConfig encoder = embed::EncoderConfig::mlp_encoder(10);
    embed::LossConfig loss;
    double subset_lo = 0.6;
    double subset_hi = 0.85;
    std::size_t jobs = 1;
};

RiskModel train_risk_model(const cohort::Cohort& train_cohort, const cohort::Cohort& val_cohort,
                           const RiskModelOptions& options, std::uint64_t seed);

// The bootstrap subset draw, exposed for tests: returns patient indices.
std::vector<std::size_t> bootstrap_patient_subset(std::size_t n_patients, double lo, double hi,
                                                  util::Rng& rng, double* k_out = nullptr);

void save_risk_model(const std::string& dir, const RiskModel& model);
RiskModel load_risk_model(const std::string& dir);

}  // namespace riskball::rl
