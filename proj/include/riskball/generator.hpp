#pragma once

#include <array>
#include <cstdint>

#include "riskball/state.hpp"

namespace riskball::cohort {

// Synthetic cohort generator. Each patient carries a latent risk process in
// [0,1] that drifts toward 1 for non-survivors and toward 0 for survivors as
// the terminal hour approaches, one dominant organ-failure mode for
// non-survivors drawn from the mixture, and observed channels that are affine
// in the latent risk and organ loads plus Gaussian noise. Deterministic given
// the seed.
struct CohortConfig {
    std::size_t num_patients = 0;
    double survivor_fraction = 0.9;
    std::size_t min_hours = 16;  // must be >= 13 so a 12-hour history exists
    std::size_t max_hours = 48;
    double noise_scale = 1.0;    // multiplier on vital/lab noise
    double risk_noise = 0.02;    // innovation scale of the risk walk
    // Dominant-mode mixture for non-survivors: Cardio, CNS, Liver, Renal.
    std::array<double, 4> organ_mix = {0.35, 0.30, 0.20, 0.15};
    // Treatment feedback on the risk walk; scaled by dose and current risk.
    double treatment_effect = 0.012;
    std::uint64_t seed = 1;

    void validate() const;
};

Cohort generate_cohort(const CohortConfig& config);

// Generator output together with the per-patient latent risk paths, for
// tests that check construction properties of the hidden process.
struct CohortWithLatents {
    Cohort cohort;
    std::vector<std::vector<double>> risk;
};

CohortWithLatents generate_cohort_with_latents(const CohortConfig& config);

}  // namespace riskball::cohort
