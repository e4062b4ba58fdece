#pragma once

#include "riskball/c51.hpp"
#include "riskball/risk_model.hpp"

namespace riskball::rl {

struct Ensemble {
    std::vector<QNetwork> members;
    std::vector<std::vector<std::size_t>> member_patients;  // episode indices per member
    C51Config config;
};

// One agent per bootstrap subset: draw k ~ U(0.6, 0.85), keep floor(k*P)
// patients without replacement, train on their transitions.
Ensemble bootstrap_ensemble(const TransitionDataset& dataset, std::size_t n_members,
                            const C51Config& config, std::uint64_t seed, std::size_t jobs,
                            double subset_lo = 0.6, double subset_hi = 0.85);

}  // namespace riskball::rl
