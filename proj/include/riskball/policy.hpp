#pragma once

#include <array>
#include <string>

#include "riskball/ensemble.hpp"

namespace riskball::rl {

// Action recommendation percentages under the two ensemble-averaging modes
// plus the clinician's logged distribution, and min-max-scaled optimal-value
// quartiles for outcome/timing groups.
struct PolicyReport {
    std::array<double, cohort::kNumActions> pct_majority_vote{};    // averaged actions
    std::array<double, cohort::kNumActions> pct_averaged_value{};   // averaged value functions
    std::array<double, cohort::kNumActions> pct_clinician{};

    struct GroupStats {
        std::string name;
        double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
        std::size_t count = 0;
    };
    std::vector<GroupStats> value_groups;
};

// Evaluated over every transition source state of the dataset. The "averaged
// actions" column takes a majority vote of member greedy actions (ties to the
// lowest index); "averaged value functions" is greedy on the member-mean
// distribution. Values are scaled to [0,1] over all evaluated states.
PolicyReport policy_report(const Ensemble& ensemble, const TransitionDataset& dataset,
                           std::size_t near_terminal_window = 24);

}  // namespace riskball::rl
