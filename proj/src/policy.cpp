#include "riskball/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskball/metrics.hpp"

namespace riskball::rl {

using cohort::Outcome;

PolicyReport policy_report(const Ensemble& ensemble, const TransitionDataset& dataset,
                           std::size_t near_terminal_window) {
    if (ensemble.members.empty()) throw std::invalid_argument("policy_report: empty ensemble");
    const std::size_t atoms = ensemble.config.atoms;
    const std::vector<double> z = ensemble.config.support();

    // Evaluate at every transition source state.
    std::vector<std::uint32_t> eval_states;
    std::vector<int> clinician;
    std::vector<Outcome> outcome_of;
    std::vector<std::size_t> to_end;  // transitions until the episode ends
    for (std::size_t e = 0; e < dataset.episodes.size(); ++e) {
        const auto [begin, end] = dataset.episodes[e];
        for (std::uint32_t t = begin; t < end; ++t) {
            eval_states.push_back(dataset.transitions[t].s);
            clinician.push_back(dataset.transitions[t].action);
            outcome_of.push_back(dataset.episode_outcome[e]);
            to_end.push_back(end - t);
        }
    }
    const std::size_t n = eval_states.size();
    if (n == 0) throw std::invalid_argument("policy_report: no states to evaluate");

    // Member distributions once per member, then both averaging modes.
    const std::size_t block = cohort::kNumActions * atoms;
    std::vector<double> mean_dist(n * block, 0.0);
    std::vector<std::vector<int>> member_actions(ensemble.members.size(), std::vector<int>(n, 0));
    for (std::size_t m = 0; m < ensemble.members.size(); ++m) {
        const nn::Tensor dists = ensemble.members[m].distributions(dataset, eval_states);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = dists.data.data() + i * block;
            member_actions[m][i] =
                greedy_action(std::span<const double>(row, block), z);
            for (std::size_t j = 0; j < block; ++j) mean_dist[i * block + j] += row[j];
        }
    }
    const double inv_members = 1.0 / static_cast<double>(ensemble.members.size());
    for (double& v : mean_dist) v *= inv_members;

    PolicyReport report;
    std::vector<double> optimal_value(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        // Majority vote over member greedy actions; ties to the lowest index.
        std::array<int, cohort::kNumActions> votes{};
        for (const auto& acts : member_actions) ++votes[static_cast<std::size_t>(acts[i])];
        int vote_action = 0;
        for (std::size_t a = 1; a < cohort::kNumActions; ++a) {
            if (votes[a] > votes[static_cast<std::size_t>(vote_action)]) {
                vote_action = static_cast<int>(a);
            }
        }
        report.pct_majority_vote[static_cast<std::size_t>(vote_action)] += 1.0;

        const double* row = mean_dist.data() + i * block;
        const int avg_action = greedy_action(std::span<const double>(row, block), z);
        report.pct_averaged_value[static_cast<std::size_t>(avg_action)] += 1.0;
        report.pct_clinician[static_cast<std::size_t>(clinician[i])] += 1.0;

        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < cohort::kNumActions; ++a) {
            best = std::max(best, expected_value(
                                      std::span<const double>(row + a * atoms, atoms), z));
        }
        optimal_value[i] = best;
    }
    const double pct = 100.0 / static_cast<double>(n);
    for (std::size_t a = 0; a < cohort::kNumActions; ++a) {
        report.pct_majority_vote[a] *= pct;
        report.pct_averaged_value[a] *= pct;
        report.pct_clinician[a] *= pct;
    }

    // Min-max scale the optimal values over every evaluated state.
    const auto [mn_it, mx_it] = std::minmax_element(optimal_value.begin(), optimal_value.end());
    const double mn = *mn_it, mx = *mx_it;
    const double span = mx > mn ? mx - mn : 1.0;
    for (double& v : optimal_value) v = (v - mn) / span;

    auto group = [&](const std::string& name, auto&& keep) {
        PolicyReport::GroupStats g;
        g.name = name;
        std::vector<double> values;
        for (std::size_t i = 0; i < n; ++i) {
            if (keep(i)) values.push_back(optimal_value[i]);
        }
        g.count = values.size();
        if (!values.empty()) {
            g.min = *std::min_element(values.begin(), values.end());
            g.max = *std::max_element(values.begin(), values.end());
            g.q1 = eval::quantile(values, 0.25);
            g.median = eval::quantile(values, 0.5);
            g.q3 = eval::quantile(values, 0.75);
        }
        report.value_groups.push_back(std::move(g));
    };
    group("survivors", [&](std::size_t i) { return outcome_of[i] == Outcome::Release; });
    group("nonsurvivors", [&](std::size_t i) { return outcome_of[i] == Outcome::Death; });
    group("survivors_last24h", [&](std::size_t i) {
        return outcome_of[i] == Outcome::Release && to_end[i] <= near_terminal_window;
    });
    group("nonsurvivors_last24h", [&](std::size_t i) {
        return outcome_of[i] == Outcome::Death && to_end[i] <= near_terminal_window;
    });
    return report;
}

}  // namespace riskball::rl
