#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "riskball/model.hpp"

namespace riskball::rl {

enum class RewardKind { TerminalOnly, R1, R2 };

const char* reward_kind_name(RewardKind kind);
RewardKind reward_kind_from_name(const std::string& name);

// Terminal rewards are fixed: -15 on death, 15*(1 - d) on release. The two
// intermediate forms reward risk decrease; R2 also penalizes staying above
// the risk threshold.
struct RewardSpec {
    RewardKind kind = RewardKind::R1;
    double terminal_death = -15.0;
    double terminal_release_scale = 15.0;
    double r1_coeff = 0.375;
    double r2_coeff = 3.75;
    double r2_penalty = 0.25;
    double r2_threshold = 0.5;
};

double intermediate_reward(const RewardSpec& spec, double d_s, double d_next);
double terminal_reward(const RewardSpec& spec, cohort::Outcome outcome, double d_terminal);

// Embedding ensemble behind d(s): the mean squared embedding norm over
// bootstrap-trained member networks.
struct RiskModel {
    std::vector<embed::EmbeddingModel> members;

    double compute_d(const cohort::PatientTrajectory& traj, std::size_t hour) const;
    // d for every state of the cohort, flattened per patient then hour.
    // Also returns the first member's embedding per state when `embeddings`
    // is non-null (used for state augmentation).
    std::vector<double> compute_d_all(const cohort::Cohort& cohort,
                                      std::vector<std::vector<double>>* embeddings = nullptr) const;

    std::size_t min_history() const;
    std::size_t embedding_dim() const;
};

struct Transition {
    std::uint32_t s = 0;       // index into states
    std::uint32_t s_next = 0;  // index into states
    std::uint8_t action = 0;   // flattened vaso/fluids index
    double reward = 0.0;
    bool done = false;
};

// Consecutive-hour transitions for every patient, with d(s) computed once per
// state and cached. Construction is a pure function of (cohort, risk model,
// reward spec).
struct TransitionDataset {
    std::vector<std::array<double, cohort::kStateDim>> states;
    std::vector<double> d;                        // cached d per state
    std::vector<std::vector<double>> embedding;   // first-member embedding per state
    std::vector<Transition> transitions;
    // per patient: [begin, end) into transitions, and the outcome
    std::vector<std::pair<std::uint32_t, std::uint32_t>> episodes;
    std::vector<cohort::Outcome> episode_outcome;
    std::size_t embedding_dim = 0;

    std::size_t state_dim(bool augmented) const {
        return cohort::kStateDim + (augmented ? embedding_dim : 0);
    }
};

TransitionDataset build_mdp(const cohort::Cohort& cohort, const RiskModel& risk,
                            const RewardSpec& spec);

// Keep only the episodes of the selected patients (bootstrap members).
TransitionDataset subset_dataset(const TransitionDataset& dataset,
                                 const std::vector<std::size_t>& episode_indices);

// Cohort CSV convention extended with r, done, d_s, d_s_next columns; one row
// per transition.
void save_transitions_csv(const TransitionDataset& dataset, const std::string& path);

struct LoadedTransitions {
    std::vector<std::array<double, cohort::kStateDim>> states;  // source state per row
    std::vector<Transition> transitions;                        // s indexes states
    std::vector<double> d_s;
    std::vector<double> d_s_next;
};

LoadedTransitions load_transitions_csv(const std::string& path);

}  // namespace riskball::rl
