#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "riskball/transitions.hpp"

namespace riskball::rl {

// Categorical return-distribution learner on a fixed 51-atom support.
struct C51Config {
    std::size_t atoms = 51;
    double v_min = -18.0;
    double v_max = 18.0;
    double gamma = 0.999;
    std::size_t batch_size = 100;
    double learning_rate = 3e-4;
    double tau = 0.005;  // soft target update per gradient step
    std::size_t epochs = 8;
    bool augment_state = false;  // append the embedding vector to the state
    std::size_t trunk_hidden = 256;
    std::size_t trunk_layers = 3;

    void validate() const;
    std::vector<double> support() const;  // z_i = v_min + i * (v_max-v_min)/(atoms-1)
};

// Distribute target probability mass onto the fixed support: targets are
// clipped to [v_min, v_max] and each atom's mass split linearly between its
// two neighbours.
std::vector<double> c51_project(std::span<const double> target_atoms,
                                std::span<const double> probs, const C51Config& config);

// argmax_a sum_i p_i z_i; ties go to the lowest action index (least treatment).
int greedy_action(std::span<const double> action_distributions, std::span<const double> support);

double expected_value(std::span<const double> probs, std::span<const double> support);

struct QNetwork {
    C51Config config;
    nn::MlpSpec net;  // trunk + linear head producing kNumActions*atoms logits
    nn::ParamSet params;
    std::vector<double> input_mean, input_sd;

    std::size_t input_dim() const { return net.input_dim; }

    // Per-state action distributions (softmax per action block), rows of
    // length kNumActions*atoms.
    nn::Tensor distributions(const TransitionDataset& dataset,
                             std::span<const std::uint32_t> state_indices) const;
};

struct C51TrainResult {
    QNetwork network;
    std::vector<double> epoch_loss;
};

// Called after every gradient step with the batch's predicted distributions;
// used by tests to check normalization invariants during training.
using C51StepCallback = std::function<void(const nn::Tensor& batch_distributions)>;

C51TrainResult c51_train(const TransitionDataset& dataset, const C51Config& config,
                         std::uint64_t seed, const C51StepCallback& callback = nullptr);

}  // namespace riskball::rl
