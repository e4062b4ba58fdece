#pragma once

#include <string>

#include "riskball/init.hpp"
#include "riskball/tape.hpp"

namespace riskball::nn {

enum class OutputActivation { None, Tanh };

// Feed-forward stack: num_layers linear layers with ELU between them and an
// optional tanh on the last. num_layers == 1 is a single linear map.
struct MlpSpec {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 512;
    std::size_t num_layers = 8;
    std::size_t output_dim = 3;
    OutputActivation output_activation = OutputActivation::Tanh;

    void validate() const;
};

// Stacked GRU over a fixed-length hourly history; returns the final hidden
// state of the top layer.
struct GruSpec {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 128;
    std::size_t num_layers = 2;
    std::size_t horizon = 12;

    void validate() const;
};

void add_mlp_params(const MlpSpec& spec, const std::string& prefix, ParamSet& params,
                    util::Rng& rng, WeightInit init = WeightInit::Orthogonal);

void add_gru_params(const GruSpec& spec, const std::string& prefix, ParamSet& params,
                    util::Rng& rng, WeightInit init = WeightInit::Orthogonal);

// input: [batch, input_dim] -> [batch, output_dim]
Var mlp_forward(const MlpSpec& spec, const LeafMap& leaves, const std::string& prefix,
                Tape& tape, Var input);

// sequences: [batch, horizon * input_dim], hours oldest-first -> [batch, hidden_dim]
Var gru_forward_batch(const GruSpec& spec, const LeafMap& leaves, const std::string& prefix,
                      Tape& tape, Var sequences);

// sequence: [horizon, input_dim] -> [hidden_dim]
Tensor gru_forward(const GruSpec& spec, const ParamSet& params, const std::string& prefix,
                   const Tensor& sequence);

// One GRU cell step on plain tensors: x [n_in], h [n_hidden]. Exposed for the
// recurrence oracle in tests.
Tensor gru_cell(const ParamSet& params, const std::string& layer_prefix, const Tensor& x,
                const Tensor& h);

}  // namespace riskball::nn
