#pragma once

#include <cstdint>
#include <vector>

#include "riskball/model.hpp"

namespace riskball::embed {

// Denoising autoencoder baseline: the encoder architecture without the tanh
// head, a single-hidden-layer 128-unit ELU decoder, and a corrupt-reconstruct
// MSE objective on standardized channels (entries zeroed with the given
// probability). Weights at the best held-out corrupted-reconstruction loss
// are kept.
struct DaeOptions {
    std::size_t embedding_dim = 3;  // 3 or 12 in the comparisons
    std::size_t hidden = 512;
    std::size_t layers = 8;
    std::size_t decoder_hidden = 128;
    double corruption_prob = 0.1;
    std::size_t epochs = 25;
    std::size_t batch_size = 128;
    double learning_rate = 3e-5;
    double test_fraction = 0.2;
};

struct DaeResult {
    EmbeddingModel encoder;
    std::vector<double> train_epoch_loss;
    std::vector<double> test_epoch_loss;
    std::size_t best_epoch = 0;
};

DaeResult train_denoising_autoencoder(const cohort::Cohort& cohort, const DaeOptions& options,
                                      std::uint64_t seed);

// Zero entries of a row with the given probability. Exposed for the
// corruption-rate check in tests.
void corrupt_row(std::vector<double>& row, double prob, util::Rng& rng);

// Plain triplet baseline: anchor = a random state, positive = the anchor with
// independent Gaussian noise on the standardized channels, negative = a random
// state of an opposite-outcome patient; hinge on unit-normalized embeddings.
struct PlainTripletOptions {
    std::size_t embedding_dim = 3;
    std::size_t hidden = 512;
    std::size_t layers = 8;
    double noise_sd = 0.1;  // on standardized features
    double margin = 0.2;
    std::size_t epochs = 10;
    std::size_t batch_size = 128;
    double learning_rate = 3e-5;
};

EmbeddingModel train_plain_triplet(const cohort::Cohort& cohort,
                                   const PlainTripletOptions& options, std::uint64_t seed);

}  // namespace riskball::embed
