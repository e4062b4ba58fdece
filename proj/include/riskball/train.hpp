#pragma once

#include <cstdint>
#include <vector>

#include "riskball/sampler.hpp"

namespace riskball::embed {

struct TrainResult {
    EmbeddingModel model;  // weights at the minimum validation loss
    std::vector<double> train_epoch_loss;
    std::vector<double> val_epoch_loss;
    std::size_t best_epoch = 0;  // 0-based
};

// Mini-batch Adam over sampled triplet batches. An epoch draws as many
// batches as needed to cover the training states once; after each epoch the
// loss is evaluated on a validation triplet set sampled once with its own
// seed stream, and the weights at the minimum are returned. NaN losses abort
// with a diagnostic naming the offending component.
TrainResult train_embedding(const cohort::Cohort& train_cohort,
                            const cohort::Cohort& val_cohort, const EncoderConfig& encoder,
                            const LossConfig& config, std::uint64_t seed);

}  // namespace riskball::embed
