#include "riskball/train.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "riskball/adam.hpp"

namespace riskball::embed {

namespace {

void check_finite(const nn::Tape& tape, const BatchLoss& loss, std::size_t epoch,
                  std::size_t batch) {
    const char* bad = nullptr;
    if (!std::isfinite(tape.value(loss.terminal).data[0])) bad = "terminal";
    else if (!std::isfinite(tape.value(loss.contrastive).data[0])) bad = "contrastive";
    else if (!std::isfinite(tape.value(loss.intermediate).data[0])) bad = "intermediate";
    else if (!std::isfinite(tape.value(loss.total).data[0])) bad = "total";
    if (bad) {
        throw std::runtime_error("train_embedding: " + std::string(bad) +
                                 " loss diverged (non-finite) at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(batch));
    }
}

}  // namespace

TrainResult train_embedding(const cohort::Cohort& train_cohort, const cohort::Cohort& val_cohort,
                            const EncoderConfig& encoder, const LossConfig& config,
                            std::uint64_t seed) {
    encoder.validate();
    config.validate();

    util::Rng root(seed);
    util::Rng init_rng = root.fork();
    util::Rng batch_rng = root.fork();
    util::Rng val_rng = root.fork();

    TrainResult result;
    result.model.config = encoder;
    result.model.scaler = FeatureScaler::fit(train_cohort, encoder.channels());
    result.model.init_params(init_rng);
    EmbeddingModel& model = result.model;

    const std::size_t batch_size = config.resolved_batch_size(encoder.kind);
    TripletSampler train_sampler(train_cohort, config, encoder.min_history());
    TripletSampler val_sampler(val_cohort, config, encoder.min_history());

    // Fixed validation set so per-epoch losses are comparable; large enough
    // that checkpoint selection is not dominated by sampling noise.
    const std::size_t n_val = 2048;
    const std::vector<TripletRef> val_refs = val_sampler.sample_batch(n_val, val_rng);
    const TripletBatch val_batch = materialize_batch(val_cohort, model, val_refs);

    const std::size_t train_states = cohort::total_states(train_cohort);
    const std::size_t batches_per_epoch =
        std::max<std::size_t>(1, (train_states + batch_size - 1) / batch_size);

    nn::Adam adam({config.learning_rate});
    nn::ParamSet best_params = model.params;
    double best_val = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            const auto refs = train_sampler.sample_batch(batch_size, batch_rng);
            const TripletBatch batch = materialize_batch(train_cohort, model, refs);
            nn::Tape tape;
            nn::LeafMap leaves = nn::register_params(tape, model.params);
            BatchLoss loss = batch_total_loss(tape, model, leaves, batch, config);
            check_finite(tape, loss, epoch, b);
            epoch_loss += tape.value(loss.total).data[0];
            tape.backward(loss.total);
            nn::GradMap grads = nn::collect_grads(tape, leaves);
            adam.step(model.params, grads);
        }
        result.train_epoch_loss.push_back(epoch_loss / static_cast<double>(batches_per_epoch));

        nn::Tape vtape;
        nn::LeafMap vleaves = nn::register_params(vtape, model.params);
        BatchLoss vloss = batch_total_loss(vtape, model, vleaves, val_batch, config);
        const double val = vtape.value(vloss.total).data[0];
        if (!std::isfinite(val)) {
            throw std::runtime_error("train_embedding: validation loss diverged at epoch " +
                                     std::to_string(epoch));
        }
        result.val_epoch_loss.push_back(val);
        if (val < best_val) {
            best_val = val;
            best_params = model.params;
            result.best_epoch = epoch;
        }
    }
    model.params = std::move(best_params);
    return result;
}

}  // namespace riskball::embed
