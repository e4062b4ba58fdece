#include "riskball/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "riskball/adam.hpp"

namespace riskball::embed {

using cohort::Outcome;

void corrupt_row(std::vector<double>& row, double prob, util::Rng& rng) {
    for (double& v : row) {
        if (rng.uniform() < prob) v = 0.0;
    }
}

namespace {

std::vector<StateRef> all_states(const cohort::Cohort& cohort) {
    std::vector<StateRef> refs;
    for (const auto& traj : cohort) {
        for (std::size_t t = 0; t < traj.length(); ++t) refs.push_back({&traj, t});
    }
    return refs;
}

// Standardized rows; the input copy is corrupted, the target stays clean.
void fill_dae_batch(const std::vector<StateRef>& refs, const std::vector<std::size_t>& pick,
                    const FeatureScaler& scaler, double corruption, util::Rng& rng,
                    nn::Tensor& inputs, nn::Tensor& targets) {
    const std::size_t dim = cohort::kStateDim;
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < pick.size(); ++i) {
        const auto& s = refs[pick[i]].traj->states[refs[pick[i]].hour];
        for (std::size_t c = 0; c < dim; ++c) {
            row[c] = scaler.transform(s[c], c);
            targets.at(i, c) = row[c];
        }
        corrupt_row(row, corruption, rng);
        for (std::size_t c = 0; c < dim; ++c) inputs.at(i, c) = row[c];
    }
}

double dae_loss_value(const nn::Tape& tape, nn::Var loss) { return tape.value(loss).data[0]; }

}  // namespace

DaeResult train_denoising_autoencoder(const cohort::Cohort& cohort, const DaeOptions& options,
                                      std::uint64_t seed) {
    if (cohort.size() < 2) throw std::invalid_argument("dae: need at least 2 patients");
    util::Rng root(seed);
    util::Rng split_rng = root.fork();
    util::Rng init_rng = root.fork();
    util::Rng batch_rng = root.fork();
    util::Rng test_rng = root.fork();

    auto [train_side, test_side] =
        cohort::split_cohort(cohort, 1.0 - options.test_fraction, split_rng);

    DaeResult result;
    EmbeddingModel& enc = result.encoder;
    enc.config = EncoderConfig::mlp_encoder(options.embedding_dim, options.hidden, options.layers);
    enc.config.mlp.output_activation = nn::OutputActivation::None;
    enc.scaler = FeatureScaler::fit(train_side, cohort::kStateDim);
    enc.init_params(init_rng);

    nn::MlpSpec decoder;
    decoder.input_dim = options.embedding_dim;
    decoder.hidden_dim = options.decoder_hidden;
    decoder.num_layers = 2;
    decoder.output_dim = cohort::kStateDim;
    decoder.output_activation = nn::OutputActivation::None;
    nn::add_mlp_params(decoder, "dec.", enc.params, init_rng, enc.config.init);

    const auto train_refs = all_states(train_side);
    const auto test_refs = all_states(test_side);
    const std::size_t batch = options.batch_size;
    const std::size_t batches_per_epoch =
        std::max<std::size_t>(1, (train_refs.size() + batch - 1) / batch);

    // One fixed corrupted copy of the test set keeps epoch losses comparable.
    nn::Tensor test_in({test_refs.size(), cohort::kStateDim});
    nn::Tensor test_target({test_refs.size(), cohort::kStateDim});
    {
        std::vector<std::size_t> idx(test_refs.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        fill_dae_batch(test_refs, idx, enc.scaler, options.corruption_prob, test_rng, test_in,
                       test_target);
    }

    auto forward_loss = [&](nn::Tape& tape, const nn::LeafMap& leaves, const nn::Tensor& in,
                            const nn::Tensor& target) {
        nn::Var x = tape.leaf(in);
        nn::Var code = enc.embed(tape, leaves, x);
        nn::Var recon = nn::mlp_forward(decoder, leaves, "dec.", tape, code);
        nn::Var diff = tape.sub(recon, tape.leaf(target));
        return tape.mean(tape.square(diff));
    };

    nn::Adam adam({options.learning_rate});
    nn::ParamSet best_params = enc.params;
    double best_test = std::numeric_limits<double>::infinity();

    nn::Tensor in({batch, cohort::kStateDim});
    nn::Tensor target({batch, cohort::kStateDim});
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        double train_loss = 0.0;
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            std::vector<std::size_t> pick(batch);
            for (auto& i : pick) i = batch_rng.index(train_refs.size());
            fill_dae_batch(train_refs, pick, enc.scaler, options.corruption_prob, batch_rng, in,
                           target);
            nn::Tape tape;
            nn::LeafMap leaves = nn::register_params(tape, enc.params);
            nn::Var loss = forward_loss(tape, leaves, in, target);
            const double lv = dae_loss_value(tape, loss);
            if (!std::isfinite(lv)) {
                throw std::runtime_error("dae: loss diverged at epoch " + std::to_string(epoch));
            }
            train_loss += lv;
            tape.backward(loss);
            adam.step(enc.params, nn::collect_grads(tape, leaves));
        }
        result.train_epoch_loss.push_back(train_loss / static_cast<double>(batches_per_epoch));

        nn::Tape tape;
        nn::LeafMap leaves = nn::register_params(tape, enc.params);
        const double test_loss = dae_loss_value(tape, forward_loss(tape, leaves, test_in, test_target));
        result.test_epoch_loss.push_back(test_loss);
        if (test_loss < best_test) {
            best_test = test_loss;
            best_params = enc.params;
            result.best_epoch = epoch;
        }
    }
    enc.params = std::move(best_params);
    // The decoder is training scaffolding; the representation is the encoder.
    std::erase_if(enc.params, [](const auto& kv) { return kv.first.starts_with("dec."); });
    return result;
}

EmbeddingModel train_plain_triplet(const cohort::Cohort& cohort,
                                   const PlainTripletOptions& options, std::uint64_t seed) {
    util::Rng root(seed);
    util::Rng init_rng = root.fork();
    util::Rng batch_rng = root.fork();

    std::vector<std::size_t> survivors, nonsurvivors;
    for (std::size_t p = 0; p < cohort.size(); ++p) {
        (cohort[p].outcome == Outcome::Death ? nonsurvivors : survivors).push_back(p);
    }
    if (survivors.empty() || nonsurvivors.empty()) {
        throw std::runtime_error("plain triplet: cohort must contain both outcomes");
    }

    EmbeddingModel model;
    model.config = EncoderConfig::mlp_encoder(options.embedding_dim, options.hidden, options.layers);
    model.config.mlp.output_activation = nn::OutputActivation::None;
    model.config.l2_normalize_output = true;
    model.scaler = FeatureScaler::fit(cohort, cohort::kStateDim);
    model.init_params(init_rng);

    const std::size_t dim = cohort::kStateDim;
    const std::size_t batch = options.batch_size;
    const std::size_t n_states = cohort::total_states(cohort);
    const std::size_t batches_per_epoch = std::max<std::size_t>(1, (n_states + batch - 1) / batch);

    nn::Adam adam({options.learning_rate});
    nn::Tensor anchors({batch, dim}), positives({batch, dim}), negatives({batch, dim});
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        for (std::size_t b = 0; b < batches_per_epoch; ++b) {
            for (std::size_t i = 0; i < batch; ++i) {
                const std::size_t ap = batch_rng.index(cohort.size());
                const auto& at = cohort[ap];
                const auto& anchor_state = at.states[batch_rng.index(at.length())];
                const auto& opposite = at.outcome == Outcome::Death ? survivors : nonsurvivors;
                const auto& nt = cohort[opposite[batch_rng.index(opposite.size())]];
                const auto& neg_state = nt.states[batch_rng.index(nt.length())];
                for (std::size_t c = 0; c < dim; ++c) {
                    const double z = model.scaler.transform(anchor_state[c], c);
                    anchors.at(i, c) = z;
                    positives.at(i, c) = z + options.noise_sd * batch_rng.normal();
                    negatives.at(i, c) = model.scaler.transform(neg_state[c], c);
                }
            }
            nn::Tape tape;
            nn::LeafMap leaves = nn::register_params(tape, model.params);
            nn::Var ea = model.embed(tape, leaves, tape.leaf(anchors));
            nn::Var ep = model.embed(tape, leaves, tape.leaf(positives));
            nn::Var en = model.embed(tape, leaves, tape.leaf(negatives));
            nn::Var dist_ap = tape.sqrt(tape.rowwise_norm_sq(tape.sub(ea, ep)));
            nn::Var dist_an = tape.sqrt(tape.rowwise_norm_sq(tape.sub(ea, en)));
            nn::Var loss = tape.mean(tape.max_const(
                tape.add_const(tape.sub(dist_ap, dist_an), options.margin), 0.0));
            if (!std::isfinite(tape.value(loss).data[0])) {
                throw std::runtime_error("plain triplet: loss diverged at epoch " +
                                         std::to_string(epoch));
            }
            tape.backward(loss);
            adam.step(model.params, nn::collect_grads(tape, leaves));
        }
    }
    return model;
}

}  // namespace riskball::embed
