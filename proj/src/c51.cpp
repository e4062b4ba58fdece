#include "riskball/c51.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "riskball/adam.hpp"
#include "riskball/rng.hpp"

namespace riskball::rl {

void C51Config::validate() const {
    if (atoms < 2) throw std::invalid_argument("C51Config: atoms must be >= 2");
    if (!(v_min < v_max)) throw std::invalid_argument("C51Config: v_min must be < v_max");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("C51Config: gamma in [0,1]");
    if (batch_size < 1) throw std::invalid_argument("C51Config: batch_size must be >= 1");
    if (learning_rate <= 0.0) throw std::invalid_argument("C51Config: learning_rate must be > 0");
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("C51Config: tau in (0,1]");
    if (epochs < 1) throw std::invalid_argument("C51Config: epochs must be >= 1");
}

std::vector<double> C51Config::support() const {
    std::vector<double> z(atoms);
    const double dz = (v_max - v_min) / static_cast<double>(atoms - 1);
    for (std::size_t i = 0; i < atoms; ++i) z[i] = v_min + static_cast<double>(i) * dz;
    return z;
}

std::vector<double> c51_project(std::span<const double> target_atoms,
                                std::span<const double> probs, const C51Config& config) {
    if (target_atoms.size() != probs.size()) {
        throw std::invalid_argument("c51_project: atom/prob length mismatch");
    }
    const std::size_t n = config.atoms;
    const double dz = (config.v_max - config.v_min) / static_cast<double>(n - 1);
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < target_atoms.size(); ++k) {
        const double t = std::clamp(target_atoms[k], config.v_min, config.v_max);
        const double b = (t - config.v_min) / dz;
        const auto lower = static_cast<std::size_t>(std::floor(b));
        const std::size_t upper = std::min(lower + 1, n - 1);
        const double frac = b - std::floor(b);
        out[lower] += probs[k] * (1.0 - frac);
        out[upper] += probs[k] * frac;
    }
    return out;
}

double expected_value(std::span<const double> probs, std::span<const double> support) {
    double e = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) e += probs[i] * support[i];
    return e;
}

int greedy_action(std::span<const double> action_distributions, std::span<const double> support) {
    const std::size_t atoms = support.size();
    if (action_distributions.size() != cohort::kNumActions * atoms) {
        throw std::invalid_argument("greedy_action: distribution block size mismatch");
    }
    int best = 0;
    double best_value = expected_value(action_distributions.subspan(0, atoms), support);
    for (std::size_t a = 1; a < cohort::kNumActions; ++a) {
        const double v = expected_value(action_distributions.subspan(a * atoms, atoms), support);
        if (v > best_value) {
            best_value = v;
            best = static_cast<int>(a);
        }
    }
    return best;
}

namespace {

nn::Tensor build_q_input(const TransitionDataset& dataset,
                         std::span<const std::uint32_t> state_indices, bool augment,
                         const std::vector<double>& mean, const std::vector<double>& sd) {
    const std::size_t dim = dataset.state_dim(augment);
    nn::Tensor x({state_indices.size(), dim});
    for (std::size_t i = 0; i < state_indices.size(); ++i) {
        const std::uint32_t s = state_indices[i];
        for (std::size_t c = 0; c < cohort::kStateDim; ++c) {
            x.at(i, c) = (dataset.states[s][c] - mean[c]) / sd[c];
        }
        if (augment) {
            for (std::size_t c = 0; c < dataset.embedding_dim; ++c) {
                const std::size_t col = cohort::kStateDim + c;
                x.at(i, col) = (dataset.embedding[s][c] - mean[col]) / sd[col];
            }
        }
    }
    return x;
}

void fit_input_stats(const TransitionDataset& dataset, bool augment, std::vector<double>& mean,
                     std::vector<double>& sd) {
    const std::size_t dim = dataset.state_dim(augment);
    const std::size_t n = dataset.states.size();
    mean.assign(dim, 0.0);
    sd.assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < cohort::kStateDim; ++c) mean[c] += dataset.states[i][c];
        if (augment) {
            for (std::size_t c = 0; c < dataset.embedding_dim; ++c) {
                mean[cohort::kStateDim + c] += dataset.embedding[i][c];
            }
        }
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < cohort::kStateDim; ++c) {
            const double d = dataset.states[i][c] - mean[c];
            sd[c] += d * d;
        }
        if (augment) {
            for (std::size_t c = 0; c < dataset.embedding_dim; ++c) {
                const double d = dataset.embedding[i][c] - mean[cohort::kStateDim + c];
                sd[cohort::kStateDim + c] += d * d;
            }
        }
    }
    for (double& s : sd) {
        s = std::sqrt(s / static_cast<double>(n));
        if (s < 1e-8) s = 1.0;
    }
}

// Row-wise softmax per action block over raw logits.
nn::Tensor blockwise_softmax(const nn::Tensor& logits, std::size_t atoms) {
    nn::Tensor probs = logits;
    const std::size_t rows = logits.rows();
    const std::size_t blocks = logits.cols() / atoms;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t b = 0; b < blocks; ++b) {
            double* p = probs.data.data() + i * logits.cols() + b * atoms;
            double mx = p[0];
            for (std::size_t j = 1; j < atoms; ++j) mx = std::max(mx, p[j]);
            double z = 0.0;
            for (std::size_t j = 0; j < atoms; ++j) {
                p[j] = std::exp(p[j] - mx);
                z += p[j];
            }
            for (std::size_t j = 0; j < atoms; ++j) p[j] /= z;
        }
    }
    return probs;
}

nn::Tensor forward_logits(const nn::MlpSpec& net, const nn::ParamSet& params,
                          const nn::Tensor& input) {
    nn::Tape tape;
    nn::LeafMap leaves = nn::register_params(tape, params);
    nn::Var out = nn::mlp_forward(net, leaves, "q.", tape, tape.leaf(input));
    return tape.value(out);
}

}  // namespace

nn::Tensor QNetwork::distributions(const TransitionDataset& dataset,
                                   std::span<const std::uint32_t> state_indices) const {
    const nn::Tensor input =
        build_q_input(dataset, state_indices, config.augment_state, input_mean, input_sd);
    return blockwise_softmax(forward_logits(net, params, input), config.atoms);
}

C51TrainResult c51_train(const TransitionDataset& dataset, const C51Config& config,
                         std::uint64_t seed, const C51StepCallback& callback) {
    config.validate();
    if (dataset.transitions.empty()) throw std::invalid_argument("c51_train: empty dataset");
    if (config.augment_state && dataset.embedding_dim == 0) {
        throw std::invalid_argument("c51_train: dataset has no embeddings for augmentation");
    }

    util::Rng root(seed);
    util::Rng init_rng = root.fork();
    util::Rng batch_rng = root.fork();

    C51TrainResult result;
    QNetwork& q = result.network;
    q.config = config;
    q.net.input_dim = dataset.state_dim(config.augment_state);
    q.net.hidden_dim = config.trunk_hidden;
    q.net.num_layers = config.trunk_layers + 1;
    q.net.output_dim = cohort::kNumActions * config.atoms;
    q.net.output_activation = nn::OutputActivation::None;
    fit_input_stats(dataset, config.augment_state, q.input_mean, q.input_sd);
    nn::add_mlp_params(q.net, "q.", q.params, init_rng, nn::WeightInit::Orthogonal);

    nn::ParamSet target_params = q.params;
    const std::vector<double> z = config.support();
    const std::size_t atoms = config.atoms;
    nn::Adam adam({config.learning_rate});

    const std::size_t n_tr = dataset.transitions.size();
    const std::size_t batch = std::min(config.batch_size, n_tr);
    const std::size_t steps_per_epoch = std::max<std::size_t>(1, (n_tr + batch - 1) / batch);

    std::vector<std::uint32_t> s_idx(batch), sn_idx(batch);
    std::vector<int> actions(batch);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (std::size_t step = 0; step < steps_per_epoch; ++step) {
            std::vector<std::size_t> pick(batch);
            for (auto& i : pick) i = batch_rng.index(n_tr);
            for (std::size_t i = 0; i < batch; ++i) {
                const Transition& tr = dataset.transitions[pick[i]];
                s_idx[i] = tr.s;
                sn_idx[i] = tr.s_next;
                actions[i] = tr.action;
            }

            // Bellman targets under the target network's greedy action.
            nn::Tensor targets({batch, atoms});
            {
                const nn::Tensor next_input = build_q_input(dataset, sn_idx, config.augment_state,
                                                            q.input_mean, q.input_sd);
                const nn::Tensor next_probs = blockwise_softmax(
                    forward_logits(q.net, target_params, next_input), atoms);
                std::vector<double> shifted(atoms), row_probs(atoms);
                for (std::size_t i = 0; i < batch; ++i) {
                    const Transition& tr = dataset.transitions[pick[i]];
                    if (tr.done) {
                        const double r[1] = {tr.reward};
                        const double p[1] = {1.0};
                        const std::vector<double> m =
                            c51_project(std::span<const double>(r, 1),
                                        std::span<const double>(p, 1), config);
                        for (std::size_t j = 0; j < atoms; ++j) targets.at(i, j) = m[j];
                        continue;
                    }
                    const double* row = next_probs.data.data() + i * cohort::kNumActions * atoms;
                    const int a_star = greedy_action(
                        std::span<const double>(row, cohort::kNumActions * atoms), z);
                    for (std::size_t j = 0; j < atoms; ++j) {
                        shifted[j] = tr.reward + config.gamma * z[j];
                        row_probs[j] = row[static_cast<std::size_t>(a_star) * atoms + j];
                    }
                    const std::vector<double> m = c51_project(shifted, row_probs, config);
                    for (std::size_t j = 0; j < atoms; ++j) targets.at(i, j) = m[j];
                }
            }

            nn::Tape tape;
            nn::LeafMap leaves = nn::register_params(tape, q.params);
            nn::Var input = tape.leaf(
                build_q_input(dataset, s_idx, config.augment_state, q.input_mean, q.input_sd));
            nn::Var logits = nn::mlp_forward(q.net, leaves, "q.", tape, input);
            nn::Var picked = tape.gather_rows_block(logits, actions, atoms);
            nn::Var loss = tape.mean(tape.softmax_cross_entropy_rows(picked, targets));
            const double lv = tape.value(loss).data[0];
            if (!std::isfinite(lv)) {
                throw std::runtime_error("c51_train: loss diverged at epoch " +
                                         std::to_string(epoch) + ", step " + std::to_string(step));
            }
            epoch_loss += lv;
            tape.backward(loss);
            adam.step(q.params, nn::collect_grads(tape, leaves));

            // Soft target update after every gradient step.
            for (auto& [name, t] : target_params) {
                const nn::Tensor& online = q.params.at(name);
                for (std::size_t i = 0; i < t.data.size(); ++i) {
                    t.data[i] = (1.0 - config.tau) * t.data[i] + config.tau * online.data[i];
                }
            }

            if (callback) {
                callback(blockwise_softmax(tape.value(logits), atoms));
            }
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(steps_per_epoch));
    }
    return result;
}

}  // namespace riskball::rl
