#include "riskball/model.hpp"

#include <filesystem>
#include <stdexcept>

#include "riskball/checkpoint.hpp"
#include "riskball/cohort_csv.hpp"
#include "riskball/tape.hpp"

namespace riskball::embed {

EncoderConfig EncoderConfig::mlp_encoder(std::size_t embedding_dim, std::size_t hidden,
                                         std::size_t layers) {
    EncoderConfig c;
    c.kind = EncoderKind::Mlp;
    c.embedding_dim = embedding_dim;
    c.mlp.input_dim = cohort::kStateDim;
    c.mlp.hidden_dim = hidden;
    c.mlp.num_layers = layers;
    c.mlp.output_dim = embedding_dim;
    c.mlp.output_activation = nn::OutputActivation::Tanh;
    return c;
}

EncoderConfig EncoderConfig::gru_encoder(std::size_t embedding_dim, std::size_t gru_hidden,
                                         std::size_t gru_layers, std::size_t horizon,
                                         std::size_t head_hidden, std::size_t head_layers) {
    EncoderConfig c;
    c.kind = EncoderKind::Gru;
    c.embedding_dim = embedding_dim;
    c.gru.input_dim = cohort::kObservedDim;
    c.gru.hidden_dim = gru_hidden;
    c.gru.num_layers = gru_layers;
    c.gru.horizon = horizon;
    c.head.input_dim = gru_hidden + cohort::kObservedDim;
    c.head.hidden_dim = head_hidden;
    c.head.num_layers = head_layers;
    c.head.output_dim = embedding_dim;
    c.head.output_activation = nn::OutputActivation::Tanh;
    return c;
}

std::size_t EncoderConfig::input_width() const {
    return kind == EncoderKind::Mlp ? mlp.input_dim : gru.horizon * gru.input_dim;
}

std::size_t EncoderConfig::channels() const {
    return kind == EncoderKind::Mlp ? mlp.input_dim : gru.input_dim;
}

std::size_t EncoderConfig::min_history() const {
    return kind == EncoderKind::Mlp ? 0 : gru.horizon - 1;
}

void EncoderConfig::validate() const {
    if (embedding_dim < 1) throw std::invalid_argument("EncoderConfig: embedding_dim must be >= 1");
    if (kind == EncoderKind::Mlp) {
        mlp.validate();
        if (mlp.output_dim != embedding_dim) {
            throw std::invalid_argument("EncoderConfig: mlp output dim != embedding_dim");
        }
    } else {
        gru.validate();
        head.validate();
        if (head.input_dim != gru.hidden_dim + gru.input_dim) {
            throw std::invalid_argument("EncoderConfig: head input dim mismatch");
        }
        if (head.output_dim != embedding_dim) {
            throw std::invalid_argument("EncoderConfig: head output dim != embedding_dim");
        }
    }
}

util::KvMap EncoderConfig::to_kv() const {
    util::KvMap kv;
    kv["encoder.kind"] = kind == EncoderKind::Mlp ? "mlp" : "gru";
    kv["encoder.embedding_dim"] = std::to_string(embedding_dim);
    kv["encoder.normalize"] = l2_normalize_output ? "1" : "0";
    kv["encoder.init"] = init == nn::WeightInit::Orthogonal ? "orthogonal" : "scaled_uniform";
    if (kind == EncoderKind::Mlp) {
        kv["encoder.input_dim"] = std::to_string(mlp.input_dim);
        kv["encoder.hidden"] = std::to_string(mlp.hidden_dim);
        kv["encoder.layers"] = std::to_string(mlp.num_layers);
        kv["encoder.tanh"] = mlp.output_activation == nn::OutputActivation::Tanh ? "1" : "0";
    } else {
        kv["encoder.input_dim"] = std::to_string(gru.input_dim);
        kv["encoder.gru_hidden"] = std::to_string(gru.hidden_dim);
        kv["encoder.gru_layers"] = std::to_string(gru.num_layers);
        kv["encoder.horizon"] = std::to_string(gru.horizon);
        kv["encoder.head_hidden"] = std::to_string(head.hidden_dim);
        kv["encoder.head_layers"] = std::to_string(head.num_layers);
        kv["encoder.tanh"] = head.output_activation == nn::OutputActivation::Tanh ? "1" : "0";
    }
    return kv;
}

EncoderConfig EncoderConfig::from_kv(const util::KvMap& kv) {
    EncoderConfig c;
    const std::string& kind = util::get_or_throw(kv, "encoder.kind");
    const auto dim = static_cast<std::size_t>(util::kv_int(kv, "encoder.embedding_dim"));
    const auto tanh_out = util::kv_int(kv, "encoder.tanh") != 0;
    if (kind == "mlp") {
        c = mlp_encoder(dim, static_cast<std::size_t>(util::kv_int(kv, "encoder.hidden")),
                        static_cast<std::size_t>(util::kv_int(kv, "encoder.layers")));
        c.mlp.input_dim = static_cast<std::size_t>(util::kv_int(kv, "encoder.input_dim"));
        if (!tanh_out) c.mlp.output_activation = nn::OutputActivation::None;
    } else if (kind == "gru") {
        c = gru_encoder(dim, static_cast<std::size_t>(util::kv_int(kv, "encoder.gru_hidden")),
                        static_cast<std::size_t>(util::kv_int(kv, "encoder.gru_layers")),
                        static_cast<std::size_t>(util::kv_int(kv, "encoder.horizon")),
                        static_cast<std::size_t>(util::kv_int(kv, "encoder.head_hidden")),
                        static_cast<std::size_t>(util::kv_int(kv, "encoder.head_layers")));
        c.gru.input_dim = static_cast<std::size_t>(util::kv_int(kv, "encoder.input_dim"));
        c.head.input_dim = c.gru.hidden_dim + c.gru.input_dim;
        if (!tanh_out) c.head.output_activation = nn::OutputActivation::None;
    } else {
        throw std::runtime_error("EncoderConfig: unknown kind '" + kind + "'");
    }
    c.l2_normalize_output = util::kv_int(kv, "encoder.normalize") != 0;
    c.init = util::get_or_throw(kv, "encoder.init") == "orthogonal"
                 ? nn::WeightInit::Orthogonal
                 : nn::WeightInit::ScaledUniform;
    return c;
}

nn::Tensor build_input_matrix(const EncoderConfig& config, const FeatureScaler& scaler,
                              const std::vector<StateRef>& refs) {
    const std::size_t width = config.input_width();
    const std::size_t channels = config.channels();
    if (scaler.dim() != channels) {
        throw std::invalid_argument("build_input_matrix: scaler fitted on wrong channel count");
    }
    nn::Tensor x({refs.size(), width});
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto& ref = refs[i];
        if (ref.traj == nullptr || ref.hour >= ref.traj->length()) {
            throw std::invalid_argument("build_input_matrix: bad state reference");
        }
        if (config.kind == EncoderKind::Mlp) {
            const auto& s = ref.traj->states[ref.hour];
            for (std::size_t c = 0; c < channels; ++c) x.at(i, c) = scaler.transform(s[c], c);
        } else {
            const std::size_t horizon = config.gru.horizon;
            if (ref.hour + 1 < horizon) {
                throw std::invalid_argument("build_input_matrix: state lacks the " +
                                            std::to_string(horizon) + "-hour history");
            }
            for (std::size_t h = 0; h < horizon; ++h) {
                const auto& s = ref.traj->states[ref.hour + 1 - horizon + h];
                for (std::size_t c = 0; c < channels; ++c) {
                    x.at(i, h * channels + c) = scaler.transform(s[c], c);
                }
            }
        }
    }
    return x;
}

void EmbeddingModel::init_params(util::Rng& rng) {
    config.validate();
    params.clear();
    if (config.kind == EncoderKind::Mlp) {
        nn::add_mlp_params(config.mlp, "enc.", params, rng, config.init);
    } else {
        nn::add_gru_params(config.gru, "gru.", params, rng, config.init);
        nn::add_mlp_params(config.head, "head.", params, rng, config.init);
    }
}

nn::Var EmbeddingModel::embed(nn::Tape& tape, const nn::LeafMap& leaves, nn::Var inputs) const {
    nn::Var out;
    if (config.kind == EncoderKind::Mlp) {
        out = nn::mlp_forward(config.mlp, leaves, "enc.", tape, inputs);
    } else {
        nn::Var hidden = nn::gru_forward_batch(config.gru, leaves, "gru.", tape, inputs);
        const std::size_t w = config.gru.input_dim;
        nn::Var current = tape.cols(inputs, (config.gru.horizon - 1) * w, config.gru.horizon * w);
        out = nn::mlp_forward(config.head, leaves, "head.", tape, tape.concat_cols(hidden, current));
    }
    if (config.l2_normalize_output) out = tape.rowwise_l2_normalize(out);
    return out;
}

nn::Tensor EmbeddingModel::embed_states(const std::vector<StateRef>& refs) const {
    nn::Tensor out({refs.size(), config.embedding_dim});
    // Bounded batches keep tape memory flat on large cohorts.
    const std::size_t chunk = 1024;
    for (std::size_t start = 0; start < refs.size(); start += chunk) {
        const std::size_t end = std::min(refs.size(), start + chunk);
        std::vector<StateRef> part(refs.begin() + static_cast<std::ptrdiff_t>(start),
                                   refs.begin() + static_cast<std::ptrdiff_t>(end));
        nn::Tape tape;
        nn::LeafMap leaves = nn::register_params(tape, params);
        nn::Var x = tape.leaf(build_input_matrix(config, scaler, part));
        nn::Var e = embed(tape, leaves, x);
        const nn::Tensor& val = tape.value(e);
        std::copy(val.data.begin(), val.data.end(),
                  out.data.begin() + static_cast<std::ptrdiff_t>(start * config.embedding_dim));
    }
    return out;
}

std::vector<double> EmbeddingModel::squared_norms(const std::vector<StateRef>& refs) const {
    nn::Tensor emb = embed_states(refs);
    std::vector<double> d(refs.size(), 0.0);
    for (std::size_t i = 0; i < refs.size(); ++i) {
        for (std::size_t j = 0; j < config.embedding_dim; ++j) {
            d[i] += emb.at(i, j) * emb.at(i, j);
        }
    }
    return d;
}

std::vector<StateRef> eligible_states(const cohort::Cohort& cohort, const EncoderConfig& config) {
    std::vector<StateRef> refs;
    const std::size_t min_hour = config.min_history();
    for (const auto& traj : cohort) {
        for (std::size_t t = min_hour; t < traj.length(); ++t) refs.push_back({&traj, t});
    }
    return refs;
}

void save_model(const std::string& path, const EmbeddingModel& model,
                const util::KvMap& extra_meta) {
    nn::ParamSet with_scaler = model.params;
    model.scaler.to_params(with_scaler);
    nn::save_checkpoint(path, with_scaler);
    util::KvMap meta = model.config.to_kv();
    for (const auto& [k, v] : extra_meta) meta[k] = v;
    util::save_kv(path + ".meta.txt", meta);
}

EmbeddingModel load_model(const std::string& path) {
    if (!std::filesystem::exists(path)) {
        throw std::runtime_error("model: checkpoint not found: " + path);
    }
    EmbeddingModel model;
    model.params = nn::load_checkpoint(path);
    model.scaler = FeatureScaler::from_params(model.params);
    model.params.erase("scaler.mean");
    model.params.erase("scaler.sd");
    model.config = EncoderConfig::from_kv(util::load_kv(path + ".meta.txt"));
    model.config.validate();
    return model;
}

}  // namespace riskball::embed
