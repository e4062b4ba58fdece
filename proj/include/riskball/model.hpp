#pragma once

#include <string>
#include <vector>

#include "riskball/encoders.hpp"
#include "riskball/kv_config.hpp"
#include "riskball/scaler.hpp"
#include "riskball/state.hpp"

namespace riskball::embed {

enum class EncoderKind { Mlp, Gru };

// Encoder into the embedding space. The MLP variant consumes the full 41-d
// state; the GRU variant consumes the trailing 12-hour window of the 27
// observed channels and feeds the final hidden state, concatenated with the
// current observation, through an MLP head.
struct EncoderConfig {
    EncoderKind kind = EncoderKind::Mlp;
    std::size_t embedding_dim = 3;
    nn::MlpSpec mlp;   // kind == Mlp
    nn::GruSpec gru;   // kind == Gru
    nn::MlpSpec head;  // kind == Gru
    bool l2_normalize_output = false;  // plain-triplet baseline projects to the sphere
    nn::WeightInit init = nn::WeightInit::Orthogonal;

    static EncoderConfig mlp_encoder(std::size_t embedding_dim = 3, std::size_t hidden = 512,
                                     std::size_t layers = 8);
    static EncoderConfig gru_encoder(std::size_t embedding_dim = 3, std::size_t gru_hidden = 128,
                                     std::size_t gru_layers = 2, std::size_t horizon = 12,
                                     std::size_t head_hidden = 512, std::size_t head_layers = 8);

    std::size_t input_width() const;   // flat model input width per state
    std::size_t channels() const;      // state channels consumed (41 or 27)
    std::size_t min_history() const;   // earliest usable hour index
    void validate() const;

    util::KvMap to_kv() const;
    static EncoderConfig from_kv(const util::KvMap& kv);
};

struct StateRef {
    const cohort::PatientTrajectory* traj = nullptr;
    std::size_t hour = 0;
};

// Rows of scaler-standardized model input, one per reference.
nn::Tensor build_input_matrix(const EncoderConfig& config, const FeatureScaler& scaler,
                              const std::vector<StateRef>& refs);

class EmbeddingModel {
public:
    EncoderConfig config;
    nn::ParamSet params;
    FeatureScaler scaler;

    void init_params(util::Rng& rng);

    // inputs: [batch, input_width] -> [batch, embedding_dim]
    nn::Var embed(nn::Tape& tape, const nn::LeafMap& leaves, nn::Var inputs) const;

    // Forward a set of states without keeping gradients.
    nn::Tensor embed_states(const std::vector<StateRef>& refs) const;

    // d(x) = squared Euclidean norm of the embedding.
    std::vector<double> squared_norms(const std::vector<StateRef>& refs) const;
};

// Every state of the cohort usable by this model (hours >= min_history).
std::vector<StateRef> eligible_states(const cohort::Cohort& cohort, const EncoderConfig& config);

// Checkpoint plus a sidecar meta file (<path>.meta.txt) carrying the encoder
// configuration and whatever run metadata the caller supplies, so an
// embedding is reproducible from its checkpoint alone.
void save_model(const std::string& path, const EmbeddingModel& model,
                const util::KvMap& extra_meta = {});
EmbeddingModel load_model(const std::string& path);

}  // namespace riskball::embed
