#pragma once

#include <span>
#include <vector>

#include "riskball/model.hpp"
#include "riskball/tape.hpp"

namespace riskball::embed {

enum class CosineVariant { Standard, InnerProduct };
// The last intermediate term pulls an embedding toward the origin on release
// anchors; `Anchor` keeps the printed form (the anchor embedding), `Positive`
// targets the near-release positive instead.
enum class Lambda4ReleaseTarget { Anchor, Positive };

struct LossConfig {
    double beta = 0.75;                // balance of terminal vs contrastive loss
    double lambda1 = 0.7;              // release-anchor norm discount
    double lambda2 = 10.0;             // ball-containment penalty
    double lambda3 = 0.2;              // exponential pull toward the boundary
    double lambda4 = 0.05;             // pull toward the origin
    double alpha = 3.0;                // decay rate of the lambda3 term
    double triplet_margin = 0.2;
    double cosine_margin = 0.05;
    CosineVariant cosine_variant = CosineVariant::Standard;
    Lambda4ReleaseTarget lambda4_release_target = Lambda4ReleaseTarget::Anchor;
    std::size_t near_terminal_t = 24;  // window in {12, 24, 48, 72}
    double nonsurvivor_weight = 5.0;   // anchor sampling weight for deaths
    std::size_t batch_size = 0;        // 0 = pick by encoder (256 MLP, 128 GRU)
    double learning_rate = 3e-5;
    std::size_t epochs = 10;

    std::size_t resolved_batch_size(EncoderKind kind) const {
        if (batch_size != 0) return batch_size;
        return kind == EncoderKind::Mlp ? 256 : 128;
    }

    void validate() const;
    util::KvMap to_kv() const;
    static LossConfig from_kv(const util::KvMap& kv);
};

// --- scalar reference losses over embedding vectors -------------------------
// These are the ground-truth definitions; the batched tape path below must
// agree with them and is checked against them in the tests.

double squared_norm(std::span<const double> v);

// death anchor: (d(a) - 1)^2; release anchor: lambda1 * d(a)
double loss_terminal(std::span<const double> emb_anchor, cohort::Outcome anchor_outcome,
                     double lambda1);

// max(||a-p|| - ||a-n|| + margin, 0), Euclidean norms on embeddings
double triplet_loss(std::span<const double> a, std::span<const double> p,
                    std::span<const double> n, double margin);

// Standard: y=1 -> 1-cos(a,p), y=0 -> max(0, cos(a,p)-margin); throws on an
// exactly-zero embedding. InnerProduct: y=0 -> <a,p>, y=1 -> 0.
double cosine_loss(std::span<const double> a, std::span<const double> p, bool same_class,
                   const LossConfig& config);

double loss_contrastive(std::span<const double> a, std::span<const double> p,
                        std::span<const double> n, cohort::Outcome anchor_outcome,
                        bool same_class, const LossConfig& config);

double loss_intermediate(std::span<const double> emb_p, std::span<const double> emb_n,
                         std::span<const double> emb_a, cohort::Outcome anchor_outcome,
                         const LossConfig& config);

double total_loss_single(std::span<const double> a, std::span<const double> p,
                         std::span<const double> n, cohort::Outcome anchor_outcome,
                         bool same_class, const LossConfig& config);

// --- batched tape loss -------------------------------------------------------

struct TripletBatch {
    nn::Tensor anchors;    // [B, input_width]
    nn::Tensor positives;  // [B, input_width]
    nn::Tensor negatives;  // [B, input_width]
    std::vector<cohort::Outcome> anchor_outcome;  // [B]
    std::vector<char> same_organ;                 // y_ap, meaningful on death anchors

    std::size_t size() const { return anchor_outcome.size(); }
};

struct BatchLoss {
    nn::Var total;         // scalar mean over the batch
    nn::Var terminal;      // scalar mean of the terminal component
    nn::Var contrastive;   // scalar mean of the contrastive component
    nn::Var intermediate;  // scalar mean of the intermediate component
};

BatchLoss batch_total_loss(nn::Tape& tape, const EmbeddingModel& model,
                           const nn::LeafMap& leaves, const TripletBatch& batch,
                           const LossConfig& config);

}  // namespace riskball::embed
