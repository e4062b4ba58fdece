#pragma once

#include <string>
#include <vector>

#include "CLI11.hpp"
#include "riskball/losses.hpp"
#include "riskball/model.hpp"

namespace riskball::cli {

// Loss hyperparameters shared by train, ablate and rl.
struct LossOpts {
    double beta = 0.75;
    double lambda1 = 0.7, lambda2 = 10.0, lambda3 = 0.2, lambda4 = 0.05;
    double alpha = 3.0;
    double triplet_margin = 0.2, cosine_margin = 0.05;
    std::string cosine_variant = "standard";
    std::string lambda4_target = "anchor";
    std::size_t t = 24;
    double nonsurvivor_weight = 5.0;
    std::size_t batch = 0;  // 0 = by encoder
    double lr = 3e-5;
    std::size_t epochs = 10;

    void add_to(CLI::App& sub) {
        sub.add_option("--beta", beta, "terminal/contrastive balance in [0,1]")
            ->capture_default_str();
        sub.add_option("--lambda1", lambda1, "release-anchor norm discount")->capture_default_str();
        sub.add_option("--lambda2", lambda2, "ball containment penalty")->capture_default_str();
        sub.add_option("--lambda3", lambda3, "boundary pull weight")->capture_default_str();
        sub.add_option("--lambda4", lambda4, "origin pull weight")->capture_default_str();
        sub.add_option("--alpha", alpha, "boundary pull decay rate")->capture_default_str();
        sub.add_option("--triplet-margin", triplet_margin, "triplet hinge margin")
            ->capture_default_str();
        sub.add_option("--cosine-margin", cosine_margin, "cosine hinge margin")
            ->capture_default_str();
        sub.add_option("--cosine-variant", cosine_variant, "standard | inner_product")
            ->check(CLI::IsMember({"standard", "inner_product"}))
            ->capture_default_str();
        sub.add_option("--lambda4-target", lambda4_target,
                       "release-anchor target of the origin pull: anchor | positive")
            ->check(CLI::IsMember({"anchor", "positive"}))
            ->capture_default_str();
        sub.add_option("--t", t, "near-terminal window in hours (12, 24, 48 or 72)")
            ->check(CLI::IsMember({12, 24, 48, 72}))
            ->capture_default_str();
        sub.add_option("--nonsurvivor-weight", nonsurvivor_weight,
                       "anchor sampling weight of non-survivors")
            ->capture_default_str();
        sub.add_option("--batch", batch, "triplet batch size (0 = 256 MLP / 128 GRU)")
            ->capture_default_str();
        sub.add_option("--lr", lr, "Adam learning rate")->capture_default_str();
        sub.add_option("--epochs", epochs, "training epochs")->capture_default_str();
    }

    embed::LossConfig to_config() const {
        embed::LossConfig c;
        c.beta = beta;
        c.lambda1 = lambda1;
        c.lambda2 = lambda2;
        c.lambda3 = lambda3;
        c.lambda4 = lambda4;
        c.alpha = alpha;
        c.triplet_margin = triplet_margin;
        c.cosine_margin = cosine_margin;
        c.cosine_variant = cosine_variant == "standard" ? embed::CosineVariant::Standard
                                                        : embed::CosineVariant::InnerProduct;
        c.lambda4_release_target = lambda4_target == "anchor"
                                       ? embed::Lambda4ReleaseTarget::Anchor
                                       : embed::Lambda4ReleaseTarget::Positive;
        c.near_terminal_t = t;
        c.nonsurvivor_weight = nonsurvivor_weight;
        c.batch_size = batch;
        c.learning_rate = lr;
        c.epochs = epochs;
        c.validate();
        return c;
    }
};

struct EncoderOpts {
    std::string encoder = "mlp";
    std::size_t dim = 3;
    std::size_t hidden = 512;
    std::size_t layers = 8;
    std::size_t gru_hidden = 128;
    std::size_t gru_layers = 2;
    std::size_t horizon = 12;
    std::string init = "orthogonal";

    void add_to(CLI::App& sub) {
        sub.add_option("--encoder", encoder, "encoder architecture: mlp | gru")
            ->check(CLI::IsMember({"mlp", "gru"}))
            ->capture_default_str();
        sub.add_option("--dim", dim, "embedding dimension")->capture_default_str();
        sub.add_option("--hidden", hidden, "MLP hidden width")->capture_default_str();
        sub.add_option("--layers", layers, "MLP layer count")->capture_default_str();
        sub.add_option("--gru-hidden", gru_hidden, "GRU hidden width")->capture_default_str();
        sub.add_option("--gru-layers", gru_layers, "GRU layer count")->capture_default_str();
        sub.add_option("--horizon", horizon, "GRU history hours")->capture_default_str();
        sub.add_option("--init", init, "weight init: orthogonal | uniform")
            ->check(CLI::IsMember({"orthogonal", "uniform"}))
            ->capture_default_str();
    }

    embed::EncoderConfig to_config() const {
        embed::EncoderConfig c =
            encoder == "mlp" ? embed::EncoderConfig::mlp_encoder(dim, hidden, layers)
                             : embed::EncoderConfig::gru_encoder(dim, gru_hidden, gru_layers,
                                                                 horizon, hidden, layers);
        c.init = init == "orthogonal" ? nn::WeightInit::Orthogonal : nn::WeightInit::ScaledUniform;
        c.validate();
        return c;
    }
};

std::vector<double> parse_double_list(const std::string& csv, const std::string& what);
std::vector<int> parse_int_list(const std::string& csv, const std::string& what);

}  // namespace riskball::cli
