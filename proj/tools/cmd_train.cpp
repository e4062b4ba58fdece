#include <cstdio>

#include "commands.hpp"
#include "opt_common.hpp"
#include "riskball/baselines.hpp"
#include "riskball/cohort_csv.hpp"
#include "riskball/report.hpp"
#include "riskball/train.hpp"

namespace riskball::cli {

namespace {

struct TrainOpts {
    std::string cohort_path;
    std::string model = "normed";
    double val_fraction = 0.1;
    double noise_sd = 0.1;      // plain-triplet positive noise
    double corruption = 0.1;    // dae zeroing probability
    std::uint64_t seed = 1;
    std::string out_dir;
    LossOpts loss;
    EncoderOpts encoder;
};

void run_train(const CLI::App& sub, const TrainOpts& o) {
    const std::string hash = write_snapshot(sub, o.out_dir, "train");
    const cohort::Cohort cohort = cohort::load_cohort_csv(o.cohort_path);
    util::Rng split_rng(o.seed ^ 0x5eedULL);
    const std::string ckpt =
        o.out_dir + "/" + util::artifact_name("checkpoint", o.seed, hash, "ckpt");

    util::KvMap meta;
    meta["cohort.path"] = o.cohort_path;
    meta["cohort.seed"] = std::to_string(o.seed);
    meta["model"] = o.model;

    if (o.model == "normed") {
        auto [train_side, val_side] =
            cohort::stratified_split_cohort(cohort, 1.0 - o.val_fraction, split_rng);
        const embed::LossConfig config = o.loss.to_config();
        const embed::TrainResult result =
            embed::train_embedding(train_side, val_side, o.encoder.to_config(), config, o.seed);
        for (const auto& [k, v] : config.to_kv()) meta[k] = v;
        meta["best_epoch"] = std::to_string(result.best_epoch);
        embed::save_model(ckpt, result.model, meta);

        std::vector<std::vector<std::string>> rows;
        for (std::size_t e = 0; e < result.train_epoch_loss.size(); ++e) {
            rows.push_back({std::to_string(e), eval::csv_cell(result.train_epoch_loss[e]),
                            eval::csv_cell(result.val_epoch_loss[e])});
        }
        eval::write_csv(o.out_dir + "/" + util::artifact_name("curves", o.seed, hash, "csv"),
                        {"epoch", "train_loss", "val_loss"}, rows);
    } else if (o.model == "dae") {
        embed::DaeOptions dae;
        dae.embedding_dim = o.encoder.dim;
        dae.hidden = o.encoder.hidden;
        dae.layers = o.encoder.layers;
        dae.corruption_prob = o.corruption;
        const embed::DaeResult result = embed::train_denoising_autoencoder(cohort, dae, o.seed);
        meta["best_epoch"] = std::to_string(result.best_epoch);
        embed::save_model(ckpt, result.encoder, meta);

        std::vector<std::vector<std::string>> rows;
        for (std::size_t e = 0; e < result.train_epoch_loss.size(); ++e) {
            rows.push_back({std::to_string(e), eval::csv_cell(result.train_epoch_loss[e]),
                            eval::csv_cell(result.test_epoch_loss[e])});
        }
        eval::write_csv(o.out_dir + "/" + util::artifact_name("curves", o.seed, hash, "csv"),
                        {"epoch", "train_loss", "test_loss"}, rows);
    } else {  // triplet
        embed::PlainTripletOptions topt;
        topt.embedding_dim = o.encoder.dim;
        topt.hidden = o.encoder.hidden;
        topt.layers = o.encoder.layers;
        topt.noise_sd = o.noise_sd;
        const embed::EmbeddingModel model = embed::train_plain_triplet(cohort, topt, o.seed);
        embed::save_model(ckpt, model, meta);
    }
    std::printf("wrote %s\n", ckpt.c_str());
}

}  // namespace

void register_train(CLI::App& app) {
    auto* sub = app.add_subcommand("train", "train an embedding (or a baseline representation)");
    auto o = std::make_shared<TrainOpts>();
    o->out_dir = default_output_root();
    sub->add_option("--cohort", o->cohort_path, "cohort CSV path")->required();
    sub->add_option("--model", o->model, "normed | dae | triplet")
        ->check(CLI::IsMember({"normed", "dae", "triplet"}))
        ->capture_default_str();
    sub->add_option("--val-fraction", o->val_fraction, "validation patient share")
        ->capture_default_str();
    sub->add_option("--noise-sd", o->noise_sd, "triplet baseline positive noise")
        ->capture_default_str();
    sub->add_option("--corruption", o->corruption, "dae corruption probability")
        ->capture_default_str();
    sub->add_option("--seed", o->seed, "training seed")->capture_default_str();
    sub->add_option("--out", o->out_dir, "output directory")->capture_default_str();
    o->loss.add_to(*sub);
    o->encoder.add_to(*sub);
    sub->callback([sub, o]() { run_train(*sub, *o); });
}

}  // namespace riskball::cli
