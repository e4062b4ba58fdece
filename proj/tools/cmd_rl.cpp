#include <cstdio>
#include <filesystem>

#include "commands.hpp"
#include "opt_common.hpp"
#include "riskball/cohort_csv.hpp"
#include "riskball/ensemble.hpp"
#include "riskball/policy.hpp"
#include "riskball/report.hpp"

namespace riskball::cli {

namespace {

struct RlOpts {
    std::string cohort_path;
    std::string reward = "r1";
    std::size_t ensemble = 5;
    bool augment = false;
    std::size_t risk_members = 10;
    std::size_t risk_dim = 10;
    std::size_t risk_hidden = 512;
    std::size_t risk_layers = 8;
    std::string risk_dir;  // reuse a trained risk model when it exists
    std::size_t epochs = 8;
    std::size_t batch = 100;
    double lr = 3e-4;
    double gamma = 0.999;
    double tau = 0.005;
    std::size_t trunk_hidden = 256;
    std::size_t trunk_layers = 3;
    std::size_t t = 24;
    double val_fraction = 0.1;
    std::size_t jobs = 1;
    std::uint64_t seed = 1;
    std::string out_dir;
    double risk_beta = 0.75;
    std::size_t risk_t = 24;
    std::size_t risk_epochs = 10;
    double risk_lr = 3e-5;
    std::size_t risk_batch = 0;

    embed::LossConfig risk_loss() const {
        embed::LossConfig c;
        c.beta = risk_beta;
        c.near_terminal_t = risk_t;
        c.epochs = risk_epochs;
        c.learning_rate = risk_lr;
        c.batch_size = risk_batch;
        c.validate();
        return c;
    }
};

void run_rl(const CLI::App& sub, const RlOpts& o) {
    const std::string hash = write_snapshot(sub, o.out_dir, "rl");
    const cohort::Cohort cohort = cohort::load_cohort_csv(o.cohort_path);
    auto path_of = [&](const std::string& stem, const char* ext) {
        return o.out_dir + "/" + util::artifact_name(stem, o.seed, hash, ext);
    };

    // The embedding ensemble behind d(s): load when present, train otherwise.
    const std::string risk_dir = o.risk_dir.empty() ? o.out_dir + "/risk_model" : o.risk_dir;
    rl::RiskModel risk;
    if (std::filesystem::exists(risk_dir + "/risk_model.txt")) {
        std::printf("loading risk model from %s\n", risk_dir.c_str());
        risk = rl::load_risk_model(risk_dir);
    } else {
        rl::RiskModelOptions ropt;
        ropt.members = o.risk_members;
        ropt.encoder = embed::EncoderConfig::mlp_encoder(o.risk_dim, o.risk_hidden, o.risk_layers);
        ropt.loss = o.risk_loss();
        ropt.jobs = o.jobs;
        util::Rng split_rng(o.seed ^ 0x715cULL);
        auto [train_side, val_side] =
            cohort::stratified_split_cohort(cohort, 1.0 - o.val_fraction, split_rng);
        risk = rl::train_risk_model(train_side, val_side, ropt, o.seed);
        rl::save_risk_model(risk_dir, risk);
    }

    rl::RewardSpec spec;
    spec.kind = rl::reward_kind_from_name(o.reward);
    const rl::TransitionDataset dataset = rl::build_mdp(cohort, risk, spec);
    rl::save_transitions_csv(dataset, path_of("transitions", "csv"));

    rl::C51Config config;
    config.epochs = o.epochs;
    config.batch_size = o.batch;
    config.learning_rate = o.lr;
    config.gamma = o.gamma;
    config.tau = o.tau;
    config.trunk_hidden = o.trunk_hidden;
    config.trunk_layers = o.trunk_layers;
    config.augment_state = o.augment;
    const rl::Ensemble ensemble =
        rl::bootstrap_ensemble(dataset, o.ensemble, config, o.seed, o.jobs);

    const rl::PolicyReport report = rl::policy_report(ensemble, dataset, o.t);
    std::vector<std::vector<std::string>> rows;
    for (std::size_t a = 0; a < cohort::kNumActions; ++a) {
        rows.push_back({std::to_string(a), std::to_string(a / 3), std::to_string(a % 3),
                        eval::csv_cell(report.pct_majority_vote[a]),
                        eval::csv_cell(report.pct_averaged_value[a]),
                        eval::csv_cell(report.pct_clinician[a])});
    }
    eval::write_csv(path_of("actions", "csv"),
                    {"action", "vaso", "fluids", "pct_averaged_actions", "pct_averaged_value",
                     "pct_clinician"},
                    rows);

    rows.clear();
    for (const auto& g : report.value_groups) {
        rows.push_back({g.name, eval::csv_cell(g.min), eval::csv_cell(g.q1),
                        eval::csv_cell(g.median), eval::csv_cell(g.q3), eval::csv_cell(g.max),
                        std::to_string(g.count)});
    }
    eval::write_csv(path_of("values", "csv"),
                    {"group", "min", "q1", "median", "q3", "max", "states"}, rows);
    eval::save_text(path_of("values_boxplot", "svg"),
                    eval::svg_boxplot(report.value_groups, "Scaled optimal values by group"));
    std::printf("rl outputs under %s\n", o.out_dir.c_str());
}

}  // namespace

void register_rl(CLI::App& app) {
    auto* sub = app.add_subcommand(
        "rl", "train bootstrapped return-distribution agents under a reward scheme");
    auto o = std::make_shared<RlOpts>();
    o->out_dir = default_output_root();
    sub->add_option("--cohort", o->cohort_path, "cohort CSV path")->required();
    sub->add_option("--reward", o->reward, "terminal | r1 | r2")
        ->check(CLI::IsMember({"terminal", "r1", "r2"}))
        ->capture_default_str();
    sub->add_option("--ensemble", o->ensemble, "bootstrapped agents")->capture_default_str();
    sub->add_flag("--augment", o->augment, "append the embedding vector to the state");
    sub->add_option("--risk-members", o->risk_members, "risk ensemble size")
        ->capture_default_str();
    sub->add_option("--risk-dim", o->risk_dim, "risk embedding dimension")->capture_default_str();
    sub->add_option("--risk-hidden", o->risk_hidden, "risk encoder hidden width")
        ->capture_default_str();
    sub->add_option("--risk-layers", o->risk_layers, "risk encoder layers")->capture_default_str();
    sub->add_option("--risk-dir", o->risk_dir, "directory holding a trained risk model")
        ->capture_default_str();
    sub->add_option("--epochs", o->epochs, "agent training epochs")->capture_default_str();
    sub->add_option("--batch", o->batch, "agent batch size")->capture_default_str();
    sub->add_option("--lr", o->lr, "agent learning rate")->capture_default_str();
    sub->add_option("--gamma", o->gamma, "discount factor")->capture_default_str();
    sub->add_option("--tau", o->tau, "target soft-update rate")->capture_default_str();
    sub->add_option("--trunk-hidden", o->trunk_hidden, "agent trunk width")->capture_default_str();
    sub->add_option("--trunk-layers", o->trunk_layers, "agent trunk depth")->capture_default_str();
    sub->add_option("--group-window", o->t, "near-terminal window for the value groups")
        ->capture_default_str();
    sub->add_option("--val-fraction", o->val_fraction, "risk model validation share")
        ->capture_default_str();
    sub->add_option("--jobs", o->jobs, "parallel ensemble members")->capture_default_str();
    sub->add_option("--seed", o->seed, "run seed")->capture_default_str();
    sub->add_option("--out", o->out_dir, "output directory")->capture_default_str();
    // Loss settings for freshly trained risk models; the remaining loss
    // hyperparameters keep their defaults.
    sub->add_option("--risk-beta", o->risk_beta, "risk model beta")->capture_default_str();
    sub->add_option("--risk-t", o->risk_t, "risk model near-terminal window")
        ->check(CLI::IsMember({12, 24, 48, 72}))
        ->capture_default_str();
    sub->add_option("--risk-epochs", o->risk_epochs, "risk model epochs")->capture_default_str();
    sub->add_option("--risk-lr", o->risk_lr, "risk model learning rate")->capture_default_str();
    sub->add_option("--risk-batch", o->risk_batch, "risk model batch size (0 = auto)")
        ->capture_default_str();
    sub->callback([sub, o]() { run_rl(*sub, *o); });
}

}  // namespace riskball::cli
