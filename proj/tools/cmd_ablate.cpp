#include <cstdio>
#include <filesystem>

#include "commands.hpp"
#include "opt_common.hpp"
#include <fstream>
#include "riskball/ablation.hpp"
#include "riskball/cohort_csv.hpp"
#include "riskball/report.hpp"

namespace riskball::cli {

namespace {

struct AblateOpts {
    std::string cohort_path;
    std::string beta_grid;  // empty = default grid incl. intermediate variants
    std::string horizons = "12,24,48,72,120";
    std::size_t splits = 100;
    std::size_t jobs = 1;
    double val_fraction = 0.1;
    double eval_fraction = 0.2;
    std::uint64_t seed = 1;
    std::string out_dir;
    LossOpts loss;
    EncoderOpts encoder;
};

std::vector<std::string> row_csv(const eval::AblationRow& row, std::uint64_t seed,
                                 const std::string& hash) {
    return {row.name,
            eval::csv_cell(row.beta),
            eval::csv_cell(row.norm_auroc_mean),
            eval::csv_cell(row.probe_auroc_mean),
            eval::csv_cell(row.mean_relative_jump),
            eval::csv_cell(row.separation_gap),
            std::to_string(seed),
            hash};
}

const std::vector<std::string> kRowHeader = {"name",       "beta",           "norm_auroc",
                                             "probe_auroc", "relative_jump", "separation_gap",
                                             "seed",        "config_hash"};

void run_ablate(const CLI::App& sub, const AblateOpts& o) {
    const std::string hash = write_snapshot(sub, o.out_dir, "ablate");
    const cohort::Cohort cohort = cohort::load_cohort_csv(o.cohort_path);
    util::Rng split_rng(o.seed ^ 0xab1a7eULL);
    auto [trainval, eval_side] =
        cohort::stratified_split_cohort(cohort, 1.0 - o.eval_fraction, split_rng);
    auto [train_side, val_side] =
        cohort::stratified_split_cohort(trainval, 1.0 - o.val_fraction, split_rng);

    const embed::LossConfig base = o.loss.to_config();
    std::vector<eval::AblationPoint> grid;
    if (o.beta_grid.empty()) {
        grid = eval::default_ablation_grid(base);
    } else {
        for (double beta : parse_double_list(o.beta_grid, "--grid")) {
            embed::LossConfig c = base;
            c.beta = beta;
            c.validate();
            grid.push_back({"beta_" + cohort::format_double(beta), c});
        }
    }

    eval::AblationOptions opt;
    opt.encoder = o.encoder.to_config();
    opt.horizons = parse_int_list(o.horizons, "--horizons");
    opt.probe_splits = o.splits;
    opt.jobs = o.jobs;
    opt.seed = o.seed;

    // One row file per grid point; existing rows are reused so an interrupted
    // sweep resumes where it stopped.
    std::vector<std::vector<std::string>> rows;
    for (const auto& point : grid) {
        const std::string row_path =
            o.out_dir + "/" + util::artifact_name("row_" + point.name, o.seed, hash, "csv");
        if (std::filesystem::exists(row_path)) {
            std::printf("row %s exists, skipping\n", point.name.c_str());
        } else {
            const eval::AblationRow row =
                eval::run_ablation_point(point, train_side, val_side, eval_side, opt);
            eval::write_csv(row_path, kRowHeader, {row_csv(row, o.seed, hash)});
        }
        // Re-read so resumed and fresh rows merge identically.
        std::ifstream in(row_path);
        std::string header, line;
        std::getline(in, header);
        std::getline(in, line);
        std::vector<std::string> cells;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        cells.push_back(cur);
        rows.push_back(cells);
    }
    eval::write_csv(o.out_dir + "/" + util::artifact_name("sweep", o.seed, hash, "csv"),
                    kRowHeader, rows);
    std::printf("sweep complete: %zu rows\n", rows.size());
}

}  // namespace

void register_ablate(CLI::App& app) {
    auto* sub = app.add_subcommand(
        "ablate", "sweep beta values and intermediate-loss variants, one trained model per row");
    auto o = std::make_shared<AblateOpts>();
    o->out_dir = default_output_root();
    sub->add_option("--cohort", o->cohort_path, "cohort CSV path")->required();
    sub->add_option("--grid", o->beta_grid,
                    "comma-separated beta values (default: 5 betas + 3 intermediate variants)")
        ->capture_default_str();
    sub->add_option("--horizons", o->horizons, "comma-separated horizon hours")
        ->capture_default_str();
    sub->add_option("--splits", o->splits, "probe splits per row")->capture_default_str();
    sub->add_option("--jobs", o->jobs, "parallel probe splits")->capture_default_str();
    sub->add_option("--val-fraction", o->val_fraction, "validation patient share")
        ->capture_default_str();
    sub->add_option("--eval-fraction", o->eval_fraction, "held-out evaluation share")
        ->capture_default_str();
    sub->add_option("--seed", o->seed, "sweep seed")->capture_default_str();
    sub->add_option("--out", o->out_dir, "output directory")->capture_default_str();
    o->loss.add_to(*sub);
    o->encoder.add_to(*sub);
    sub->callback([sub, o]() { run_ablate(*sub, *o); });
}

}  // namespace riskball::cli
