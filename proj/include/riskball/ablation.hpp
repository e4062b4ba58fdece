#pragma once

#include "riskball/analyses.hpp"
#include "riskball/probe.hpp"
#include "riskball/train.hpp"

namespace riskball::eval {

struct AblationPoint {
    std::string name;  // "beta_0.5", "lambda3_0", ...
    embed::LossConfig config;
};

// Default grid: the five beta values with the base intermediate loss, plus
// the three intermediate-loss variants (lambda3=0, alpha=0, lambda4=0) at
// beta = 0.75.
std::vector<AblationPoint> default_ablation_grid(const embed::LossConfig& base);

struct AblationRow {
    std::string name;
    double beta = 0.0;
    double norm_auroc_mean = 0.0;   // unweighted mean over the horizons
    double probe_auroc_mean = 0.0;  // unweighted mean over the horizons
    double mean_relative_jump = 0.0;
    double separation_gap = 0.0;
};

struct AblationOptions {
    embed::EncoderConfig encoder;
    std::vector<int> horizons = kDefaultHorizons;
    std::size_t probe_splits = 100;
    std::size_t jobs = 1;
    std::uint64_t seed = 1;
};

// Train one model per grid point on (train, val), evaluate on eval_cohort.
AblationRow run_ablation_point(const AblationPoint& point, const cohort::Cohort& train_cohort,
                               const cohort::Cohort& val_cohort,
                               const cohort::Cohort& eval_cohort, const AblationOptions& options);

std::vector<AblationRow> ablation_sweep(const std::vector<AblationPoint>& grid,
                                        const cohort::Cohort& train_cohort,
                                        const cohort::Cohort& val_cohort,
                                        const cohort::Cohort& eval_cohort,
                                        const AblationOptions& options);

// Probe feature builders shared by the sweep, the CLI and the tests.
struct ProbeFeatures {
    std::vector<std::vector<double>> features;
    std::vector<int> labels;                  // per horizon task, filled later
    std::vector<std::size_t> patient_of_state;
    std::vector<embed::StateRef> refs;
};

enum class FeatureSet { FullObserved, Embedding, EmbeddingPlusNorm };

ProbeFeatures probe_features(const embed::EmbeddingModel& model, const cohort::Cohort& cohort,
                             FeatureSet set);

// Mean probe AUROC over the horizon tasks on shared splits.
double mean_probe_auroc(const ProbeFeatures& feats, const std::vector<int>& horizons,
                        const ProbeOptions& options);

}  // namespace riskball::eval
