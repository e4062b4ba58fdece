#include "riskball/ablation.hpp"

#include "riskball/analyses.hpp"
#include "riskball/cohort_csv.hpp"

namespace riskball::eval {

std::vector<AblationPoint> default_ablation_grid(const embed::LossConfig& base) {
    std::vector<AblationPoint> grid;
    for (double beta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        embed::LossConfig c = base;
        c.beta = beta;
        grid.push_back({"beta_" + cohort::format_double(beta), c});
    }
    {
        embed::LossConfig c = base;
        c.beta = 0.75;
        c.lambda3 = 0.0;
        grid.push_back({"lambda3_0", c});
    }
    {
        embed::LossConfig c = base;
        c.beta = 0.75;
        c.alpha = 0.0;
        grid.push_back({"alpha_0", c});
    }
    {
        embed::LossConfig c = base;
        c.beta = 0.75;
        c.lambda4 = 0.0;
        grid.push_back({"lambda4_0", c});
    }
    return grid;
}

ProbeFeatures probe_features(const embed::EmbeddingModel& model, const cohort::Cohort& cohort,
                             FeatureSet set) {
    ProbeFeatures out;
    out.refs = embed::eligible_states(cohort, model.config);
    out.features.reserve(out.refs.size());
    out.patient_of_state.reserve(out.refs.size());

    // Patient index by identity of the trajectory pointer (refs preserve
    // cohort order).
    std::size_t patient = 0;
    const cohort::PatientTrajectory* last = nullptr;
    nn::Tensor emb;
    if (set != FeatureSet::FullObserved) emb = model.embed_states(out.refs);
    for (std::size_t i = 0; i < out.refs.size(); ++i) {
        const auto& ref = out.refs[i];
        if (last != nullptr && ref.traj != last) ++patient;
        last = ref.traj;
        out.patient_of_state.push_back(patient);
        std::vector<double> f;
        if (set == FeatureSet::FullObserved) {
            f.assign(ref.traj->states[ref.hour].v.begin(),
                     ref.traj->states[ref.hour].v.begin() + cohort::kObservedDim);
        } else {
            const std::size_t dim = model.config.embedding_dim;
            f.resize(dim);
            double sq = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                f[j] = emb.at(i, j);
                sq += f[j] * f[j];
            }
            if (set == FeatureSet::EmbeddingPlusNorm) f.push_back(sq);
        }
        out.features.push_back(std::move(f));
    }
    return out;
}

double mean_probe_auroc(const ProbeFeatures& feats, const std::vector<int>& horizons,
                        const ProbeOptions& options) {
    double total = 0.0;
    for (int h : horizons) {
        const std::vector<int> labels = horizon_labels(feats.refs, h);
        ProbeResult r = logistic_probe(feats.features, labels, feats.patient_of_state, options);
        total += r.mean_auroc;
    }
    return total / static_cast<double>(horizons.size());
}

AblationRow run_ablation_point(const AblationPoint& point, const cohort::Cohort& train_cohort,
                               const cohort::Cohort& val_cohort,
                               const cohort::Cohort& eval_cohort, const AblationOptions& options) {
    const embed::TrainResult trained =
        embed::train_embedding(train_cohort, val_cohort, options.encoder, point.config,
                               options.seed);
    const embed::EmbeddingModel& model = trained.model;

    AblationRow row;
    row.name = point.name;
    row.beta = point.config.beta;

    const auto aurocs = norm_auroc(model, eval_cohort, options.horizons);
    double total = 0.0;
    for (const auto& [h, r] : aurocs) total += r.auroc;
    row.norm_auroc_mean = total / static_cast<double>(aurocs.size());

    ProbeOptions popt;
    popt.n_splits = options.probe_splits;
    popt.jobs = options.jobs;
    popt.seed = options.seed;
    const ProbeFeatures feats = probe_features(model, eval_cohort, FeatureSet::Embedding);
    row.probe_auroc_mean = mean_probe_auroc(feats, options.horizons, popt);

    row.mean_relative_jump = relative_jumps(model, eval_cohort).mean_relative_jump;
    row.separation_gap =
        organ_separation(model, eval_cohort, point.config.near_terminal_t).gap;
    return row;
}

std::vector<AblationRow> ablation_sweep(const std::vector<AblationPoint>& grid,
                                        const cohort::Cohort& train_cohort,
                                        const cohort::Cohort& val_cohort,
                                        const cohort::Cohort& eval_cohort,
                                        const AblationOptions& options) {
    std::vector<AblationRow> rows;
    rows.reserve(grid.size());
    for (const auto& point : grid) {
        rows.push_back(run_ablation_point(point, train_cohort, val_cohort, eval_cohort, options));
    }
    return rows;
}

}  // namespace riskball::eval
