#include <cstdio>

#include "commands.hpp"
#include "opt_common.hpp"
#include "riskball/ablation.hpp"
#include "riskball/cohort_csv.hpp"
#include "riskball/report.hpp"

namespace riskball::cli {

namespace {

struct EvalOpts {
    std::string checkpoint;
    std::string cohort_path;
    bool do_auroc = false, do_probe = false, do_jumps = false, do_curves = false,
         do_separation = false, do_all = false;
    std::string horizons = "12,24,48,72,120";
    std::size_t splits = 100;
    std::size_t t = 24;
    int max_hours = 72;
    std::size_t jobs = 1;
    std::uint64_t seed = 7;
    std::string out_dir;
};

void run_eval(const CLI::App& sub, const EvalOpts& o) {
    const bool auroc_on = o.do_auroc || o.do_all;
    const bool probe_on = o.do_probe || o.do_all;
    const bool jumps_on = o.do_jumps || o.do_all;
    const bool curves_on = o.do_curves || o.do_all;
    const bool separation_on = o.do_separation || o.do_all;
    if (!(auroc_on || probe_on || jumps_on || curves_on || separation_on)) {
        throw CLI::ValidationError(
            "select at least one analysis (--auroc --probe --jumps --curves --separation or --all)");
    }
    const std::string hash = write_snapshot(sub, o.out_dir, "eval");
    const embed::EmbeddingModel model = embed::load_model(o.checkpoint);
    const cohort::Cohort cohort = cohort::load_cohort_csv(o.cohort_path);
    const std::vector<int> horizons = parse_int_list(o.horizons, "--horizons");
    auto path_of = [&](const std::string& stem, const char* ext) {
        return o.out_dir + "/" + util::artifact_name(stem, o.seed, hash, ext);
    };

    if (auroc_on) {
        const auto norm = eval::norm_auroc(model, cohort, horizons);
        const auto sofa = eval::baseline_score_auroc(cohort, eval::BaselineScore::Sofa, horizons);
        const auto sofa4 = eval::baseline_score_auroc(cohort, eval::BaselineScore::Sofa4, horizons);
        std::vector<std::vector<std::string>> rows;
        for (int h : horizons) {
            rows.push_back({std::to_string(h), eval::csv_cell(sofa.at(h).auroc),
                            eval::csv_cell(sofa4.at(h).auroc), eval::csv_cell(norm.at(h).auroc),
                            std::to_string(norm.at(h).positives),
                            std::to_string(norm.at(h).negatives)});
        }
        eval::write_csv(path_of("auroc", "csv"),
                        {"horizon_hours", "sofa", "sofa4", "norm", "positives", "negatives"}, rows);
    }

    if (probe_on) {
        eval::ProbeOptions popt;
        popt.n_splits = o.splits;
        popt.jobs = o.jobs;
        popt.seed = o.seed;
        std::vector<std::vector<std::string>> rows;
        const std::vector<std::pair<std::string, eval::FeatureSet>> sets = {
            {"full_observed", eval::FeatureSet::FullObserved},
            {"embedding", eval::FeatureSet::Embedding},
            {"embedding_norm", eval::FeatureSet::EmbeddingPlusNorm}};
        for (const auto& [name, set] : sets) {
            const eval::ProbeFeatures feats = eval::probe_features(model, cohort, set);
            for (int h : horizons) {
                const std::vector<int> labels = eval::horizon_labels(feats.refs, h);
                const eval::ProbeResult r =
                    eval::logistic_probe(feats.features, labels, feats.patient_of_state, popt);
                rows.push_back({name, std::to_string(h), eval::csv_cell(r.mean_auroc),
                                eval::csv_cell(r.std_auroc), std::to_string(r.splits_used),
                                std::to_string(r.splits_excluded)});
            }
        }
        eval::write_csv(path_of("probe", "csv"),
                        {"features", "horizon_hours", "mean_auroc", "std_auroc", "splits_used",
                         "splits_excluded"},
                        rows);
    }

    if (jumps_on) {
        const eval::JumpStats stats = eval::relative_jumps(model, cohort);
        eval::write_csv(path_of("jumps", "csv"),
                        {"mean_relative_jump", "pairs_counted", "pairs_excluded"},
                        {{eval::csv_cell(stats.mean_relative_jump),
                          std::to_string(stats.pairs_counted),
                          std::to_string(stats.pairs_excluded)}});
    }

    if (curves_on) {
        const eval::TimeToEventCurve curve = eval::time_to_event_curve(model, cohort, o.max_hours);
        std::vector<std::vector<std::string>> rows;
        for (const auto& [lag, m] : curve.death_mean) {
            rows.push_back({"death", std::to_string(lag), eval::csv_cell(m),
                            std::to_string(curve.death_count.at(lag))});
        }
        for (const auto& [lag, m] : curve.release_mean) {
            rows.push_back({"release", std::to_string(lag), eval::csv_cell(m),
                            std::to_string(curve.release_count.at(lag))});
        }
        eval::write_csv(path_of("curves", "csv"),
                        {"outcome", "hours_to_event", "mean_d", "states"}, rows);
        eval::save_text(path_of("time_to_event", "svg"),
                        eval::svg_curves(curve.death_mean, "to death", curve.release_mean,
                                         "to release", "Mean d(x) vs hours to event"));

        // Norm histograms split by outcome, plus a 2-d projection of
        // near-death states colored by worst organ.
        const auto refs = embed::eligible_states(cohort, model.config);
        const std::vector<double> d = model.squared_norms(refs);
        std::vector<double> d_death, d_release;
        for (std::size_t i = 0; i < refs.size(); ++i) {
            (refs[i].traj->outcome == cohort::Outcome::Death ? d_death : d_release).push_back(d[i]);
        }
        if (!d_death.empty()) {
            eval::save_text(path_of("norm_hist_nonsurvivors", "svg"),
                            eval::svg_histogram(eval::Histogram::build(d_death, 30),
                                                "Squared norms: non-survivor states", "#d65f5f"));
        }
        if (!d_release.empty()) {
            eval::save_text(path_of("norm_hist_survivors", "svg"),
                            eval::svg_histogram(eval::Histogram::build(d_release, 30),
                                                "Squared norms: survivor states"));
        }
        const nn::Tensor emb = model.embed_states(refs);
        std::vector<std::array<double, 2>> points;
        std::vector<int> classes;
        for (std::size_t i = 0; i < refs.size(); ++i) {
            const auto& ref = refs[i];
            if (ref.traj->outcome != cohort::Outcome::Death) continue;
            if (ref.traj->length() - 1 - ref.hour >= o.t) continue;
            points.push_back({emb.at(i, 0), model.config.embedding_dim > 1 ? emb.at(i, 1) : 0.0});
            classes.push_back(static_cast<int>(cohort::worst_organ(ref.traj->states[ref.hour])));
        }
        if (!points.empty()) {
            eval::save_text(
                path_of("embedding_scatter", "svg"),
                eval::svg_scatter(points, classes, {"cardio", "cns", "liver", "renal"},
                                  "Near-death states by worst organ (first two axes)"));
        }
    }

    if (separation_on) {
        const eval::SeparationStats stats = eval::organ_separation(model, cohort, o.t);
        eval::write_csv(
            path_of("separation", "csv"),
            {"within_cosine", "between_cosine", "gap", "states", "zero_embeddings_skipped"},
            {{eval::csv_cell(stats.within), eval::csv_cell(stats.between),
              eval::csv_cell(stats.gap), std::to_string(stats.states),
              std::to_string(stats.zero_embeddings_skipped)}});
    }
    std::printf("eval outputs under %s\n", o.out_dir.c_str());
}

}  // namespace

void register_eval(CLI::App& app) {
    auto* sub = app.add_subcommand("eval", "run analyses against a checkpoint and cohort");
    auto o = std::make_shared<EvalOpts>();
    o->out_dir = default_output_root();
    sub->add_option("--checkpoint", o->checkpoint, "model checkpoint path")->required();
    sub->add_option("--cohort", o->cohort_path, "cohort CSV path")->required();
    sub->add_flag("--auroc", o->do_auroc, "norm and SOFA AUROC per horizon");
    sub->add_flag("--probe", o->do_probe, "logistic probes on the representation");
    sub->add_flag("--jumps", o->do_jumps, "relative jump statistics");
    sub->add_flag("--curves", o->do_curves, "time-to-event curves and figures");
    sub->add_flag("--separation", o->do_separation, "organ-angle separation");
    sub->add_flag("--all", o->do_all, "run every analysis");
    sub->add_option("--horizons", o->horizons, "comma-separated horizon hours")
        ->capture_default_str();
    sub->add_option("--splits", o->splits, "probe splits")->capture_default_str();
    sub->add_option("--t", o->t, "near-terminal window for separation/scatter")
        ->capture_default_str();
    sub->add_option("--max-hours", o->max_hours, "curve range")->capture_default_str();
    sub->add_option("--jobs", o->jobs, "parallel probe splits")->capture_default_str();
    sub->add_option("--seed", o->seed, "probe split seed")->capture_default_str();
    sub->add_option("--out", o->out_dir, "output directory")->capture_default_str();
    sub->callback([sub, o]() { run_eval(*sub, *o); });
}

}  // namespace riskball::cli
