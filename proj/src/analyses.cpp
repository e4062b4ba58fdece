#include "riskball/analyses.hpp"

#include <cmath>
#include <stdexcept>

namespace riskball::eval {

using cohort::Outcome;

std::vector<int> horizon_labels(const std::vector<embed::StateRef>& refs, int horizon_hours) {
    std::vector<int> labels(refs.size(), 0);
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto& ref = refs[i];
        if (ref.traj->outcome != Outcome::Death) continue;
        const std::size_t to_end = ref.traj->length() - 1 - ref.hour;
        if (to_end < static_cast<std::size_t>(horizon_hours)) labels[i] = 1;
    }
    return labels;
}

std::map<int, RocResult> norm_auroc(const embed::EmbeddingModel& model,
                                    const cohort::Cohort& cohort,
                                    const std::vector<int>& horizons) {
    const auto refs = embed::eligible_states(cohort, model.config);
    const std::vector<double> scores = model.squared_norms(refs);
    std::map<int, RocResult> out;
    for (int h : horizons) {
        const std::vector<int> labels = horizon_labels(refs, h);
        out[h] = auroc(scores, labels);
    }
    return out;
}

int sofa4(const cohort::StateVector& s) {
    return static_cast<int>(s[cohort::kCardio]) + static_cast<int>(s[cohort::kCns]) +
           static_cast<int>(s[cohort::kLiver]) + static_cast<int>(s[cohort::kRenal]);
}

std::map<int, RocResult> baseline_score_auroc(const cohort::Cohort& cohort, BaselineScore score,
                                              const std::vector<int>& horizons) {
    std::vector<embed::StateRef> refs;
    for (const auto& traj : cohort) {
        for (std::size_t t = 0; t < traj.length(); ++t) refs.push_back({&traj, t});
    }
    std::vector<double> scores(refs.size());
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto& s = refs[i].traj->states[refs[i].hour];
        scores[i] = score == BaselineScore::Sofa ? s[cohort::kSofa]
                                                 : static_cast<double>(sofa4(s));
    }
    std::map<int, RocResult> out;
    for (int h : horizons) {
        const std::vector<int> labels = horizon_labels(refs, h);
        out[h] = auroc(scores, labels);
    }
    return out;
}

JumpStats relative_jumps_from_norms(const std::vector<std::vector<double>>& norms_per_stay) {
    JumpStats stats;
    double total = 0.0;
    for (const auto& stay : norms_per_stay) {
        for (std::size_t t = 0; t + 1 < stay.size(); ++t) {
            if (stay[t] <= kJumpEpsilon) {
                ++stats.pairs_excluded;
                continue;
            }
            total += std::abs(stay[t + 1] - stay[t]) / stay[t];
            ++stats.pairs_counted;
        }
    }
    stats.mean_relative_jump =
        stats.pairs_counted > 0 ? total / static_cast<double>(stats.pairs_counted) : 0.0;
    return stats;
}

JumpStats relative_jumps(const embed::EmbeddingModel& model, const cohort::Cohort& cohort) {
    const std::size_t min_hour = model.config.min_history();
    std::vector<std::vector<double>> norms_per_stay;
    for (const auto& traj : cohort) {
        if (traj.length() <= min_hour) continue;
        std::vector<embed::StateRef> refs;
        for (std::size_t t = min_hour; t < traj.length(); ++t) refs.push_back({&traj, t});
        norms_per_stay.push_back(model.squared_norms(refs));
    }
    return relative_jumps_from_norms(norms_per_stay);
}

TimeToEventCurve time_to_event_curve(const embed::EmbeddingModel& model,
                                     const cohort::Cohort& cohort, int max_hours) {
    if (max_hours < 0) throw std::invalid_argument("time_to_event_curve: max_hours must be >= 0");
    const auto refs = embed::eligible_states(cohort, model.config);
    const std::vector<double> d = model.squared_norms(refs);
    std::map<int, double> death_sum, release_sum;
    TimeToEventCurve curve;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto& ref = refs[i];
        const int lag = static_cast<int>(ref.traj->length() - 1 - ref.hour);
        if (lag > max_hours) continue;
        if (ref.traj->outcome == Outcome::Death) {
            death_sum[lag] += d[i];
            ++curve.death_count[lag];
        } else {
            release_sum[lag] += d[i];
            ++curve.release_count[lag];
        }
    }
    for (const auto& [lag, sum] : death_sum) {
        curve.death_mean[lag] = sum / static_cast<double>(curve.death_count[lag]);
    }
    for (const auto& [lag, sum] : release_sum) {
        curve.release_mean[lag] = sum / static_cast<double>(curve.release_count[lag]);
    }
    return curve;
}

SeparationStats organ_separation(const embed::EmbeddingModel& model,
                                 const cohort::Cohort& cohort, std::size_t t) {
    std::vector<embed::StateRef> refs;
    std::vector<cohort::OrganLabel> labels;
    const std::size_t min_hour = model.config.min_history();
    for (const auto& traj : cohort) {
        if (traj.outcome != Outcome::Death || traj.length() <= min_hour) continue;
        for (std::size_t i : cohort::near_terminal_indices(traj, t)) {
            if (i < min_hour) continue;
            refs.push_back({&traj, i});
            labels.push_back(cohort::worst_organ(traj.states[i]));
        }
    }
    SeparationStats stats;
    if (refs.size() < 2) return stats;
    const nn::Tensor emb = model.embed_states(refs);
    const std::size_t dim = model.config.embedding_dim;

    // Unit-normalize, skipping exactly-zero embeddings.
    std::vector<std::vector<double>> unit;
    std::vector<cohort::OrganLabel> kept;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        double norm = 0.0;
        for (std::size_t j = 0; j < dim; ++j) norm += emb.at(i, j) * emb.at(i, j);
        norm = std::sqrt(norm);
        if (norm == 0.0) {
            ++stats.zero_embeddings_skipped;
            continue;
        }
        std::vector<double> u(dim);
        for (std::size_t j = 0; j < dim; ++j) u[j] = emb.at(i, j) / norm;
        unit.push_back(std::move(u));
        kept.push_back(labels[i]);
    }
    stats.states = unit.size();
    double within_sum = 0.0, between_sum = 0.0;
    std::size_t within_n = 0, between_n = 0;
    for (std::size_t i = 0; i < unit.size(); ++i) {
        for (std::size_t j = i + 1; j < unit.size(); ++j) {
            double cos = 0.0;
            for (std::size_t k = 0; k < dim; ++k) cos += unit[i][k] * unit[j][k];
            if (kept[i] == kept[j]) {
                within_sum += cos;
                ++within_n;
            } else {
                between_sum += cos;
                ++between_n;
            }
        }
    }
    stats.within = within_n > 0 ? within_sum / static_cast<double>(within_n) : 0.0;
    stats.between = between_n > 0 ? between_sum / static_cast<double>(between_n) : 0.0;
    stats.gap = stats.within - stats.between;
    return stats;
}

std::optional<double> death_monotonicity(const TimeToEventCurve& curve) {
    std::vector<double> lags, means;
    for (const auto& [lag, m] : curve.death_mean) {
        lags.push_back(static_cast<double>(lag));
        means.push_back(m);
    }
    if (lags.size() < 3) return std::nullopt;
    return spearman(lags, means);
}

}  // namespace riskball::eval
