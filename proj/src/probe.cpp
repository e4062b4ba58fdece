#include "riskball/probe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "riskball/parallel.hpp"
#include "riskball/rng.hpp"

namespace riskball::eval {

namespace {

struct Standardizer {
    std::vector<double> mean, sd;

    void fit(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& idx) {
        const std::size_t d = x[0].size();
        mean.assign(d, 0.0);
        sd.assign(d, 0.0);
        for (std::size_t i : idx) {
            for (std::size_t c = 0; c < d; ++c) mean[c] += x[i][c];
        }
        for (std::size_t c = 0; c < d; ++c) mean[c] /= static_cast<double>(idx.size());
        for (std::size_t i : idx) {
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = x[i][c] - mean[c];
                sd[c] += diff * diff;
            }
        }
        for (std::size_t c = 0; c < d; ++c) {
            sd[c] = std::sqrt(sd[c] / static_cast<double>(idx.size()));
            if (sd[c] < 1e-12) sd[c] = 1.0;
        }
    }

    double apply(double v, std::size_t c) const { return (v - mean[c]) / sd[c]; }
};

// mean log-loss gradient + L2 on the weights
void logistic_gradient(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                       const std::vector<std::size_t>& idx, const Standardizer& std_,
                       const std::vector<double>& w, double b, double l2,
                       std::vector<double>& gw, double& gb) {
    const std::size_t d = w.size();
    std::fill(gw.begin(), gw.end(), 0.0);
    gb = 0.0;
    for (std::size_t i : idx) {
        double z = b;
        for (std::size_t c = 0; c < d; ++c) z += w[c] * std_.apply(x[i][c], c);
        const double p = 1.0 / (1.0 + std::exp(-z));
        const double err = p - static_cast<double>(y[i]);
        for (std::size_t c = 0; c < d; ++c) gw[c] += err * std_.apply(x[i][c], c);
        gb += err;
    }
    const double inv = 1.0 / static_cast<double>(idx.size());
    for (std::size_t c = 0; c < d; ++c) gw[c] = gw[c] * inv + 2.0 * l2 * w[c];
    gb *= inv;
}

LogisticFit fit_on_indices(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                           const std::vector<std::size_t>& idx, const Standardizer& std_,
                           const ProbeOptions& opt) {
    const std::size_t d = x[0].size();
    LogisticFit fit;
    fit.weights.assign(d, 0.0);
    std::vector<double> gw(d, 0.0), prev_gw(d, 0.0), prev_w(d, 0.0);
    double gb = 0.0, prev_gb = 0.0, prev_b = 0.0;
    double step = 1.0;
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        logistic_gradient(x, y, idx, std_, fit.weights, fit.bias, opt.l2, gw, gb);
        double gnorm = gb * gb;
        for (double g : gw) gnorm += g * g;
        gnorm = std::sqrt(gnorm);
        fit.iterations = it;
        if (gnorm < opt.grad_tolerance) {
            fit.converged = true;
            return fit;
        }
        if (it > 0) {
            // Barzilai-Borwein step: <dw, dg> / <dg, dg>
            double num = (fit.bias - prev_b) * (gb - prev_gb);
            double den = (gb - prev_gb) * (gb - prev_gb);
            for (std::size_t c = 0; c < d; ++c) {
                num += (fit.weights[c] - prev_w[c]) * (gw[c] - prev_gw[c]);
                den += (gw[c] - prev_gw[c]) * (gw[c] - prev_gw[c]);
            }
            if (den > 0.0 && num > 0.0) step = num / den;
        }
        prev_w = fit.weights;
        prev_b = fit.bias;
        prev_gw = gw;
        prev_gb = gb;
        for (std::size_t c = 0; c < d; ++c) fit.weights[c] -= step * gw[c];
        fit.bias -= step * gb;
    }
    return fit;  // hit the cap; converged stays false
}

}  // namespace

LogisticFit fit_logistic(const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, const ProbeOptions& options) {
    if (features.empty() || features.size() != labels.size()) {
        throw std::invalid_argument("fit_logistic: bad inputs");
    }
    std::vector<std::size_t> idx(features.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Standardizer std_;
    std_.fit(features, idx);
    return fit_on_indices(features, labels, idx, std_, options);
}

ProbeResult logistic_probe(const std::vector<std::vector<double>>& features_per_state,
                           const std::vector<int>& labels,
                           const std::vector<std::size_t>& patient_of_state,
                           const ProbeOptions& options) {
    const std::size_t n = features_per_state.size();
    if (n == 0 || labels.size() != n || patient_of_state.size() != n) {
        throw std::invalid_argument("logistic_probe: input lengths disagree");
    }
    for (const auto& f : features_per_state) {
        for (double v : f) {
            if (!std::isfinite(v)) throw std::invalid_argument("logistic_probe: non-finite feature");
        }
    }
    std::size_t n_patients = 0;
    for (std::size_t p : patient_of_state) n_patients = std::max(n_patients, p + 1);

    // States per patient, so splits are patient-level.
    std::vector<std::vector<std::size_t>> states_of(n_patients);
    for (std::size_t i = 0; i < n; ++i) states_of[patient_of_state[i]].push_back(i);

    struct SplitOutcome {
        bool used = false;
        double auroc = 0.0;
    };
    std::vector<SplitOutcome> outcomes(options.n_splits);

    // One child seed per split: identical split sequences across feature sets.
    std::vector<std::uint64_t> split_seeds(options.n_splits);
    {
        util::Rng seeder(options.seed);
        for (auto& s : split_seeds) s = seeder.next_u64();
    }

    util::parallel_for(options.n_splits, options.jobs, [&](std::size_t split) {
        util::Rng rng(split_seeds[split]);
        std::vector<std::size_t> order(n_patients);
        for (std::size_t i = 0; i < n_patients; ++i) order[i] = i;
        const auto n_train = static_cast<std::size_t>(
            std::llround(options.split_fraction * static_cast<double>(n_patients)));

        std::vector<std::size_t> train_idx, test_idx;
        bool ok = false;
        for (std::size_t attempt = 0; attempt < options.resample_cap && !ok; ++attempt) {
            rng.shuffle(order);
            train_idx.clear();
            test_idx.clear();
            for (std::size_t i = 0; i < n_patients; ++i) {
                auto& dst = i < n_train ? train_idx : test_idx;
                for (std::size_t s : states_of[order[i]]) dst.push_back(s);
            }
            auto has_both = [&](const std::vector<std::size_t>& idx) {
                bool pos = false, neg = false;
                for (std::size_t i : idx) (labels[i] ? pos : neg) = true;
                return pos && neg;
            };
            ok = !train_idx.empty() && !test_idx.empty() && has_both(train_idx) &&
                 has_both(test_idx);
        }
        if (!ok) return;  // counts as excluded

        Standardizer std_;
        std_.fit(features_per_state, train_idx);
        LogisticFit fit = fit_on_indices(features_per_state, labels, train_idx, std_, options);
        if (!fit.converged) return;

        std::vector<double> scores;
        std::vector<int> test_labels;
        scores.reserve(test_idx.size());
        for (std::size_t i : test_idx) {
            double z = fit.bias;
            for (std::size_t c = 0; c < fit.weights.size(); ++c) {
                z += fit.weights[c] * std_.apply(features_per_state[i][c], c);
            }
            scores.push_back(z);
            test_labels.push_back(labels[i]);
        }
        outcomes[split].used = true;
        outcomes[split].auroc = auroc(scores, test_labels).auroc;
    });

    ProbeResult result;
    for (const auto& o : outcomes) {
        if (o.used) {
            result.split_aurocs.push_back(o.auroc);
        } else {
            ++result.splits_excluded;
        }
    }
    result.splits_used = result.split_aurocs.size();
    if (result.splits_used == 0) {
        throw std::runtime_error("logistic_probe: every split failed to converge");
    }
    result.mean_auroc = mean(result.split_aurocs);
    result.std_auroc = stddev(result.split_aurocs);
    return result;
}

}  // namespace riskball::eval
