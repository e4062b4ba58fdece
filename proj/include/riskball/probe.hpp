#pragma once

#include <cstdint>
#include <vector>

#include "riskball/metrics.hpp"

namespace riskball::eval {

struct ProbeOptions {
    std::size_t n_splits = 100;
    double split_fraction = 0.8;   // patient-level train share
    double l2 = 1e-4;
    double grad_tolerance = 1e-6;  // stop when ||grad||_2 drops below
    std::size_t max_iterations = 5000;
    std::size_t resample_cap = 50;  // retries for splits missing a class
    std::size_t jobs = 1;
    std::uint64_t seed = 7;
};

struct ProbeResult {
    double mean_auroc = 0.0;
    double std_auroc = 0.0;
    std::vector<double> split_aurocs;       // converged splits, in split order
    std::size_t splits_used = 0;
    std::size_t splits_excluded = 0;        // hit the iteration cap
};

struct LogisticFit {
    std::vector<double> weights;  // on standardized features
    double bias = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
};

// Full-batch gradient descent on the L2-penalized mean log-loss, with a
// Barzilai-Borwein step size. Features are standardized internally.
LogisticFit fit_logistic(const std::vector<std::vector<double>>& features,
                         const std::vector<int>& labels, const ProbeOptions& options);

// Linear evaluation protocol: repeated patient-level splits, a logistic
// regression per split, test AUROC averaged over converged splits. The split
// sequence depends only on (seed, patient count), so different feature sets
// evaluated with the same seed see identical splits.
ProbeResult logistic_probe(const std::vector<std::vector<double>>& features_per_state,
                           const std::vector<int>& labels,
                           const std::vector<std::size_t>& patient_of_state,
                           const ProbeOptions& options);

}  // namespace riskball::eval
