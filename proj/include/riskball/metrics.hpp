#pragma once

#include <span>
#include <vector>

namespace riskball::eval {

struct RocResult {
    double auroc = 0.0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

// Probability that a random positive outscores a random negative, ties
// counted one half (Mann-Whitney). Throws on single-class input rather than
// silently reporting 0.5.
RocResult auroc(std::span<const double> scores, std::span<const int> labels);

// Rank correlation with average ranks on ties.
double spearman(std::span<const double> x, std::span<const double> y);

// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> average_ranks(std::span<const double> values);

double mean(std::span<const double> v);
double stddev(std::span<const double> v);

// Linear-interpolation quantile of a sorted copy, q in [0,1].
double quantile(std::vector<double> values, double q);

}  // namespace riskball::eval
