#pragma once

#include <vector>

#include "riskball/state.hpp"
#include "riskball/tape.hpp"

namespace riskball::embed {

// Per-channel standardization fit on a training cohort. Constant channels get
// unit scale so they map to zero instead of blowing up.
struct FeatureScaler {
    std::vector<double> mean;
    std::vector<double> sd;

    std::size_t dim() const { return mean.size(); }

    // channels: how many leading state channels to fit (27 observed or all 41)
    static FeatureScaler fit(const cohort::Cohort& cohort, std::size_t channels);

    double transform(double value, std::size_t channel) const {
        return (value - mean[channel]) / sd[channel];
    }

    void to_params(nn::ParamSet& params) const;
    static FeatureScaler from_params(const nn::ParamSet& params);
};

}  // namespace riskball::embed
