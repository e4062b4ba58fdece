#include "riskball/scaler.hpp"

#include <cmath>
#include <stdexcept>

namespace riskball::embed {

FeatureScaler FeatureScaler::fit(const cohort::Cohort& cohort, std::size_t channels) {
    if (channels < 1 || channels > cohort::kStateDim) {
        throw std::invalid_argument("FeatureScaler: bad channel count");
    }
    FeatureScaler sc;
    sc.mean.assign(channels, 0.0);
    sc.sd.assign(channels, 0.0);
    std::size_t n = 0;
    for (const auto& traj : cohort) {
        for (const auto& s : traj.states) {
            ++n;
            for (std::size_t c = 0; c < channels; ++c) sc.mean[c] += s[c];
        }
    }
    if (n == 0) throw std::invalid_argument("FeatureScaler: empty cohort");
    for (std::size_t c = 0; c < channels; ++c) sc.mean[c] /= static_cast<double>(n);
    for (const auto& traj : cohort) {
        for (const auto& s : traj.states) {
            for (std::size_t c = 0; c < channels; ++c) {
                const double d = s[c] - sc.mean[c];
                sc.sd[c] += d * d;
            }
        }
    }
    for (std::size_t c = 0; c < channels; ++c) {
        sc.sd[c] = std::sqrt(sc.sd[c] / static_cast<double>(n));
        if (sc.sd[c] < 1e-8) sc.sd[c] = 1.0;
    }
    return sc;
}

void FeatureScaler::to_params(nn::ParamSet& params) const {
    params["scaler.mean"] = nn::Tensor::vector(mean);
    params["scaler.sd"] = nn::Tensor::vector(sd);
}

FeatureScaler FeatureScaler::from_params(const nn::ParamSet& params) {
    auto mi = params.find("scaler.mean");
    auto si = params.find("scaler.sd");
    if (mi == params.end() || si == params.end()) {
        throw std::runtime_error("FeatureScaler: scaler tensors missing from checkpoint");
    }
    FeatureScaler sc;
    sc.mean = mi->second.data;
    sc.sd = si->second.data;
    if (sc.mean.size() != sc.sd.size()) {
        throw std::runtime_error("FeatureScaler: mean/sd length mismatch");
    }
    return sc;
}

}  // namespace riskball::embed
