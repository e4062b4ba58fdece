#pragma once

#include <cstdint>

#include "riskball/tape.hpp"

namespace riskball::nn {

struct AdamConfig {
    double learning_rate = 3e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam with bias correction; first/second moment buffers live per parameter
// name and are created lazily on the first step.
class Adam {
public:
    explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

    void step(ParamSet& params, const GradMap& grads);

    std::uint64_t step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::uint64_t t_ = 0;
    ParamSet m_;
    ParamSet v_;
};

}  // namespace riskball::nn
