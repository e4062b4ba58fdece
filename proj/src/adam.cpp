#include "riskball/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace riskball::nn {

void Adam::step(ParamSet& params, const GradMap& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (auto& [name, p] : params) {
        auto& m = m_[name];
        auto& v = v_[name];
        if (m.shape != p.shape) m = Tensor(p.shape);
        if (v.shape != p.shape) v = Tensor(p.shape);

        const Tensor* g = nullptr;
        auto it = grads.find(name);
        if (it != grads.end()) {
            if (it->second.shape != p.shape) {
                throw std::invalid_argument("Adam::step: gradient shape mismatch for " + name);
            }
            g = &it->second;
        }
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            const double gi = g ? g->data[i] : 0.0;
            m.data[i] = cfg_.beta1 * m.data[i] + (1.0 - cfg_.beta1) * gi;
            v.data[i] = cfg_.beta2 * v.data[i] + (1.0 - cfg_.beta2) * gi * gi;
            const double mhat = m.data[i] / bc1;
            const double vhat = v.data[i] / bc2;
            p.data[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }
}

}  // namespace riskball::nn
