#pragma once

#include "riskball/rng.hpp"
#include "riskball/tensor.hpp"

namespace riskball::nn {

enum class WeightInit { Orthogonal, ScaledUniform };

// Orthogonal matrix from the QR factorization of a Gaussian draw.
// Q^T Q = I when rows >= cols, Q Q^T = I otherwise.
Tensor orthogonal_init(std::size_t rows, std::size_t cols, util::Rng& rng);

// Default-style uniform draw on [-1/sqrt(fan_in), 1/sqrt(fan_in)];
// fan_in is the row count under the x*W convention.
Tensor scaled_uniform_init(std::size_t rows, std::size_t cols, util::Rng& rng);

Tensor weight_init(WeightInit kind, std::size_t rows, std::size_t cols, util::Rng& rng);

// max |Q^T Q - I| (or |Q Q^T - I| for wide matrices)
double orthogonality_residual(const Tensor& q);

}  // namespace riskball::nn
