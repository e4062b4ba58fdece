#include "riskball/init.hpp"

#include <cmath>
#include <stdexcept>

namespace riskball::nn {

namespace {

// Thin QR by modified Gram-Schmidt with one re-orthogonalization pass.
// Columns are normalized, so the implicit R has a positive diagonal and the
// result matches the sign-corrected QR convention. A [m, k] with m >= k.
void orthonormalize_columns(Tensor& a) {
    const std::size_t m = a.rows(), k = a.cols();
    for (std::size_t j = 0; j < k; ++j) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t p = 0; p < j; ++p) {
                double proj = 0.0;
                for (std::size_t i = 0; i < m; ++i) proj += a.at(i, p) * a.at(i, j);
                for (std::size_t i = 0; i < m; ++i) a.at(i, j) -= proj * a.at(i, p);
            }
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < m; ++i) norm += a.at(i, j) * a.at(i, j);
        norm = std::sqrt(norm);
        if (norm == 0.0) throw std::runtime_error("orthogonal_init: degenerate Gaussian draw");
        for (std::size_t i = 0; i < m; ++i) a.at(i, j) /= norm;
    }
}

}  // namespace

Tensor orthogonal_init(std::size_t rows, std::size_t cols, util::Rng& rng) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("orthogonal_init: empty shape");
    const bool tall = rows >= cols;
    const std::size_t m = tall ? rows : cols;
    const std::size_t k = tall ? cols : rows;
    Tensor g({m, k});
    for (double& v : g.data) v = rng.normal();
    orthonormalize_columns(g);
    if (tall) return g;
    Tensor q({rows, cols});
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) q.at(i, j) = g.at(j, i);
    }
    return q;
}

Tensor scaled_uniform_init(std::size_t rows, std::size_t cols, util::Rng& rng) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("scaled_uniform_init: empty shape");
    const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
    Tensor w({rows, cols});
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    return w;
}

Tensor weight_init(WeightInit kind, std::size_t rows, std::size_t cols, util::Rng& rng) {
    switch (kind) {
        case WeightInit::Orthogonal: return orthogonal_init(rows, cols, rng);
        case WeightInit::ScaledUniform: return scaled_uniform_init(rows, cols, rng);
    }
    throw std::logic_error("weight_init: unknown kind");
}

double orthogonality_residual(const Tensor& q) {
    const std::size_t m = q.rows(), n = q.cols();
    const bool tall = m >= n;
    const std::size_t k = tall ? n : m;
    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            double s = 0.0;
            if (tall) {
                for (std::size_t r = 0; r < m; ++r) s += q.at(r, i) * q.at(r, j);
            } else {
                for (std::size_t c = 0; c < n; ++c) s += q.at(i, c) * q.at(j, c);
            }
            const double target = i == j ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(s - target));
        }
    }
    return worst;
}

}  // namespace riskball::nn
