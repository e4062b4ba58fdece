#include "riskball/tape.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace riskball::nn {

namespace {

// C[m,n] += A[m,k] * B[k,n]; i-k-j order keeps the inner loop contiguous and
// the 4-way k unroll gives the vectorizer independent streams.
void mm_acc(const double* A, const double* B, double* C,
            std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* a_row = A + i * k;
        double* c_row = C + i * n;
        std::size_t kk = 0;
        for (; kk + 8 <= k; kk += 8) {
            const double a0 = a_row[kk], a1 = a_row[kk + 1];
            const double a2 = a_row[kk + 2], a3 = a_row[kk + 3];
            const double a4 = a_row[kk + 4], a5 = a_row[kk + 5];
            const double a6 = a_row[kk + 6], a7 = a_row[kk + 7];
            const double* b0 = B + kk * n;
            const double* b1 = b0 + n;
            const double* b2 = b1 + n;
            const double* b3 = b2 + n;
            const double* b4 = b3 + n;
            const double* b5 = b4 + n;
            const double* b6 = b5 + n;
            const double* b7 = b6 + n;
            for (std::size_t j = 0; j < n; ++j) {
                c_row[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j] +
                            a4 * b4[j] + a5 * b5[j] + a6 * b6[j] + a7 * b7[j];
            }
        }
        for (; kk < k; ++kk) {
            const double a = a_row[kk];
            const double* b_row = B + kk * n;
            for (std::size_t j = 0; j < n; ++j) c_row[j] += a * b_row[j];
        }
    }
}

// dA[m,k] += G[m,n] * B^T, i.e. dA[i,kk] = sum_j G[i,j] B[kk,j]
void mm_abt_acc(const double* G, const double* B, double* dA,
                std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* g_row = G + i * n;
        double* da_row = dA + i * k;
        std::size_t kk = 0;
        for (; kk + 8 <= k; kk += 8) {
            const double* b0 = B + kk * n;
            const double* b1 = b0 + n;
            const double* b2 = b1 + n;
            const double* b3 = b2 + n;
            const double* b4 = b3 + n;
            const double* b5 = b4 + n;
            const double* b6 = b5 + n;
            const double* b7 = b6 + n;
            double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
            double acc4 = 0.0, acc5 = 0.0, acc6 = 0.0, acc7 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double g = g_row[j];
                acc0 += g * b0[j];
                acc1 += g * b1[j];
                acc2 += g * b2[j];
                acc3 += g * b3[j];
                acc4 += g * b4[j];
                acc5 += g * b5[j];
                acc6 += g * b6[j];
                acc7 += g * b7[j];
            }
            da_row[kk] += acc0;
            da_row[kk + 1] += acc1;
            da_row[kk + 2] += acc2;
            da_row[kk + 3] += acc3;
            da_row[kk + 4] += acc4;
            da_row[kk + 5] += acc5;
            da_row[kk + 6] += acc6;
            da_row[kk + 7] += acc7;
        }
        for (; kk < k; ++kk) {
            const double* b_row = B + kk * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += g_row[j] * b_row[j];
            da_row[kk] += acc;
        }
    }
}

// dB[k,n] += A^T * G, i.e. dB[kk,j] = sum_i A[i,kk] G[i,j]
void mm_atb_acc(const double* A, const double* G, double* dB,
                std::size_t m, std::size_t k, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= m; i += 8) {
        const double* a0 = A + i * k;
        const double* a1 = a0 + k;
        const double* a2 = a1 + k;
        const double* a3 = a2 + k;
        const double* a4 = a3 + k;
        const double* a5 = a4 + k;
        const double* a6 = a5 + k;
        const double* a7 = a6 + k;
        const double* g0 = G + i * n;
        const double* g1 = g0 + n;
        const double* g2 = g1 + n;
        const double* g3 = g2 + n;
        const double* g4 = g3 + n;
        const double* g5 = g4 + n;
        const double* g6 = g5 + n;
        const double* g7 = g6 + n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double b0 = a0[kk], b1 = a1[kk], b2 = a2[kk], b3 = a3[kk];
            const double b4 = a4[kk], b5 = a5[kk], b6 = a6[kk], b7 = a7[kk];
            double* db_row = dB + kk * n;
            for (std::size_t j = 0; j < n; ++j) {
                db_row[j] += b0 * g0[j] + b1 * g1[j] + b2 * g2[j] + b3 * g3[j] +
                             b4 * g4[j] + b5 * g5[j] + b6 * g6[j] + b7 * g7[j];
            }
        }
    }
    for (; i < m; ++i) {
        const double* a_row = A + i * k;
        const double* g_row = G + i * n;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double a = a_row[kk];
            double* db_row = dB + kk * n;
            for (std::size_t j = 0; j < n; ++j) db_row[j] += a * g_row[j];
        }
    }
}

}  // namespace

Var Tape::push(Tensor value, std::function<void(Tape&, const Tensor&)> backprop) {
    Node node;
    node.value = std::move(value);
    node.backprop = std::move(backprop);
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Tensor value) { return push(std::move(value), nullptr); }

const Tensor& Tape::grad(Var v) const {
    const Node& nd = node(v.id);
    if (!nd.grad_ready) {
        if (zero_grad_.shape != nd.value.shape) {
            const_cast<Tape*>(this)->zero_grad_ = Tensor(nd.value.shape);
        }
        return zero_grad_;
    }
    return nd.grad;
}

void Tape::accumulate(int id, const Tensor& g) {
    Node& nd = node(id);
    if (!nd.grad_ready) {
        nd.grad = g;
        nd.grad_ready = true;
        return;
    }
    for (std::size_t i = 0; i < g.data.size(); ++i) nd.grad.data[i] += g.data[i];
}

void Tape::accumulate_at(int id, std::size_t offset, const double* g, std::size_t n) {
    Node& nd = node(id);
    if (!nd.grad_ready) {
        nd.grad = Tensor(nd.value.shape);
        nd.grad_ready = true;
    }
    for (std::size_t i = 0; i < n; ++i) nd.grad.data[offset + i] += g[i];
}

void Tape::backward(Var loss) {
    if (!loss.valid()) throw std::invalid_argument("backward: invalid var");
    if (node(loss.id).value.numel() != 1) {
        throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                    node(loss.id).value.shape_str());
    }
    for (Node& nd : nodes_) {
        nd.grad_ready = false;
        nd.grad = Tensor();
    }
    Node& top = node(loss.id);
    top.grad = Tensor(top.value.shape);
    top.grad.data[0] = 1.0;
    top.grad_ready = true;
    for (int id = loss.id; id >= 0; --id) {
        Node& nd = node(id);
        if (nd.grad_ready && nd.backprop) nd.backprop(*this, nd.grad);
    }
}

void Tape::check_rank2(Var v, const char* op) const {
    if (node(v.id).value.rank() != 2) {
        throw std::invalid_argument(std::string(op) + ": rank-2 tensor required, got " +
                                    node(v.id).value.shape_str());
    }
}

void Tape::check_same_shape(Var a, Var b, const char* op) const {
    if (!node(a.id).value.same_shape(node(b.id).value)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    node(a.id).value.shape_str() + " vs " +
                                    node(b.id).value.shape_str());
    }
}

Var Tape::matmul(Var a, Var b) {
    check_rank2(a, "matmul");
    check_rank2(b, "matmul");
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (av.cols() != bv.rows()) {
        throw std::invalid_argument("matmul: inner dimensions disagree " + av.shape_str() +
                                    " vs " + bv.shape_str());
    }
    const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    Tensor out({m, n});
    mm_acc(av.data.data(), bv.data.data(), out.data.data(), m, k, n);
    return push(std::move(out), [a, b, m, k, n](Tape& t, const Tensor& g) {
        const Tensor& av2 = t.value(a);
        const Tensor& bv2 = t.value(b);
        Tensor da({m, k});
        Tensor db({k, n});
        mm_abt_acc(g.data.data(), bv2.data.data(), da.data.data(), m, k, n);
        mm_atb_acc(av2.data.data(), g.data.data(), db.data.data(), m, k, n);
        t.accumulate(a.id, da);
        t.accumulate(b.id, db);
    });
}

Var Tape::add(Var a, Var b) {
    check_same_shape(a, b, "add");
    Tensor out = value(a);
    const Tensor& bv = value(b);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += bv.data[i];
    return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a.id, g);
        t.accumulate(b.id, g);
    });
}

Var Tape::add_rowvec(Var a, Var bias) {
    check_rank2(a, "add_rowvec");
    const Tensor& av = value(a);
    const Tensor& bv = value(bias);
    if (bv.rank() != 1 || bv.numel() != av.cols()) {
        throw std::invalid_argument("add_rowvec: bias shape mismatch");
    }
    Tensor out = av;
    const std::size_t m = av.rows(), n = av.cols();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) out.data[i * n + j] += bv.data[j];
    }
    return push(std::move(out), [a, bias, m, n](Tape& t, const Tensor& g) {
        t.accumulate(a.id, g);
        Tensor db({n});
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) db.data[j] += g.data[i * n + j];
        }
        t.accumulate(bias.id, db);
    });
}

Var Tape::sub(Var a, Var b) {
    check_same_shape(a, b, "sub");
    Tensor out = value(a);
    const Tensor& bv = value(b);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= bv.data[i];
    return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
        t.accumulate(a.id, g);
        Tensor neg = g;
        for (double& v : neg.data) v = -v;
        t.accumulate(b.id, neg);
    });
}

Var Tape::mul(Var a, Var b) {
    check_same_shape(a, b, "mul");
    Tensor out = value(a);
    const Tensor& bv = value(b);
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= bv.data[i];
    return push(std::move(out), [a, b](Tape& t, const Tensor& g) {
        const Tensor& av2 = t.value(a);
        const Tensor& bv2 = t.value(b);
        Tensor da = g, db = g;
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            da.data[i] *= bv2.data[i];
            db.data[i] *= av2.data[i];
        }
        t.accumulate(a.id, da);
        t.accumulate(b.id, db);
    });
}

Var Tape::scale(Var a, double c) {
    Tensor out = value(a);
    for (double& v : out.data) v *= c;
    return push(std::move(out), [a, c](Tape& t, const Tensor& g) {
        Tensor da = g;
        for (double& v : da.data) v *= c;
        t.accumulate(a.id, da);
    });
}

Var Tape::add_const(Var a, double c) {
    Tensor out = value(a);
    for (double& v : out.data) v += c;
    return push(std::move(out), [a](Tape& t, const Tensor& g) { t.accumulate(a.id, g); });
}

Var Tape::elu(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v = v > 0.0 ? v : std::expm1(v);
    return push(std::move(out), [a](Tape& t, const Tensor& g) {
        const Tensor& x = t.value(a);
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) {
            if (x.data[i] <= 0.0) da.data[i] *= std::exp(x.data[i]);
        }
        t.accumulate(a.id, da);
    });
}

Var Tape::tanh(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::tanh(v);
    Var r = push(out, nullptr);
    node(r.id).backprop = [a, r](Tape& t, const Tensor& g) {
        const Tensor& y = t.value(r);
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] *= 1.0 - y.data[i] * y.data[i];
        t.accumulate(a.id, da);
    };
    return r;
}

Var Tape::sigmoid(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
    Var r = push(out, nullptr);
    node(r.id).backprop = [a, r](Tape& t, const Tensor& g) {
        const Tensor& y = t.value(r);
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] *= y.data[i] * (1.0 - y.data[i]);
        t.accumulate(a.id, da);
    };
    return r;
}

Var Tape::exp(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::exp(v);
    Var r = push(out, nullptr);
    node(r.id).backprop = [a, r](Tape& t, const Tensor& g) {
        const Tensor& y = t.value(r);
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] *= y.data[i];
        t.accumulate(a.id, da);
    };
    return r;
}

Var Tape::square(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v *= v;
    return push(std::move(out), [a](Tape& t, const Tensor& g) {
        const Tensor& x = t.value(a);
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] *= 2.0 * x.data[i];
        t.accumulate(a.id, da);
    });
}

Var Tape::sqrt(Var a) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::sqrt(v);
    Var r = push(out, nullptr);
    node(r.id).backprop = [a, r](Tape& t, const Tensor& g) {
        const Tensor& y = t.value(r);
        Tensor da = g;
        // subgradient 0 at the origin keeps masked-out branches finite
        for (std::size_t i = 0; i < da.data.size(); ++i) {
            da.data[i] = y.data[i] > 0.0 ? da.data[i] / (2.0 * y.data[i]) : 0.0;
        }
        t.accumulate(a.id, da);
    };
    return r;
}

Var Tape::max_const(Var a, double c) {
    Tensor out = value(a);
    for (double& v : out.data) v = std::max(v, c);
    return push(std::move(out), [a, c](Tape& t, const Tensor& g) {
        const Tensor& x = t.value(a);
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) {
            if (x.data[i] <= c) da.data[i] = 0.0;
        }
        t.accumulate(a.id, da);
    });
}

Var Tape::gate_above(Var a, double c) {
    Tensor out = value(a);
    for (double& v : out.data) v = v > c ? v : 0.0;
    return push(std::move(out), [a, c](Tape& t, const Tensor& g) {
        const Tensor& x = t.value(a);
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) {
            if (x.data[i] <= c) da.data[i] = 0.0;
        }
        t.accumulate(a.id, da);
    });
}

Var Tape::sum(Var a) {
    double s = 0.0;
    for (double v : value(a).data) s += v;
    return push(Tensor::scalar(s), [a](Tape& t, const Tensor& g) {
        Tensor da(t.value(a).shape);
        for (double& v : da.data) v = g.data[0];
        t.accumulate(a.id, da);
    });
}

Var Tape::mean(Var a) {
    const Tensor& av = value(a);
    double s = 0.0;
    for (double v : av.data) s += v;
    const double inv = 1.0 / static_cast<double>(av.numel());
    return push(Tensor::scalar(s * inv), [a, inv](Tape& t, const Tensor& g) {
        Tensor da(t.value(a).shape);
        for (double& v : da.data) v = g.data[0] * inv;
        t.accumulate(a.id, da);
    });
}

Var Tape::norm_sq(Var a) {
    double s = 0.0;
    for (double v : value(a).data) s += v * v;
    return push(Tensor::scalar(s), [a](Tape& t, const Tensor& g) {
        const Tensor& x = t.value(a);
        Tensor da(x.shape);
        for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] = 2.0 * x.data[i] * g.data[0];
        t.accumulate(a.id, da);
    });
}

Var Tape::dot(Var a, Var b) {
    check_same_shape(a, b, "dot");
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    double s = 0.0;
    for (std::size_t i = 0; i < av.data.size(); ++i) s += av.data[i] * bv.data[i];
    return push(Tensor::scalar(s), [a, b](Tape& t, const Tensor& g) {
        const Tensor& av2 = t.value(a);
        const Tensor& bv2 = t.value(b);
        Tensor da(av2.shape), db(bv2.shape);
        for (std::size_t i = 0; i < da.data.size(); ++i) {
            da.data[i] = bv2.data[i] * g.data[0];
            db.data[i] = av2.data[i] * g.data[0];
        }
        t.accumulate(a.id, da);
        t.accumulate(b.id, db);
    });
}

Var Tape::cosine(Var a, Var b) {
    check_same_shape(a, b, "cosine");
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < av.data.size(); ++i) {
        ab += av.data[i] * bv.data[i];
        aa += av.data[i] * av.data[i];
        bb += bv.data[i] * bv.data[i];
    }
    const double na = std::sqrt(aa), nb = std::sqrt(bb);
    const double denom = std::max(na * nb, 1e-300);
    const double c = ab / denom;
    return push(Tensor::scalar(c), [a, b, c, na, nb, denom](Tape& t, const Tensor& g) {
        if (na == 0.0 || nb == 0.0) return;  // undefined direction, no gradient
        const Tensor& av2 = t.value(a);
        const Tensor& bv2 = t.value(b);
        Tensor da(av2.shape), db(bv2.shape);
        for (std::size_t i = 0; i < da.data.size(); ++i) {
            da.data[i] = g.data[0] * (bv2.data[i] / denom - c * av2.data[i] / (na * na));
            db.data[i] = g.data[0] * (av2.data[i] / denom - c * bv2.data[i] / (nb * nb));
        }
        t.accumulate(a.id, da);
        t.accumulate(b.id, db);
    });
}

Var Tape::rowwise_norm_sq(Var a) {
    check_rank2(a, "rowwise_norm_sq");
    const Tensor& av = value(a);
    const std::size_t m = av.rows(), n = av.cols();
    Tensor out({m});
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += av.at(i, j) * av.at(i, j);
        out.data[i] = s;
    }
    return push(std::move(out), [a, m, n](Tape& t, const Tensor& g) {
        const Tensor& x = t.value(a);
        Tensor da({m, n});
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) da.at(i, j) = 2.0 * x.at(i, j) * g.data[i];
        }
        t.accumulate(a.id, da);
    });
}

Var Tape::rowwise_dot(Var a, Var b) {
    check_rank2(a, "rowwise_dot");
    check_same_shape(a, b, "rowwise_dot");
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    const std::size_t m = av.rows(), n = av.cols();
    Tensor out({m});
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += av.at(i, j) * bv.at(i, j);
        out.data[i] = s;
    }
    return push(std::move(out), [a, b, m, n](Tape& t, const Tensor& g) {
        const Tensor& av2 = t.value(a);
        const Tensor& bv2 = t.value(b);
        Tensor da({m, n}), db({m, n});
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                da.at(i, j) = bv2.at(i, j) * g.data[i];
                db.at(i, j) = av2.at(i, j) * g.data[i];
            }
        }
        t.accumulate(a.id, da);
        t.accumulate(b.id, db);
    });
}

Var Tape::rowwise_cosine(Var a, Var b) {
    check_rank2(a, "rowwise_cosine");
    check_same_shape(a, b, "rowwise_cosine");
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    const std::size_t m = av.rows(), n = av.cols();
    Tensor out({m});
    std::vector<double> nas(m), nbs(m);
    for (std::size_t i = 0; i < m; ++i) {
        double ab = 0.0, aa = 0.0, bb = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            ab += av.at(i, j) * bv.at(i, j);
            aa += av.at(i, j) * av.at(i, j);
            bb += bv.at(i, j) * bv.at(i, j);
        }
        nas[i] = std::sqrt(aa);
        nbs[i] = std::sqrt(bb);
        out.data[i] = ab / std::max(nas[i] * nbs[i], 1e-300);
    }
    Var r = push(out, nullptr);
    node(r.id).backprop = [a, b, r, m, n, nas, nbs](Tape& t, const Tensor& g) {
        const Tensor& av2 = t.value(a);
        const Tensor& bv2 = t.value(b);
        const Tensor& c = t.value(r);
        Tensor da({m, n}), db({m, n});
        for (std::size_t i = 0; i < m; ++i) {
            if (nas[i] == 0.0 || nbs[i] == 0.0) continue;
            const double denom = nas[i] * nbs[i];
            for (std::size_t j = 0; j < n; ++j) {
                da.at(i, j) = g.data[i] * (bv2.at(i, j) / denom -
                                           c.data[i] * av2.at(i, j) / (nas[i] * nas[i]));
                db.at(i, j) = g.data[i] * (av2.at(i, j) / denom -
                                           c.data[i] * bv2.at(i, j) / (nbs[i] * nbs[i]));
            }
        }
        t.accumulate(a.id, da);
        t.accumulate(b.id, db);
    };
    return r;
}

Var Tape::rowwise_l2_normalize(Var a) {
    check_rank2(a, "rowwise_l2_normalize");
    const Tensor& av = value(a);
    const std::size_t m = av.rows(), n = av.cols();
    Tensor out({m, n});
    std::vector<double> norms(m);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += av.at(i, j) * av.at(i, j);
        norms[i] = std::sqrt(s);
        const double inv = norms[i] > 0.0 ? 1.0 / norms[i] : 0.0;
        for (std::size_t j = 0; j < n; ++j) out.at(i, j) = av.at(i, j) * inv;
    }
    Var r = push(out, nullptr);
    node(r.id).backprop = [a, r, m, n, norms](Tape& t, const Tensor& g) {
        const Tensor& y = t.value(r);
        Tensor da({m, n});
        for (std::size_t i = 0; i < m; ++i) {
            if (norms[i] == 0.0) continue;
            double gy = 0.0;
            for (std::size_t j = 0; j < n; ++j) gy += g.at(i, j) * y.at(i, j);
            for (std::size_t j = 0; j < n; ++j) {
                da.at(i, j) = (g.at(i, j) - gy * y.at(i, j)) / norms[i];
            }
        }
        t.accumulate(a.id, da);
    };
    return r;
}

Var Tape::rows(Var a, std::size_t r0, std::size_t r1) {
    check_rank2(a, "rows");
    const Tensor& av = value(a);
    if (r0 > r1 || r1 > av.rows()) throw std::invalid_argument("rows: bad range");
    const std::size_t n = av.cols();
    Tensor out({r1 - r0, n});
    std::memcpy(out.data.data(), av.data.data() + r0 * n, (r1 - r0) * n * sizeof(double));
    return push(std::move(out), [a, r0, n](Tape& t, const Tensor& g) {
        t.accumulate_at(a.id, r0 * n, g.data.data(), g.data.size());
    });
}

Var Tape::cols(Var a, std::size_t c0, std::size_t c1) {
    check_rank2(a, "cols");
    const Tensor& av = value(a);
    if (c0 > c1 || c1 > av.cols()) throw std::invalid_argument("cols: bad range");
    const std::size_t m = av.rows(), n = av.cols(), w = c1 - c0;
    Tensor out({m, w});
    for (std::size_t i = 0; i < m; ++i) {
        std::memcpy(out.data.data() + i * w, av.data.data() + i * n + c0, w * sizeof(double));
    }
    return push(std::move(out), [a, c0, m, n, w](Tape& t, const Tensor& g) {
        Tensor da({m, n});
        for (std::size_t i = 0; i < m; ++i) {
            std::memcpy(da.data.data() + i * n + c0, g.data.data() + i * w, w * sizeof(double));
        }
        t.accumulate(a.id, da);
    });
}

Var Tape::concat_cols(Var a, Var b) {
    check_rank2(a, "concat_cols");
    check_rank2(b, "concat_cols");
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (av.rows() != bv.rows()) throw std::invalid_argument("concat_cols: row mismatch");
    const std::size_t m = av.rows(), na = av.cols(), nb = bv.cols();
    Tensor out({m, na + nb});
    for (std::size_t i = 0; i < m; ++i) {
        std::memcpy(out.data.data() + i * (na + nb), av.data.data() + i * na, na * sizeof(double));
        std::memcpy(out.data.data() + i * (na + nb) + na, bv.data.data() + i * nb,
                    nb * sizeof(double));
    }
    return push(std::move(out), [a, b, m, na, nb](Tape& t, const Tensor& g) {
        Tensor da({m, na}), db({m, nb});
        for (std::size_t i = 0; i < m; ++i) {
            std::memcpy(da.data.data() + i * na, g.data.data() + i * (na + nb),
                        na * sizeof(double));
            std::memcpy(db.data.data() + i * nb, g.data.data() + i * (na + nb) + na,
                        nb * sizeof(double));
        }
        t.accumulate(a.id, da);
        t.accumulate(b.id, db);
    });
}

Var Tape::gather_rows_block(Var a, std::vector<int> block, std::size_t block_size) {
    check_rank2(a, "gather_rows_block");
    const Tensor& av = value(a);
    const std::size_t m = av.rows(), n = av.cols();
    if (block.size() != m) throw std::invalid_argument("gather_rows_block: index count mismatch");
    Tensor out({m, block_size});
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t off = static_cast<std::size_t>(block[i]) * block_size;
        if (off + block_size > n) throw std::invalid_argument("gather_rows_block: block out of range");
        std::memcpy(out.data.data() + i * block_size, av.data.data() + i * n + off,
                    block_size * sizeof(double));
    }
    return push(std::move(out),
                [a, blocks = std::move(block), block_size, m, n](Tape& t, const Tensor& g) {
                    Tensor da({m, n});
                    for (std::size_t i = 0; i < m; ++i) {
                        const std::size_t off = static_cast<std::size_t>(blocks[i]) * block_size;
                        std::memcpy(da.data.data() + i * n + off, g.data.data() + i * block_size,
                                    block_size * sizeof(double));
                    }
                    t.accumulate(a.id, da);
                });
}

Var Tape::softmax_cross_entropy_rows(Var logits, Tensor targets) {
    check_rank2(logits, "softmax_cross_entropy_rows");
    const Tensor& lv = value(logits);
    if (!lv.same_shape(targets)) {
        throw std::invalid_argument("softmax_cross_entropy_rows: target shape mismatch");
    }
    const std::size_t m = lv.rows(), n = lv.cols();
    Tensor out({m});
    Tensor probs({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        double mx = lv.at(i, 0);
        for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, lv.at(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            probs.at(i, j) = std::exp(lv.at(i, j) - mx);
            z += probs.at(i, j);
        }
        double xent = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            probs.at(i, j) /= z;
            if (targets.at(i, j) != 0.0) {
                xent -= targets.at(i, j) * std::log(std::max(probs.at(i, j), 1e-300));
            }
        }
        out.data[i] = xent;
    }
    return push(std::move(out),
                [logits, probs = std::move(probs), tg = std::move(targets), m, n](
                    Tape& t, const Tensor& g) {
                    Tensor da({m, n});
                    for (std::size_t i = 0; i < m; ++i) {
                        for (std::size_t j = 0; j < n; ++j) {
                            da.at(i, j) = g.data[i] * (probs.at(i, j) - tg.at(i, j));
                        }
                    }
                    t.accumulate(logits.id, da);
                });
}

LeafMap register_params(Tape& tape, const ParamSet& params) {
    LeafMap leaves;
    for (const auto& [name, tensor] : params) leaves[name] = tape.leaf(tensor);
    return leaves;
}

GradMap collect_grads(const Tape& tape, const LeafMap& leaves) {
    GradMap grads;
    for (const auto& [name, var] : leaves) grads[name] = tape.grad(var);
    return grads;
}

}  // namespace riskball::nn
