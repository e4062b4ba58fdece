#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "riskball/tensor.hpp"

namespace riskball::nn {

struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Define-by-run reverse-mode tape over dense float64 tensors. A fresh tape
// is built for every batch; backward() walks the recorded ops once in
// reverse and accumulates gradients into every reachable node.
class Tape {
public:
    Var leaf(Tensor value);

    const Tensor& value(Var v) const { return node(v.id).value; }
    // Gradient of the last backward() target w.r.t. v. Zero tensor if v was
    // not reached.
    const Tensor& grad(Var v) const;

    void backward(Var loss);

    std::size_t size() const { return nodes_.size(); }

    // --- elementwise and matrix primitives -------------------------------
    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var add_rowvec(Var a, Var bias);  // [m,n] + [n], row broadcast
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double c);
    Var add_const(Var a, double c);
    Var elu(Var a);  // alpha = 1
    Var tanh(Var a);
    Var sigmoid(Var a);
    Var exp(Var a);
    Var square(Var a);
    Var sqrt(Var a);
    Var max_const(Var a, double c);    // max(x, c)
    Var gate_above(Var a, double c);   // x * 1{x > c}

    // --- reductions -------------------------------------------------------
    Var sum(Var a);
    Var mean(Var a);
    Var norm_sq(Var a);  // sum of squares over all entries
    Var dot(Var a, Var b);
    Var cosine(Var a, Var b);

    // --- row-level ops over [m,n] matrices ---------------------------------
    Var rowwise_norm_sq(Var a);            // -> [m]
    Var rowwise_dot(Var a, Var b);         // -> [m]
    Var rowwise_cosine(Var a, Var b);      // -> [m]
    Var rowwise_l2_normalize(Var a);       // -> [m,n]

    // --- structural ops ----------------------------------------------------
    Var rows(Var a, std::size_t r0, std::size_t r1);  // [r0, r1)
    Var cols(Var a, std::size_t c0, std::size_t c1);  // [c0, c1)
    Var concat_cols(Var a, Var b);
    // out[i,:] = a[i, block[i]*block_size : (block[i]+1)*block_size]
    Var gather_rows_block(Var a, std::vector<int> block, std::size_t block_size);
    // per-row softmax over logits followed by cross-entropy against fixed
    // target distributions; returns [m]
    Var softmax_cross_entropy_rows(Var logits, Tensor targets);

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool grad_ready = false;
        std::function<void(Tape&, const Tensor&)> backprop;
    };

    std::vector<Node> nodes_;
    Tensor zero_grad_;  // returned for unreached nodes

    Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
    const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

    Var push(Tensor value, std::function<void(Tape&, const Tensor&)> backprop);
    void accumulate(int id, const Tensor& g);
    void accumulate_at(int id, std::size_t offset, const double* g, std::size_t n);

    void check_rank2(Var v, const char* op) const;
    void check_same_shape(Var a, Var b, const char* op) const;
};

// Named parameter collection. std::map keeps iteration order deterministic.
using ParamSet = std::map<std::string, Tensor>;
using GradMap = std::map<std::string, Tensor>;
using LeafMap = std::map<std::string, Var>;

// Register every parameter as a tape leaf, in name order.
LeafMap register_params(Tape& tape, const ParamSet& params);

// Collect the gradients of registered parameters after backward().
GradMap collect_grads(const Tape& tape, const LeafMap& leaves);

}  // namespace riskball::nn
