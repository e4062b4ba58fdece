#include "riskball/encoders.hpp"

#include <cmath>
#include <stdexcept>

namespace riskball::nn {

namespace {

std::string layer_name(const std::string& prefix, std::size_t layer, const char* part) {
    return prefix + "l" + std::to_string(layer) + "." + part;
}

Var leaf_of(const LeafMap& leaves, const std::string& name) {
    auto it = leaves.find(name);
    if (it == leaves.end()) throw std::logic_error("missing parameter leaf: " + name);
    return it->second;
}

const Tensor& param_of(const ParamSet& params, const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) throw std::logic_error("missing parameter: " + name);
    return it->second;
}

}  // namespace

void MlpSpec::validate() const {
    if (input_dim < 1) throw std::invalid_argument("MlpSpec: input_dim must be >= 1");
    if (num_layers < 1) throw std::invalid_argument("MlpSpec: num_layers must be >= 1");
    if (output_dim < 1) throw std::invalid_argument("MlpSpec: output_dim must be >= 1");
    if (num_layers > 1 && hidden_dim < 1) {
        throw std::invalid_argument("MlpSpec: hidden_dim must be >= 1");
    }
}

void GruSpec::validate() const {
    if (input_dim < 1) throw std::invalid_argument("GruSpec: input_dim must be >= 1");
    if (hidden_dim < 1) throw std::invalid_argument("GruSpec: hidden_dim must be >= 1");
    if (num_layers < 1) throw std::invalid_argument("GruSpec: num_layers must be >= 1");
    if (horizon < 1) throw std::invalid_argument("GruSpec: horizon must be >= 1");
}

void add_mlp_params(const MlpSpec& spec, const std::string& prefix, ParamSet& params,
                    util::Rng& rng, WeightInit init) {
    spec.validate();
    for (std::size_t i = 0; i < spec.num_layers; ++i) {
        const std::size_t in = i == 0 ? spec.input_dim : spec.hidden_dim;
        const std::size_t out = i + 1 == spec.num_layers ? spec.output_dim : spec.hidden_dim;
        params[layer_name(prefix, i, "w")] = weight_init(init, in, out, rng);
        params[layer_name(prefix, i, "b")] = Tensor({out});
    }
}

void add_gru_params(const GruSpec& spec, const std::string& prefix, ParamSet& params,
                    util::Rng& rng, WeightInit init) {
    spec.validate();
    static const char* gates[] = {"wz", "wr", "wn", "uz", "ur", "un", "bz", "br", "bn"};
    for (std::size_t l = 0; l < spec.num_layers; ++l) {
        const std::size_t in = l == 0 ? spec.input_dim : spec.hidden_dim;
        const std::size_t h = spec.hidden_dim;
        for (const char* g : gates) {
            std::string name = layer_name(prefix, l, g);
            if (g[0] == 'w') {
                params[name] = weight_init(init, in, h, rng);
            } else if (g[0] == 'u') {
                params[name] = weight_init(init, h, h, rng);
            } else {
                params[name] = Tensor({h});
            }
        }
    }
}

Var mlp_forward(const MlpSpec& spec, const LeafMap& leaves, const std::string& prefix,
                Tape& tape, Var input) {
    const Tensor& in = tape.value(input);
    if (in.rank() != 2 || in.cols() != spec.input_dim) {
        throw std::invalid_argument("mlp_forward: expected input [batch, " +
                                    std::to_string(spec.input_dim) + "], got " + in.shape_str());
    }
    Var x = input;
    for (std::size_t i = 0; i < spec.num_layers; ++i) {
        x = tape.matmul(x, leaf_of(leaves, layer_name(prefix, i, "w")));
        x = tape.add_rowvec(x, leaf_of(leaves, layer_name(prefix, i, "b")));
        if (i + 1 < spec.num_layers) {
            x = tape.elu(x);
        } else if (spec.output_activation == OutputActivation::Tanh) {
            x = tape.tanh(x);
        }
    }
    return x;
}

Var gru_forward_batch(const GruSpec& spec, const LeafMap& leaves, const std::string& prefix,
                      Tape& tape, Var sequences) {
    const Tensor& in = tape.value(sequences);
    if (in.rank() != 2 || in.cols() != spec.horizon * spec.input_dim) {
        throw std::invalid_argument("gru_forward_batch: expected [batch, horizon*input_dim], got " +
                                    in.shape_str());
    }
    const std::size_t batch = in.rows();
    std::vector<Var> hidden(spec.num_layers);
    for (auto& h : hidden) h = tape.leaf(Tensor({batch, spec.hidden_dim}));

    for (std::size_t t = 0; t < spec.horizon; ++t) {
        Var x = tape.cols(sequences, t * spec.input_dim, (t + 1) * spec.input_dim);
        for (std::size_t l = 0; l < spec.num_layers; ++l) {
            Var h = hidden[l];
            Var z = tape.sigmoid(tape.add_rowvec(
                tape.add(tape.matmul(x, leaf_of(leaves, layer_name(prefix, l, "wz"))),
                         tape.matmul(h, leaf_of(leaves, layer_name(prefix, l, "uz")))),
                leaf_of(leaves, layer_name(prefix, l, "bz"))));
            Var r = tape.sigmoid(tape.add_rowvec(
                tape.add(tape.matmul(x, leaf_of(leaves, layer_name(prefix, l, "wr"))),
                         tape.matmul(h, leaf_of(leaves, layer_name(prefix, l, "ur")))),
                leaf_of(leaves, layer_name(prefix, l, "br"))));
            Var cand = tape.tanh(tape.add_rowvec(
                tape.add(tape.matmul(x, leaf_of(leaves, layer_name(prefix, l, "wn"))),
                         tape.matmul(tape.mul(r, h), leaf_of(leaves, layer_name(prefix, l, "un")))),
                leaf_of(leaves, layer_name(prefix, l, "bn"))));
            // h' = (1 - z) * cand + z * h
            Var one_minus_z = tape.add_const(tape.scale(z, -1.0), 1.0);
            hidden[l] = tape.add(tape.mul(one_minus_z, cand), tape.mul(z, h));
            x = hidden[l];
        }
    }
    return hidden[spec.num_layers - 1];
}

Tensor gru_cell(const ParamSet& params, const std::string& layer_prefix, const Tensor& x,
                const Tensor& h) {
    const Tensor& wz = param_of(params, layer_prefix + "wz");
    const Tensor& wr = param_of(params, layer_prefix + "wr");
    const Tensor& wn = param_of(params, layer_prefix + "wn");
    const Tensor& uz = param_of(params, layer_prefix + "uz");
    const Tensor& ur = param_of(params, layer_prefix + "ur");
    const Tensor& un = param_of(params, layer_prefix + "un");
    const Tensor& bz = param_of(params, layer_prefix + "bz");
    const Tensor& br = param_of(params, layer_prefix + "br");
    const Tensor& bn = param_of(params, layer_prefix + "bn");
    const std::size_t n_in = x.numel(), n_h = h.numel();
    if (wz.rows() != n_in || wz.cols() != n_h) {
        throw std::invalid_argument("gru_cell: input dimension mismatch");
    }
    auto affine = [&](const Tensor& w, const Tensor& u, const Tensor& b, const Tensor& hin) {
        Tensor out({n_h});
        for (std::size_t j = 0; j < n_h; ++j) {
            double s = b.data[j];
            for (std::size_t i = 0; i < n_in; ++i) s += x.data[i] * w.at(i, j);
            for (std::size_t i = 0; i < n_h; ++i) s += hin.data[i] * u.at(i, j);
            out.data[j] = s;
        }
        return out;
    };
    Tensor z = affine(wz, uz, bz, h);
    Tensor r = affine(wr, ur, br, h);
    for (double& v : z.data) v = 1.0 / (1.0 + std::exp(-v));
    for (double& v : r.data) v = 1.0 / (1.0 + std::exp(-v));
    Tensor rh({n_h});
    for (std::size_t i = 0; i < n_h; ++i) rh.data[i] = r.data[i] * h.data[i];
    Tensor cand = affine(wn, un, bn, rh);
    for (double& v : cand.data) v = std::tanh(v);
    Tensor out({n_h});
    for (std::size_t i = 0; i < n_h; ++i) {
        out.data[i] = (1.0 - z.data[i]) * cand.data[i] + z.data[i] * h.data[i];
    }
    return out;
}

Tensor gru_forward(const GruSpec& spec, const ParamSet& params, const std::string& prefix,
                   const Tensor& sequence) {
    spec.validate();
    if (sequence.rank() != 2 || sequence.rows() != spec.horizon ||
        sequence.cols() != spec.input_dim) {
        throw std::invalid_argument("gru_forward: expected [horizon, input_dim], got " +
                                    sequence.shape_str());
    }
    std::vector<Tensor> hidden(spec.num_layers, Tensor({spec.hidden_dim}));
    for (std::size_t t = 0; t < spec.horizon; ++t) {
        Tensor x({spec.input_dim});
        for (std::size_t j = 0; j < spec.input_dim; ++j) x.data[j] = sequence.at(t, j);
        for (std::size_t l = 0; l < spec.num_layers; ++l) {
            hidden[l] = gru_cell(params, prefix + "l" + std::to_string(l) + ".", x, hidden[l]);
            x = hidden[l];
        }
    }
    return hidden[spec.num_layers - 1];
}

}  // namespace riskball::nn
