#include "riskball/losses.hpp"

#include <cmath>
#include <stdexcept>

#include "riskball/cohort_csv.hpp"

namespace riskball::embed {

using cohort::Outcome;

void LossConfig::validate() const {
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("LossConfig: beta must be in [0,1]");
    if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0 || lambda4 < 0.0) {
        throw std::invalid_argument("LossConfig: lambda weights must be >= 0");
    }
    if (alpha < 0.0) throw std::invalid_argument("LossConfig: alpha must be >= 0");
    if (triplet_margin < 0.0 || cosine_margin < 0.0) {
        throw std::invalid_argument("LossConfig: margins must be >= 0");
    }
    if (near_terminal_t != 12 && near_terminal_t != 24 && near_terminal_t != 48 &&
        near_terminal_t != 72) {
        throw std::invalid_argument("LossConfig: near_terminal_t must be one of 12, 24, 48, 72");
    }
    if (nonsurvivor_weight <= 0.0) {
        throw std::invalid_argument("LossConfig: nonsurvivor_weight must be > 0");
    }
    if (learning_rate <= 0.0) throw std::invalid_argument("LossConfig: learning_rate must be > 0");
    if (epochs < 1) throw std::invalid_argument("LossConfig: epochs must be >= 1");
}

util::KvMap LossConfig::to_kv() const {
    using cohort::format_double;
    util::KvMap kv;
    kv["loss.beta"] = format_double(beta);
    kv["loss.lambda1"] = format_double(lambda1);
    kv["loss.lambda2"] = format_double(lambda2);
    kv["loss.lambda3"] = format_double(lambda3);
    kv["loss.lambda4"] = format_double(lambda4);
    kv["loss.alpha"] = format_double(alpha);
    kv["loss.triplet_margin"] = format_double(triplet_margin);
    kv["loss.cosine_margin"] = format_double(cosine_margin);
    kv["loss.cosine_variant"] =
        cosine_variant == CosineVariant::Standard ? "standard" : "inner_product";
    kv["loss.lambda4_release_target"] =
        lambda4_release_target == Lambda4ReleaseTarget::Anchor ? "anchor" : "positive";
    kv["loss.near_terminal_t"] = std::to_string(near_terminal_t);
    kv["loss.nonsurvivor_weight"] = format_double(nonsurvivor_weight);
    kv["loss.batch_size"] = std::to_string(batch_size);
    kv["loss.learning_rate"] = format_double(learning_rate);
    kv["loss.epochs"] = std::to_string(epochs);
    return kv;
}

LossConfig LossConfig::from_kv(const util::KvMap& kv) {
    LossConfig c;
    c.beta = util::kv_double(kv, "loss.beta");
    c.lambda1 = util::kv_double(kv, "loss.lambda1");
    c.lambda2 = util::kv_double(kv, "loss.lambda2");
    c.lambda3 = util::kv_double(kv, "loss.lambda3");
    c.lambda4 = util::kv_double(kv, "loss.lambda4");
    c.alpha = util::kv_double(kv, "loss.alpha");
    c.triplet_margin = util::kv_double(kv, "loss.triplet_margin");
    c.cosine_margin = util::kv_double(kv, "loss.cosine_margin");
    c.cosine_variant = util::get_or_throw(kv, "loss.cosine_variant") == "standard"
                           ? CosineVariant::Standard
                           : CosineVariant::InnerProduct;
    c.lambda4_release_target = util::get_or_throw(kv, "loss.lambda4_release_target") == "anchor"
                                   ? Lambda4ReleaseTarget::Anchor
                                   : Lambda4ReleaseTarget::Positive;
    c.near_terminal_t = static_cast<std::size_t>(util::kv_int(kv, "loss.near_terminal_t"));
    c.nonsurvivor_weight = util::kv_double(kv, "loss.nonsurvivor_weight");
    c.batch_size = static_cast<std::size_t>(util::kv_int(kv, "loss.batch_size"));
    c.learning_rate = util::kv_double(kv, "loss.learning_rate");
    c.epochs = static_cast<std::size_t>(util::kv_int(kv, "loss.epochs"));
    return c;
}

double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

double loss_terminal(std::span<const double> emb_anchor, Outcome anchor_outcome, double lambda1) {
    const double d = squared_norm(emb_anchor);
    if (anchor_outcome == Outcome::Death) {
        return (d - 1.0) * (d - 1.0);
    }
    return lambda1 * d;
}

namespace {

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return std::sqrt(s);
}

}  // namespace

double triplet_loss(std::span<const double> a, std::span<const double> p,
                    std::span<const double> n, double margin) {
    return std::max(euclidean_distance(a, p) - euclidean_distance(a, n) + margin, 0.0);
}

double cosine_loss(std::span<const double> a, std::span<const double> p, bool same_class,
                   const LossConfig& config) {
    if (config.cosine_variant == CosineVariant::InnerProduct) {
        if (same_class) return 0.0;
        double ip = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) ip += a[i] * p[i];
        return ip;
    }
    const double na = std::sqrt(squared_norm(a));
    const double np = std::sqrt(squared_norm(p));
    if (na == 0.0 || np == 0.0) {
        throw std::domain_error("cosine_loss: cosine undefined for a zero embedding");
    }
    double ip = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ip += a[i] * p[i];
    const double cos = ip / (na * np);
    if (same_class) return 1.0 - cos;
    return std::max(0.0, cos - config.cosine_margin);
}

double loss_contrastive(std::span<const double> a, std::span<const double> p,
                        std::span<const double> n, Outcome anchor_outcome, bool same_class,
                        const LossConfig& config) {
    if (anchor_outcome == Outcome::Release) {
        return triplet_loss(a, p, n, config.triplet_margin);
    }
    return cosine_loss(a, p, same_class, config);
}

double loss_intermediate(std::span<const double> emb_p, std::span<const double> emb_n,
                         std::span<const double> emb_a, Outcome anchor_outcome,
                         const LossConfig& config) {
    const double dp = squared_norm(emb_p);
    const double dn = squared_norm(emb_n);
    const double da = squared_norm(emb_a);
    const bool death = anchor_outcome == Outcome::Death;

    double loss = config.lambda2 * ((dp > 1.0 ? dp : 0.0) + (dn > 1.0 ? dn : 0.0));
    loss += config.lambda3 *
            (death ? std::exp(-config.alpha * dp) : std::exp(-config.alpha * dn));
    if (death) {
        loss += config.lambda4 * dn;
    } else {
        const double target =
            config.lambda4_release_target == Lambda4ReleaseTarget::Anchor ? da : dp;
        loss += config.lambda4 * target;
    }
    return loss;
}

double total_loss_single(std::span<const double> a, std::span<const double> p,
                         std::span<const double> n, Outcome anchor_outcome, bool same_class,
                         const LossConfig& config) {
    return config.beta * loss_terminal(a, anchor_outcome, config.lambda1) +
           (1.0 - config.beta) * loss_contrastive(a, p, n, anchor_outcome, same_class, config) +
           loss_intermediate(p, n, a, anchor_outcome, config);
}

BatchLoss batch_total_loss(nn::Tape& tape, const EmbeddingModel& model,
                           const nn::LeafMap& leaves, const TripletBatch& batch,
                           const LossConfig& config) {
    config.validate();
    const std::size_t b = batch.size();
    if (b == 0) throw std::invalid_argument("batch_total_loss: empty batch");

    nn::Var ea = model.embed(tape, leaves, tape.leaf(batch.anchors));
    nn::Var ep = model.embed(tape, leaves, tape.leaf(batch.positives));
    nn::Var en = model.embed(tape, leaves, tape.leaf(batch.negatives));

    // 0/1 masks; every triplet lands in exactly one contrastive branch.
    nn::Tensor death_mask({b}), release_mask({b}), same_mask({b}), diff_mask({b});
    for (std::size_t i = 0; i < b; ++i) {
        const bool death = batch.anchor_outcome[i] == Outcome::Death;
        death_mask.data[i] = death ? 1.0 : 0.0;
        release_mask.data[i] = death ? 0.0 : 1.0;
        same_mask.data[i] = death && batch.same_organ[i] ? 1.0 : 0.0;
        diff_mask.data[i] = death && !batch.same_organ[i] ? 1.0 : 0.0;
    }
    if (config.cosine_variant == CosineVariant::Standard) {
        // The standard cosine loss has no defined value on a zero embedding.
        auto check_zero = [&](nn::Var e, const char* which) {
            const nn::Tensor& v = tape.value(e);
            for (std::size_t i = 0; i < b; ++i) {
                if (death_mask.data[i] == 0.0) continue;
                bool all_zero = true;
                for (std::size_t j = 0; j < v.cols(); ++j) {
                    if (v.at(i, j) != 0.0) {
                        all_zero = false;
                        break;
                    }
                }
                if (all_zero) {
                    throw std::domain_error(std::string("batch_total_loss: zero ") + which +
                                            " embedding under the standard cosine loss");
                }
            }
        };
        check_zero(ea, "anchor");
        check_zero(ep, "positive");
    }
    nn::Var death = tape.leaf(std::move(death_mask));
    nn::Var release = tape.leaf(std::move(release_mask));
    nn::Var same = tape.leaf(std::move(same_mask));
    nn::Var diff = tape.leaf(std::move(diff_mask));

    nn::Var d_a = tape.rowwise_norm_sq(ea);
    nn::Var d_p = tape.rowwise_norm_sq(ep);
    nn::Var d_n = tape.rowwise_norm_sq(en);

    // terminal: death*(d_a - 1)^2 + lambda1*release*d_a
    nn::Var terminal_rows =
        tape.add(tape.mul(death, tape.square(tape.add_const(d_a, -1.0))),
                 tape.scale(tape.mul(release, d_a), config.lambda1));

    // contrastive, release branch: hinge on embedding distances
    nn::Var dist_ap = tape.sqrt(tape.rowwise_norm_sq(tape.sub(ea, ep)));
    nn::Var dist_an = tape.sqrt(tape.rowwise_norm_sq(tape.sub(ea, en)));
    nn::Var triplet_rows =
        tape.max_const(tape.add_const(tape.sub(dist_ap, dist_an), config.triplet_margin), 0.0);

    // contrastive, death branch
    nn::Var cosine_rows;
    if (config.cosine_variant == CosineVariant::Standard) {
        nn::Var cos_ap = tape.rowwise_cosine(ea, ep);
        nn::Var same_term = tape.mul(same, tape.add_const(tape.scale(cos_ap, -1.0), 1.0));
        nn::Var diff_term =
            tape.mul(diff, tape.max_const(tape.add_const(cos_ap, -config.cosine_margin), 0.0));
        cosine_rows = tape.add(same_term, diff_term);
    } else {
        cosine_rows = tape.mul(diff, tape.rowwise_dot(ea, ep));
    }
    nn::Var contrastive_rows = tape.add(tape.mul(release, triplet_rows), cosine_rows);

    // intermediate
    nn::Var ball_rows = tape.scale(
        tape.add(tape.gate_above(d_p, 1.0), tape.gate_above(d_n, 1.0)), config.lambda2);
    nn::Var boundary_rows = tape.scale(
        tape.add(tape.mul(death, tape.exp(tape.scale(d_p, -config.alpha))),
                 tape.mul(release, tape.exp(tape.scale(d_n, -config.alpha)))),
        config.lambda3);
    nn::Var release_target =
        config.lambda4_release_target == Lambda4ReleaseTarget::Anchor ? d_a : d_p;
    nn::Var origin_rows = tape.scale(
        tape.add(tape.mul(death, d_n), tape.mul(release, release_target)), config.lambda4);
    nn::Var intermediate_rows = tape.add(tape.add(ball_rows, boundary_rows), origin_rows);

    BatchLoss out;
    out.terminal = tape.mean(terminal_rows);
    out.contrastive = tape.mean(contrastive_rows);
    out.intermediate = tape.mean(intermediate_rows);
    nn::Var rows = tape.add(tape.add(tape.scale(terminal_rows, config.beta),
                                     tape.scale(contrastive_rows, 1.0 - config.beta)),
                            intermediate_rows);
    out.total = tape.mean(rows);
    return out;
}

}  // namespace riskball::embed
